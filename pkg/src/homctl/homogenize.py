"""Feedback homogenization of a switched linear plant.

Solves the coupled linear matrix equations

    A_i G0 - G0 A_i + B_i Y0_i = A_i     for every mode i,
    G0 B_i = 0                           for every mode i,

for a single G0 shared by all modes, by Kronecker vectorization and a
minimum-norm least-squares solve.  From any solution the dilation generator
Gd = I + mu*G0, the pre-feedback K0_i = Y0_i (G0 - I)^{-1} and the
homogenized closed-loop matrices A0_i = A_i + B_i K0_i are formed, and the
defining identities

    A0_i Gd - (Gd + mu I) A0_i = 0,      Gd B_i = B_i

are verified numerically.  Every A0_i is nilpotent whenever the equations
are solvable (the commutator identity [A0, G0] = A0 forces it).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import is_anti_hurwitz, is_nilpotent
from .plant import SwitchedPlant

RESIDUAL_TOL = 1e-8
COND_LIMIT = 1e12


class HomogenizationError(RuntimeError):
    """Raised when the homogenization equations cannot be satisfied."""


@dataclass(frozen=True)
class HomogenizationResult:
    plant: SwitchedPlant
    G0: np.ndarray
    Y0: tuple[np.ndarray, ...]
    mu: float
    Gd: np.ndarray
    K0: tuple[np.ndarray, ...]
    A0: tuple[np.ndarray, ...]
    residuals: dict = field(default_factory=dict)
    cond_G0_minus_I: float = 0.0
    mu_window: tuple[float, float] = (float("-inf"), float("inf"))

    @property
    def N(self) -> int:
        return len(self.A0)


def _assemble(plant: SwitchedPlant):
    """Stack the vectorized equations; unknown ordering [vec(G0); vec(Y0_1); ...]."""
    n, m, N = plant.n, plant.m, plant.N
    nG, nY = n * n, n * m
    In = np.eye(n)
    rows, rhs = [], []
    for s in range(N):
        A, B = plant.modes[s].A, plant.modes[s].B
        M = np.zeros((n * n, nG + N * nY))
        M[:, :nG] = np.kron(In, A) - np.kron(A.T, In)
        M[:, nG + s * nY : nG + (s + 1) * nY] = np.kron(In, B)
        rows.append(M)
        rhs.append(A.flatten(order="F"))
        M2 = np.zeros((n * m, nG + N * nY))
        M2[:, :nG] = np.kron(B.T, In)
        rows.append(M2)
        rhs.append(np.zeros(n * m))
    return np.vstack(rows), np.hstack(rhs)


def mu_admissible_window(G0: np.ndarray) -> tuple[float, float]:
    """Open interval of mu for which I + mu*G0 is anti-Hurwitz."""
    lo, hi = float("-inf"), float("inf")
    for lam in np.real(np.linalg.eigvals(G0)):
        if lam > 0:
            lo = max(lo, -1.0 / lam)
        elif lam < 0:
            hi = min(hi, -1.0 / lam)
    return lo, hi


def solve_homogenization(plant: SwitchedPlant, mu: float,
                         residual_tol: float = RESIDUAL_TOL) -> HomogenizationResult:
    """Solve the homogenization equations for degree mu.

    Raises HomogenizationError if the joint system is infeasible (relative
    residual above `residual_tol`), if G0 - I is numerically singular, or if
    the resulting Gd is not anti-Hurwitz for the requested mu.
    """
    if mu < -1.0:
        raise ValueError(f"mu={mu} below -1 is outside the supported degree range")
    n = plant.n
    M, r = _assemble(plant)
    sol, *_ = np.linalg.lstsq(M, r, rcond=None)
    resid = float(np.linalg.norm(M @ sol - r))
    rel = resid / max(1.0, float(np.linalg.norm(r)))
    if rel > residual_tol:
        raise HomogenizationError(
            "homogenization equations are infeasible for this plant: "
            f"relative residual {rel:.3e} (no common G0 exists)")
    nG, nY = n * n, n * plant.m
    G0 = sol[:nG].reshape(n, n, order="F")
    Y0 = tuple(sol[nG + s * nY : nG + (s + 1) * nY].reshape(plant.m, n, order="F")
               for s in range(plant.N))

    G0mI = G0 - np.eye(n)
    cond = float(np.linalg.cond(G0mI))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise HomogenizationError(f"G0 - I is numerically singular (cond {cond:.3e})")
    inv = np.linalg.inv(G0mI)
    Gd = np.eye(n) + mu * G0
    ok, summ = is_anti_hurwitz(Gd)
    window = mu_admissible_window(G0)
    if not ok:
        raise HomogenizationError(
            f"Gd = I + mu*G0 is not anti-Hurwitz for mu={mu} "
            f"(min eigenvalue real part {summ.min_real:.4g}); "
            f"admissible window mu in ({window[0]:.4g}, {window[1]:.4g})")

    K0 = tuple(Y0[s] @ inv for s in range(plant.N))
    A0 = tuple(plant.modes[s].A + plant.modes[s].B @ K0[s] for s in range(plant.N))

    residuals = {"joint_relative": rel}
    for s in range(plant.N):
        A, B = plant.modes[s].A, plant.modes[s].B
        residuals[f"eq_commutator_mode{s + 1}"] = float(
            np.linalg.norm(A @ G0 - G0 @ A + B @ Y0[s] - A))
        residuals[f"eq_G0B_mode{s + 1}"] = float(np.linalg.norm(G0 @ B))
        residuals[f"identity_A0Gd_mode{s + 1}"] = float(
            np.linalg.norm(A0[s] @ Gd - (Gd + mu * np.eye(n)) @ A0[s]))
        residuals[f"identity_GdB_mode{s + 1}"] = float(np.linalg.norm(Gd @ B - B))
        if not is_nilpotent(A0[s], tol=1e-8):
            raise HomogenizationError(f"A0 for mode {s + 1} failed the nilpotency check")

    return HomogenizationResult(plant=plant, G0=G0, Y0=Y0, mu=mu, Gd=Gd, K0=K0, A0=A0,
                                residuals=residuals, cond_G0_minus_I=cond,
                                mu_window=window)


def check_commutator_degree(C, Gd, mu: float, tol: float = 1e-9) -> tuple[float, bool]:
    """Residual of C Gd - Gd C = mu C and pass/fail against tol*max(1, ||C||_F)."""
    C = np.asarray(C, dtype=float)
    Gd = np.asarray(Gd, dtype=float)
    resid = float(np.linalg.norm(C @ Gd - Gd @ C - mu * C))
    return resid, resid <= tol * max(1.0, float(np.linalg.norm(C)))


def verify_dilation_of_input(Gd, B, tol: float = 1e-9,
                             s_grid=(-1.0, -0.3, 0.7, 1.0)) -> bool:
    """Check d(s) B = e^s B on a small s grid together with Gd B = B."""
    from .linalg import mat_exp

    Gd = np.asarray(Gd, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    scale = max(1.0, float(np.linalg.norm(B)))
    if np.linalg.norm(Gd @ B - B) > tol * scale:
        return False
    for s in s_grid:
        if np.linalg.norm(mat_exp(Gd, s) @ B - np.exp(s) * B) > 10 * tol * scale:
            return False
    return True
