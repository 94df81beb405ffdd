"""Gain synthesis by semidefinite programming and derived switching constants.

Given a homogenized family (A0_i, B_i, Gd, mu), a stabilizing gain family is
obtained from the linear matrix inequalities

    X A0_i' + A0_i X + B_i Y_i + Y_i' B_i' + rho (Gd X + X Gd') <= 0,
    Gd X + X Gd' > 0,   X > 0,

solved either with one common X across all modes (arbitrary switching) or with
an independent X_i per mode (multiple Lyapunov functions, dwell-time
restricted switching).  K_i = Y_i X^{-1}.  The module also computes the
control-effort constant k_tilde, the mode-jump factor gamma, the
norm-equivalence constants c1 <= c2, and the dwell-time bounds derived from
them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import cvxpy as cp
import numpy as np

from .hnorm import DilationContext, canonical_norm, canonical_norm_batch
from .homogenize import HomogenizationResult
from .linalg import min_eig_sym

STRICT_EPS = 1e-6          # shift for > 0 constraints
LMI_SHIFT = 1e-3           # shift for the decay inequality <= -LMI_SHIFT*I
SAFETY = 1.05              # inflation/deflation for sampled constants
DEFAULT_SAMPLES = 20000
AUTO_RHO_REL_WIDTH = 1e-3
AUTO_RHO_BACKOFF = 0.95


class SynthesisError(RuntimeError):
    """Raised on infeasible or failed gain synthesis."""


class SolverFailure(SynthesisError):
    """Solver broke down without proving infeasibility."""


def sdp_feasibility(constraints, variables=None):
    """Solve a semidefinite feasibility problem over cvxpy constraints.

    Returns a dict {variable: value} on success, None if the problem is
    proven infeasible, and raises SolverFailure on solver breakdown (kept
    distinct from infeasibility).
    """
    prob = cp.Problem(cp.Minimize(0), list(constraints))
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError as exc:
        raise SolverFailure(f"SDP solver failed: {exc}") from exc
    if prob.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        if variables is None:
            variables = prob.variables()
        return {v: v.value for v in variables}
    if prob.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return None
    raise SolverFailure(f"SDP solver returned status {prob.status!r}")


@dataclass
class Controller:
    """Synthesized homogeneous feedback: u = K0_i x + V^{1+mu} K_i d(-ln V) x.

    X, P, Y, K, K0, rho, k_tilde are per-mode tuples; for kind="common" the
    X/P entries are one shared matrix repeated.  gamma, c1, c2 are present for
    kind="multiple" (estimated by dilation-normalized sphere sampling).
    """

    kind: str
    mu: float
    Gd: np.ndarray
    X: tuple
    P: tuple
    Y: tuple
    K: tuple
    K0: tuple
    rho: tuple
    k_tilde: tuple
    gamma: float | None = None
    c1: float | None = None
    c2: float | None = None
    residuals: dict = field(default_factory=dict)
    _contexts: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def N(self) -> int:
        return len(self.K)

    @property
    def rho_min(self) -> float:
        return min(self.rho)

    def context(self, sigma: int) -> DilationContext:
        """Dilation context of mode sigma (1-based); common kind shares one P."""
        if not 1 <= sigma <= self.N:
            raise ValueError(f"mode index {sigma} out of range 1..{self.N}")
        key = 0 if self.kind == "common" else sigma
        if key not in self._contexts:
            self._contexts[key] = DilationContext(self.Gd, self.P[sigma - 1])
        return self._contexts[key]

    def reference_context(self) -> DilationContext:
        """Mode 1's context, the convention for the reference canonical norm."""
        return self.context(1)


def _solve_block(A0s, Bs, Gd, rho):
    """One SDP solve: shared X over the given modes, per-mode Y.

    Returns (X, [Y]) or None if infeasible; raises SolverFailure otherwise.
    """
    n = Gd.shape[0]
    m = Bs[0].shape[1]
    X = cp.Variable((n, n), symmetric=True)
    Ys = [cp.Variable((m, n)) for _ in Bs]
    cons = [X >> np.eye(n), Gd @ X + X @ Gd.T >> STRICT_EPS * np.eye(n)]
    for A0, B, Y in zip(A0s, Bs, Ys):
        L = X @ A0.T + A0 @ X + B @ Y + Y.T @ B.T + rho * (Gd @ X + X @ Gd.T)
        cons.append(L << -LMI_SHIFT * np.eye(n))
    prob = cp.Problem(cp.Minimize(cp.trace(X)), cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError as exc:
        raise SolverFailure(f"SDP solver failed: {exc}") from exc
    if prob.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        return np.asarray(X.value), [np.asarray(Y.value) for Y in Ys]
    if prob.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return None
    raise SolverFailure(f"SDP solver returned status {prob.status!r}")


def _auto_rho(A0s, Bs, Gd):
    """Maximize rho by doubling + bisection, then back off 5% and re-solve.

    Returns (rho, X, [Y]) with the recovered certificate verified: near the
    feasibility boundary the solver may return an inaccurate solution whose
    decay inequality is slightly violated, so the backoff repeats until the
    solved matrices certify.
    """

    def feasible(r):
        return _solve_block(A0s, Bs, Gd, r) is not None

    lo = 1e-4
    if not feasible(lo):
        raise SynthesisError("LMI infeasible even at rho = 1e-4")
    hi = 1.0
    while feasible(hi):
        lo = hi
        hi *= 2.0
        if hi > 2**30:
            break
    while (hi - lo) / hi > AUTO_RHO_REL_WIDTH:
        mid = (lo + hi) / 2.0
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    rho = lo
    for _ in range(200):
        rho *= AUTO_RHO_BACKOFF
        out = _solve_block(A0s, Bs, Gd, rho)
        if out is None:
            continue
        X, Ys = out
        if all(min_eig_sym(-(X @ A0.T + A0 @ X + B @ Y + Y.T @ B.T
                             + rho * (Gd @ X + X @ Gd.T))) >= 0
               for A0, B, Y in zip(A0s, Bs, Ys)):
            return rho, X, Ys
    raise SynthesisError("auto-rho backoff failed to recover a certified gain")


def _sqrtm_pd(X):
    w, v = np.linalg.eigh((X + X.T) / 2.0)
    if w[0] <= 0:
        raise SynthesisError(f"matrix is not positive definite (min eig {w[0]:.3e})")
    return v @ np.diag(np.sqrt(w)) @ v.T


def control_effort_bound(X, K) -> float:
    """k_tilde = sqrt(lambda_max(X^{1/2} K' K X^{1/2})) = ||K X^{1/2}||_2."""
    X = np.asarray(X, dtype=float)
    K = np.atleast_2d(np.asarray(K, dtype=float))
    return float(np.linalg.norm(K @ _sqrtm_pd(X), 2))


def _certify(X, Y, A0, B, Gd, rho, tag, residuals):
    L = X @ A0.T + A0 @ X + B @ Y + Y.T @ B.T + rho * (Gd @ X + X @ Gd.T)
    residuals[f"lmi_slack_{tag}"] = min_eig_sym(-L)
    residuals[f"monotone_slack_{tag}"] = min_eig_sym(Gd @ X + X @ Gd.T)
    residuals[f"X_min_eig_{tag}"] = min_eig_sym(X)


def synthesize_common(homog: HomogenizationResult, rho="auto") -> Controller:
    """Single shared X for all modes (arbitrary-switching certificate)."""
    Bs = [md.B for md in homog.plant.modes]
    A0s = list(homog.A0)
    if rho == "auto":
        rho, X, Ys = _auto_rho(A0s, Bs, homog.Gd)
    else:
        rho = float(rho)
        if rho <= 0:
            raise ValueError(f"rho must be positive, got {rho}")
        out = _solve_block(A0s, Bs, homog.Gd, rho)
        if out is None:
            raise SynthesisError(f"common-Lyapunov LMI infeasible at rho={rho}")
        X, Ys = out
    X = (X + X.T) / 2.0
    P = np.linalg.inv(X)
    P = (P + P.T) / 2.0
    Xi = np.linalg.inv(X)
    Ks = [Y @ Xi for Y in Ys]
    residuals = {}
    for i, (A0, B, Y) in enumerate(zip(A0s, Bs, Ys), start=1):
        _certify(X, Y, A0, B, homog.Gd, rho, f"mode{i}", residuals)
    N = homog.N
    return Controller(
        kind="common", mu=homog.mu, Gd=homog.Gd,
        X=(X,) * N, P=(P,) * N, Y=tuple(Ys), K=tuple(Ks), K0=homog.K0,
        rho=(rho,) * N,
        k_tilde=tuple(control_effort_bound(X, K) for K in Ks),
        residuals=residuals)


def synthesize_multiple(homog: HomogenizationResult, rho="auto",
                        samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Controller:
    """Independent X_i per mode, plus gamma/c1/c2 for dwell-time switching."""
    Bs = [md.B for md in homog.plant.modes]
    A0s = list(homog.A0)
    N = homog.N
    if rho == "auto":
        rhos = [None] * N
    elif np.isscalar(rho):
        rhos = [float(rho)] * N
    else:
        rhos = [float(r) for r in rho]
        if len(rhos) != N:
            raise ValueError(f"need {N} per-mode rho values, got {len(rhos)}")
    Xs, Ps, Ys, Ks = [], [], [], []
    residuals = {}
    for i in range(N):
        r = rhos[i]
        if r is None:
            r, X, (Y,) = _auto_rho([A0s[i]], [Bs[i]], homog.Gd)
            rhos[i] = r
        else:
            if r <= 0:
                raise ValueError(f"rho must be positive, got {r} for mode {i + 1}")
            out = _solve_block([A0s[i]], [Bs[i]], homog.Gd, r)
            if out is None:
                raise SynthesisError(f"LMI infeasible for mode {i + 1} at rho={r}")
            X, (Y,) = out
        X = (X + X.T) / 2.0
        P = np.linalg.inv(X)
        Xs.append(X)
        Ps.append((P + P.T) / 2.0)
        Ys.append(Y)
        Ks.append(Y @ np.linalg.inv(X))
        _certify(X, Y, A0s[i], Bs[i], homog.Gd, r, f"mode{i + 1}", residuals)
    ctrl = Controller(
        kind="multiple", mu=homog.mu, Gd=homog.Gd,
        X=tuple(Xs), P=tuple(Ps), Y=tuple(Ys), K=tuple(Ks), K0=homog.K0,
        rho=tuple(rhos),
        k_tilde=tuple(control_effort_bound(X, K) for X, K in zip(Xs, Ks)),
        residuals=residuals)
    ctrl.gamma = estimate_gamma(ctrl, samples=samples, seed=seed)
    ctrl.c1, ctrl.c2 = estimate_c1_c2(ctrl, samples=samples, seed=seed)
    return ctrl


def _sphere_samples(ctx: DilationContext, samples: int, rng) -> np.ndarray:
    """Points with ||x||_P = 1 (hence canonical norm 1): P^{-1/2} z / ||z||_2.

    Drawn row-wise so that a longer draw extends a shorter one sample-for-
    sample under the same seed (keeps sampled maxima monotone in `samples`).
    """
    Z = rng.standard_normal((samples, ctx.n)).T
    return ctx.P_sqrt_inv @ (Z / np.linalg.norm(Z, axis=0))


def estimate_gamma(controller: Controller, samples: int = DEFAULT_SAMPLES,
                   seed: int = 0) -> float:
    """Mode-jump factor: safety-inflated max over mode pairs and sphere samples
    of V_j(x)^e on {V_i(x) = 1}, with e = |mu| (e = 1 when mu = 0); >= 1."""
    if controller.kind != "multiple":
        raise ValueError("gamma is defined for per-mode Lyapunov controllers only")
    e = abs(controller.mu) if controller.mu != 0 else 1.0
    worst = 1.0
    for i in range(1, controller.N + 1):
        rng = np.random.default_rng(seed + i)
        pts = _sphere_samples(controller.context(i), samples, rng)
        for j in range(1, controller.N + 1):
            if j == i:
                continue
            V = canonical_norm_batch(pts, controller.context(j), rel_tol=1e-8)
            worst = max(worst, float(np.max(V)) ** e)
    return max(1.0, SAFETY * worst)


def estimate_c1_c2(controller: Controller, samples: int = DEFAULT_SAMPLES,
                   seed: int = 0) -> tuple[float, float]:
    """Equivalence constants c1 <= V_i <= c2 on the reference unit sphere
    (mode 1's canonical norm), deflated/inflated by 5%."""
    if controller.kind != "multiple":
        raise ValueError("c1/c2 are defined for per-mode Lyapunov controllers only")
    rng = np.random.default_rng(seed)
    pts = _sphere_samples(controller.reference_context(), samples, rng)
    lo, hi = 1.0, 1.0
    for j in range(2, controller.N + 1):
        V = canonical_norm_batch(pts, controller.context(j), rel_tol=1e-8)
        lo = min(lo, float(np.min(V)))
        hi = max(hi, float(np.max(V)))
    return lo / SAFETY, hi * SAFETY


def adt_bound(gamma: float, rho_min: float) -> float:
    """Average dwell time tau_d = ln(gamma)/rho_min."""
    if gamma < 1 or rho_min <= 0:
        raise ValueError("need gamma >= 1 and rho_min > 0")
    return float(np.log(gamma) / rho_min)


def min_dwell_ft(gamma: float, rho_min: float, mu: float, V0: float) -> float:
    """Minimum dwell time guaranteeing finite-time convergence from level V0
    (mu < 0): tau = -(gamma-1)/(mu*gamma*rho_min) * V0^{-mu}."""
    if mu >= 0:
        raise ValueError("finite-time dwell bound requires mu < 0")
    if gamma <= 1 or rho_min <= 0 or V0 < 0:
        raise ValueError("need gamma > 1, rho_min > 0, V0 >= 0")
    return float(-(gamma - 1.0) / (mu * gamma * rho_min) * V0 ** (-mu))


def sddt_tau(controller: Controller, x_at_switch) -> float:
    """State-dependent dwell time scaled by the reference norm ||x||_d^{-mu}."""
    if controller.kind != "multiple":
        raise ValueError("state-dependent dwell time needs a per-mode controller")
    mu = controller.mu
    if mu == 0:
        raise ValueError("state-dependent dwell time is undefined for mu = 0")
    if controller.gamma is None or controller.c1 is None or controller.c2 is None:
        raise ValueError("controller lacks gamma/c1/c2 constants")
    V = canonical_norm(np.asarray(x_at_switch, dtype=float),
                       controller.reference_context(), rel_tol=1e-8)
    if V == 0.0:
        return 0.0
    g, c1, c2 = controller.gamma, controller.c1, controller.c2
    if mu < 0:
        num = c2 ** (-mu) - c1 ** (-mu) / g
        return float(V ** (-mu) * num / (-mu * controller.rho_min))
    num = g * c1 ** (-mu) - c2 ** (-mu)
    return float(V ** (-mu) * max(0.0, num) / (mu * controller.rho_min))


# ---------------------------------------------------------------------------
# serialization

def controller_to_dict(ctrl: Controller) -> dict:
    doc = {
        "kind": ctrl.kind,
        "mu": ctrl.mu,
        "Gd": ctrl.Gd.tolist(),
        "modes": [
            {
                "X": ctrl.X[i].tolist(),
                "P": ctrl.P[i].tolist(),
                "Y": ctrl.Y[i].tolist(),
                "K": ctrl.K[i].tolist(),
                "K0": ctrl.K0[i].tolist(),
                "rho": ctrl.rho[i],
                "k_tilde": ctrl.k_tilde[i],
            }
            for i in range(ctrl.N)
        ],
        "residuals": {k: float(v) for k, v in ctrl.residuals.items()},
    }
    for name in ("gamma", "c1", "c2"):
        val = getattr(ctrl, name)
        if val is not None:
            doc[name] = val
    return doc


def controller_from_dict(doc: dict) -> Controller:
    modes = doc["modes"]
    arr = lambda key: tuple(np.asarray(md[key], dtype=float) for md in modes)
    return Controller(
        kind=doc["kind"], mu=float(doc["mu"]),
        Gd=np.asarray(doc["Gd"], dtype=float),
        X=arr("X"), P=arr("P"), Y=arr("Y"), K=arr("K"), K0=arr("K0"),
        rho=tuple(float(md["rho"]) for md in modes),
        k_tilde=tuple(float(md["k_tilde"]) for md in modes),
        gamma=doc.get("gamma"), c1=doc.get("c1"), c2=doc.get("c2"),
        residuals=dict(doc.get("residuals", {})))


def save_controller(ctrl: Controller, path) -> None:
    Path(path).write_text(json.dumps(controller_to_dict(ctrl), indent=2))


def load_controller(path) -> Controller:
    return controller_from_dict(json.loads(Path(path).read_text()))
