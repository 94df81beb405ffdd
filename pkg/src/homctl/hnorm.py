"""Canonical homogeneous norm, dilation-normalizing projector and gradient.

For an anti-Hurwitz generator Gd with monotone dilation d(s) = exp(s*Gd)
(monotonicity: P Gd + Gd' P > 0 in the P-weighted geometry), the canonical
homogeneous norm of x != 0 is the unique V > 0 with

    || d(-ln V) x ||_P = 1.

The map s -> ||d(-s)x||_P is strictly decreasing, so V is found by bracketing
and bisection on s = ln V.  The norm is degree-1 homogeneous:
||d(s)x||_d = e^s ||x||_d.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .linalg import min_eig_sym

DEFAULT_REL_TOL = 1e-10
_EXP_CLIP = 350.0


def _exp_c(z):
    """Elementwise complex exp with the real part clipped to avoid overflow
    (values beyond e^350 only ever occur at provisional bracket endpoints,
    where only the comparison against 1 matters, not the exact magnitude)."""
    z = np.asarray(z)
    return np.exp(np.clip(z.real, -_EXP_CLIP, _EXP_CLIP) + 1j * z.imag)


class BracketError(RuntimeError):
    """Raised when no bisection bracket exists (non-monotone dilation context)."""


class DilationContext:
    """Pairs a dilation generator Gd with the weighting matrix P of the norm.

    Caches the eigendecomposition of Gd (so d(s)x costs one diagonal scaling
    per evaluation), a symmetric square root of P, and the extreme eigenvalues
    alpha <= beta of the symmetrized P-weighted generator, which bound
    e^{alpha*s} <= ||d(s)x||_P / ||x||_P <= e^{beta*s} for s >= 0 and give the
    initial bisection bracket.
    """

    def __init__(self, Gd, P):
        Gd = np.asarray(Gd, dtype=float)
        P = np.asarray(P, dtype=float)
        n = Gd.shape[0]
        if Gd.shape != (n, n) or P.shape != (n, n):
            raise ValueError(f"Gd and P must be square of equal order, got {Gd.shape}, {P.shape}")
        P = (P + P.T) / 2.0
        pw, pv = np.linalg.eigh(P)
        if pw[0] <= 0:
            raise ValueError(f"P is not positive definite (min eigenvalue {pw[0]:.3e})")
        self.Gd = Gd
        self.P = P
        self.n = n
        self.P_sqrt = pv @ np.diag(np.sqrt(pw)) @ pv.T
        self.P_sqrt_inv = pv @ np.diag(1.0 / np.sqrt(pw)) @ pv.T
        lam, W = np.linalg.eig(Gd)
        self.eigvals = lam
        self.W = W
        self.W_inv = np.linalg.inv(W)
        sym = self.P_sqrt @ Gd @ self.P_sqrt_inv
        ew = np.linalg.eigvalsh((sym + sym.T) / 2.0)
        self.alpha = float(ew[0])
        self.beta = float(ew[-1])
        if self.alpha <= 0:
            raise ValueError(
                "dilation is not monotone in this geometry: "
                f"min eig of the symmetrized weighted generator is {self.alpha:.3e} <= 0")

    def dilation(self, s: float) -> np.ndarray:
        """The dilation matrix d(s) = exp(s*Gd)."""
        return np.real(self.W @ np.diag(np.exp(s * self.eigvals)) @ self.W_inv)

    def apply_dilation(self, s, x) -> np.ndarray:
        """d(s) x without forming the matrix; x may be a vector or n-by-k batch
        with a scalar s, or a vector with an array of s values (result n-by-k)."""
        x = np.asarray(x, dtype=float)
        if np.isscalar(s) or np.ndim(s) == 0:
            z = self.W_inv @ x
            if z.ndim == 1:
                return np.real(self.W @ (_exp_c(float(s) * self.eigvals) * z))
            return np.real(self.W @ (_exp_c(float(s) * self.eigvals)[:, None] * z))
        s = np.asarray(s, dtype=float)
        z = self.W_inv @ x  # vector
        scal = _exp_c(np.multiply.outer(self.eigvals, s))  # n x k
        return np.real(self.W @ (scal * z[:, None]))

    def norm_P(self, x) -> float | np.ndarray:
        """Weighted Euclidean norm ||x||_P = sqrt(x' P x); columnwise on batches."""
        y = self.P_sqrt @ np.asarray(x, dtype=float)
        return np.linalg.norm(y, axis=0) if y.ndim == 2 else float(np.linalg.norm(y))


def canonical_norm(x, ctx: DilationContext, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """The canonical homogeneous norm V: ||d(-ln V) x||_P = 1 within rel_tol."""
    if not 0 < rel_tol <= 1e-2:
        raise ValueError(f"rel_tol must lie in (0, 1e-2], got {rel_tol}")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("state has non-finite entries")
    r = ctx.norm_P(x)
    if r == 0.0:
        return 0.0
    return float(_bisect_batch(x[:, None], np.array([r]), ctx, rel_tol)[0])


def canonical_norm_batch(X, ctx: DilationContext,
                         rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Columnwise canonical norm of an n-by-k batch (vectorized bisection)."""
    X = np.asarray(X, dtype=float)
    r = ctx.norm_P(X)
    out = np.zeros(X.shape[1])
    live = r > 0
    if np.any(live):
        out[live] = _bisect_batch(X[:, live], np.atleast_1d(r)[live], ctx, rel_tol)
    return out


def _bisect_batch(X, r, ctx, rel_tol):
    """Bisection on s = ln V for the columns of X; r = ||columns||_P > 0."""
    logr = np.log(r)
    lo = np.minimum(logr / ctx.alpha, logr / ctx.beta)
    hi = np.maximum(logr / ctx.alpha, logr / ctx.beta)
    lo, hi = lo - 1e-12, hi + 1e-12

    def f(s):
        # ||d(-s_j) x_j||_P per column
        z = ctx.W_inv @ X
        scal = _exp_c(np.multiply.outer(-ctx.eigvals, s))
        y = np.real(ctx.W @ (scal * z))
        return np.linalg.norm(ctx.P_sqrt @ y, axis=0)

    # Expand geometrically if the analytic bracket fails (should not happen
    # for a monotone context; guards against rounding at the endpoints).
    for _ in range(60):
        flo, fhi = f(lo), f(hi)
        bad_lo, bad_hi = flo < 1.0, fhi > 1.0
        if not (np.any(bad_lo) or np.any(bad_hi)):
            break
        width = np.maximum(hi - lo, 1.0)
        lo = np.where(bad_lo, lo - width, lo)
        hi = np.where(bad_hi, hi + width, hi)
    else:
        raise BracketError("no bisection bracket found; dilation context is not monotone")

    it = int(np.ceil(np.log2(max(2.0, float(np.max(hi - lo)) / rel_tol)))) + 1
    for _ in range(it):
        mid = (lo + hi) / 2.0
        above = f(mid) > 1.0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return np.exp((lo + hi) / 2.0)


def projector(x, ctx: DilationContext, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """pi_d(x) = d(-ln ||x||_d) x, a point on the P-unit sphere."""
    x = np.asarray(x, dtype=float)
    V = canonical_norm(x, ctx, rel_tol)
    if V == 0.0:
        raise ValueError("projector is undefined at x = 0")
    return ctx.apply_dilation(-np.log(V), x)


def hnorm_gradient(x, ctx: DilationContext) -> np.ndarray:
    """Row covector gradient of x -> ||x||_d at x != 0.

    grad = ||x||_d * (pi' P d(-ln||x||_d)) / (pi' P Gd pi)  with pi = pi_d(x).
    """
    x = np.asarray(x, dtype=float)
    V = canonical_norm(x, ctx, rel_tol=1e-10)
    if V == 0.0:
        raise ValueError("gradient is undefined at x = 0")
    D = ctx.dilation(-np.log(V))
    pi = D @ x
    den = float(pi @ ctx.P @ ctx.Gd @ pi)
    if den <= 0:
        raise ValueError(f"monotonicity denominator {den:.3e} <= 0 (invariant violation)")
    return V * (pi @ ctx.P @ D) / den
