"""Dense small-matrix kernel: exponentials, spectra, rank and definiteness tests.

Everything operates on plain numpy arrays; matrices are expected to be small
(n <= 20) and well scaled, so standard dense LAPACK routines are used
throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class DimensionError(ValueError):
    """Raised when a matrix argument has incompatible or non-square shape."""


@dataclass(frozen=True)
class SpectrumSummary:
    """Real parts of the eigenvalues of a square matrix."""

    eigenvalue_real_parts: tuple[float, ...]
    min_real: float
    max_real: float


def _as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return M


def mat_exp(M, s: float = 1.0) -> np.ndarray:
    """exp(s*M) via scaling-and-squaring (Pade order 13, scipy.linalg.expm)."""
    M = _as_square(M)
    if s == 0.0:
        return np.eye(M.shape[0])
    return scipy.linalg.expm(s * M)


def spectrum_summary(M) -> SpectrumSummary:
    M = _as_square(M)
    re = np.sort(np.real(np.linalg.eigvals(M)))
    return SpectrumSummary(tuple(float(v) for v in re), float(re[0]), float(re[-1]))


def is_anti_hurwitz(M, margin: float = 0.0) -> tuple[bool, SpectrumSummary]:
    """True iff every eigenvalue has real part strictly above `margin`."""
    summ = spectrum_summary(M)
    return summ.min_real > margin, summ


def is_nilpotent(M, tol: float = 1e-9) -> bool:
    """Dual test: M^n vanishes AND all eigenvalue moduli are negligible.

    Both tests are scale-adjusted by the Frobenius norm of M; they must agree
    for a True verdict, which guards against false positives from
    ill-conditioned similarity transforms.
    """
    M = _as_square(M)
    n = M.shape[0]
    fro = np.linalg.norm(M)
    power_ok = np.linalg.norm(np.linalg.matrix_power(M, n)) <= tol * max(1.0, fro**n)
    scale = max(1.0, fro)
    spectral_ok = np.max(np.abs(np.linalg.eigvals(M))) <= tol ** (1.0 / n) * scale
    return bool(power_ok and spectral_ok)


def kalman_controllable(A, B, rel_threshold: float = 1e-10) -> bool:
    """Rank of [B, AB, ..., A^{n-1}B] equals n, rank via singular values."""
    A = _as_square(A)
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    n = A.shape[0]
    if B.shape[0] != n:
        raise DimensionError(f"B has {B.shape[0]} rows, expected {n}")
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    sv = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    return bool(np.sum(sv > rel_threshold * sv[0]) == n)


def min_eig_sym(M) -> float:
    """Smallest eigenvalue of the symmetric part (M + M^T)/2."""
    M = _as_square(M)
    return float(np.linalg.eigvalsh((M + M.T) / 2.0)[0])
