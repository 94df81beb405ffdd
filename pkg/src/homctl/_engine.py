"""Compiled single-mode integration kernel.

One call integrates the closed loop over one switching segment (constant mode)
with classic fixed-step 4-stage Runge-Kutta, evaluating the canonical
homogeneous norm by bisection at every stage.  The dilation d(s)x is applied
through the cached eigendecomposition Gd = W diag(lam) W^{-1}:
d(s)x = Re(W (e^{s lam} (W^{-1} x))).  Mode switching and grid construction
live in the sim module; this kernel never switches.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DEADZONE = 1e-9
CLAMP = 1e-12


@njit(cache=True)
def _norm_p(Phalf, x):
    y = Phalf @ x
    return np.sqrt(np.sum(y * y))


@njit(cache=True)
def _dil_apply(W, Winv, lam, s, x):
    z = Winv @ x.astype(np.complex128)
    n = lam.shape[0]
    scal = np.empty(n, dtype=np.complex128)
    for i in range(n):
        # clip the real exponent: magnitudes beyond e^350 only occur at
        # provisional bracket endpoints where only the sign test matters
        e = s * lam[i]
        re = min(max(e.real, -350.0), 350.0)
        scal[i] = np.exp(complex(re, e.imag))
    return (W @ (scal * z)).real


@njit(cache=True)
def _cannorm(x, W, Winv, lam, Phalf, alpha, beta, rel_tol):
    r = _norm_p(Phalf, x)
    if r <= 0.0:
        return 0.0
    logr = np.log(r)
    lo = min(logr / alpha, logr / beta) - 1e-12
    hi = max(logr / alpha, logr / beta) + 1e-12
    for _ in range(60):
        flo = _norm_p(Phalf, _dil_apply(W, Winv, lam, -lo, x))
        fhi = _norm_p(Phalf, _dil_apply(W, Winv, lam, -hi, x))
        if flo >= 1.0 and fhi <= 1.0:
            break
        w = max(hi - lo, 1.0)
        if flo < 1.0:
            lo -= w
        if fhi > 1.0:
            hi += w
    it = int(np.ceil(np.log2(max(2.0, (hi - lo) / rel_tol)))) + 1
    for _ in range(it):
        mid = 0.5 * (lo + hi)
        if _norm_p(Phalf, _dil_apply(W, Winv, lam, -mid, x)) > 1.0:
            lo = mid
        else:
            hi = mid
    return np.exp(0.5 * (lo + hi))


@njit(cache=True)
def _control(x, K0, K, mu, W, Winv, lam, Phalf, alpha, beta, rel_tol):
    if _norm_p(Phalf, x) < DEADZONE:
        return K0 @ x
    V = _cannorm(x, W, Winv, lam, Phalf, alpha, beta, rel_tol)
    pi = _dil_apply(W, Winv, lam, -np.log(V), x)
    return K0 @ x + V ** (1.0 + mu) * (K @ pi)


@njit(cache=True)
def _field(t, x, A, B, E, K0, K, mu, W, Winv, lam, Phalf, alpha, beta,
           rel_tol, amps, freqs, phases):
    dx = A @ x + B @ _control(x, K0, K, mu, W, Winv, lam, Phalf, alpha, beta, rel_tol)
    if amps.shape[0] > 0:
        dx = dx + E @ (amps * np.sin(freqs * t + phases))
    return dx


@njit(cache=True)
def integrate_segment(x0, times, A, B, E, K0, K, mu, W, Winv, lam, Phalf,
                      alpha, beta, rel_tol, amps, freqs, phases):
    """RK4 over the sample grid `times`; disturbance evaluated at stage times.

    Returns (states, inputs, vnorm, clamped, n_valid): per-sample records, a
    clamp indicator, and the number of valid samples (shorter than len(times)
    only if the state became non-finite).
    """
    T = times.shape[0]
    n = x0.shape[0]
    m = K0.shape[0]
    states = np.zeros((T, n))
    inputs = np.zeros((T, m))
    vnorm = np.zeros(T)
    clamped = np.zeros(T, dtype=np.bool_)
    x = x0.copy()
    for j in range(T):
        if not np.all(np.isfinite(x)):
            return states, inputs, vnorm, clamped, j
        states[j] = x
        inputs[j] = _control(x, K0, K, mu, W, Winv, lam, Phalf, alpha, beta, rel_tol)
        if _norm_p(Phalf, x) > 0.0:
            vnorm[j] = _cannorm(x, W, Winv, lam, Phalf, alpha, beta, rel_tol)
        else:
            clamped[j] = True
        if j == T - 1:
            break
        t = times[j]
        h = times[j + 1] - t
        k1 = _field(t, x, A, B, E, K0, K, mu, W, Winv, lam, Phalf, alpha, beta,
                    rel_tol, amps, freqs, phases)
        k2 = _field(t + 0.5 * h, x + 0.5 * h * k1, A, B, E, K0, K, mu, W, Winv,
                    lam, Phalf, alpha, beta, rel_tol, amps, freqs, phases)
        k3 = _field(t + 0.5 * h, x + 0.5 * h * k2, A, B, E, K0, K, mu, W, Winv,
                    lam, Phalf, alpha, beta, rel_tol, amps, freqs, phases)
        k4 = _field(t + h, x + h * k3, A, B, E, K0, K, mu, W, Winv, lam, Phalf,
                    alpha, beta, rel_tol, amps, freqs, phases)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.sqrt(np.sum(x * x)) < CLAMP:
            x = np.zeros(n)
    return states, inputs, vnorm, clamped, T
