"""Homogeneous feedback evaluation and disturbance/decay diagnostics.

The feedback law is

    u(x) = K0_i x + V^{1+mu} K_i d(-ln V) x,     V = ||x||_d

with V the canonical norm of the active mode's context.  Near the origin
(||x||_P below a deadzone) only the linear pre-feedback K0_i x is applied:
for mu < 0 the homogeneous term is undefined at x = 0 and finite-time arrival
causes numerical chatter otherwise.
"""

from __future__ import annotations

import numpy as np

from .hnorm import canonical_norm
from .synthesis import Controller

DEADZONE = 1e-9


def control_input(x, sigma: int, controller: Controller,
                  rel_tol: float = 1e-10) -> np.ndarray:
    """Feedback value u(x) for mode sigma (1-based); u(0) = 0 by convention."""
    x = np.asarray(x, dtype=float)
    ctx = controller.context(sigma)
    K0 = controller.K0[sigma - 1]
    K = controller.K[sigma - 1]
    if ctx.norm_P(x) < DEADZONE:
        return K0 @ x
    V = canonical_norm(x, ctx, rel_tol)
    pi = ctx.apply_dilation(-np.log(V), x)
    return K0 @ x + V ** (1.0 + controller.mu) * (K @ pi)


def disturbance_margin(x, t: float, omega, sigma: int, controller: Controller,
                       plant) -> float:
    """Normalized disturbance quotient whose trajectory-wide max is kappa.

    With z = d(-ln V)x: (z' P E omega) / (z' P Gd z) / V^mu.  The certificate
    requires the supremum kappa of this quantity to stay below rho.
    """
    x = np.asarray(x, dtype=float)
    omega = np.asarray(omega, dtype=float)
    ctx = controller.context(sigma)
    V = canonical_norm(x, ctx, rel_tol=1e-10)
    if V == 0.0:
        raise ValueError("disturbance margin is undefined at x = 0")
    s = -np.log(V)
    z = ctx.apply_dilation(s, x)
    den = float(z @ ctx.P @ ctx.Gd @ z)
    if den <= 0:
        raise ValueError(f"monotonicity denominator {den:.3e} <= 0 (invariant violation)")
    num = float(z @ ctx.P @ ctx.apply_dilation(s, plant.E(sigma) @ omega))
    return num / den / V ** controller.mu


def decay_rate_check(trajectory, controller: Controller, eta_expected: float,
                     slack: float = 1e-3, v_floor: float = DEADZONE) -> dict:
    """Check dV/dt <= -eta*V^{1+mu} + slack*max(1, V^{1+mu}) between samples.

    Differentiates the recorded canonical norm within each mode interval,
    skipping switch instants and samples with vnorm below v_floor (persistent
    disturbances make the decay certificate valid only above a stall radius;
    the default floor excludes just the deadzone).  Requires a sample spacing
    of at most 1e-3 s.
    """
    t = trajectory.times
    V = trajectory.vnorm
    modes = trajectory.modes
    dt = np.diff(t)
    if dt.max() > 1e-3 + 1e-12:
        raise ValueError(
            f"trajectory too coarse for decay differentiation (max step {dt.max():.3g} > 1e-3)")
    mu = controller.mu
    same_mode = modes[1:] == modes[:-1]
    floor = max(v_floor, DEADZONE)
    alive = (V[1:] > floor) & (V[:-1] > floor)
    mask = same_mode & alive
    worst = np.inf
    worst_t = None
    violations = 0
    checked = int(np.count_nonzero(mask))
    if checked:
        dV = (V[1:] - V[:-1])[mask] / dt[mask]
        Vm = ((V[1:] + V[:-1]) / 2.0)[mask]
        rate = Vm ** (1.0 + mu)
        margin = (-eta_expected * rate + slack * np.maximum(1.0, rate)) - dV
        worst = float(np.min(margin))
        worst_t = float(t[:-1][mask][int(np.argmin(margin))])
        violations = int(np.count_nonzero(margin < 0))
    return {
        "passed": violations == 0,
        "checked_intervals": checked,
        "violations": violations,
        "worst_margin": worst,
        "worst_time": worst_t,
        "eta_expected": eta_expected,
        "slack": slack,
        "v_floor": floor,
    }
