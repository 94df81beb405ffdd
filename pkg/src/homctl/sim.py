"""Closed-loop simulation under a controller, switching policy and disturbance.

Fixed-step RK4 on x' = A_i x + B_i u(x) + E_i w(t), with the integration grid
split exactly at switch instants; the switching signal is right-continuous, so
the sample at a switch instant already carries the new mode.  States with
Euclidean norm below 1e-12 are clamped to zero (finite-time arrival), and the
canonical norm of the active mode's context is recorded at every sample.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _engine
from .plant import DisturbanceSpec, SwitchedPlant
from .switching import SwitchingPolicy, sddt_next_switch, switch_pairs
from .synthesis import Controller

DEFAULT_H = 1e-4
SIM_REL_TOL = 1e-8


@dataclass
class Trajectory:
    times: np.ndarray          # strictly increasing sample instants
    states: np.ndarray         # T x n
    inputs: np.ndarray         # T x m
    modes: np.ndarray          # T, active (1-based) mode per sample
    vnorm: np.ndarray          # T, canonical norm (0 exactly when clamped)
    events: list = field(default_factory=list)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _segment_grid(a: float, b: float, h: float) -> np.ndarray:
    k = int(np.ceil((b - a) / h - 1e-9))
    times = a + h * np.arange(max(k, 1))
    if b - times[-1] <= 1e-12 * max(1.0, h):
        times = times[:-1]
    return np.append(times, b)


def _mode_args(plant, controller, sigma, disturbance):
    ctx = controller.context(sigma)
    if disturbance is None or disturbance.kind == "none":
        amps = np.zeros(0)
        freqs = np.zeros(0)
        phases = np.zeros(0)
    else:
        amps = np.asarray(disturbance.amplitudes, dtype=float)
        freqs = np.asarray(disturbance.frequencies, dtype=float)
        phases = np.asarray(disturbance.phases, dtype=float)
        if amps.size != plant.p:
            raise ValueError(f"disturbance has {amps.size} channels, plant expects {plant.p}")
    return (plant.A(sigma), plant.B(sigma), plant.E(sigma),
            np.atleast_2d(controller.K0[sigma - 1]),
            np.atleast_2d(controller.K[sigma - 1]),
            controller.mu,
            ctx.W.astype(np.complex128), ctx.W_inv.astype(np.complex128),
            ctx.eigvals.astype(np.complex128), ctx.P_sqrt,
            ctx.alpha, ctx.beta, SIM_REL_TOL, amps, freqs, phases)


def integrate(plant: SwitchedPlant, controller: Controller,
              policy: SwitchingPolicy, x0, t_final: float, h: float = DEFAULT_H,
              disturbance: DisturbanceSpec | None = None) -> Trajectory:
    """Simulate the closed loop on [0, t_final] with step h."""
    if not 0 < h <= 1e-2:
        raise ValueError(f"step size must lie in (0, 1e-2], got {h}")
    if t_final <= 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (plant.n,):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({plant.n},)")

    events = []
    if policy.kind == "state-dependent":
        segments = None  # decided online below
    else:
        pairs = switch_pairs(policy, t_final)
        bounds = [t for t, _ in pairs] + [t_final]
        segments = [(bounds[i], bounds[i + 1], pairs[i][1]) for i in range(len(pairs))
                    if bounds[i + 1] > bounds[i]]

    all_t, all_x, all_u, all_m, all_v = [], [], [], [], []
    x = x0.copy()
    clamp_live = False
    aborted = False

    def run_segment(a, b, sigma, is_last):
        nonlocal x, clamp_live, aborted
        times = _segment_grid(a, b, h)
        args = _mode_args(plant, controller, sigma, disturbance)
        states, inputs, vnorm, clamped, n_valid = _engine.integrate_segment(x, times, *args)
        if n_valid < len(times):
            aborted = True
            events.append({"kind": "blowup", "t": float(times[max(0, n_valid - 1)])})
        keep = n_valid if aborted else (len(times) if is_last else len(times) - 1)
        all_t.append(times[:keep])
        all_x.append(states[:keep])
        all_u.append(inputs[:keep])
        all_m.append(np.full(keep, sigma, dtype=np.int64))
        all_v.append(vnorm[:keep])
        for j in range(keep):
            if clamped[j] and not clamp_live:
                events.append({"kind": "clamp", "t": float(times[j])})
            clamp_live = bool(clamped[j])
        x = states[min(n_valid, len(times)) - 1].copy() if aborted else states[-1].copy()

    if segments is not None:
        for i, (a, b, sigma) in enumerate(segments):
            if i > 0:
                events.append({"kind": "switch", "t": float(a), "mode": int(sigma)})
            run_segment(a, b, sigma, i == len(segments) - 1)
            if aborted:
                break
    else:
        cycle = policy.cycle or tuple(range(1, plant.N + 1))
        idx = 0
        a = 0.0
        while True:
            sigma = cycle[idx % len(cycle)]
            if a > 0:
                events.append({"kind": "switch", "t": float(a), "mode": int(sigma)})
            b = sddt_next_switch(controller, x, a, a + policy.base_gap)
            b = min(max(b, a + h), t_final)
            run_segment(a, b, sigma, b >= t_final - 1e-12)
            if aborted or b >= t_final - 1e-12:
                break
            a = b
            idx += 1

    return Trajectory(times=np.concatenate(all_t), states=np.vstack(all_x),
                      inputs=np.vstack(all_u), modes=np.concatenate(all_m),
                      vnorm=np.concatenate(all_v), events=events)


def settling_time(traj: Trajectory, threshold: float) -> float | None:
    """First time after which vnorm stays <= threshold; None if never."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    above = traj.vnorm > threshold
    if not np.any(above):
        return 0.0
    last = int(np.max(np.nonzero(above)[0]))
    if last == len(traj.times) - 1:
        return None
    return float(traj.times[last + 1])


def _scaled_policy(policy: SwitchingPolicy, factor: float) -> SwitchingPolicy:
    """Time-rescale a time-driven policy: sigma_s(t) = sigma(t / factor)."""
    if policy.kind == "periodic":
        return SwitchingPolicy("periodic", period=policy.period * factor,
                               cycle=policy.cycle)
    if policy.sequence:
        seq = tuple((t * factor, m) for t, m in policy.sequence)
        return SwitchingPolicy("fixed-sequence", sequence=seq)
    raise ValueError(f"cannot time-rescale policy kind {policy.kind!r}")


def trajectory_scaling_check(plant: SwitchedPlant, controller: Controller,
                             policy: SwitchingPolicy, x0, s: float,
                             t_final: float, h: float = DEFAULT_H) -> float:
    """Max deviation of the dilation-scaling identity for trajectories.

    Compares x(t; d(s)x0, sigma_s) with d(s) x(e^{mu s} t; x0, sigma) on
    index-aligned grids (run B uses step e^{-mu s} h); disturbance-free only.
    Returns the max pointwise deviation in the reference P-norm.
    """
    if abs(s) > 2:
        raise ValueError("scaling exponent |s| must be <= 2")
    mu = controller.mu
    factor = float(np.exp(-mu * s))
    ctx = controller.reference_context()
    trajA = integrate(plant, controller, policy, x0, t_final, h)
    x0b = ctx.apply_dilation(s, np.asarray(x0, dtype=float))
    trajB = integrate(plant, controller, _scaled_policy(policy, factor), x0b,
                      t_final * factor, h * factor)
    if len(trajA.times) != len(trajB.times):
        raise ValueError(
            "scaled and nominal grids do not align "
            f"({len(trajB.times)} vs {len(trajA.times)} samples); use a finer h")
    scaledA = ctx.apply_dilation(s, trajA.states.T)
    dev = ctx.norm_P(trajB.states.T - scaledA)
    return float(np.max(dev))


def _renormalized_run(plant, controller, policy, x0, t_final, h):
    """Disturbance-free integration in dilation-renormalized coordinates.

    From very large (or badly off-ray) initial conditions the raw state and
    the V^{1+mu} control term overflow double precision.  Since the
    disturbance-free closed loop is d-homogeneous of degree mu, the
    renormalized state y = d(-s)x with s = ln V obeys the *same* closed-loop
    field in the rescaled time tau = e^{mu s} t; integrating y (which stays
    O(1)) and re-centering s whenever V drifts reproduces vnorm(t) = e^s
    V(y(tau)) exactly, at a step count that scales like ln(V0).
    Returns (times, vnorm) sample arrays in physical time.
    """
    from .hnorm import canonical_norm
    from .switching import mode_at, switch_pairs

    mu = controller.mu
    x = np.asarray(x0, dtype=float).copy()
    sigma0 = mode_at(policy, 0.0)
    ctx0 = controller.context(sigma0)
    V0 = canonical_norm(x, ctx0, rel_tol=SIM_REL_TOL)
    if V0 == 0.0:
        return np.array([0.0, t_final]), np.zeros(2)
    s = float(np.log(V0))
    y = ctx0.apply_dilation(-s, x)
    try:
        sw = [t for t, _ in switch_pairs(policy, t_final)][1:]
    except ValueError:
        sw = []
    ts, vs = [0.0], [V0]
    t = 0.0
    dtau_chunk = 100 * h
    while t < t_final - 1e-12:
        sigma = mode_at(policy, t)
        ctx = controller.context(sigma)
        scale_t = float(np.exp(-mu * s))
        nxt = min([u for u in sw if u > t + 1e-12], default=t_final)
        dtau = min(dtau_chunk, (min(nxt, t_final) - t) / scale_t)
        k = max(1, int(np.ceil(dtau / h - 1e-9)))
        times = np.linspace(0.0, dtau, k + 1)
        args = _mode_args(plant, controller, sigma, None)
        states, _, vnorm, _, n_valid = _engine.integrate_segment(y, times, *args)
        if n_valid < len(times):
            raise RuntimeError(f"renormalized integration became non-finite at t={t:.4g}")
        ts.extend(t + scale_t * times[1:])
        vs.extend(np.exp(s) * vnorm[1:])
        t += scale_t * dtau
        y = states[-1].copy()
        Vy = vnorm[-1]
        if Vy == 0.0:
            ts.append(t_final)
            vs.append(0.0)
            break
        s += float(np.log(Vy))
        y = ctx.apply_dilation(-float(np.log(Vy)), y)
    return np.asarray(ts), np.asarray(vs)


def nearly_fixed_time_check(plant: SwitchedPlant, controller: Controller,
                            policy: SwitchingPolicy, radii, x0_scales,
                            t_final: float, h: float = DEFAULT_H,
                            x0_dir=None, slack: float = 0.05) -> dict:
    """Verify vnorm enters each radius by t = 1/(mu*rho_min) + slack from
    arbitrarily large initial conditions (degree mu > 0 only).

    The time bound is the per-mode implicit-Lyapunov certificate, so the
    policy should not switch before the bound is reached (switch jumps slow
    the worst-case decay by the gamma factor).
    """
    mu = controller.mu
    if mu <= 0:
        raise ValueError("nearly fixed-time check requires mu > 0")
    bound = 1.0 / (mu * controller.rho_min) + slack
    if x0_dir is None:
        x0_dir = np.ones(plant.n)
    x0_dir = np.asarray(x0_dir, dtype=float)
    x0_dir = x0_dir / np.linalg.norm(x0_dir)
    checks = []
    for scale in x0_scales:
        times, vnorm = _renormalized_run(plant, controller, policy,
                                         scale * x0_dir, t_final, h)
        for r in radii:
            inside = vnorm <= r
            t_reach = float(times[int(np.argmax(inside))]) if np.any(inside) else None
            checks.append({"scale": float(scale), "radius": float(r),
                           "t_reach": t_reach, "bound": bound,
                           "passed": t_reach is not None and t_reach <= bound})
    return {"passed": all(c["passed"] for c in checks), "bound": bound,
            "checks": checks}


def save_trajectory(traj: Trajectory, path) -> None:
    """CSV with columns t, sigma, x1..xn, u1..um, vnorm; events as a JSON
    sidecar next to the CSV."""
    path = Path(path)
    n = traj.states.shape[1]
    m = traj.inputs.shape[1]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "sigma"] + [f"x{i + 1}" for i in range(n)]
                   + [f"u{i + 1}" for i in range(m)] + ["vnorm"])
        for j in range(len(traj.times)):
            w.writerow([f"{traj.times[j]:.12g}", int(traj.modes[j])]
                       + [f"{v:.17g}" for v in traj.states[j]]
                       + [f"{v:.17g}" for v in traj.inputs[j]]
                       + [f"{traj.vnorm[j]:.17g}"])
    path.with_suffix(".events.json").write_text(json.dumps(traj.events, indent=2))
