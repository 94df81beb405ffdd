"""Switching signals: fixed sequences, periodic signals, dwell-time variants.

A switching signal sigma(t) is piecewise constant and right-continuous: at a
switch instant t_k the new mode is already active, i.e. sigma is constant on
[t_k, t_{k+1}).  Policies are immutable; the state-dependent kind only fixes
the mode rotation and a proposed gap — its actual switch instants are decided
online against the state-dependent dwell time during simulation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .synthesis import Controller, sddt_tau

KINDS = ("fixed-sequence", "periodic", "min-dwell", "adt", "state-dependent")


@dataclass(frozen=True)
class SwitchingPolicy:
    kind: str
    sequence: tuple = ()          # ((t, mode), ...) for fixed kinds, t strictly increasing, t0 = 0
    period: float = 0.0           # periodic kind
    cycle: tuple = ()             # mode rotation (periodic, state-dependent)
    tau: float = 0.0              # min-dwell kind
    tau_d: float = 0.0            # adt kind
    N0: int = 0                   # adt kind
    base_gap: float = 0.0         # state-dependent kind: proposed gap between switches

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown switching kind {self.kind!r}")
        if self.sequence:
            times = [t for t, _ in self.sequence]
            if times[0] != 0.0:
                raise ValueError("switch sequence must start at t = 0 (initial mode)")
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError("switch times must be strictly increasing")
            if self.kind == "min-dwell" and any(
                    b - a < self.tau - 1e-12 for a, b in zip(times[1:], times[2:])):
                raise ValueError(f"sequence violates minimum dwell time {self.tau}")


def fixed_sequence(pairs) -> SwitchingPolicy:
    return SwitchingPolicy("fixed-sequence",
                           sequence=tuple((float(t), int(m)) for t, m in pairs))


def periodic(period: float, cycle=(1, 2)) -> SwitchingPolicy:
    if period <= 0:
        raise ValueError("period must be positive")
    return SwitchingPolicy("periodic", period=float(period),
                           cycle=tuple(int(m) for m in cycle))


def min_dwell(pairs, tau: float) -> SwitchingPolicy:
    return SwitchingPolicy("min-dwell", tau=float(tau),
                           sequence=tuple((float(t), int(m)) for t, m in pairs))


def adt(pairs, tau_d: float, N0: int) -> SwitchingPolicy:
    return SwitchingPolicy("adt", tau_d=float(tau_d), N0=int(N0),
                           sequence=tuple((float(t), int(m)) for t, m in pairs))


def state_dependent(cycle=(1, 2), base_gap: float = 0.0) -> SwitchingPolicy:
    """Round-robin rotation whose switch instants the simulator gates through
    sddt_next_switch; base_gap is the proposed (minimum requested) gap."""
    return SwitchingPolicy("state-dependent", cycle=tuple(int(m) for m in cycle),
                           base_gap=float(base_gap))


def switch_pairs(policy: SwitchingPolicy, t_final: float) -> list[tuple[float, int]]:
    """Realized (t, mode) pairs on [0, t_final) for time-driven policies."""
    if policy.kind == "periodic":
        k = int(np.ceil(t_final / policy.period - 1e-12))
        return [(i * policy.period, policy.cycle[i % len(policy.cycle)])
                for i in range(max(1, k))]
    if policy.sequence:
        return [(t, m) for t, m in policy.sequence if t < t_final]
    raise ValueError(f"policy kind {policy.kind!r} has no realized switch sequence")


def mode_at(policy: SwitchingPolicy, t: float) -> int:
    """Right-continuous evaluation of sigma(t); the last mode persists."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if policy.kind == "periodic":
        return policy.cycle[int(np.floor(t / policy.period + 1e-12)) % len(policy.cycle)]
    if not policy.sequence:
        raise ValueError(f"policy kind {policy.kind!r} has no realized switch sequence")
    times = [p[0] for p in policy.sequence]
    idx = int(np.searchsorted(times, t, side="right")) - 1
    return policy.sequence[max(0, idx)][1]


def adt_count(policy: SwitchingPolicy, t0: float, t: float) -> int:
    """Number of switch instants in (t0, t]."""
    if t < t0:
        raise ValueError("t must be >= t0")
    # generate past t so a switch landing exactly at t is counted
    pairs = (switch_pairs(policy, t + policy.period)
             if policy.kind == "periodic" else list(policy.sequence))
    times = [p[0] for p in pairs][1:]  # the t=0 entry sets the initial mode
    return sum(1 for s in times if t0 < s <= t)


def adt_check(policy: SwitchingPolicy, t0: float, t: float,
              tau_d: float | None = None, N0: int | None = None) -> bool:
    """Average dwell-time inequality N(t, t0) <= N0 + (t - t0)/tau_d."""
    tau_d = policy.tau_d if tau_d is None else tau_d
    N0 = policy.N0 if N0 is None else N0
    if tau_d <= 0:
        raise ValueError("tau_d must be positive")
    return adt_count(policy, t0, t) <= N0 + (t - t0) / tau_d


def sddt_next_switch(controller: Controller, x_at_switch, t_switch: float,
                     proposed_next: float) -> float:
    """Earliest admissible next switch instant under the state-dependent
    dwell time: max(proposed_next, t_switch + tau(x_at_switch))."""
    return max(proposed_next, t_switch + sddt_tau(controller, x_at_switch))


def save_policy(policy: SwitchingPolicy, path) -> None:
    doc = {"kind": policy.kind}
    if policy.sequence:
        doc["sequence"] = [[t, m] for t, m in policy.sequence]
    for name in ("period", "tau", "tau_d", "N0", "base_gap"):
        val = getattr(policy, name)
        if val:
            doc[name] = val
    if policy.cycle:
        doc["cycle"] = list(policy.cycle)
    Path(path).write_text(json.dumps(doc, indent=2))


def load_policy(path) -> SwitchingPolicy:
    doc = json.loads(Path(path).read_text())
    return SwitchingPolicy(
        kind=doc["kind"],
        sequence=tuple((float(t), int(m)) for t, m in doc.get("sequence", [])),
        period=float(doc.get("period", 0.0)),
        cycle=tuple(int(m) for m in doc.get("cycle", [])),
        tau=float(doc.get("tau", 0.0)),
        tau_d=float(doc.get("tau_d", 0.0)),
        N0=int(doc.get("N0", 0)),
        base_gap=float(doc.get("base_gap", 0.0)))
