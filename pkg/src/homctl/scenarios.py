"""Bundled benchmark scenarios and the end-to-end reproduction pipeline.

Two synthesizable scenarios ship with the package:

* ``ft``   — finite-time stabilization (mu = -0.1, common Lyapunov function,
  rho = 2) of a two-mode fourth-order plant under periodic switching and a
  matched sinusoidal disturbance 0.8 sin(10 t).
* ``nfxt`` — nearly fixed-time stabilization (mu = 0.4, per-mode Lyapunov
  functions, rho = 1) of a two-mode plant with unmatched four-channel
  sinusoidal disturbance, under dwell-time switching.

Each also has a ``*-reference`` variant carrying the original benchmark
matrices verbatim.  Those variants are NOT synthesizable: their mode-1 state
coupling makes the joint homogenization equations unsolvable (and the
reference nfxt degree mu = 1 exceeds the admissible degree window of every
4-state/2-input pair).  The synthesizable variants differ only in zeroing the
offending A_1[0,2] entry and, for nfxt, lowering mu to 0.4.  A separate
printed-gains fixture supports simulation-only regression runs.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .homogenize import solve_homogenization
from .plant import DisturbanceSpec, SwitchedPlant, load_plant, sinusoid
from .plots import render_trajectory_svg
from .sim import integrate, save_trajectory, settling_time
from .switching import min_dwell, periodic
from .synthesis import (Controller, adt_bound, control_effort_bound,
                        save_controller, synthesize_common, synthesize_multiple)
from .verify import run_suite

_PI_2 = float(np.pi / 2)

SCENARIOS = {
    "ft": {
        "plant": "scenario1.json",
        "mu": -0.1,
        "kind": "common",
        "rho": 2.0,
        "x0": [2.0, 0.0, 0.0, 0.0],
        "t_final": 10.0,
        # matched disturbance on the first input channel: 0.8 sin(10 t)
        "disturbance": [(0.8, 10.0, 0.0), (0.0, 0.0, 0.0)],
        "switching": {"kind": "periodic", "period": 1.0},
    },
    "nfxt": {
        "plant": "scenario2.json",
        "mu": 0.4,
        "kind": "multiple",
        "rho": 1.0,
        "x0": [-3.0, 0.0, 0.0, 3.0],
        "t_final": 8.0,
        # [0.5 cos(2t), 0.4 sin(5t), 0.4 sin(5t), 0.3 cos(3t)]
        "disturbance": [(0.5, 2.0, _PI_2), (0.4, 5.0, 0.0),
                        (0.4, 5.0, 0.0), (0.3, 3.0, _PI_2)],
        "switching": {"kind": "dwell"},
    },
    "ft-reference": {"plant": "scenario1_reference.json", "mu": -0.1,
                     "kind": "common", "rho": 2.0},
    "nfxt-reference": {"plant": "scenario2_reference.json", "mu": 1.0,
                       "kind": "multiple", "rho": 1.0},
}


def _data_path(name: str):
    return resources.files("homctl.data").joinpath(name)


def scenario_plant(name: str) -> SwitchedPlant:
    """Load the bundled plant for a named scenario."""
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    with resources.as_file(_data_path(SCENARIOS[name]["plant"])) as p:
        return load_plant(p)


def scenario_disturbance(name: str) -> DisturbanceSpec:
    spec = SCENARIOS[name].get("disturbance")
    if spec is None:
        return DisturbanceSpec("none")
    return sinusoid(spec, matched=(name == "ft"))


def printed_gain_controller() -> Controller:
    """Simulation-only controller from the printed regression gains.

    These gains come with a diagonal generator and per-mode Lyapunov matrices
    that do not satisfy the homogenization identities of this pipeline, so
    they cannot be produced by synthesis; they are retained to regression-test
    the simulator (K0 = 0, homogeneous term only).
    """
    doc = json.loads(_data_path("printed_gains.json").read_text())
    Gd = np.asarray(doc["Gd"], dtype=float)
    Ps = [np.asarray(md["P"], dtype=float) for md in doc["modes"]]
    Ks = [np.asarray(md["K"], dtype=float) for md in doc["modes"]]
    Xs = [np.linalg.inv(P) for P in Ps]
    Xs = [(X + X.T) / 2.0 for X in Xs]
    n = Gd.shape[0]
    m = Ks[0].shape[0]
    return Controller(
        kind="multiple", mu=float(doc["mu"]), Gd=Gd,
        X=tuple(Xs), P=tuple((P + P.T) / 2.0 for P in Ps),
        Y=tuple(K @ X for K, X in zip(Ks, Xs)), K=tuple(Ks),
        K0=tuple(np.zeros((m, n)) for _ in Ks),
        rho=tuple(float(md["rho"]) for md in doc["modes"]),
        k_tilde=tuple(control_effort_bound(X, K) for X, K in zip(Xs, Ks)))


def synthesize_scenario(name: str, seed: int = 0) -> Controller:
    """Homogenize and synthesize the named scenario's controller."""
    cfg = SCENARIOS[name]
    plant = scenario_plant(name)
    homog = solve_homogenization(plant, cfg["mu"])
    if cfg["kind"] == "common":
        return synthesize_common(homog, rho=cfg["rho"])
    return synthesize_multiple(homog, rho=cfg["rho"], seed=seed)


def _scenario_policy(name: str, controller: Controller, t_final: float):
    cfg = SCENARIOS[name]["switching"]
    if cfg["kind"] == "periodic":
        return periodic(cfg["period"])
    # dwell-time switching: periodic sequence with a gap above the
    # average-dwell-time bound derived from the stored gamma
    tau = 1.25 * max(adt_bound(controller.gamma, controller.rho_min), 0.05)
    k = int(np.ceil(t_final / tau)) + 1
    return min_dwell([(i * tau, 1 + i % controller.N) for i in range(k)], tau)


def run_scenario(name: str, outdir, seed: int = 0, h: float = 1e-3) -> dict:
    """Full pipeline: synthesize, simulate, verify; writes all artifacts.

    Produces controller.json, trajectory.csv (+ events sidecar),
    trajectory.svg, report.json and summary.json in `outdir`.
    """
    if name not in ("ft", "nfxt"):
        raise ValueError(f"runnable scenarios are 'ft' and 'nfxt', got {name!r}")
    cfg = SCENARIOS[name]
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    plant = scenario_plant(name)
    controller = synthesize_scenario(name, seed=seed)
    save_controller(controller, outdir / "controller.json")
    policy = _scenario_policy(name, controller, cfg["t_final"])
    traj = integrate(plant, controller, policy, np.asarray(cfg["x0"]),
                     cfg["t_final"], h, scenario_disturbance(name))
    save_trajectory(traj, outdir / "trajectory.csv")
    render_trajectory_svg(traj, outdir / "trajectory.svg",
                          title=f"scenario {name}")
    report = run_suite(plant, controller, "all", seed=seed,
                       disturbance=scenario_disturbance(name))
    (outdir / "report.json").write_text(json.dumps(report, indent=2))

    mu = controller.mu
    from .hnorm import canonical_norm
    V0 = canonical_norm(np.asarray(cfg["x0"], dtype=float),
                        controller.reference_context())
    summary = {
        "scenario": name,
        "mu": mu,
        "rho": list(controller.rho),
        "k_tilde": list(controller.k_tilde),
        "V0": V0,
        "final_vnorm": float(traj.vnorm[-1]),
        "verify_passed": report["passed"],
    }
    if mu < 0:
        summary["settling_bound"] = V0 ** (-mu) / (-mu * controller.rho_min)
        # under a persistent disturbance V settles into a residual ball,
        # so measure arrival at a stated threshold rather than at zero
        thr = 1e-2 if scenario_disturbance(name).kind != "none" else 1e-6
        summary["settling_threshold"] = thr
        summary["settling_measured"] = settling_time(traj, thr)
    elif mu > 0:
        summary["fixed_time_bound"] = 1.0 / (mu * controller.rho_min)
        t_in = traj.times[traj.vnorm <= 1.0]
        summary["unit_ball_reached"] = float(t_in[0]) if len(t_in) else None
    if controller.gamma is not None:
        summary["gamma"] = controller.gamma
        summary["c1"] = controller.c1
        summary["c2"] = controller.c2
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary
