"""Command-line front end: synth, simulate, verify, hnorm, reproduce."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .hnorm import canonical_norm, hnorm_gradient
from .homogenize import solve_homogenization
from .plant import DisturbanceSpec, load_plant, sinusoid
from .plots import render_trajectory_svg
from .scenarios import run_scenario
from .sim import integrate, save_trajectory
from .switching import load_policy
from .synthesis import (load_controller, save_controller, synthesize_common,
                        synthesize_multiple)
from .verify import run_suite


def _default_seed() -> int:
    return int(os.environ.get("HOMCTL_SEED", "0"))


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.replace(" ", "").split(",")])


def _load_disturbance(path) -> DisturbanceSpec:
    doc = json.loads(Path(path).read_text())
    if doc.get("kind", "none") == "none":
        return DisturbanceSpec("none")
    return sinusoid([tuple(ch) for ch in doc["channels"]],
                    matched=doc.get("kind") == "matched-sinusoid")


def cmd_synth(args) -> int:
    plant = load_plant(args.plant)
    homog = solve_homogenization(plant, args.mu)
    rho = "auto" if args.rho == "auto" else float(args.rho)
    if args.kind == "common":
        ctrl = synthesize_common(homog, rho=rho)
    else:
        ctrl = synthesize_multiple(homog, rho=rho, seed=args.seed)
    save_controller(ctrl, args.out)
    print(f"wrote {args.out} (kind={ctrl.kind}, mu={ctrl.mu}, "
          f"rho={[round(r, 6) for r in ctrl.rho]})")
    print("residual summary:")
    for key, val in sorted(ctrl.residuals.items()):
        print(f"  {key}: {val:.6g}")
    for name in ("gamma", "c1", "c2"):
        val = getattr(ctrl, name)
        if val is not None:
            print(f"  {name}: {val:.6g}")
    return 0


def cmd_simulate(args) -> int:
    plant = load_plant(args.plant)
    ctrl = load_controller(args.ctrl)
    policy = load_policy(args.switching)
    dist = _load_disturbance(args.disturbance) if args.disturbance else None
    traj = integrate(plant, ctrl, policy, _parse_vector(args.x0), args.tf,
                     args.h, dist)
    save_trajectory(traj, args.out)
    print(f"wrote {args.out} ({len(traj.times)} samples, "
          f"final vnorm {traj.vnorm[-1]:.6g})")
    if args.svg:
        render_trajectory_svg(traj, args.svg)
        print(f"wrote {args.svg}")
    if any(ev["kind"] == "blowup" for ev in traj.events):
        print("simulation aborted: state became non-finite", file=sys.stderr)
        return 2
    return 0


def cmd_verify(args) -> int:
    plant = load_plant(args.plant)
    ctrl = load_controller(args.ctrl)
    dist = _load_disturbance(args.disturbance) if args.disturbance else None
    report = run_suite(plant, ctrl, args.suite, seed=args.seed, disturbance=dist)
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2))
    for chk in report["checks"]:
        flag = "PASS" if chk["passed"] else "FAIL"
        print(f"[{flag}] {chk['name']}: margin {chk['margin']:.4g} "
              f"(tol {chk['tolerance']:.4g}) {chk['detail']}")
    print(f"overall: {'PASS' if report['passed'] else 'FAIL'}")
    return 0 if report["passed"] else 1


def cmd_hnorm(args) -> int:
    ctrl = load_controller(args.ctrl)
    x = _parse_vector(args.x)
    ctx = ctrl.context(args.mode)
    V = canonical_norm(x, ctx, rel_tol=args.rel_tol)
    print(f"vnorm: {V:.12g}")
    if V > 0 and args.gradient:
        g = hnorm_gradient(x, ctx)
        print("gradient:", " ".join(f"{v:.12g}" for v in g))
    return 0


def cmd_reproduce(args) -> int:
    summary = run_scenario(args.scenario, args.outdir, seed=args.seed, h=args.h)
    print(json.dumps(summary, indent=2))
    return 0 if summary["verify_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="homctl",
                                 description="Homogeneity-based controller synthesis "
                                             "and simulation for switched linear systems")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="homogenize a plant and synthesize gains")
    p.add_argument("--plant", required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--kind", choices=("common", "multiple"), required=True)
    p.add_argument("--rho", default="auto")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("simulate", help="integrate the closed loop")
    p.add_argument("--plant", required=True)
    p.add_argument("--ctrl", required=True)
    p.add_argument("--switching", required=True)
    p.add_argument("--x0", required=True, help="comma-separated initial state")
    p.add_argument("--tf", type=float, required=True)
    p.add_argument("--h", type=float, default=1e-4)
    p.add_argument("--disturbance")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run certificate verification suites")
    p.add_argument("--plant", required=True)
    p.add_argument("--ctrl", required=True)
    p.add_argument("--suite", default="all",
                   choices=("homog", "lmi", "norm", "decay", "dwell", "robust", "all"))
    p.add_argument("--disturbance")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("hnorm", help="evaluate the canonical homogeneous norm")
    p.add_argument("--ctrl", required=True)
    p.add_argument("--x", required=True, help="comma-separated state")
    p.add_argument("--mode", type=int, default=1)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--gradient", action="store_true")
    p.set_defaults(func=cmd_hnorm)

    p = sub.add_parser("reproduce", help="run a bundled scenario end to end")
    p.add_argument("--scenario", choices=("ft", "nfxt"), required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
