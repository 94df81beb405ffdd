"""Acceptance criteria, one test per criterion, one [PASS]/[FAIL] line each.

Criteria that operate on the original benchmark matrices use the verbatim
``*-reference`` fixtures.  Those fixtures are not homogenizable (their mode-1
state coupling makes the joint pre-feedback equations unsolvable, and the
reference degree mu = 1 exceeds the admissible window of this mode
structure), so the criteria depending on them fail with the blocking
diagnostic in their output line; the same certificate checks pass on the
minimally repaired bundled scenarios (see test_scenarios.py and README).

Run with ``pytest -s tests/test_acceptance.py`` to see all ten lines.
"""

import time

import numpy as np
import pytest

from homctl.homogenize import HomogenizationError, solve_homogenization
from homctl.hnorm import canonical_norm
from homctl.linalg import is_nilpotent, mat_exp, min_eig_sym
from homctl.plant import make_plant, sinusoid
from homctl.scenarios import SCENARIOS, printed_gain_controller, scenario_plant
from homctl.sim import integrate, nearly_fixed_time_check, settling_time, \
    trajectory_scaling_check
from homctl.switching import fixed_sequence, min_dwell, periodic, \
    state_dependent
from homctl.synthesis import SynthesisError, adt_bound, synthesize_common, \
    synthesize_multiple
from homctl.control import decay_rate_check, disturbance_margin
from homctl.hnorm import hnorm_gradient
from homctl.verify import lyapunov_switch_sequence


def _report(num: int, ok: bool, detail: str):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def _chain2():
    return make_plant([([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]])])


def test_criterion_01_homogenization_residuals():
    """Homogenization of the reference two-mode plant at mu = -0.1:
    all equation and identity residuals <= 1e-8, all A0 nilpotent, < 1 s."""
    t0 = time.perf_counter()
    try:
        res = solve_homogenization(scenario_plant("ft-reference"), -0.1)
        worst = max(v for v in res.residuals.values())
        ok = (worst <= 1e-8
              and all(is_nilpotent(A0, tol=1e-8) for A0 in res.A0))
        detail = f"worst residual {worst:.3e}"
    except HomogenizationError as exc:
        ok, detail = False, f"blocked: {exc}"
    elapsed = time.perf_counter() - t0
    _report(1, ok and elapsed < 1.0, f"{detail} ({elapsed:.2f}s)")


def test_criterion_02_lmi_certificates():
    """Common-Lyapunov synthesis at rho = 2 on the reference two-mode plant
    and per-mode synthesis at rho = 1 on the reference second plant: decay
    LMI slack >= 0 and Gd X + X Gd' > 0 per mode, < 30 s."""
    t0 = time.perf_counter()
    ok, details = True, []
    for name, kind, rho in (("ft-reference", "common", 2.0),
                            ("nfxt-reference", "multiple", 1.0)):
        try:
            plant = scenario_plant(name)
            homog = solve_homogenization(plant, SCENARIOS[name]["mu"])
            ctrl = (synthesize_common(homog, rho=rho) if kind == "common"
                    else synthesize_multiple(homog, rho=rho))
            for i in (1, 2):
                X, Y = ctrl.X[i - 1], ctrl.Y[i - 1]
                A0 = plant.A(i) + plant.B(i) @ ctrl.K0[i - 1]
                B = plant.B(i)
                L = (X @ A0.T + A0 @ X + B @ Y + Y.T @ B.T
                     + rho * (ctrl.Gd @ X + X @ ctrl.Gd.T))
                ok = ok and min_eig_sym(-L) >= 0 \
                    and min_eig_sym(ctrl.Gd @ X + X @ ctrl.Gd.T) > 0
            details.append(f"{name}: synthesized")
        except (HomogenizationError, SynthesisError) as exc:
            ok = False
            details.append(f"{name} blocked: {exc}")
    elapsed = time.perf_counter() - t0
    _report(2, ok and elapsed < 30.0, "; ".join(details) + f" ({elapsed:.2f}s)")


def test_criterion_03_canonical_norm_suite(ft_ctrl):
    """Defining identity within 1e-9 and degree-1 homogeneity within 1e-8
    relative over 1000 random (x, s); gradient vs central differences within
    1e-5 relative over 100 points, < 10 s."""
    t0 = time.perf_counter()
    ctx = ft_ctrl.reference_context()
    rng = np.random.default_rng(0)
    X = rng.standard_normal((4, 1000)) * 10.0 ** rng.uniform(-3, 3, 1000)
    S = rng.uniform(-2, 2, 1000)
    worst_id, worst_hom = 0.0, 0.0
    for j in range(1000):
        x = X[:, j]
        V = canonical_norm(x, ctx, rel_tol=1e-12)
        # identity via an independent matrix-exponential evaluation
        pi = mat_exp(ctx.Gd, -np.log(V)) @ x
        worst_id = max(worst_id, abs(ctx.norm_P(pi) - 1.0))
        Vs = canonical_norm(mat_exp(ctx.Gd, S[j]) @ x, ctx, rel_tol=1e-12)
        ref = np.exp(S[j]) * V
        worst_hom = max(worst_hom, abs(Vs - ref) / ref)
    worst_g = 0.0
    for j in range(100):
        x = X[:, j]
        g = hnorm_gradient(x, ctx)
        step = 1e-6 * np.linalg.norm(x)
        fd = np.array([(canonical_norm(x + step * e, ctx, 1e-12)
                        - canonical_norm(x - step * e, ctx, 1e-12)) / (2 * step)
                       for e in np.eye(4)])
        worst_g = max(worst_g, np.linalg.norm(g - fd) / np.linalg.norm(fd))
    elapsed = time.perf_counter() - t0
    ok = worst_id <= 1e-9 and worst_hom <= 1e-8 and worst_g <= 1e-5 \
        and elapsed < 10.0
    _report(3, ok, f"identity {worst_id:.2e}, homogeneity {worst_hom:.2e}, "
                   f"gradient {worst_g:.2e} ({elapsed:.2f}s)")


def test_criterion_04_trajectory_homogeneity():
    """Disturbance-free 2-chain closed loop with mu = -0.5 satisfies the
    trajectory dilation-scaling identity within 1e-4*(1+|x0|_P) for
    s in {-1, ln 2, 1} at h = 1e-4, < 20 s."""
    t0 = time.perf_counter()
    plant = _chain2()
    ctrl = synthesize_common(solve_homogenization(plant, -0.5), rho=1.0)
    x0 = np.array([4.0, 0.0])
    tol = 1e-4 * (1 + ctrl.reference_context().norm_P(x0))
    pol = periodic(5.0, cycle=(1,))
    devs = [trajectory_scaling_check(plant, ctrl, pol, x0, s, 1.5, 1e-4)
            for s in (-1.0, float(np.log(2.0)), 1.0)]
    elapsed = time.perf_counter() - t0
    ok = max(devs) <= tol and elapsed < 20.0
    _report(4, ok, f"max deviation {max(devs):.2e} vs tol {tol:.2e} "
                   f"({elapsed:.2f}s)")


def test_criterion_05_finite_time_bound():
    """Reference two-mode plant, disturbance-free: for 20 random x0 with
    canonical norm <= 5, measured settling time <= V0^0.1/(0.1*rho) + 10h,
    < 60 s."""
    t0 = time.perf_counter()
    try:
        plant = scenario_plant("ft-reference")
        ctrl = synthesize_common(solve_homogenization(plant, -0.1), rho=2.0)
        ctx = ctrl.reference_context()
        rng = np.random.default_rng(0)
        h = 1e-3
        ok, worst = True, ""
        for _ in range(20):
            z = rng.standard_normal(4)
            pt = ctx.P_sqrt_inv @ (z / np.linalg.norm(z))
            V0 = float(rng.uniform(0.2, 5.0))
            x0 = ctx.apply_dilation(np.log(V0), pt)
            bound = V0 ** 0.1 / (0.1 * 2.0)
            traj = integrate(plant, ctrl, periodic(1.0, (1, 2)), x0,
                             bound + 0.5, h)
            t_set = settling_time(traj, 1e-6)
            if t_set is None or t_set > bound + 10 * h:
                ok, worst = False, f"V0={V0:.3g}: {t_set} > {bound:.3g}"
                break
        detail = "all 20 settling times within bound" if ok else worst
    except (HomogenizationError, SynthesisError) as exc:
        ok, detail = False, f"blocked: {exc}"
    elapsed = time.perf_counter() - t0
    _report(5, ok and elapsed < 60.0, f"{detail} ({elapsed:.2f}s)")


def test_criterion_06_robust_decay():
    """Reference two-mode plant with matched disturbance 0.8 sin(10t):
    empirical admissibility ratio below rho, and the decay-rate check passes
    at eta = rho - kappa with slack 1e-3, < 30 s."""
    t0 = time.perf_counter()
    try:
        plant = scenario_plant("ft-reference")
        ctrl = synthesize_common(solve_homogenization(plant, -0.1), rho=2.0)
        dist = sinusoid([(0.8, 10.0, 0.0), (0.0, 0.0, 0.0)], matched=True)
        traj = integrate(plant, ctrl, periodic(1.0, (1, 2)),
                         np.array([2.0, 0.0, 0.0, 0.0]), 5.0, 1e-3, dist)
        amps = np.asarray(dist.amplitudes)
        freqs = np.asarray(dist.frequencies)
        phases = np.asarray(dist.phases)
        kappa = 0.0
        for j in range(len(traj.times)):
            if traj.vnorm[j] < 1e-2:
                continue
            omega = amps * np.sin(freqs * traj.times[j] + phases)
            kappa = max(kappa, disturbance_margin(
                traj.states[j], traj.times[j], omega, int(traj.modes[j]),
                ctrl, plant))
        rep = decay_rate_check(traj, ctrl, eta_expected=2.0 - kappa,
                               slack=1e-3, v_floor=1e-2)
        ok = kappa < 2.0 and rep["passed"]
        detail = f"kappa {kappa:.3g}, decay worst margin {rep['worst_margin']:.3g}"
    except (HomogenizationError, SynthesisError) as exc:
        ok, detail = False, f"blocked: {exc}"
    elapsed = time.perf_counter() - t0
    _report(6, ok and elapsed < 30.0, f"{detail} ({elapsed:.2f}s)")


def test_criterion_07_exponential_case():
    """Degree-zero synthesis on the 2-chain: vnorm(t) <= e^{-rho t} vnorm(0)
    * 1.001 over [0, 5], < 10 s."""
    t0 = time.perf_counter()
    plant = _chain2()
    ctrl = synthesize_common(solve_homogenization(plant, 0.0), rho=1.0)
    x0 = np.array([3.0, -1.0])
    traj = integrate(plant, ctrl, periodic(100.0, (1,)), x0, 5.0, 1e-3)
    envelope = np.exp(-ctrl.rho[0] * traj.times) * traj.vnorm[0] * 1.001
    ok = bool(np.all(traj.vnorm <= envelope))
    worst = float(np.max(traj.vnorm / envelope))
    elapsed = time.perf_counter() - t0
    _report(7, ok and elapsed < 10.0,
            f"max vnorm/envelope ratio {worst:.6f} ({elapsed:.2f}s)")


def test_criterion_08_nearly_fixed_time():
    """Reference second plant with degree 1, rho = 1: from initial scales
    1e3 and 1e6 the canonical norm reaches radius 1 by 1/(mu*rho) + 0.05,
    < 60 s."""
    t0 = time.perf_counter()
    try:
        plant = scenario_plant("nfxt-reference")
        homog = solve_homogenization(plant, 1.0)
        ctrl = synthesize_multiple(homog, rho=1.0)
        rep = nearly_fixed_time_check(plant, ctrl, fixed_sequence([(0.0, 1)]),
                                      radii=[1.0], x0_scales=[1e3, 1e6],
                                      t_final=4.0, h=1e-3)
        ok = rep["passed"]
        detail = f"reach times {[c['t_reach'] for c in rep['checks']]}" \
                 f" vs bound {rep['bound']:.3g}"
    except (HomogenizationError, SynthesisError) as exc:
        ok, detail = False, f"blocked: {exc}"
    elapsed = time.perf_counter() - t0
    _report(8, ok and elapsed < 60.0, f"{detail} ({elapsed:.2f}s)")


def test_criterion_09_multiple_lyapunov_switching():
    """Reference second plant under (a) minimum-dwell switching at the
    derived gap and (b) the state-dependent supervisor: all switch-jump
    ratios <= the stored gamma, < 60 s."""
    t0 = time.perf_counter()
    try:
        plant = scenario_plant("nfxt-reference")
        homog = solve_homogenization(plant, SCENARIOS["nfxt-reference"]["mu"])
        ctrl = synthesize_multiple(homog, rho=1.0)
        tau = 1.25 * adt_bound(ctrl.gamma, ctrl.rho_min)
        pairs = [(k * tau, 1 + k % 2) for k in range(8)]
        x0 = np.array([-3.0, 0.0, 0.0, 3.0])
        traj = integrate(plant, ctrl, min_dwell(pairs, tau), x0, 8 * tau, 1e-3)
        rep_a = lyapunov_switch_sequence(traj, ctrl)
        traj_b = integrate(plant, ctrl, state_dependent((1, 2), base_gap=0.05),
                           x0, 6.0, 1e-3)
        rep_b = lyapunov_switch_sequence(traj_b, ctrl)
        ok = rep_a["passed"] and rep_b["passed"]
        detail = (f"min-dwell: {len(rep_a['switches'])} switches, "
                  f"supervisor: {len(rep_b['switches'])} switches, "
                  f"gamma {ctrl.gamma:.3g}")
    except (HomogenizationError, SynthesisError) as exc:
        ok, detail = False, f"blocked: {exc}"
    elapsed = time.perf_counter() - t0
    _report(9, ok and elapsed < 60.0, f"{detail} ({elapsed:.2f}s)")


def test_criterion_10_printed_gain_regression():
    """Simulation-only regression with the published gain/Lyapunov tables on
    the verbatim plant: from x0 = [2,0,0,0] under 0.8 sin(10t), all four
    states enter |x_i| <= 1e-2 before t = 10 s, < 10 s."""
    t0 = time.perf_counter()
    plant = scenario_plant("ft-reference")
    ctrl = printed_gain_controller()
    dist = sinusoid([(0.8, 10.0, 0.0), (0.0, 0.0, 0.0)], matched=True)
    traj = integrate(plant, ctrl, periodic(1.0, (1, 2)),
                     np.array([2.0, 0.0, 0.0, 0.0]), 10.0, 1e-3, dist)
    inside = np.all(np.abs(traj.states) <= 1e-2, axis=1)
    t_enter = float(traj.times[np.argmax(inside)]) if inside.any() else None
    elapsed = time.perf_counter() - t0
    ok = t_enter is not None and t_enter < 10.0 and elapsed < 10.0
    _report(10, ok, f"band entered at t = {t_enter} ({elapsed:.2f}s)")
