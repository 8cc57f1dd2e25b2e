"""Acceptance suite: ten criteria, one verdict line each.

Run with ``pytest -v -s tests/test_acceptance.py`` to see the verdict lines;
each test prints ``criterion NN: PASS/FAIL`` with the measured quantities.
The batch criteria (03 and 04) take about a minute each.
"""

import csv
import time

import numpy as np
import pytest

from conespline import (
    ApproxConfig,
    ConeParams,
    Interval,
    MinConfig,
    MinState,
    approximate,
    brute_force_min,
    cone_membership_scan,
    cost_bound_approx,
    cost_bound_min,
    critical_width,
    dense_sup_error,
    divided_difference,
    level_function_L,
    lp_quasinorm,
    make_hump,
    make_parabola,
    min_step,
    minimize,
    neginf_seminorm,
    sample_family,
    sup_norm,
)
from conespline.cli import main
from conespline.testbed import hump_family, osc_parabola_family, oscillatory_family

IV = Interval(-1.0, 1.0)
P20 = ConeParams(20, 10.0)
P40 = ConeParams(40, 10.0)
P250 = ConeParams(250, 10.0)

BATCH_SEED = 1
BATCH_TRIALS = 100

# Mean sample counts of reference batch runs; the batches below must land
# within a factor of 2 (approximation) or 3 (minimization) of these.
APPROX_MEAN_TARGETS = {"hump": 6557.0, "osc": 5017.0, "oscpar": 15698.0}
MIN_MEAN_TARGETS = {"hump": 111.0, "osc": 48.0, "oscpar": 108.0}


def _verdict(n: int, ok: bool, detail: str) -> None:
    print(f"criterion {n:02d}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {n:02d}: {detail}"


def reference_hump():
    return make_hump(-0.2, 0.3, IV, negated=True)


def test_criterion_01_reference_approximation():
    fn = reference_hump()
    start = time.perf_counter()
    report = approximate(fn.f, ApproxConfig(0.02, P20, IV))
    elapsed = time.perf_counter() - start
    err = dense_sup_error(fn.f, report.spline, 100_000)
    ok = (
        report.converged
        and err <= 0.02
        and report.n_iterations <= 5
        and 55 <= report.n_points <= 80
        and elapsed < 1.0
    )
    _verdict(1, ok, f"points={report.n_points} passes={report.n_iterations} "
                    f"sup_err={err:.3e} time={elapsed:.3f}s")


def test_criterion_02_reference_minimization():
    fn = reference_hump()
    a_points = approximate(fn.f, ApproxConfig(0.02, P20, IV)).n_points
    start = time.perf_counter()
    report = minimize(fn.f, MinConfig(0.02, P20, IV))
    elapsed = time.perf_counter() - start
    ok = (
        report.converged
        and -1.0 <= report.value <= -0.98
        and 35 <= report.n_points <= 60
        and report.n_points < a_points
        and elapsed < 1.0
    )
    _verdict(2, ok, f"value={report.value} points={report.n_points} "
                    f"(approx used {a_points}) time={elapsed:.3f}s")


def test_criterion_03_batch_approximation_guarantee():
    tol = 1e-6
    specs = (hump_family(), oscillatory_family(), osc_parabola_family())
    start = time.perf_counter()
    detail = []
    ok = True
    for spec in specs:
        n_success = 0
        n_points = []
        for _, fn in sample_family(spec, BATCH_TRIALS, BATCH_SEED):
            report = approximate(fn.f, ApproxConfig(tol, P250, IV))
            err = dense_sup_error(fn.f, report.spline, 200_000)
            n_success += bool(report.converged and err <= tol)
            n_points.append(report.n_points)
        mean = float(np.mean(n_points))
        target = APPROX_MEAN_TARGETS[spec.name]
        ok = ok and n_success == BATCH_TRIALS and target / 2.0 <= mean <= target * 2.0
        detail.append(f"{spec.name} {n_success}/{BATCH_TRIALS} mean={mean:.0f}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 300.0
    _verdict(3, ok, "; ".join(detail) + f"; time={elapsed:.0f}s")


def test_criterion_04_batch_minimization_guarantee():
    tol = 1e-6
    specs = (hump_family(negated=True), oscillatory_family(), osc_parabola_family())
    start = time.perf_counter()
    detail = []
    ok = True
    for spec in specs:
        n_success = 0
        n_points = []
        for _, fn in sample_family(spec, BATCH_TRIALS, BATCH_SEED):
            report = minimize(fn.f, MinConfig(tol, P20, IV))
            gap = report.value - brute_force_min(fn.f, IV, 1_000_000)
            n_success += bool(report.converged and -1e-9 <= gap <= tol)
            n_points.append(report.n_points)
        mean = float(np.mean(n_points))
        target = MIN_MEAN_TARGETS[spec.name]
        ok = ok and n_success == BATCH_TRIALS and target / 3.0 <= mean <= target * 3.0
        detail.append(f"{spec.name} {n_success}/{BATCH_TRIALS} mean={mean:.0f}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 300.0
    _verdict(4, ok, "; ".join(detail) + f"; time={elapsed:.0f}s")


def test_criterion_05_divided_difference_sandwich():
    rng = np.random.default_rng(2026)
    slack = 1e-8
    worst = 0.0
    ok = True
    for _ in range(200):
        c3, c2, c1, c0 = rng.uniform(-5.0, 5.0, size=4)
        lo, hi = np.sort(rng.uniform(-1.0, 1.0, size=2))
        if hi - lo < 0.05:
            lo = min(lo, 0.95)
            hi = lo + 0.05
        g = lambda x: ((c3 * x + c2) * x + c1) * x + c0
        g1 = lambda x: (3.0 * c3 * x + 2.0 * c2) * x + c1
        g2 = lambda x: 6.0 * c3 * x + 2.0 * c2
        mid = 0.5 * (lo + hi)
        two_d = 2.0 * abs(divided_difference(g(lo), g(mid), g(hi), hi - lo))
        # Closed forms: the second derivative is affine on [lo, hi].
        end_lo, end_hi = g2(lo), g2(hi)
        sup_true = max(abs(end_lo), abs(end_hi))
        neginf_true = 0.0 if end_lo * end_hi < 0.0 else min(abs(end_lo), abs(end_hi))
        sub = Interval(float(lo), float(hi))
        neginf_est = neginf_seminorm(g1, sub)
        sup_est = sup_norm(g2, sub, 10_000)
        checks = (
            neginf_true <= two_d + slack,
            two_d <= sup_true + slack,
            neginf_est <= two_d + slack,
            two_d <= sup_est + slack,
            neginf_est >= neginf_true - slack,
            sup_est <= sup_true + slack,
        )
        ok = ok and all(checks)
        worst = max(worst, neginf_est - two_d, two_d - sup_est)
    _verdict(5, ok, f"200 cubics, worst sandwich excess {worst:.2e} (slack {slack:g})")


def test_criterion_06_seminorm_chain():
    ok = True
    detail = []

    def chain_holds(fn, kinks=()):
        lower = IV.width ** 2 * neginf_seminorm(fn.f_prime, IV)
        middle = lp_quasinorm(fn.f_second, 0.5, IV, kinks=kinks)
        upper = IV.width ** 2 * sup_norm(fn.f_second, IV)
        slack = 1e-9 * max(1.0, upper)
        return lower <= middle + slack and middle <= upper + slack

    fn = make_parabola(IV)
    ok = ok and chain_holds(fn)
    detail.append("parabola")

    wide = make_hump(0.0, 2.0 * critical_width(P40, IV), IV)
    ok = ok and chain_holds(wide, wide.kinks)
    detail.append("wide hump")

    rng = np.random.default_rng(7)
    for _ in range(20):
        c3, c2, c1 = rng.uniform(-5.0, 5.0, size=3)
        cubic = type(fn)(
            label="cubic",
            f=lambda x: ((c3 * x + c2) * x + c1) * x,
            f_prime=lambda x: (3.0 * c3 * x + 2.0 * c2) * x + c1,
            f_second=lambda x: 6.0 * c3 * x + 2.0 * c2,
            domain=IV,
            known_min=None,
            cone_status="unknown",
        )
        ok = ok and chain_holds(cubic)
    detail.append("20 cubics")

    for hump in (wide, make_hump(-0.2, 0.3, IV)):
        delta = (hump.kinks[3] - hump.kinks[0]) / 4.0
        sup = sup_norm(hump.f_second, IV)
        half = lp_quasinorm(hump.f_second, 0.5, IV, kinks=hump.kinks)
        ok = ok and abs(sup - delta ** -2) <= 1e-3 * delta ** -2
        ok = ok and abs(half - 16.0) <= 1e-3 * 16.0
    detail.append("hump norms exact")

    _verdict(6, ok, ", ".join(detail))


def test_criterion_07_cost_bound_audit():
    fn = reference_hump()
    ok = True
    parts = []
    for tol in (1e-2, 1e-3, 1e-4):
        realized_a = approximate(fn.f, ApproxConfig(tol, P20, IV)).n_points
        realized_m = minimize(fn.f, MinConfig(tol, P20, IV)).n_points
        bound_a = cost_bound_approx(fn, tol, P20)
        bound_m = cost_bound_min(fn, tol, -0.2, P20)
        ok = ok and realized_a <= bound_a and realized_m <= bound_m and bound_m <= bound_a
        parts.append(f"tol={tol:g}: {realized_a}<={bound_a:.1f}, {realized_m}<={bound_m:.1f}")
    _verdict(7, ok, "; ".join(parts))


def test_criterion_08_cone_scanner():
    parabola_report = cone_membership_scan(make_parabola(IV), P20)
    wide = make_hump(0.0, 2.0 * critical_width(P40, IV), IV)
    wide_report = cone_membership_scan(wide, P40)
    narrow = make_hump(0.0, critical_width(P20, IV), IV)
    narrow_report = cone_membership_scan(narrow, P20)
    ok = (
        not parabola_report.violated
        and not wide_report.violated
        and narrow_report.violated
        and narrow_report.witness is not None
    )
    _verdict(8, ok, f"parabola margin={parabola_report.margin:.2f}, "
                    f"wide hump margin={wide_report.margin:.2f}, "
                    f"narrow hump margin={narrow_report.margin:.2f}")


def test_criterion_09_scale_invariance():
    fn = reference_hump()
    base_approx = approximate(fn.f, ApproxConfig(0.02, P20, IV))

    def min_coords(f, tol):
        state = MinState.initial(f, MinConfig(tol, P20, IV))
        while not state.finished:
            min_step(state)
        return state.partition.coords.copy(), state.report()

    base_coords, base_report = min_coords(fn.f, 0.02)
    ok = True
    for gamma in (1e-3, 1.0, 1e3):
        scaled = approximate(lambda x, g=gamma: g * fn.f(x),
                             ApproxConfig(gamma * 0.02, P20, IV))
        ok = ok and np.array_equal(scaled.spline.knots, base_approx.spline.knots)
        coords, report = min_coords(lambda x, g=gamma: g * fn.f(x), gamma * 0.02)
        ok = ok and np.array_equal(coords, base_coords)
        ok = ok and report.n_points == base_report.n_points
    _verdict(9, ok, f"gamma in {{1e-3, 1, 1e3}}: approx knots ({base_approx.n_points}) "
                    f"and min samples ({base_report.n_points}) identical")


def test_criterion_10_bench_determinism(tmp_path, capsys):
    def run(tag, workers):
        out = tmp_path / f"bench_{tag}.csv"
        code = main([
            "bench", "--families", "hump,osc,oscpar", "--trials", "4",
            "--seed", "99", "--tol", "1e-3", "--mode", "approx",
            "--out", str(out), "--workers", str(workers),
            "--grid", "2000", "--ninit", "20",
        ])
        assert code == 0
        with open(out, newline="") as f:
            rows = list(csv.reader(f))
        # Everything except the wall-time column must be reproducible.
        assert rows[0][-1] == "wall_time_s"
        return [row[:-1] for row in rows]

    first = run("a", 1)
    second = run("b", 1)
    parallel = run("c", 4)
    capsys.readouterr()
    ok = first == second == parallel
    _verdict(10, ok, f"{len(first) - 1} rows identical across reruns and workers 1/4")
