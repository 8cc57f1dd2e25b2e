"""Command line front end.

Subcommands:
    approx     adaptively approximate a test function to a tolerance
    min        adaptively minimize a test function to a tolerance
    bench      run seeded trial batches over problem families, write CSV
    diag       cone scan, norms, and cost bound reports

``approx``/``min`` accept ``--plot-data DIR`` to dump run data as CSV with a
rendered figure alongside; ``bench`` always renders a figure next to its
``--out`` file.  Exit codes: 0 on success, 1 on I/O or evaluation failure,
2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .approx import ApproxConfig, approximate
from .core import CapabilityError, ConeParams, EvaluationError, Interval
from .diagnostics import (
    cone_membership_scan,
    cost_bound_approx,
    cost_bound_min,
    lp_quasinorm,
    neginf_seminorm,
    sup_norm,
)
from .minimize import MinConfig, minimize
from .testbed import (
    FamilySpec,
    TestFunction,
    brute_force_min,
    dense_sup_error,
    hump_family,
    make_hump,
    make_osc_parabola,
    make_oscillatory,
    make_parabola,
    osc_parabola_family,
    oscillatory_family,
    sample_family,
)

_FN_ALIASES = {
    "f0": "parabola",
    "f1": "hump",
    "f2": "osc",
    "f3": "oscpar",
}
_FN_CHOICES = ["parabola", "hump", "osc", "oscpar", "f0", "f1", "f2", "f3"]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _build_function(args, negate_hump: bool) -> TestFunction:
    domain = Interval(args.a, args.b)
    name = _FN_ALIASES.get(args.fn, args.fn)
    if name == "parabola":
        return make_parabola(domain)
    if name == "hump":
        return make_hump(args.c, args.delta, domain, negated=negate_hump)
    if name == "osc":
        return make_oscillatory(args.d, domain)
    return make_osc_parabola(args.d, domain)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def cmd_approx(args) -> int:
    fn = _build_function(args, negate_hump=False)
    params = ConeParams(args.ninit, args.c0)
    config = ApproxConfig(args.tol, params, fn.domain, args.max_points)
    report = approximate(fn.f, config)
    sup_err = dense_sup_error(fn.f, report.spline, args.grid)
    print(f"function: {fn.label}")
    print(f"interval: [{_fmt(fn.domain.a)}, {_fmt(fn.domain.b)}]")
    print(f"tolerance: {_fmt(args.tol)}")
    print(f"n_points: {report.n_points}")
    print(f"n_iterations: {report.n_iterations}")
    print(f"converged: {report.converged}")
    print(f"sup_error: {_fmt(sup_err)} (on {args.grid + 1} uniform points)")
    if args.plot_data:
        os.makedirs(args.plot_data, exist_ok=True)
        _write_csv(
            os.path.join(args.plot_data, "knots.csv"),
            ["x", "value"],
            [[x, v] for x, v in zip(report.spline.knots, report.spline.values)],
        )
        _write_csv(
            os.path.join(args.plot_data, "trace.csv"),
            ["level", "n_flagged"],
            [list(entry) for entry in report.trace],
        )
        from .plotting import save_approx_figure

        save_approx_figure(
            os.path.join(args.plot_data, "approx.png"), fn.f, report, fn.domain
        )
        print(f"plot data written to {args.plot_data}")
    return 0


def cmd_min(args) -> int:
    fn = _build_function(args, negate_hump=True)
    params = ConeParams(args.ninit, args.c0)
    config = MinConfig(args.tol, params, fn.domain, args.max_points)
    report = minimize(fn.f, config)
    print(f"function: {fn.label}")
    print(f"interval: [{_fmt(fn.domain.a)}, {_fmt(fn.domain.b)}]")
    print(f"tolerance: {_fmt(args.tol)}")
    print(f"value: {_fmt(report.value)}")
    print(f"n_points: {report.n_points}")
    print(f"n_iterations: {report.n_iterations}")
    print(f"converged: {report.converged}")
    print(f"argmin_candidates: {len(report.argmin_candidates)}")
    if args.grid > 0:
        gap = report.value - brute_force_min(fn.f, fn.domain, args.grid)
        print(f"min_gap: {_fmt(gap)} (against {args.grid + 1} uniform points)")
    if args.plot_data:
        os.makedirs(args.plot_data, exist_ok=True)
        _write_csv(
            os.path.join(args.plot_data, "trace.csv"),
            ["level", "n_plus", "n_minus", "running_min"],
            [list(entry) for entry in report.trace],
        )
        _write_csv(
            os.path.join(args.plot_data, "candidates.csv"),
            ["left", "right"],
            [list(cell) for cell in report.argmin_candidates],
        )
        from .plotting import save_min_figure

        save_min_figure(os.path.join(args.plot_data, "min.png"), fn.f, report, fn.domain)
        print(f"plot data written to {args.plot_data}")
    return 0


def _bench_family_specs(names: str, mode: str) -> list[FamilySpec]:
    specs = []
    for raw in names.split(","):
        name = _FN_ALIASES.get(raw.strip(), raw.strip())
        if name == "hump":
            specs.append(hump_family(negated=(mode == "min")))
        elif name == "osc":
            specs.append(oscillatory_family())
        elif name == "oscpar":
            specs.append(osc_parabola_family())
        else:
            raise ValueError(f"unknown family {raw!r} (expected hump/osc/oscpar)")
    return specs


def cmd_bench(args) -> int:
    workers = int(os.environ.get("CONESPLINE_THREADS", args.workers))
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    specs = _bench_family_specs(args.families, args.mode)
    params = ConeParams(args.ninit, args.c0)
    domain = Interval(-1.0, 1.0)

    tasks = []
    for spec in specs:
        for trial, (param, fn) in enumerate(sample_family(spec, args.trials, args.seed)):
            tasks.append((spec.name, trial, param, fn))

    def run_one(task):
        family, trial, param, fn = task
        start = time.perf_counter()
        if args.mode == "approx":
            report = approximate(fn.f, ApproxConfig(args.tol, params, domain))
            metric = dense_sup_error(fn.f, report.spline, args.grid)
        else:
            report = minimize(fn.f, MinConfig(args.tol, params, domain))
            metric = report.value - brute_force_min(fn.f, domain, args.bf_grid)
        elapsed = time.perf_counter() - start
        return {
            "family": family,
            "trial": trial,
            "param": param,
            "n_points": report.n_points,
            "n_iterations": report.n_iterations,
            "converged": report.converged,
            "metric": metric,
            "wall_time_s": elapsed,
        }

    if workers == 1:
        rows = [run_one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_one, tasks))

    metric_name = "sup_error" if args.mode == "approx" else "min_gap"
    header = ["family", "trial", "param", "tol", "n_points", "n_iterations",
              "converged", metric_name, "wall_time_s"]
    _write_csv(
        args.out,
        header,
        [[r["family"], r["trial"], r["param"], args.tol, r["n_points"],
          r["n_iterations"], r["converged"], r["metric"], r["wall_time_s"]]
         for r in rows],
    )

    from .plotting import save_bench_figure

    figure_path = os.path.splitext(args.out)[0] + ".png"
    save_bench_figure(figure_path, rows, f"{args.mode}, tol={args.tol:g}")

    print(f"mode: {args.mode}  tol: {args.tol:g}  n_init: {args.ninit}  "
          f"c0: {args.c0:g}  trials: {args.trials}  seed: {args.seed}")
    print(f"{'family':<8} {'success':>9} {'mean points':>12} {'mean passes':>12} "
          f"{'mean ' + metric_name:>16}")
    for spec in specs:
        fam = [r for r in rows if r["family"] == spec.name]
        if not fam:
            print(f"{spec.name:<8} {'0/0':>9} {'-':>12} {'-':>12} {'-':>16}")
            continue
        if args.mode == "approx":
            wins = sum(r["metric"] <= args.tol for r in fam)
        else:
            wins = sum(-1e-9 <= r["metric"] <= args.tol for r in fam)
        print(f"{spec.name:<8} {f'{wins}/{len(fam)}':>9} "
              f"{np.mean([r['n_points'] for r in fam]):>12.1f} "
              f"{np.mean([r['n_iterations'] for r in fam]):>12.2f} "
              f"{np.mean([r['metric'] for r in fam]):>16.3e}")
    print(f"rows written to {args.out}; figure written to {figure_path}")
    return 0


def cmd_diag_cone(args) -> int:
    fn = _build_function(args, negate_hump=False)
    params = ConeParams(args.ninit, args.c0)
    report = cone_membership_scan(fn, params, fn.domain, args.grid, args.subgrid)
    print(f"function: {fn.label}")
    print(f"violated: {report.violated}")
    print(f"margin: {_fmt(report.margin)}")
    print(f"scanned_resolution: {report.scanned_resolution}")
    if report.witness is not None:
        alpha, beta, h_minus, h_plus = report.witness
        print(f"witness: alpha={_fmt(alpha)} beta={_fmt(beta)} "
              f"h_minus={_fmt(h_minus)} h_plus={_fmt(h_plus)}")
    return 0


def cmd_diag_norms(args) -> int:
    fn = _build_function(args, negate_hump=False)
    print(f"function: {fn.label}")
    sup = sup_norm(fn.f_second, fn.domain, args.grid)
    neg = neginf_seminorm(fn.f_prime, fn.domain)
    half = lp_quasinorm(fn.f_second, 0.5, fn.domain, args.grid, fn.kinks)
    print(f"sup_norm_second: {_fmt(sup)}")
    print(f"neginf_seminorm_second: {_fmt(neg)}")
    print(f"half_quasinorm_second: {_fmt(half)}")
    if half > 0.0:
        print(f"spikiness: {_fmt(sup * fn.domain.width ** 2 / half)}")
    return 0


def cmd_diag_costbound(args) -> int:
    negate = args.mode == "min" and _FN_ALIASES.get(args.fn, args.fn) == "hump"
    fn = _build_function(args, negate_hump=negate)
    params = ConeParams(args.ninit, args.c0)
    print(f"function: {fn.label}")
    print(f"tolerance: {_fmt(args.tol)}")
    bound = cost_bound_approx(fn, args.tol, params)
    print(f"cost_bound_approx: {_fmt(bound)}")
    if args.mode == "min":
        grid = np.linspace(fn.domain.a, fn.domain.b, args.grid + 1)
        x_star = float(grid[np.argmin(fn.f(grid))])
        bound_min = cost_bound_min(fn, args.tol, x_star, params)
        print(f"x_star: {_fmt(x_star)} (densest grid argmin)")
        print(f"cost_bound_min: {_fmt(bound_min)}")
    return 0


def _add_function_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--fn", required=True, choices=_FN_CHOICES,
                        help="test function (f0..f3 are aliases)")
    parser.add_argument("--c", type=float, default=0.0, help="hump center")
    parser.add_argument("--delta", type=float, default=0.2, help="hump half-core width")
    parser.add_argument("--d", type=float, default=1.0, help="oscillation parameter")
    parser.add_argument("--a", type=float, default=-1.0, help="interval left end")
    parser.add_argument("--b", type=float, default=1.0, help="interval right end")


def _add_cone_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ninit", type=int, default=20, help="initial cells")
    parser.add_argument("--c0", type=float, default=10.0, help="inflation constant")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conespline",
        description="Adaptive guaranteed approximation and minimization "
                    "of non-spiky functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_approx = sub.add_parser("approx", help="approximate a test function")
    _add_function_args(p_approx)
    _add_cone_args(p_approx)
    p_approx.add_argument("--tol", type=float, required=True, help="error tolerance")
    p_approx.add_argument("--max-points", type=int, default=1_000_000)
    p_approx.add_argument("--grid", type=int, default=100_000,
                          help="uniform points for the reported sup error")
    p_approx.add_argument("--plot-data", default=None,
                          help="directory for CSV dumps and a rendered figure")
    p_approx.set_defaults(func=cmd_approx)

    p_min = sub.add_parser("min", help="minimize a test function "
                                       "(the hump is negated so its minimum is -1)")
    _add_function_args(p_min)
    _add_cone_args(p_min)
    p_min.add_argument("--tol", type=float, required=True, help="error tolerance")
    p_min.add_argument("--max-points", type=int, default=1_000_000)
    p_min.add_argument("--grid", type=int, default=200_000,
                       help="uniform points for the reported gap; 0 disables")
    p_min.add_argument("--plot-data", default=None,
                       help="directory for CSV dumps and a rendered figure")
    p_min.set_defaults(func=cmd_min)

    p_bench = sub.add_parser("bench", help="seeded trial batches over families")
    p_bench.add_argument("--families", default="hump,osc,oscpar",
                         help="comma list of hump,osc,oscpar (aliases f1,f2,f3)")
    p_bench.add_argument("--trials", type=int, default=100)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--tol", type=float, required=True)
    _add_cone_args(p_bench)
    p_bench.add_argument("--mode", choices=["approx", "min"], default="approx")
    p_bench.add_argument("--out", required=True, help="CSV output path")
    p_bench.add_argument("--workers", type=int, default=1,
                         help="thread count (CONESPLINE_THREADS overrides)")
    p_bench.add_argument("--grid", type=int, default=200_000,
                         help="uniform points for per-trial sup error")
    p_bench.add_argument("--bf-grid", type=int, default=1_000_000,
                         help="uniform points for the reference minimum")
    p_bench.set_defaults(func=cmd_bench)

    p_diag = sub.add_parser("diag", help="diagnostics")
    diag_sub = p_diag.add_subparsers(dest="diag_command", required=True)

    p_cone = diag_sub.add_parser("cone", help="scan for cone violations")
    _add_function_args(p_cone)
    _add_cone_args(p_cone)
    p_cone.add_argument("--grid", type=int, default=1024)
    p_cone.add_argument("--subgrid", type=int, default=64)
    p_cone.set_defaults(func=cmd_diag_cone)

    p_norms = diag_sub.add_parser("norms", help="second-derivative norms")
    _add_function_args(p_norms)
    p_norms.add_argument("--grid", type=int, default=100_000)
    p_norms.set_defaults(func=cmd_diag_norms)

    p_cost = diag_sub.add_parser("costbound", help="a-priori cost bounds")
    _add_function_args(p_cost)
    _add_cone_args(p_cost)
    p_cost.add_argument("--tol", type=float, required=True)
    p_cost.add_argument("--mode", choices=["approx", "min"], default="approx")
    p_cost.add_argument("--grid", type=int, default=200_000,
                        help="uniform points to locate the minimizer")
    p_cost.set_defaults(func=cmd_diag_costbound)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, CapabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
