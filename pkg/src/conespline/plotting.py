"""Figure rendering for the command line front end.

Uses the Agg backend so figures can be written headlessly next to the
delimited output files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .approx import ApproxReport
from .core import Interval, _Evaluator, spline_eval
from .minimize import MinReport

__all__ = ["save_approx_figure", "save_bench_figure", "save_min_figure"]


def save_approx_figure(path: str, f, report: ApproxReport, interval: Interval) -> None:
    xs = np.linspace(interval.a, interval.b, 2049)
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(xs, _Evaluator(f)(xs), lw=1.4, label="target")
    ax.plot(xs, spline_eval(report.spline, xs), lw=1.0, ls="--", label="spline")
    ax.plot(report.spline.knots, report.spline.values, ".", ms=3.5, label="samples")
    ax.set_xlabel("x")
    ax.set_title(
        f"{report.n_points} points, {report.n_iterations} passes, "
        f"converged={report.converged}"
    )
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_min_figure(path: str, f, report: MinReport, interval: Interval) -> None:
    xs = np.linspace(interval.a, interval.b, 2049)
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(xs, _Evaluator(f)(xs), lw=1.4, label="target")
    ax.axhline(report.value, color="tab:red", lw=0.9, ls=":", label=f"value={report.value:g}")
    for left, right in report.argmin_candidates:
        ax.axvspan(left, right, color="tab:orange", alpha=0.3, lw=0)
    ax.set_xlabel("x")
    ax.set_title(
        f"{report.n_points} points, {report.n_iterations} passes, "
        f"converged={report.converged}"
    )
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_bench_figure(path: str, rows: list[dict], title: str) -> None:
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    for family in dict.fromkeys(row["family"] for row in rows):
        trials = [row["trial"] for row in rows if row["family"] == family]
        points = [row["n_points"] for row in rows if row["family"] == family]
        ax.plot(trials, points, "o", ms=3.5, label=family)
    ax.set_xlabel("trial")
    ax.set_ylabel("points")
    ax.set_title(title)
    if rows:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
