"""Guaranteed adaptive approximation and minimization for non-spiky functions.

The package provides two adaptive algorithms driven by a second-difference
error indicator (``approximate`` and ``minimize``), the geometric vocabulary
they share (``core``), diagnostics that certify or refute the non-spikiness
assumption and bound the work needed (``diagnostics``), a family of analytic
test functions (``testbed``), and a command line front end (``cli``).
"""

from .approx import ApproxConfig, ApproxReport, approximate, approx_step, ApproxState
from .core import (
    CapabilityError,
    ConeParams,
    DyadicPartition,
    DyadicPoint,
    EvaluationError,
    Interval,
    LinearSpline,
    critical_width,
    divided_difference,
    inflation_factor,
    local_error_indicator,
    refine_interval,
    spline_eval,
    spline_from_partition,
)
from .diagnostics import (
    ConeScanReport,
    DerivativeOracle,
    cone_bound_B,
    cone_membership_scan,
    cost_bound_approx,
    cost_bound_min,
    level_function_L,
    level_function_Lcheck,
    lp_quasinorm,
    neginf_seminorm,
    spline_interval_error_bound,
    sup_norm,
)
from .minimize import MinConfig, MinReport, minimize, min_step, MinState, sided_error_indicator
from .testbed import (
    FamilySpec,
    TestFunction,
    brute_force_min,
    dense_sup_error,
    make_hump,
    make_osc_parabola,
    make_oscillatory,
    make_parabola,
    sample_family,
)

__all__ = [
    "ApproxConfig",
    "ApproxReport",
    "ApproxState",
    "CapabilityError",
    "ConeParams",
    "ConeScanReport",
    "DerivativeOracle",
    "DyadicPartition",
    "DyadicPoint",
    "EvaluationError",
    "FamilySpec",
    "Interval",
    "LinearSpline",
    "MinConfig",
    "MinReport",
    "MinState",
    "TestFunction",
    "approx_step",
    "approximate",
    "brute_force_min",
    "cone_bound_B",
    "cone_membership_scan",
    "cost_bound_approx",
    "cost_bound_min",
    "critical_width",
    "dense_sup_error",
    "divided_difference",
    "inflation_factor",
    "level_function_L",
    "level_function_Lcheck",
    "local_error_indicator",
    "lp_quasinorm",
    "make_hump",
    "make_osc_parabola",
    "make_oscillatory",
    "make_parabola",
    "min_step",
    "minimize",
    "neginf_seminorm",
    "refine_interval",
    "sample_family",
    "sided_error_indicator",
    "spline_eval",
    "spline_from_partition",
    "spline_interval_error_bound",
    "sup_norm",
]

__version__ = "0.1.0"
