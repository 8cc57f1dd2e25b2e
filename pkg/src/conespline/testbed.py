"""Analytic test functions with known derivatives and minima.

Every factory returns a :class:`TestFunction` whose callables accept either
a float or a numpy array.  The members cover the interesting regimes: a
parabola (smooth, trivially non-spiky), a compactly supported piecewise
quadratic hump whose non-spikiness depends on how its width compares with
the grid's critical width, and two oscillatory profiles with unbounded
frequency near the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Interval, _Evaluator, spline_eval

__all__ = [
    "FamilySpec",
    "TestFunction",
    "brute_force_min",
    "dense_sup_error",
    "hump_family",
    "make_hump",
    "make_osc_parabola",
    "make_oscillatory",
    "make_parabola",
    "osc_parabola_family",
    "oscillatory_family",
    "sample_family",
]


def _scalarize(core_fn: Callable[[np.ndarray], np.ndarray]) -> Callable:
    """Wrap an array-only function so floats go in and come out as floats."""

    def wrapped(x):
        arr = np.asarray(x, dtype=float)
        out = core_fn(arr)
        if arr.ndim == 0:
            return float(out)
        return out

    return wrapped


@dataclass(frozen=True)
class TestFunction:
    """A function bundled with its first two derivatives and ground truth.

    Attributes:
        label: Short human-readable description.
        f: The function itself.
        f_prime: First derivative (at kinks: the one-sided value).
        f_second: Second derivative (undefined points get a band's value).
        domain: Interval all three callables are meant for.
        known_min: Exact minimum over ``domain`` when available, else None.
        cone_status: "member" when the function is non-spiky for every
            admissible grid, "conditional" when that depends on the grid
            parameters, "unknown" when no analytic classification exists.
        kinks: Interior points where ``f_second`` jumps; quadrature rules
            align their panels with these.
    """

    label: str
    f: Callable
    f_prime: Callable
    f_second: Callable
    domain: Interval
    known_min: float | None
    cone_status: str
    kinks: tuple[float, ...] = ()


def make_parabola(domain: Interval = Interval(-1.0, 1.0)) -> TestFunction:
    """x^2 / 2: constant curvature, a cone member for every grid."""
    lo = 0.0 if domain.a <= 0.0 <= domain.b else min(domain.a**2, domain.b**2) / 2.0
    return TestFunction(
        label="parabola",
        f=_scalarize(lambda x: x * x / 2.0),
        f_prime=_scalarize(lambda x: x.copy()),
        f_second=_scalarize(lambda x: np.ones_like(x)),
        domain=domain,
        known_min=lo,
        cone_status="member",
    )


def make_hump(
    c: float,
    delta: float,
    domain: Interval = Interval(-1.0, 1.0),
    negated: bool = False,
) -> TestFunction:
    """Piecewise quadratic bump of height 1 supported on [c-2*delta, c+2*delta].

    The support must fit inside ``domain``.  Curvature is +1/delta^2 on the
    outer bands, -1/delta^2 on the middle band, zero outside; shrinking
    ``delta`` below twice the grid's critical width pushes the function out
    of the cone.  With ``negated=True`` the sign is flipped, giving a test
    problem whose global minimum is exactly -1 at ``c``.
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not (domain.a <= c - 2.0 * delta and c + 2.0 * delta <= domain.b):
        raise ValueError(
            f"support [{c - 2 * delta}, {c + 2 * delta}] does not fit in {domain}"
        )
    d2 = delta * delta
    sign = -1.0 if negated else 1.0

    def val(x: np.ndarray) -> np.ndarray:
        u = x - c
        return sign * np.select(
            [np.abs(u) > 2.0 * delta, u < -delta, u <= delta],
            [0.0, (u + 2.0 * delta) ** 2 / (2.0 * d2), 1.0 - u * u / (2.0 * d2)],
            default=(u - 2.0 * delta) ** 2 / (2.0 * d2),
        )

    def slope(x: np.ndarray) -> np.ndarray:
        u = x - c
        return sign * np.select(
            [np.abs(u) > 2.0 * delta, u < -delta, u <= delta],
            [0.0, (u + 2.0 * delta) / d2, -u / d2],
            default=(u - 2.0 * delta) / d2,
        )

    def curvature(x: np.ndarray) -> np.ndarray:
        u = x - c
        return sign * np.select(
            [np.abs(u) > 2.0 * delta, u < -delta, u <= delta],
            [0.0, 1.0 / d2, -1.0 / d2],
            default=1.0 / d2,
        )

    return TestFunction(
        label=f"{'-' if negated else ''}hump(c={c:g}, delta={delta:g})",
        f=_scalarize(val),
        f_prime=_scalarize(slope),
        f_second=_scalarize(curvature),
        domain=domain,
        known_min=-1.0 if negated else 0.0,
        cone_status="conditional",
        kinks=(c - 2.0 * delta, c - delta, c + delta, c + 2.0 * delta),
    )


def _osc_parts(d: float):
    """Value, slope and curvature of x^4 * sin(d/x), continued by 0 at x=0."""

    def val(x: np.ndarray) -> np.ndarray:
        safe = np.where(x == 0.0, 1.0, x)
        return np.where(x == 0.0, 0.0, x**4 * np.sin(d / safe))

    def slope(x: np.ndarray) -> np.ndarray:
        safe = np.where(x == 0.0, 1.0, x)
        out = 4.0 * x**3 * np.sin(d / safe) - d * x * x * np.cos(d / safe)
        return np.where(x == 0.0, 0.0, out)

    def curvature(x: np.ndarray) -> np.ndarray:
        safe = np.where(x == 0.0, 1.0, x)
        out = (12.0 * x * x - d * d) * np.sin(d / safe) - 6.0 * d * x * np.cos(d / safe)
        return np.where(x == 0.0, 0.0, out)

    return val, slope, curvature


def make_oscillatory(d: float, domain: Interval = Interval(-1.0, 1.0)) -> TestFunction:
    """x^4 * sin(d/x): oscillates ever faster toward 0, yet stays C^1 there."""
    val, slope, curvature = _osc_parts(d)
    return TestFunction(
        label=f"oscillatory(d={d:g})",
        f=_scalarize(val),
        f_prime=_scalarize(slope),
        f_second=_scalarize(curvature),
        domain=domain,
        known_min=None,
        cone_status="unknown",
    )


def make_osc_parabola(d: float, domain: Interval = Interval(-1.0, 1.0)) -> TestFunction:
    """10*x^2 plus the oscillatory profile: a well with high-frequency ripple."""
    val, slope, curvature = _osc_parts(d)
    return TestFunction(
        label=f"osc-parabola(d={d:g})",
        f=_scalarize(lambda x: 10.0 * x * x + val(x)),
        f_prime=_scalarize(lambda x: 20.0 * x + slope(x)),
        f_second=_scalarize(lambda x: 20.0 + curvature(x)),
        domain=domain,
        known_min=None,
        cone_status="unknown",
    )


@dataclass(frozen=True)
class FamilySpec:
    """A one-parameter family of test problems for benchmarking.

    ``sample_param`` draws the free parameter from the family's distribution;
    ``build`` turns a drawn parameter into a concrete :class:`TestFunction`.
    Keeping the two apart lets a benchmark draw all parameters up front in
    trial order, so results are reproducible regardless of execution order.
    """

    name: str
    param_name: str
    sample_param: Callable[[np.random.Generator], float]
    build: Callable[[float], TestFunction]


def hump_family(
    domain: Interval = Interval(-1.0, 1.0),
    delta: float = 0.2,
    negated: bool = False,
) -> FamilySpec:
    """Humps of fixed width with center drawn uniformly from [0, 0.6]."""
    return FamilySpec(
        name="hump",
        param_name="c",
        sample_param=lambda rng: float(rng.uniform(0.0, 0.6)),
        build=lambda c: make_hump(c, delta, domain, negated=negated),
    )


def oscillatory_family(domain: Interval = Interval(-1.0, 1.0)) -> FamilySpec:
    """Oscillatory profiles with frequency parameter drawn from [0, 2]."""
    return FamilySpec(
        name="osc",
        param_name="d",
        sample_param=lambda rng: float(rng.uniform(0.0, 2.0)),
        build=lambda d: make_oscillatory(d, domain),
    )


def osc_parabola_family(domain: Interval = Interval(-1.0, 1.0)) -> FamilySpec:
    """Rippled parabolas with frequency parameter drawn from [0, 2]."""
    return FamilySpec(
        name="oscpar",
        param_name="d",
        sample_param=lambda rng: float(rng.uniform(0.0, 2.0)),
        build=lambda d: make_osc_parabola(d, domain),
    )


def sample_family(
    spec: FamilySpec, n_trials: int, seed: int
) -> list[tuple[float, TestFunction]]:
    """Draw ``n_trials`` problems from ``spec``, reproducibly.

    Returns ``(parameter, problem)`` pairs in draw order; the same seed always
    yields the same parameters.
    """
    if n_trials < 0:
        raise ValueError(f"n_trials must be nonnegative, got {n_trials}")
    rng = np.random.default_rng(seed)
    params = [spec.sample_param(rng) for _ in range(n_trials)]
    return [(p, spec.build(p)) for p in params]


def brute_force_min(f: Callable, interval: Interval, m: int = 1_000_000) -> float:
    """Smallest value of ``f`` over ``m + 1`` uniform points of ``interval``."""
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    grid = np.linspace(interval.a, interval.b, m + 1)
    return float(_Evaluator(f)(grid).min())


def dense_sup_error(f: Callable, spline, m: int = 100_000) -> float:
    """Largest deviation of ``spline`` from ``f`` on a uniform grid.

    Checks ``m + 1`` uniform points over the spline's own interval and
    returns the maximum absolute difference.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    grid = np.linspace(spline.interval.a, spline.interval.b, m + 1)
    return float(np.abs(_Evaluator(f)(grid) - spline_eval(spline, grid)).max())
