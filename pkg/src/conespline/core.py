"""Primitives shared by the adaptive approximation and minimization loops.

This module holds the value types (intervals, cone parameters, exact dyadic
point identities), the cached sample partition that both algorithms refine,
the centered second-difference error indicator that drives refinement, and
piecewise linear spline construction and evaluation.

The cone of eligible functions is parameterized by an initial subinterval
count ``n_init`` and an inflation constant ``c0``.  Two derived quantities
appear throughout:

* the critical width ``H = 3 * (b - a) / (n_init - 1)``, the widest window
  on which local second-derivative information is trusted, and
* the inflation factor ``C(h) = c0 * H / (H - h)`` for ``0 < h < H``, which
  converts an observed second difference at scale ``h`` into a bound on the
  second derivative nearby.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "CapabilityError",
    "ConeParams",
    "DyadicPartition",
    "DyadicPoint",
    "EvaluationError",
    "Interval",
    "LinearSpline",
    "critical_width",
    "divided_difference",
    "inflation_factor",
    "local_error_indicator",
    "refine_interval",
    "spline_eval",
    "spline_from_partition",
]


class EvaluationError(RuntimeError):
    """A function oracle returned a non-finite or non-scalar value.

    Attributes:
        x: Coordinate at which the offending evaluation happened, when known.
    """

    def __init__(self, message: str, x: float | None = None):
        super().__init__(message)
        self.x = x


class CapabilityError(ValueError):
    """An operation needs an oracle (e.g. a derivative) that was not supplied."""


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[a, b]`` with ``a < b``."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError(f"interval endpoints must be finite, got [{self.a}, {self.b}]")
        if not self.a < self.b:
            raise ValueError(f"interval needs a < b, got [{self.a}, {self.b}]")

    @property
    def width(self) -> float:
        return self.b - self.a

    def __contains__(self, x: float) -> bool:
        return self.a <= x <= self.b


@dataclass(frozen=True)
class ConeParams:
    """Cone parameters: initial subinterval count and inflation constant.

    Args:
        n_init: Number of subintervals in the initial uniform partition.
            Must be at least 5 so the refinement stencils fit.
        c0: Inflation constant, at least 1.
    """

    n_init: int
    c0: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.n_init, (int, np.integer)) or isinstance(self.n_init, bool):
            raise ValueError(f"n_init must be an integer, got {self.n_init!r}")
        if self.n_init < 5:
            raise ValueError(f"n_init must be at least 5, got {self.n_init}")
        if not np.isfinite(self.c0) or self.c0 < 1.0:
            raise ValueError(f"c0 must be finite and at least 1, got {self.c0}")


def critical_width(params: ConeParams, interval: Interval) -> float:
    """Widest window width trusted by the cone: ``3 * (b - a) / (n_init - 1)``."""
    return 3.0 * interval.width / (params.n_init - 1)


def inflation_factor(h, params: ConeParams, interval: Interval):
    """Inflation factor ``C(h) = c0 * H / (H - h)`` with ``H`` the critical width.

    Accepts a scalar or an array of widths ``h``; every entry must satisfy
    ``0 < h < H``.
    """
    big_h = critical_width(params, interval)
    h_arr = np.asarray(h, dtype=float)
    if np.any(h_arr <= 0.0) or np.any(h_arr >= big_h):
        raise ValueError(f"width h must lie strictly inside (0, {big_h}), got {h}")
    out = params.c0 * big_h / (big_h - h_arr)
    if np.isscalar(h) or h_arr.ndim == 0:
        return float(out)
    return out


def divided_difference(f_left, f_mid, f_right, width):
    """Scaled centered second difference over a subinterval of the given width.

    For values of ``f`` at ``alpha``, ``(alpha + beta) / 2`` and ``beta`` with
    ``width = beta - alpha``, returns

        (2 * f(beta) - 4 * f((alpha + beta) / 2) + 2 * f(alpha)) / width**2

    which is a second-order divided difference: twice its absolute value is
    squeezed between the smallest and largest slope variation of ``f'`` on
    ``[alpha, beta]``.
    """
    w = np.asarray(width, dtype=float)
    if np.any(w <= 0.0):
        raise ValueError(f"width must be positive, got {width}")
    return (2.0 * np.asarray(f_right) - 4.0 * np.asarray(f_mid) + 2.0 * np.asarray(f_left)) / (w * w)


def local_error_indicator(f_left, f_mid, f_right, h, params: ConeParams, interval: Interval):
    """Data-driven bound on the spline error near a point of the partition.

    Given samples at three consecutive partition points with uniform spacing
    ``h``, returns ``C(3 * h) / 8 * |f_right - 2 * f_mid + f_left|``.  Requires
    ``0 < 3 * h < H``; the initial uniform spacing and all dyadic refinements
    of it satisfy this automatically.

    Values may be scalars or arrays (broadcast together); ``h`` is a scalar.
    """
    factor = inflation_factor(3.0 * float(h), params, interval)
    second_diff = np.asarray(f_right) - 2.0 * np.asarray(f_mid) + np.asarray(f_left)
    out = 0.125 * factor * np.abs(second_diff)
    if np.isscalar(f_mid) and np.isscalar(f_left) and np.isscalar(f_right):
        return float(out)
    return out


@total_ordering
@dataclass(frozen=True)
class DyadicPoint:
    """Exact identity of a partition point.

    The point ``(level, index)`` sits at coordinate
    ``a + index * (b - a) / (n_init * 2**level)``.  Identities are stored in
    canonical form (``index`` odd, or ``level == 0``), so every representable
    coordinate has exactly one identity and midpoint insertion deduplicates
    exactly, without floating-point comparisons.
    """

    level: int
    index: int

    def __post_init__(self) -> None:
        if self.level < 0 or self.index < 0:
            raise ValueError(f"level and index must be nonnegative, got {self}")
        if self.level > 0 and self.index % 2 == 0:
            raise ValueError(f"identity not canonical (even index at level > 0): {self}")

    @classmethod
    def canonical(cls, level: int, index: int) -> "DyadicPoint":
        """Reduce ``(level, index)`` to canonical form and build the point."""
        while level > 0 and index % 2 == 0:
            level -= 1
            index //= 2
        return cls(level, index)

    def __lt__(self, other: "DyadicPoint") -> bool:
        # Compare index1 / 2**level1 < index2 / 2**level2 in exact integers.
        return self.index << other.level < other.index << self.level

    def coordinate(self, interval: Interval, n_init: int) -> float:
        """Floating-point coordinate of this identity on the given grid."""
        denom = n_init << self.level
        if self.index == 0:
            return interval.a
        if self.index == denom:
            return interval.b
        return interval.a + (self.index / denom) * interval.width

    def midpoint(self, other: "DyadicPoint") -> "DyadicPoint":
        """Exact dyadic midpoint of two identities."""
        k = (self.index << other.level) + (other.index << self.level)
        return DyadicPoint.canonical(self.level + other.level + 1, k)


class _Evaluator:
    """Evaluate an oracle on coordinate batches, probing once for array support.

    The first call tries the oracle on the whole coordinate array; oracles
    built from numpy operations answer in one shot, while plain scalar
    callables raise or return the wrong shape and are then called pointwise.
    Every batch is checked for non-finite values.
    """

    def __init__(self, f: Callable):
        self._f = f
        self._vectorized: bool | None = None

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if coords.size == 0:
            return np.empty(0, dtype=float)
        if self._vectorized is None:
            if coords.size == 1:
                # A one-point batch cannot settle vectorization; answer it
                # pointwise so the probe never wastes an oracle call.
                value = float(self._f(float(coords.flat[0])))
                values = np.full(coords.shape, value, dtype=float)
                self._check_finite(coords, values)
                return values
            self._probe(coords)
        if self._vectorized:
            values = np.asarray(self._f(coords), dtype=float)
        else:
            values = np.array([float(self._f(float(c))) for c in coords.flat], dtype=float).reshape(coords.shape)
        self._check_finite(coords, values)
        return values

    def _probe(self, coords: np.ndarray) -> None:
        try:
            out = self._f(coords)
        except (TypeError, ValueError, AttributeError):
            self._vectorized = False
            return
        self._vectorized = np.shape(out) == coords.shape

    @staticmethod
    def _check_finite(coords: np.ndarray, values: np.ndarray) -> None:
        bad = ~np.isfinite(values)
        if np.any(bad):
            i = int(np.argmax(np.atleast_1d(bad)))
            raise EvaluationError(
                f"oracle returned non-finite value {values.flat[i]!r} at x={coords.flat[i]!r}",
                x=float(coords.flat[i]),
            )


class DyadicPartition:
    """Sorted dyadic partition of an interval with cached oracle values.

    Each point is identified exactly by a :class:`DyadicPoint`; the number of
    cached values equals the number of distinct oracle evaluations made so
    far.  The partition also carries the current global refinement level
    ``global_level``; level ``l`` spacing is ``(b - a) / (n_init * 2**l)``.
    """

    def __init__(
        self,
        interval: Interval,
        params: ConeParams,
        points: Sequence[DyadicPoint],
        values: Sequence[float],
        global_level: int = 0,
    ):
        if len(points) != len(values):
            raise ValueError("points and values must have equal length")
        order = sorted(range(len(points)), key=lambda i: points[i])
        self.interval = interval
        self.params = params
        self._points: list[DyadicPoint] = [points[i] for i in order]
        self._values = np.asarray([values[i] for i in order], dtype=float)
        self._coords = np.asarray(
            [p.coordinate(interval, params.n_init) for p in self._points], dtype=float
        )
        self._positions = {p: i for i, p in enumerate(self._points)}
        if len(self._positions) != len(self._points):
            raise ValueError("duplicate points in partition")
        self._level = global_level

    @classmethod
    def initial(cls, interval: Interval, params: ConeParams, f: Callable) -> "DyadicPartition":
        """Uniform partition with ``n_init`` subintervals, sampling ``f`` once per point."""
        points = [DyadicPoint(0, k) for k in range(params.n_init + 1)]
        coords = np.asarray([p.coordinate(interval, params.n_init) for p in points])
        values = _Evaluator(f)(coords)
        return cls(interval, params, points, values)

    # -- read access ------------------------------------------------------

    @property
    def n_points(self) -> int:
        return len(self._points)

    @property
    def global_level(self) -> int:
        return self._level

    @property
    def current_spacing(self) -> float:
        """Level spacing ``(b - a) / (n_init * 2**global_level)``."""
        return self.interval.width / (self.params.n_init << self._level)

    @property
    def points(self) -> list[DyadicPoint]:
        """Sorted point identities (do not mutate)."""
        return self._points

    @property
    def coords(self) -> np.ndarray:
        """Sorted coordinates (do not mutate)."""
        return self._coords

    @property
    def values(self) -> np.ndarray:
        """Cached values in coordinate order (do not mutate)."""
        return self._values

    def __contains__(self, point: DyadicPoint) -> bool:
        return point in self._positions

    def position_of(self, point: DyadicPoint) -> int:
        try:
            return self._positions[point]
        except KeyError:
            raise ValueError(f"{point} is not a partition point") from None

    def point_at(self, position: int) -> DyadicPoint:
        return self._points[position]

    def value_of(self, point: DyadicPoint) -> float:
        return float(self._values[self.position_of(point)])

    # -- mutation ---------------------------------------------------------

    def advance_level(self) -> None:
        self._level += 1

    def insert_points(self, new_points: Sequence[DyadicPoint], new_values: Sequence[float]) -> None:
        """Merge distinct new points (with their values) into the partition."""
        if len(new_points) != len(new_values):
            raise ValueError("points and values must have equal length")
        if not new_points:
            return
        order = sorted(range(len(new_points)), key=lambda i: new_points[i])
        pts = [new_points[i] for i in order]
        vals = [new_values[i] for i in order]
        for p in pts:
            if p in self._positions:
                raise ValueError(f"{p} is already in the partition")
            if p.index > (self.params.n_init << p.level):
                raise ValueError(f"{p} lies outside the partition interval")
        merged_points: list[DyadicPoint] = []
        merged_values: list[float] = []
        i = j = 0
        old_pts, old_vals = self._points, self._values
        while i < len(old_pts) and j < len(pts):
            if pts[j] < old_pts[i]:
                merged_points.append(pts[j])
                merged_values.append(vals[j])
                j += 1
            else:
                merged_points.append(old_pts[i])
                merged_values.append(float(old_vals[i]))
                i += 1
        merged_points.extend(old_pts[i:])
        merged_values.extend(float(v) for v in old_vals[i:])
        merged_points.extend(pts[j:])
        merged_values.extend(vals[j:])
        self._points = merged_points
        self._values = np.asarray(merged_values, dtype=float)
        self._coords = np.asarray(
            [p.coordinate(self.interval, self.params.n_init) for p in merged_points], dtype=float
        )
        self._positions = {p: i for i, p in enumerate(merged_points)}


def refine_interval(partition: DyadicPartition, left_point: DyadicPoint, f: Callable) -> DyadicPoint:
    """Insert the midpoint of the cell whose left endpoint is ``left_point``.

    The cell is the one currently to the right of ``left_point``, so a second
    call with the same point splits the remaining left half.  The midpoint
    identity is computed in exact dyadic arithmetic; when it is somehow
    already present the existing point is returned without evaluating ``f``.

    Returns:
        The midpoint identity, present in the partition with a cached value.
    """
    pos = partition.position_of(left_point)
    if pos == partition.n_points - 1:
        raise ValueError(f"{left_point} is the right endpoint; it has no cell to refine")
    right_point = partition.point_at(pos + 1)
    mid = left_point.midpoint(right_point)
    if mid in partition:
        return mid
    coord = mid.coordinate(partition.interval, partition.params.n_init)
    value = _Evaluator(f)(np.asarray([coord]))[0]
    partition.insert_points([mid], [float(value)])
    return mid


@dataclass(frozen=True)
class LinearSpline:
    """Piecewise linear interpolant over a sorted knot sequence."""

    knots: np.ndarray
    values: np.ndarray
    interval: Interval

    def __call__(self, x):
        return spline_eval(self, x)

    @property
    def n_knots(self) -> int:
        return len(self.knots)


def spline_from_partition(partition: DyadicPartition) -> LinearSpline:
    """Linear spline interpolating every cached sample of the partition."""
    return LinearSpline(
        knots=partition.coords.copy(),
        values=partition.values.copy(),
        interval=partition.interval,
    )


def spline_eval(spline: LinearSpline, x):
    """Evaluate the spline at a scalar or array of coordinates.

    On the cell ``[x_l, x_r]`` containing ``x`` this returns the two-point
    interpolation ``v_l * (x_r - x) / (x_r - x_l) + v_r * (x - x_l) / (x_r - x_l)``,
    so evaluation at a knot reproduces its stored value exactly.

    Raises:
        ValueError: If any coordinate lies outside the spline's interval.
    """
    xs = np.asarray(x, dtype=float)
    a, b = spline.interval.a, spline.interval.b
    if np.any(xs < a) or np.any(xs > b):
        bad = xs[(xs < a) | (xs > b)].flat[0] if xs.ndim else float(xs)
        raise ValueError(f"x={bad!r} lies outside the spline interval [{a}, {b}]")
    knots, vals = spline.knots, spline.values
    idx = np.clip(np.searchsorted(knots, xs, side="right") - 1, 0, len(knots) - 2)
    xl = knots[idx]
    xr = knots[idx + 1]
    w = xr - xl
    out = vals[idx] * ((xr - xs) / w) + vals[idx + 1] * ((xs - xl) / w)
    if np.isscalar(x) or xs.ndim == 0:
        return float(out)
    return out
