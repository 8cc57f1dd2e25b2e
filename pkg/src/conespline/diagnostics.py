"""Diagnostics: norms, cone certificates, and a-priori cost bounds.

The adaptive algorithms are guaranteed only for non-spiky functions: the
second derivative anywhere must be dominated by an inflated slope bound of
the first derivative taken over a window next to the spot in question.  The
routines here estimate the quantities in that condition from samples, search
for violations, and turn analytic knowledge of a function into upper bounds
on how many samples the algorithms will spend.

All estimators are grid based and one sided: a reported sup never exceeds
the true sup, a reported slope infimum never falls below the true infimum.
A violation report is therefore trustworthy, while a clean scan says only
that no violation was visible at the scanned resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    CapabilityError,
    ConeParams,
    Interval,
    _Evaluator,
    critical_width,
    inflation_factor,
)

__all__ = [
    "ConeScanReport",
    "DerivativeOracle",
    "cone_bound_B",
    "cone_membership_scan",
    "cost_bound_approx",
    "cost_bound_min",
    "level_function_L",
    "level_function_Lcheck",
    "lp_quasinorm",
    "neginf_seminorm",
    "spline_interval_error_bound",
    "sup_norm",
]


class DerivativeOracle:
    """Evaluation access to a function and whichever derivatives it has.

    Diagnostics that need a derivative raise :class:`CapabilityError` when
    it is absent, naming what was missing, instead of guessing by finite
    differences.
    """

    def __init__(self, f: Callable, f_prime: Callable | None = None,
                 f_second: Callable | None = None) -> None:
        self._f = _Evaluator(f)
        self._prime = _Evaluator(f_prime) if f_prime is not None else None
        self._second = _Evaluator(f_second) if f_second is not None else None

    @property
    def has_prime(self) -> bool:
        return self._prime is not None

    @property
    def has_second(self) -> bool:
        return self._second is not None

    def f(self, x):
        return self._f(x)

    def prime(self, x):
        if self._prime is None:
            raise CapabilityError("this diagnostic needs a first-derivative oracle")
        return self._prime(x)

    def second(self, x):
        if self._second is None:
            raise CapabilityError("this diagnostic needs a second-derivative oracle")
        return self._second(x)


def _coerce_oracle(target) -> DerivativeOracle:
    """Accept a DerivativeOracle, a bundle with f/f_prime/f_second, or a callable."""
    if isinstance(target, DerivativeOracle):
        return target
    if hasattr(target, "f"):
        return DerivativeOracle(
            target.f,
            getattr(target, "f_prime", None),
            getattr(target, "f_second", None),
        )
    if callable(target):
        return DerivativeOracle(target)
    raise TypeError(f"cannot build a derivative oracle from {target!r}")


def _default_interval(target, interval: Interval | None) -> Interval:
    if interval is not None:
        return interval
    domain = getattr(target, "domain", None)
    if isinstance(domain, Interval):
        return domain
    raise ValueError("an interval is required when the target carries no domain")


def sup_norm(g: Callable, interval: Interval, m: int = 100_000) -> float:
    """Largest |g| over ``m + 1`` uniform points; never above the true sup."""
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    grid = np.linspace(interval.a, interval.b, m + 1)
    return float(np.abs(_Evaluator(g)(grid)).max())


def neginf_seminorm(g: Callable, interval: Interval, m: int = 257) -> float:
    """Smallest absolute slope of ``g`` between any two of ``m + 1`` grid points.

    With ``g`` a first derivative this estimates how flat the second
    derivative is allowed to be over ``interval``; restricting to grid pairs
    makes the estimate an upper bound of the true infimum.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    xs = np.linspace(interval.a, interval.b, m + 1)
    gs = _Evaluator(g)(xs)
    iu, ju = np.triu_indices(m + 1, k=1)
    quotients = np.abs((gs[ju] - gs[iu]) / (xs[ju] - xs[iu]))
    return float(quotients.min())


def lp_quasinorm(
    g: Callable,
    p: float,
    interval: Interval,
    m: int = 100_000,
    kinks: tuple[float, ...] = (),
) -> float:
    """``(integral of |g|^p)^(1/p)`` by midpoint quadrature.

    Panels are aligned with the interior ``kinks`` so piecewise-defined
    integrands are integrated exactly piece by piece; ``m`` midpoints are
    distributed over the pieces in proportion to their width.
    """
    if p <= 0.0:
        raise ValueError(f"p must be positive, got {p}")
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    cuts = sorted({interval.a, interval.b}
                  | {k for k in kinks if interval.a < k < interval.b})
    evaluate = _Evaluator(g)
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        k = max(1, round(m * (hi - lo) / interval.width))
        mids = lo + (np.arange(k) + 0.5) * (hi - lo) / k
        total += float((np.abs(evaluate(mids)) ** p).sum() * (hi - lo) / k)
    return total ** (1.0 / p)


def spline_interval_error_bound(h: float, sup_second: float) -> float:
    """Worst error of a two-point linear interpolant over one cell of width h."""
    if h <= 0.0:
        raise ValueError(f"h must be positive, got {h}")
    if sup_second < 0.0:
        raise ValueError(f"sup_second must be nonnegative, got {sup_second}")
    return h * h * sup_second / 8.0


def cone_bound_B(
    f_prime: Callable,
    alpha: float,
    beta: float,
    h_minus: float,
    h_plus: float,
    params: ConeParams,
    interval: Interval,
    m: int = 257,
) -> float:
    """Largest curvature the cone allows on [alpha, beta] for these windows.

    The left window is ``[beta - h_minus, alpha]``, the right window
    ``[beta, alpha + h_plus]``; each contributes the inflated slope infimum
    of ``f_prime`` over itself, provided it lies inside ``interval``.  With
    both windows inside, the bound is the larger contribution; with one
    inside, that side alone.  Both windows falling outside the domain (only
    possible for very coarse initial grids) leaves nothing to bound with and
    raises ValueError.
    """
    if not (interval.a <= alpha < beta <= interval.b):
        raise ValueError(f"need a <= alpha < beta <= b, got [{alpha}, {beta}] in {interval}")
    H = critical_width(params, interval)
    for name, h in (("h_minus", h_minus), ("h_plus", h_plus)):
        if not (beta - alpha < h < H):
            raise ValueError(
                f"{name}={h} must lie strictly between beta - alpha = "
                f"{beta - alpha} and the critical width {H}"
            )
    slack = 1e-12 * interval.width
    left_ok = beta - h_minus >= interval.a - slack
    right_ok = alpha + h_plus <= interval.b + slack
    if not left_ok and not right_ok:
        raise ValueError(
            "both windows fall outside the domain; no cone bound exists "
            "for this combination (arises only when n_init < 7)"
        )
    sides = []
    if left_ok:
        window = Interval(max(beta - h_minus, interval.a), alpha)
        sides.append(inflation_factor(h_minus, params, interval)
                     * neginf_seminorm(f_prime, window, m))
    if right_ok:
        window = Interval(beta, min(alpha + h_plus, interval.b))
        sides.append(inflation_factor(h_plus, params, interval)
                     * neginf_seminorm(f_prime, window, m))
    return max(sides)


@dataclass(frozen=True)
class ConeScanReport:
    """Outcome of a violation search.

    Attributes:
        violated: True when some scanned configuration bounds the local
            curvature below its observed value.  Estimates are one sided,
            so True is conclusive while False only reflects the scanned
            resolution.
        witness: ``(alpha, beta, h_minus, h_plus)`` of the worst
            configuration when violated, with NaN for a window that played
            no part; None otherwise.
        margin: Smallest scanned value of bound minus observed curvature;
            negative exactly when ``violated``.
        scanned_resolution: Number of base grid cells used.
    """

    violated: bool
    witness: tuple[float, float, float, float] | None
    margin: float
    scanned_resolution: int


def _pairwise_slope_min_table(xs: np.ndarray, gs: np.ndarray) -> np.ndarray:
    """T[i, j] = min absolute slope of (xs, gs) over point pairs within [i, j]."""
    n = len(xs)
    table = np.full((n, n), np.inf)
    for span in range(1, n):
        i = np.arange(n - span)
        j = i + span
        q = np.abs((gs[j] - gs[i]) / (xs[j] - xs[i]))
        if span > 1:
            q = np.minimum(q, np.minimum(table[i, j - 1], table[i + 1, j]))
        table[i, j] = q
    return table


def cone_membership_scan(
    target,
    params: ConeParams,
    interval: Interval | None = None,
    grid: int = 1024,
    subgrid: int = 64,
    max_widths: int = 64,
) -> ConeScanReport:
    """Search for configurations where the cone's curvature bound fails.

    Subinterval endpoints run over a coarse subgrid, window widths over grid
    multiples below the critical width (at most ``max_widths`` per side,
    extremes always kept), and all slope infima come from one shared table
    over the base grid.  Pairs of endpoints so wide that no admissible
    window exists constrain nothing and are skipped.

    Requires first and second derivative oracles.
    """
    interval = _default_interval(target, interval)
    oracle = _coerce_oracle(target)
    if grid < 8 or subgrid < 2 or grid % subgrid != 0:
        raise ValueError(f"grid must be a multiple of subgrid >= 2, got {grid}/{subgrid}")
    if max_widths < 2:
        raise ValueError(f"max_widths must be at least 2, got {max_widths}")

    a = interval.a
    H = critical_width(params, interval)
    g = interval.width / grid
    xs = np.linspace(a, interval.b, grid + 1)
    slopes = np.asarray(oracle.prime(xs), dtype=float)
    curvature = np.abs(np.asarray(oracle.second(xs), dtype=float))
    table = _pairwise_slope_min_table(xs, slopes)

    k_hi = int(math.floor(H / g))
    while k_hi * g >= H:
        k_hi -= 1
    if k_hi < 2:
        raise ValueError(
            f"grid={grid} is too coarse: the critical width {H:g} spans "
            "fewer than two grid cells"
        )

    # Subinterval endpoints wider apart than the critical width admit no
    # window at all, so shrink the step until some scanned span fits.
    step = grid // subgrid
    while step > 1 and 2 * step > k_hi:
        step //= 2

    best_margin = math.inf
    best_witness: tuple[float, float, float, float] | None = None
    sub = np.unique(np.append(np.arange(0, grid + 1, step), grid))
    for ai, ia in enumerate(sub):
        for ib in sub[ai + 1:]:
            k_lo = ib - ia + 1
            if k_lo > k_hi:
                continue
            count = min(max_widths, k_hi - k_lo + 1)
            ks = np.unique(np.linspace(k_lo, k_hi, count).round().astype(int))
            widths = ks * g
            inflations = inflation_factor(widths, params, interval)

            lefts = ib - ks
            left_in = lefts >= 0
            rights = ia + ks
            right_in = rights <= grid

            min_left = math.inf
            h_minus = math.nan
            if left_in.any():
                vals = inflations[left_in] * table[lefts[left_in], ia]
                pick = int(np.argmin(vals))
                min_left = float(vals[pick])
                h_minus = float(widths[left_in][pick])
            min_right = math.inf
            h_plus = math.nan
            if right_in.any():
                vals = inflations[right_in] * table[ib, rights[right_in]]
                pick = int(np.argmin(vals))
                min_right = float(vals[pick])
                h_plus = float(widths[right_in][pick])

            candidates = []
            if left_in.any() and right_in.any():
                candidates.append((max(min_left, min_right), h_minus, h_plus))
            if left_in.any() and not right_in.all():
                candidates.append((min_left, h_minus, math.nan))
            if right_in.any() and not left_in.all():
                candidates.append((min_right, math.nan, h_plus))
            if not candidates:
                continue
            bound, wm, wp = min(candidates, key=lambda c: c[0])
            margin = bound - float(curvature[ia:ib + 1].max())
            if margin < best_margin:
                best_margin = margin
                best_witness = (float(xs[ia]), float(xs[ib]), wm, wp)

    violated = best_margin < 0.0
    return ConeScanReport(
        violated=violated,
        witness=best_witness if violated else None,
        margin=best_margin,
        scanned_resolution=grid,
    )


def _cell_index(x: float, a: float, h: float, n_cells: int) -> int:
    return min(int((x - a) / h), n_cells - 1)


def level_function_L(
    target,
    x: float,
    tolerance: float,
    params: ConeParams,
    interval: Interval | None = None,
    m: int = 256,
    l_max: int = 60,
) -> int:
    """Refinement depth the approximation loop needs around ``x``.

    The smallest level whose cell width, inflated indicator factor, and the
    curvature sup over a five-cell neighborhood of ``x`` push the local
    error bound at or below ``tolerance``.  Requires a second-derivative
    oracle.
    """
    oracle = _coerce_oracle(target)
    interval = _default_interval(target, interval)
    if not (interval.a <= x <= interval.b):
        raise ValueError(f"x={x} outside {interval}")
    if tolerance <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    a = interval.a
    h0 = interval.width / params.n_init
    for level in range(l_max + 1):
        h = h0 / (1 << level)
        n_cells = params.n_init << level
        j = _cell_index(x, a, h, n_cells)
        window = Interval(a + max(j - 3, 0) * h, a + min(j + 2, n_cells) * h)
        sup = sup_norm(oracle.second, window, m)
        if 0.125 * inflation_factor(3.0 * h, params, interval) * h * h * sup <= tolerance:
            return level
    raise RuntimeError(f"no level up to {l_max} meets the tolerance at x={x}")


def level_function_Lcheck(
    target,
    x: float,
    x_star: float,
    params: ConeParams,
    interval: Interval | None = None,
    m: int = 256,
    l_max: int = 40,
) -> int:
    """Refinement depth the minimization loop needs around ``x``.

    The smallest level at which the watched-region slack of ``x`` against
    the minimizer ``x_star`` is certifiably nonpositive: curvature over a
    seven-cell neighborhood of ``x``, curvature over the cell of ``x_star``,
    the slope at ``x``, and the value gap ``f(x_star) - f(x)`` together.
    Points with no certifiable level (the minimizer itself, above all) get
    ``l_max``.  Requires first and second derivative oracles.
    """
    oracle = _coerce_oracle(target)
    interval = _default_interval(target, interval)
    for name, point in (("x", x), ("x_star", x_star)):
        if not (interval.a <= point <= interval.b):
            raise ValueError(f"{name}={point} outside {interval}")
    a = interval.a
    h0 = interval.width / params.n_init
    gap = float(oracle.f(x_star)) - float(oracle.f(x))
    slope_x = abs(float(oracle.prime(x)))
    for level in range(l_max + 1):
        h = h0 / (1 << level)
        n_cells = params.n_init << level
        j = _cell_index(x, a, h, n_cells)
        window = Interval(a + max(j - 4, 0) * h, a + min(j + 3, n_cells) * h)
        sup_here = sup_norm(oracle.second, window, m)
        j_star = _cell_index(x_star, a, h, n_cells)
        star_cell = Interval(a + j_star * h, a + (j_star + 1) * h)
        sup_star = sup_norm(oracle.second, star_cell, m)
        total = (
            (0.125 * inflation_factor(3.0 * h, params, interval) + 2.0) * sup_here * h * h
            + 0.125 * sup_star * h * h
            + 2.0 * slope_x * h
            + gap
        )
        if total <= 0.0:
            return level
    return l_max


def _level_integral(levels_at: Callable[[float], int], interval: Interval,
                    h0: float, quad_m: int) -> float:
    mids = interval.a + (np.arange(quad_m) + 0.5) * interval.width / quad_m
    acc = sum(2.0 ** levels_at(float(x)) for x in mids)
    return acc * (interval.width / quad_m) / h0 + 1.0


def _dyadic_level_integral(level_at: Callable[[float], int], interval: Interval,
                           n_init: int, l_cap: int = 60) -> float:
    """Integrate 2**level over the interval, exactly on the depth plateaus.

    The depth test at level l is constant across each level-l cell, so a
    cell whose midpoint needs depth at most the cell's own level is one
    plateau, evaluated without sampling error; deeper cells are split.
    """
    a = interval.a
    h0 = interval.width / n_init
    total = 0.0
    stack = [(0, j) for j in range(n_init)]
    while stack:
        level, j = stack.pop()
        h = h0 / (1 << level)
        depth = level_at(a + (j + 0.5) * h)
        if depth <= level or level >= l_cap:
            total += h * 2.0 ** depth
        else:
            stack.append((level + 1, 2 * j))
            stack.append((level + 1, 2 * j + 1))
    return total / h0 + 1.0


def cost_bound_approx(
    target,
    tolerance: float,
    params: ConeParams,
    interval: Interval | None = None,
    m: int = 256,
) -> float:
    """Upper bound on the points the approximation loop spends on ``target``.

    Integrates the per-point refinement depth from :func:`level_function_L`
    exactly over its dyadic plateaus; the only estimation left is the
    curvature sup inside each window (``m`` grid points per window).
    """
    interval = _default_interval(target, interval)
    oracle = _coerce_oracle(target)
    return _dyadic_level_integral(
        lambda x: level_function_L(oracle, x, tolerance, params, interval, m),
        interval, params.n_init,
    )


def cost_bound_min(
    target,
    tolerance: float,
    x_star: float,
    params: ConeParams,
    interval: Interval | None = None,
    quad_m: int = 256,
    m: int = 256,
) -> float:
    """Upper bound on the points the minimization loop spends on ``target``.

    Like :func:`cost_bound_approx` but each point needs only the smaller of
    the approximation depth and the sided slack depth against ``x_star``,
    which is what lets minimization get away with far fewer samples.
    """
    interval = _default_interval(target, interval)
    oracle = _coerce_oracle(target)
    h0 = interval.width / params.n_init

    def depth(x: float) -> int:
        l_approx = level_function_L(oracle, x, tolerance, params, interval, m)
        l_min = level_function_Lcheck(oracle, x, x_star, params, interval, m)
        return min(l_approx, l_min)

    return _level_integral(depth, interval, h0, quad_m)
