"""Locally adaptive piecewise linear approximation with a guaranteed tolerance.

The loop keeps a dyadic partition and an active set of partition points whose
neighborhoods are not yet known to be resolved.  Each pass computes the local
error indicator at every active point; points whose indicator exceeds the
tolerance trigger midpoint insertion in the four surrounding cells, and the
points adjacent to the two inner insertions stay active one level deeper.
For functions in the cone the returned spline's sup-norm error is at most the
tolerance; the loop also terminates for many functions outside the cone, in
which case the guarantee is only as good as the indicator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    ConeParams,
    DyadicPartition,
    DyadicPoint,
    Interval,
    LinearSpline,
    _Evaluator,
    local_error_indicator,
    spline_from_partition,
)

__all__ = ["ApproxConfig", "ApproxReport", "ApproxState", "approx_step", "approximate"]

DEFAULT_MAX_POINTS = 1_000_000


@dataclass(frozen=True)
class ApproxConfig:
    """Inputs of the approximation loop besides the oracle itself."""

    tolerance: float
    params: ConeParams
    interval: Interval
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self) -> None:
        if not np.isfinite(self.tolerance) or self.tolerance <= 0.0:
            raise ValueError(f"tolerance must be finite and positive, got {self.tolerance}")
        if self.max_points < self.params.n_init + 1:
            raise ValueError(
                f"max_points={self.max_points} cannot hold the initial "
                f"{self.params.n_init + 1} points"
            )


@dataclass(frozen=True)
class ApproxReport:
    """Outcome of an approximation run.

    Attributes:
        spline: Interpolant over every sampled point.
        n_points: Number of distinct oracle evaluations.
        n_iterations: Number of indicator passes, including the final pass
            that observed convergence (the run that stops on its first pass
            reports 1).
        converged: True when the last pass flagged nothing; False when the
            point budget stopped the loop first.
        trace: One ``(level, n_flagged)`` entry per pass.
    """

    spline: LinearSpline
    n_points: int
    n_iterations: int
    converged: bool
    trace: tuple[tuple[int, int], ...]


@dataclass
class ApproxState:
    """Mutable loop state; drive it with :func:`approx_step`."""

    partition: DyadicPartition
    active: list[DyadicPoint]
    config: ApproxConfig
    evaluator: _Evaluator
    iterations: int = 0
    trace: list = field(default_factory=list)
    converged: bool = False
    finished: bool = False

    @classmethod
    def initial(cls, f: Callable, config: ApproxConfig) -> "ApproxState":
        evaluator = _Evaluator(f)
        partition = DyadicPartition(
            config.interval,
            config.params,
            [DyadicPoint(0, k) for k in range(config.params.n_init + 1)],
            evaluator(
                np.asarray(
                    [
                        DyadicPoint(0, k).coordinate(config.interval, config.params.n_init)
                        for k in range(config.params.n_init + 1)
                    ]
                )
            ),
        )
        active = [DyadicPoint(0, k) for k in range(1, config.params.n_init)]
        return cls(partition=partition, active=active, config=config, evaluator=evaluator)

    def report(self) -> ApproxReport:
        return ApproxReport(
            spline=spline_from_partition(self.partition),
            n_points=self.partition.n_points,
            n_iterations=self.iterations,
            converged=self.converged,
            trace=tuple(self.trace),
        )


def _check_uniform_window(partition: DyadicPartition, pos: int, span: tuple[int, int]) -> None:
    """Verify in exact arithmetic that cells ``pos+span[0] .. pos+span[1]-1`` have level spacing."""
    level = partition.global_level
    n_init = partition.params.n_init
    for j in range(pos + span[0], pos + span[1]):
        left = partition.point_at(j)
        right = partition.point_at(j + 1)
        gap = (right.index << (level - right.level)) - (left.index << (level - left.level))
        if gap != 1:
            raise RuntimeError(
                f"active point at position {pos} lacks uniform level-{level} spacing "
                f"(cell {j} has dyadic gap {gap}); refinement bookkeeping is inconsistent"
            )


def approx_step(state: ApproxState) -> ApproxState:
    """Run one indicator pass and, if needed, one refinement round.

    Calling this on a finished state returns it unchanged, so iterating to a
    fixpoint reproduces :func:`approximate` exactly.
    """
    if state.finished:
        return state
    partition = state.partition
    config = state.config
    h = partition.current_spacing
    n_cells = partition.n_points - 1

    positions = np.asarray(sorted(partition.position_of(p) for p in state.active), dtype=int)
    for pos in positions:
        if pos < 1 or pos > n_cells - 1:
            raise RuntimeError(f"active position {pos} has no two-sided stencil")
        _check_uniform_window(partition, int(pos), (-1, 1))

    values = partition.values
    errs = local_error_indicator(
        values[positions - 1], values[positions], values[positions + 1],
        h, partition.params, partition.interval,
    )
    flagged = positions[errs > config.tolerance]
    state.trace.append((partition.global_level, int(flagged.size)))
    state.iterations += 1

    if flagged.size == 0:
        state.converged = True
        state.finished = True
        return state

    for pos in flagged:
        i = int(pos)
        lo = -2 if i >= 2 else -i
        hi = 2 if i <= n_cells - 2 else n_cells - i
        _check_uniform_window(partition, i, (lo, hi))

    midpoints: dict[int, DyadicPoint] = {}

    def mid_of_cell(left_pos: int) -> DyadicPoint:
        if left_pos not in midpoints:
            midpoints[left_pos] = partition.point_at(left_pos).midpoint(
                partition.point_at(left_pos + 1)
            )
        return midpoints[left_pos]

    next_active: set[DyadicPoint] = set()
    for pos in flagged:
        i = int(pos)
        if i >= 2:
            mid_of_cell(i - 2)
            next_active.add(partition.point_at(i - 1))
        next_active.add(mid_of_cell(i - 1))
        next_active.add(mid_of_cell(i))
        if i <= n_cells - 2:
            mid_of_cell(i + 1)
            next_active.add(partition.point_at(i + 1))

    new_points = sorted(set(midpoints.values()))
    if partition.n_points + len(new_points) > config.max_points:
        state.converged = False
        state.finished = True
        return state

    coords = np.asarray(
        [p.coordinate(partition.interval, partition.params.n_init) for p in new_points]
    )
    new_values = state.evaluator(coords)
    partition.insert_points(new_points, new_values)
    partition.advance_level()
    state.active = sorted(next_active)
    return state


def approximate(f: Callable, config: ApproxConfig) -> ApproxReport:
    """Approximate ``f`` on the configured interval to the configured tolerance.

    Args:
        f: Black-box oracle; called with a float (or, when it supports them,
            a numpy array of floats) and expected to return finite values.
        config: Tolerance, cone parameters, interval and point budget.

    Returns:
        An :class:`ApproxReport` whose spline interpolates every sample taken.
    """
    state = ApproxState.initial(f, config)
    while not state.finished:
        approx_step(state)
    return state.report()
