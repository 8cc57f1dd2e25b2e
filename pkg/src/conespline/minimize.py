"""Locally adaptive global minimization with a guaranteed tolerance.

The loop tracks two sided active sets.  A plus-side point watches the two
cells to its left, a minus-side point the two cells to its right.  A flagged
point forces refinement only when the watched region could still dip below
the running sample minimum by more than the tolerance (or when the matching
point watching the same region from the other side says so); this is what
lets the minimizer spend far fewer samples than full approximation while
returning a value within the tolerance of the true minimum for cone members.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .approx import DEFAULT_MAX_POINTS, _check_uniform_window
from .core import (
    ConeParams,
    DyadicPartition,
    DyadicPoint,
    Interval,
    _Evaluator,
    local_error_indicator,
)

__all__ = ["MinConfig", "MinReport", "MinState", "min_step", "minimize", "sided_error_indicator"]


def sided_error_indicator(err, m_hat, v1, v2):
    """Slack of the watched region below the sample minimum.

    Given the local error indicator ``err`` at a point and the values ``v1``,
    ``v2`` at the two watched partition points, returns
    ``err + m_hat - min(v1, v2)``.  A result at most the tolerance certifies
    that the watched cells cannot undercut the sample minimum ``m_hat`` by
    more than the tolerance, so they need no refinement.
    """
    out = np.asarray(err) + m_hat - np.minimum(v1, v2)
    if np.isscalar(err) and np.isscalar(v1) and np.isscalar(v2):
        return float(out)
    return out


@dataclass(frozen=True)
class MinConfig:
    """Inputs of the minimization loop besides the oracle itself."""

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
class MinReport:
    """Outcome of a minimization run.

    Attributes:
        value: Minimum of all cached samples at termination; for cone members
            of a converged run it exceeds the true minimum by at most the
            tolerance.
        n_points: Number of distinct oracle evaluations.
        n_iterations: Number of indicator passes, including the final pass
            that observed convergence.
        converged: True when the last pass flagged nothing on either side.
        trace: One ``(level, n_plus, n_minus, running_min)`` entry per pass.
        argmin_candidates: Every partition cell adjacent to a point attaining
            ``value``, as ``(left, right)`` coordinate pairs.
    """

    value: float
    n_points: int
    n_iterations: int
    converged: bool
    trace: tuple[tuple[int, int, int, float], ...]
    argmin_candidates: tuple[tuple[float, float], ...]


@dataclass
class MinState:
    """Mutable loop state; drive it with :func:`min_step`."""

    partition: DyadicPartition
    active_plus: list[DyadicPoint]
    active_minus: list[DyadicPoint]
    config: MinConfig
    evaluator: _Evaluator
    iterations: int = 0
    trace: list = field(default_factory=list)
    converged: bool = False
    finished: bool = False

    @classmethod
    def initial(cls, f: Callable, config: MinConfig) -> "MinState":
        evaluator = _Evaluator(f)
        n = config.params.n_init
        points = [DyadicPoint(0, k) for k in range(n + 1)]
        coords = np.asarray([p.coordinate(config.interval, n) for p in points])
        partition = DyadicPartition(config.interval, config.params, points, evaluator(coords))
        return cls(
            partition=partition,
            active_plus=[DyadicPoint(0, k) for k in range(2, n)],
            active_minus=[DyadicPoint(0, k) for k in range(1, n - 1)],
            config=config,
            evaluator=evaluator,
        )

    def report(self) -> MinReport:
        values = self.partition.values
        coords = self.partition.coords
        m_hat = float(values.min())
        cells: list[tuple[float, float]] = []
        for i in np.flatnonzero(values == m_hat):
            if i >= 1:
                cells.append((float(coords[i - 1]), float(coords[i])))
            if i <= len(coords) - 2:
                cells.append((float(coords[i]), float(coords[i + 1])))
        deduped = tuple(dict.fromkeys(cells))
        return MinReport(
            value=m_hat,
            n_points=self.partition.n_points,
            n_iterations=self.iterations,
            converged=self.converged,
            trace=tuple(self.trace),
            argmin_candidates=deduped,
        )


def min_step(state: MinState) -> MinState:
    """Run one two-sided indicator pass and, if needed, one refinement round.

    Both sides are evaluated against the partition as it stood at the start
    of the pass; insertions are collected, deduplicated through the exact
    dyadic identities, and applied afterwards in one batch.  Calling this on
    a finished state returns it unchanged.
    """
    if state.finished:
        return state
    partition = state.partition
    config = state.config
    h = partition.current_spacing
    n_cells = partition.n_points - 1
    values = partition.values
    m_hat = float(values.min())

    sides = {}
    for sign, active in ((+1, state.active_plus), (-1, state.active_minus)):
        positions = np.asarray(sorted(partition.position_of(p) for p in active), dtype=int)
        for pos in positions:
            lo, hi = (-2, 1) if sign > 0 else (-1, 2)
            if pos + lo < 0 or pos + hi > n_cells:
                raise RuntimeError(f"sided active position {pos} has no room for its stencil")
            _check_uniform_window(partition, int(pos), (lo, hi))
        errs = local_error_indicator(
            values[positions - 1], values[positions], values[positions + 1],
            h, partition.params, partition.interval,
        )
        keep = errs > config.tolerance
        tilde = positions[keep]
        herr = sided_error_indicator(
            errs[keep], m_hat,
            values[tilde - sign * 2], values[tilde - sign * 1],
        )
        sides[sign] = dict(zip(tilde.tolist(), np.atleast_1d(herr).tolist()))

    chosen = {}
    for sign in (+1, -1):
        own, other = sides[sign], sides[-sign]
        chosen[sign] = [
            pos
            for pos, slack in sorted(own.items())
            if slack > config.tolerance
            or other.get(pos - sign * 3, -np.inf) > config.tolerance
        ]

    state.trace.append(
        (partition.global_level, len(chosen[+1]), len(chosen[-1]), m_hat)
    )
    state.iterations += 1

    if not chosen[+1] and not chosen[-1]:
        state.converged = True
        state.finished = True
        return state

    midpoints: dict[int, DyadicPoint] = {}

    def mid_of_cell(left_pos: int) -> DyadicPoint:
        if left_pos not in midpoints:
            midpoints[left_pos] = partition.point_at(left_pos).midpoint(
                partition.point_at(left_pos + 1)
            )
        return midpoints[left_pos]

    next_plus: set[DyadicPoint] = set()
    next_minus: set[DyadicPoint] = set()
    for i in chosen[+1]:
        mid_of_cell(i - 2)
        next_plus.add(partition.point_at(i - 1))
        next_plus.add(mid_of_cell(i - 1))
    for i in chosen[-1]:
        next_minus.add(mid_of_cell(i))
        next_minus.add(partition.point_at(i + 1))
        mid_of_cell(i + 1)

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
    state.active_plus = sorted(next_plus)
    state.active_minus = sorted(next_minus)
    return state


def minimize(f: Callable, config: MinConfig) -> MinReport:
    """Minimize ``f`` over the configured interval to the configured tolerance.

    Args:
        f: Black-box oracle; called with a float (or, when it supports them,
            a numpy array of floats) and expected to return finite values.
        config: Tolerance, cone parameters, interval and point budget.

    Returns:
        A :class:`MinReport`; ``value`` is the smallest sample seen.
    """
    state = MinState.initial(f, config)
    while not state.finished:
        min_step(state)
    return state.report()
