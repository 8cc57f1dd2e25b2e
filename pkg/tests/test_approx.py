"""Tests for the adaptive approximation loop."""

import numpy as np
import pytest

from conespline import (
    ApproxConfig,
    ApproxState,
    ConeParams,
    Interval,
    approx_step,
    approximate,
    dense_sup_error,
    make_hump,
    make_oscillatory,
    make_parabola,
)

IV = Interval(-1.0, 1.0)
P20 = ConeParams(20, 10.0)


def neg_hump():
    return make_hump(-0.2, 0.3, IV, negated=True)


def test_reference_hump_run():
    fn = neg_hump()
    report = approximate(fn.f, ApproxConfig(0.02, P20, IV))
    assert report.converged
    assert report.n_points == 65
    assert report.n_iterations == 3
    assert report.trace == ((0, 11), (1, 23), (2, 0))
    assert dense_sup_error(fn.f, report.spline, 100_000) <= 0.02


def test_spline_interpolates_every_sample():
    fn = neg_hump()
    report = approximate(fn.f, ApproxConfig(0.02, P20, IV))
    spl = report.spline
    assert spl.n_knots == report.n_points
    assert np.all(np.diff(spl.knots) > 0)
    assert np.allclose(spl(spl.knots), fn.f(spl.knots))
    # The initial uniform grid survives refinement.
    for x in np.linspace(-1.0, 1.0, 21):
        assert np.isclose(spl.knots, x).any()


def test_parabola_converges_without_refinement():
    fn = make_parabola(IV)
    # Level-0 indicator is exactly 0.25 everywhere for x^2/2.
    report = approximate(fn.f, ApproxConfig(0.3, P20, IV))
    assert report.converged
    assert report.n_points == 21
    assert report.n_iterations == 1
    assert report.trace == ((0, 0),)


def test_parabola_refines_below_indicator():
    fn = make_parabola(IV)
    report = approximate(fn.f, ApproxConfig(0.2, P20, IV))
    assert report.converged
    assert report.n_points > 21
    assert report.trace[0] == (0, 19)
    assert dense_sup_error(fn.f, report.spline) <= 0.2


def test_tolerance_is_met_not_just_reported():
    for tol in (1e-2, 1e-4):
        fn = neg_hump()
        report = approximate(fn.f, ApproxConfig(tol, P20, IV))
        assert report.converged
        assert dense_sup_error(fn.f, report.spline) <= tol


def test_boundary_flags_are_handled():
    # Support ends at 0.95, so level-0 flags reach the last interior point.
    fn = make_hump(0.55, 0.2, IV)
    report = approximate(fn.f, ApproxConfig(0.02, P20, IV))
    assert report.converged
    assert dense_sup_error(fn.f, report.spline) <= 0.02


def test_oscillatory_run_converges():
    fn = make_oscillatory(1.0, IV)
    report = approximate(fn.f, ApproxConfig(1e-3, ConeParams(250, 10.0), IV))
    assert report.converged
    assert dense_sup_error(fn.f, report.spline) <= 1e-3


def test_budget_stops_before_insertion():
    fn = neg_hump()
    report = approximate(fn.f, ApproxConfig(0.02, P20, IV, max_points=22))
    assert not report.converged
    assert report.n_points == 21
    assert report.n_iterations == 1
    assert report.trace == ((0, 11),)


def test_budget_must_cover_initial_grid():
    with pytest.raises(ValueError):
        ApproxConfig(0.02, P20, IV, max_points=20)


def test_tolerance_validation():
    with pytest.raises(ValueError):
        ApproxConfig(0.0, P20, IV)
    with pytest.raises(ValueError):
        ApproxConfig(float("nan"), P20, IV)


def test_step_driver_matches_one_shot():
    fn = neg_hump()
    config = ApproxConfig(0.02, P20, IV)
    state = ApproxState.initial(fn.f, config)
    seen = []
    while not state.finished:
        approx_step(state)
        seen.append(state.partition.n_points)
    report = state.report()
    assert seen == [37, 65, 65]
    assert report.n_points == 65
    # A finished state is a fixpoint.
    approx_step(state)
    after = state.report()
    assert after.n_points == report.n_points
    assert after.n_iterations == report.n_iterations
    assert after.trace == report.trace
    assert np.array_equal(after.spline.knots, report.spline.knots)


def test_each_pass_halves_the_working_scale():
    fn = neg_hump()
    config = ApproxConfig(1e-4, P20, IV)
    state = ApproxState.initial(fn.f, config)
    spacings = [state.partition.current_spacing]
    while not state.finished:
        approx_step(state)
        spacings.append(state.partition.current_spacing)
    for prev, cur in zip(spacings, spacings[1:]):
        assert cur == pytest.approx(prev / 2.0) or cur == prev


def test_scale_invariance_of_sampling():
    fn = neg_hump()
    base = approximate(fn.f, ApproxConfig(0.02, P20, IV))
    for gamma in (1e-3, 1e3):
        scaled = approximate(
            lambda x: gamma * fn.f(x), ApproxConfig(gamma * 0.02, P20, IV)
        )
        assert np.array_equal(scaled.spline.knots, base.spline.knots)
        assert scaled.trace == base.trace


def test_scalar_only_oracle():
    fn = neg_hump()
    report = approximate(lambda x: fn.f(float(x)), ApproxConfig(0.02, P20, IV))
    assert report.n_points == 65
