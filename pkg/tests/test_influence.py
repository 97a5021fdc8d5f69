import warnings

import numpy as np
import pytest
from conftest import random_problem

from ridgeinfluence.errors import BoundaryMinimizer, InputError, NotAMinimum, NotUnivariate, ZeroOutcome
from ridgeinfluence.influence import (
    EXPANDER,
    NEUTRAL,
    SHRINKER,
    ErrorDerivatives,
    boundary_slopes,
    classify,
    curve_slope,
    error_derivatives,
    influence_derivatives,
    weight_derivative,
    normalize_univariate,
    univariate_sign_analysis,
)
from ridgeinfluence.loocv import Boundary, loo_squared_errors, minimize_cv
from ridgeinfluence.spectral import decompose
from ridgeinfluence.weighted import WeightGrid, influence_curve, influence_curves


def fd_derivatives(spec, y, lam, h):
    f = loo_squared_errors(spec, [lam - h, lam, lam + h], y)
    return (f[2] - f[0]) / (2 * h), (f[2] - 2 * f[1] + f[0]) / h**2


def assert_rel(actual, expected, rtol):
    scale = np.max(np.abs(expected))
    assert np.max(np.abs(actual - expected)) <= rtol * scale


@pytest.mark.parametrize("n,p,intercept", [(30, 5, False), (12, 40, False), (12, 40, True)])
@pytest.mark.parametrize("lam", [0.3, 5.0])
def test_error_derivatives_match_differences(rng, n, p, intercept, lam):
    X, y = random_problem(rng, n, p)
    spec = decompose(X, y, intercept=intercept)
    d = error_derivatives(spec, y, lam)
    f1, _ = fd_derivatives(spec, y, lam, 1e-6 * lam)
    _, f2 = fd_derivatives(spec, y, lam, 1e-3 * lam)
    assert_rel(d.f1, f1, 1e-5)
    assert_rel(d.f2, f2, 1e-4)
    assert np.allclose(d.f, loo_squared_errors(spec, [lam], y)[0])


def test_weight_derivative_needs_interior_minimum():
    f = np.ones(4)
    with pytest.raises(BoundaryMinimizer):
        weight_derivative(ErrorDerivatives(0.0, f, f, f, Boundary.AT_ZERO))
    with pytest.raises(NotAMinimum):
        weight_derivative(ErrorDerivatives(1.0, f, f, -f))


def test_weight_derivative_formula():
    d = ErrorDerivatives(1.0, np.ones(4), np.array([1.0, -2.0, 0.5, 0.5]), np.array([1.0, 1.0, 1.0, 1.0]))
    assert np.allclose(weight_derivative(d), -16 * d.f1 / (3 * 4))


def test_weight_derivative_agrees_with_curve_secant(bodyfat_spec):
    cv = minimize_cv(bodyfat_spec)
    slope = weight_derivative(error_derivatives(bodyfat_spec, None, cv.minimizer))
    grid = WeightGrid(np.array([0.99, 1.0, 1.01]))
    n = bodyfat_spec.n
    for i in (38, 220, 5):
        c = influence_curve(bodyfat_spec, None, i, grid)
        # secant is per unit factor; the derivative is per unit weight
        assert curve_slope(c, 0.99, 1.01) * n == pytest.approx(slope[i], rel=0.02)


def test_classify_labels_and_scores():
    reps = classify([-4.0, 2.0, 1e-9, -1.0, 1.0])
    assert [r.label for r in reps] == [EXPANDER, SHRINKER, NEUTRAL, EXPANDER, SHRINKER]
    assert reps[0].rank_score == pytest.approx(4.0)
    reps = classify([-4.0, 2.0, 0.5], tol_label=1.0)
    assert reps[2].label == NEUTRAL
    with pytest.raises(InputError):
        classify([np.nan, 1.0])


def test_boundary_minimizer_uses_one_sided_slopes(rng):
    # p > n without intercept refits interpolates: minimizer at zero
    X, y = random_problem(rng, 10, 30)
    spec = decompose(X, y)
    cv = minimize_cv(spec, y)
    assert cv.at_boundary is not Boundary.INTERIOR
    d, numeric = influence_derivatives(spec, y, cv)
    assert numeric
    assert np.allclose(d, boundary_slopes(spec, y, cv.minimizer))


def test_bodyfat_derivatives_are_analytic(bodyfat_spec):
    d, numeric = influence_derivatives(bodyfat_spec)
    assert not numeric
    top = np.argsort(-np.abs(d))[:2]
    assert list(top) == [38, 220]
    assert d[38] < 0 < d[220]


def _quadrant_points():
    rng = np.random.default_rng(7)
    xb = rng.normal(size=15)
    yb = 0.8 * xb + rng.normal(size=15)
    for px in np.linspace(-4, 4, 17):
        for py in np.linspace(-6, 6, 25):
            yield normalize_univariate(np.r_[xb, px], np.r_[yb, py])


@pytest.mark.parametrize("lam", [0.0, 0.3, 3.0])
def test_sign_conditions_agree_on_quadrant_grid(lam):
    for x, y in _quadrant_points():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ZeroOutcome)
            s = univariate_sign_analysis(x, y, lam)
        ok = ~s.zero_outcome
        assert np.array_equal(s.expander[ok], s.ratio_condition[ok])
        assert np.array_equal(s.expander, s.in_expander_region())


def test_sign_analysis_quantities():
    x, y = normalize_univariate([1.0, 2.0, 4.0, 7.0], [0.5, 1.5, 1.0, 4.0])
    s = univariate_sign_analysis(x, y, 0.2)
    assert s.beta == pytest.approx(x @ y)
    assert np.allclose(s.r, y - s.beta * x)
    assert np.allclose(s.h, x**2)
    assert np.allclose(s.nominator, (s.r + 0.2 * y) * (s.r - y * (1 - x**2)))


def test_sign_analysis_warns_on_zero_outcome():
    x, y = normalize_univariate([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert y[1] == 0
    with pytest.warns(ZeroOutcome):
        s = univariate_sign_analysis(x, y, 0.1)
    assert np.isnan(s.ratio[1]) and not s.ratio_condition[1]


def test_sign_analysis_input_checks():
    with pytest.raises(NotUnivariate):
        univariate_sign_analysis(np.ones((4, 2)), np.zeros(4), 0.1)
    with pytest.raises(InputError):
        univariate_sign_analysis(np.array([1.0, 2.0, 3.0]), np.array([0.0, 1.0, -1.0]), 0.1)


def test_derivatives_sum_to_zero(bodyfat_spec):
    cv = minimize_cv(bodyfat_spec)
    d = weight_derivative(error_derivatives(bodyfat_spec, None, cv.minimizer))
    assert abs(d.sum()) <= 1e-6 * np.abs(d).sum()


def test_derivative_signs_match_secants(bodyfat_spec):
    d, _ = influence_derivatives(bodyfat_spec)
    reports = classify(d)
    tol = 1e-3 * np.median(np.abs(d))
    grid = WeightGrid(np.array([0.9, 1.0, 1.1]))
    for c in influence_curves(bodyfat_spec, None, grid):
        i = c.observation
        if abs(d[i]) > tol:
            assert np.sign(curve_slope(c)) == np.sign(d[i])
            assert (reports[i].label == EXPANDER) == (d[i] < 0)
