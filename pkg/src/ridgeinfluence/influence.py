"""Influence of single observations on the CV-optimal ridge penalty.

The derivative of the weighted-CV minimizer with respect to observation ``i``'s
weight, taken at equal weighting, is

    d lambda_hat / d w_i = -n^2 f_i'(lambda_cv) / ((n - 1) * sum_j f_j''(lambda_cv))

with ``f_i(lambda) = e_(i)(lambda)^2`` the squared leave-one-out error. A
negative derivative marks an *expander* (more weight, smaller penalty, larger
model); a positive one marks a *shrinker*.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryMinimizer,
    InputError,
    LeverageOne,
    NotAMinimum,
    NotUnivariate,
    ZeroOutcome,
)
from .loocv import LEVERAGE_EPS, Boundary, SolverOptions, _check_lambda, _resid_slack, minimize_cv
from .weighted import _PathCache

EXPANDER = "expander"
SHRINKER = "shrinker"
NEUTRAL = "neutral"


@dataclass(frozen=True)
class ErrorDerivatives:
    """Squared LOO errors and their first two penalty derivatives at ``lam``."""

    lam: float
    f: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    boundary: Boundary = Boundary.INTERIOR

    @property
    def n(self):
        return self.f.shape[0]


@dataclass(frozen=True)
class InfluenceReport:
    observation: int
    derivative: float
    label: str
    rank_score: float
    boundary_derived: bool = False
    nominator_factor: float = None


def error_derivatives(spec, y=None, lam=0.0, boundary=Boundary.INTERIOR):
    """Analytic ``f_i``, ``f_i'`` and ``f_i''`` for every observation.

    Uses the spectral forms of the residual and leverage and their exact
    penalty derivatives, combined through ``e / (1 - H)``.
    """
    lam = _check_lambda(lam)
    y, c = spec.project(y)
    a = spec.d**2
    den = a + lam
    U, U2 = spec.U, spec.U**2
    resid, slack, _ = _resid_slack(spec, y, c, [lam])
    e, slack = resid[0], slack[0]
    de = U @ (a / den**2 * c)
    d2e = -2.0 * (U @ (a / den**3 * c))
    dH = -(U2 @ (a / den**2))
    d2H = 2.0 * (U2 @ (a / den**3))
    bad = np.flatnonzero(slack <= LEVERAGE_EPS)
    if bad.size:
        raise LeverageOne(int(bad[0]))
    q = 1.0 / slack
    dq = dH * q**2
    d2q = d2H * q**2 + 2.0 * dH**2 * q**3
    g = e * q
    dg = de * q + e * dq
    d2g = d2e * q + 2.0 * de * dq + e * d2q
    return ErrorDerivatives(lam, g**2, 2.0 * g * dg, 2.0 * (dg**2 + g * d2g), Boundary(boundary))


def weight_derivative(derivs, n=None):
    """Slope of the optimal penalty in each observation's weight at ``w = 1/n``.

    ``derivs`` must be evaluated at an interior CV minimizer.
    """
    if derivs.boundary is not Boundary.INTERIOR:
        raise BoundaryMinimizer(
            f"CV minimizer is {derivs.boundary}; the implicit-function slope does not apply"
        )
    n = derivs.n if n is None else int(n)
    curvature = float(np.sum(derivs.f2))
    if not curvature > 0:
        raise NotAMinimum(f"sum of second derivatives is {curvature:.6g} <= 0")
    return -(n**2) * derivs.f1 / ((n - 1) * curvature)


def boundary_slopes(spec, y, lam_cv, opts=None, h_factor=0.05):
    """Right-hand difference slope of every curve at ``w = 1/n``.

    Stand-in for the analytic slope when the CV minimizer sits on the boundary.
    """
    n = spec.n
    cache = _PathCache(spec, y, opts or SolverOptions())
    h = h_factor / n
    out = np.empty(n)
    for i in range(n):
        lam_plus = cache.solve(i, [1.0 / n + h])[0][0]
        out[i] = (lam_plus - lam_cv) / h
    return out


def classify(derivatives, tol_label=None, boundary_derived=False, nominator=None):
    """Label each derivative and score it against the sample median.

    ``tol_label`` defaults to ``1e-3 * median(|derivative|)``. The rank score
    is ``|derivative| / median(|derivative|)``.
    """
    d = np.asarray(derivatives, dtype=float)
    if not np.all(np.isfinite(d)):
        raise InputError("derivatives must be finite")
    mags = np.abs(d)
    median = float(np.median(mags)) if d.size else 0.0
    scale = median if median > 0 else (float(mags.mean()) if mags.any() else 1.0)
    tol = 1e-3 * median if tol_label is None else float(tol_label)
    reports = []
    for i, v in enumerate(d):
        if v < -tol:
            label = EXPANDER
        elif v > tol:
            label = SHRINKER
        else:
            label = NEUTRAL
        nom = None if nominator is None else float(nominator[i])
        reports.append(
            InfluenceReport(i, float(v), label, float(mags[i] / scale), bool(boundary_derived), nom)
        )
    return reports


def influence_derivatives(spec, y=None, cv=None, opts=None):
    """Derivative of every curve at equal weighting, plus whether it is numerical.

    Uses the analytic slope at an interior CV minimizer and the right-hand
    difference slope otherwise. Returns ``(derivatives, boundary_derived)``.
    """
    opts = opts or SolverOptions()
    cv = cv or minimize_cv(spec, y, opts)
    if cv.at_boundary is Boundary.INTERIOR:
        derivs = error_derivatives(spec, y, cv.minimizer)
        try:
            return weight_derivative(derivs), False
        except NotAMinimum:
            pass
    return boundary_slopes(spec, y, cv.minimizer, opts), True


def rank_observations(spec, y=None, opts=None, tol_label=None):
    """Reports for all observations, ordered by index."""
    d, numeric = influence_derivatives(spec, y, None, opts)
    return classify(d, tol_label, numeric)


@dataclass(frozen=True)
class SignAnalysis:
    """Per-observation quantities of the one-covariate sign analysis.

    ``nominator`` is ``(r + lam*y)(r - y(1 - h))``; ``ratio`` is ``r / y`` (NaN
    where ``y == 0``). ``expander`` is the product-form condition
    ``nominator < 0`` and ``ratio_condition`` its ratio form
    ``-lam < r/y < 1 - h``.
    """

    lam: float
    x: np.ndarray
    y: np.ndarray
    beta: float
    r: np.ndarray
    h: np.ndarray
    nominator: np.ndarray
    ratio: np.ndarray
    expander: np.ndarray
    ratio_condition: np.ndarray
    zero_outcome: np.ndarray

    @property
    def beta_loo(self):
        """OLS slope without observation ``i``: ``beta - x_i y_i``."""
        return self.beta - self.x * self.y

    def in_expander_region(self):
        """Direct geometric test against the shaded quadrant regions.

        For ``y_i > 0`` the point must sit where ``x_i`` has the sign of the
        leave-one-out slope and above the ridge line ``beta x / (1 + lam)``;
        for ``y_i < 0`` the picture is mirrored.
        """
        x, y = self.x, self.y
        line = self.beta * x / (1.0 + self.lam)
        bl = self.beta_loo
        up = (y > 0) & (np.sign(x) == np.sign(bl)) & (x != 0) & (y > line)
        down = (y < 0) & (np.sign(x) == -np.sign(bl)) & (x != 0) & (y < line)
        return up | down


def normalize_univariate(x, y):
    """Center ``x`` and scale it to unit sum of squares; center ``y``."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    x = x - x.mean()
    return x / np.sqrt(np.sum(x**2)), y - y.mean()


def univariate_sign_analysis(x, y, lam, atol=1e-8):
    """Expander conditions for a single standardized covariate.

    Requires ``sum x^2 = 1``, ``mean x = 0`` and ``mean y = 0`` (see
    :func:`normalize_univariate`). OLS leverage is ``h_i = x_i^2`` and the OLS
    residual ``r_i = y_i - x_i * sum_j x_j y_j``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        if x.shape[1] != 1:
            raise NotUnivariate(f"expected one covariate, got {x.shape[1]}")
        x = x[:, 0]
    if x.ndim != 1:
        raise NotUnivariate("x must be a vector or an n x 1 matrix")
    y = np.asarray(y, dtype=float)
    if y.shape != x.shape:
        raise InputError("x and y lengths differ")
    if abs(x.mean()) > atol or abs(np.sum(x**2) - 1.0) > atol or abs(y.mean()) > atol * max(1.0, np.abs(y).max()):
        raise InputError("expects sum(x^2) = 1, mean(x) = 0 and mean(y) = 0")
    lam = _check_lambda(lam)
    beta = float(x @ y)
    r = y - x * beta
    h = x**2
    nominator = (r + lam * y) * (r - y * (1.0 - h))
    zero = y == 0
    if zero.any():
        warnings.warn(
            f"outcome is zero for rows {np.flatnonzero(zero).tolist()}; ratio form undefined",
            ZeroOutcome,
            stacklevel=2,
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(zero, np.nan, r / np.where(zero, 1.0, y))
    ratio_condition = ~zero & (-lam < ratio) & (ratio < 1.0 - h)
    return SignAnalysis(lam, x, y, beta, r, h, nominator, ratio, nominator < 0, ratio_condition, zero)


def curve_slope(curve, lo=0.9, hi=1.1):
    """Secant slope of an influence curve between two weight factors (per unit factor)."""
    t = curve.factors
    k_lo = int(np.argmin(np.abs(t - lo)))
    k_hi = int(np.argmin(np.abs(t - hi)))
    return (curve.lambda_hat[k_hi] - curve.lambda_hat[k_lo]) / (t[k_hi] - t[k_lo])

