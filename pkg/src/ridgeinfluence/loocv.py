"""Ridge fits, leverages and closed-form leave-one-out CV along the penalty path.

Everything is evaluated from a :class:`~ridgeinfluence.spectral.RidgeSpectrum`,
so one penalty value costs ``O(n r)`` and no matrix is ever re-factored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import LeverageOne, NegativeLambda

LEVERAGE_EPS = 1e-12
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Boundary(str, Enum):
    INTERIOR = "interior"
    AT_ZERO = "at_zero"
    AT_CAP = "at_cap"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolverOptions:
    """Search settings shared by the plain and the weighted CV minimizers.

    The search domain is ``[0, lambda_cap_mult * d1^2]``; the coarse grid has
    ``grid_points`` log-spaced values starting at ``grid_min_mult * d1^2`` plus
    ``lambda = 0``. ``tol`` is the relative width of the final bracket on
    ``lambda``; ``cv_tol`` is the relative criterion gap below which the zero
    boundary wins a tie.
    """

    lambda_cap_mult: float = 1e6
    grid_min_mult: float = 1e-8
    grid_points: int = 201
    tol: float = 1e-6
    cv_tol: float = 1e-10
    n_brackets: int = 3

    def grid(self, spec):
        a1 = float(spec.d[0] ** 2)
        positive = np.logspace(
            math.log10(self.grid_min_mult * a1),
            math.log10(self.lambda_cap_mult * a1),
            self.grid_points,
        )
        positive[-1] = self.cap(spec)
        return np.concatenate([[0.0], positive])

    def cap(self, spec):
        return float(self.lambda_cap_mult * spec.d[0] ** 2)


@dataclass(frozen=True)
class RidgeEvaluation:
    lam: float
    fitted: np.ndarray
    residuals: np.ndarray
    leverages: np.ndarray
    loo_errors: np.ndarray
    cv_value: float
    df: float

    @property
    def n(self):
        return self.fitted.shape[0]


@dataclass(frozen=True)
class CvCurve:
    lambdas: np.ndarray
    cv_values: np.ndarray
    minimizer: float
    min_value: float
    at_boundary: Boundary


def _check_lambda(lam):
    lam = float(lam)
    if not lam >= 0:  # also catches NaN
        raise NegativeLambda(lam)
    return lam


def shrinkage(spec, lam):
    """``d^2 / (d^2 + lambda)`` for each retained component."""
    a = spec.d**2
    return a / (a + _check_lambda(lam))


def effective_df(spec, lam):
    """Trace of the ridge hat matrix, ``sum d^2 / (d^2 + lambda)``."""
    return float(np.sum(shrinkage(spec, lam)))


SATURATED = 1e-10


def _complements(spec, y, uty):
    """Zero-penalty slack ``1 - H_ii(0)`` and residual, with saturated rows set to exactly 0.

    Every penalty-dependent slack and residual is this plus a term that is
    proportional to ``lambda``. Writing them that way keeps small penalties
    free of cancellation.
    """
    slack0 = 1.0 - spec.leverage_offset - np.sum(spec.U**2, axis=1)
    saturated = slack0 <= SATURATED
    slack0 = np.where(saturated, 0.0, slack0)
    resid0 = np.where(saturated, 0.0, y - spec.U @ uty)
    return slack0, resid0, saturated


def _resid_slack(spec, y, uty, lambdas):
    slack0, resid0, saturated = _complements(spec, y, uty)
    a = spec.d**2
    lambdas = np.asarray(lambdas, dtype=float)
    keep = lambdas[:, None] / (a[None, :] + lambdas[:, None])
    resid = resid0[None, :] + (keep * uty) @ spec.U.T
    slack = slack0[None, :] + keep @ (spec.U**2).T
    return resid, slack, saturated


def zero_limit_loo(spec, y=None):
    """Leave-one-out errors as ``lambda -> 0+``.

    Equal to the ordinary values where the zero-penalty leverage is below 1.
    For saturated rows both the residual and the slack vanish linearly in
    ``lambda``, and their ratio tends to
    ``sum(U_il c_l / a_l) / sum(U_il^2 / a_l)``.
    """
    y, uty = spec.project(y)
    slack0, resid0, saturated = _complements(spec, y, uty)
    a = spec.d**2
    with np.errstate(divide="ignore", invalid="ignore"):
        loo = resid0 / slack0
        limit = (spec.U @ (uty / a)) / ((spec.U**2) @ (1.0 / a))
    return np.where(saturated, limit, loo)


def evaluate(spec, y=None, lam=0.0):
    """Fitted values, leverages and leave-one-out errors at one penalty.

    ``y`` defaults to the outcome the spectrum was built with. Raises
    :class:`LeverageOne` when ``1 - H_ii <= 1e-12`` for some observation (only
    possible at ``lambda = 0``).
    """
    lam = _check_lambda(lam)
    y, uty = spec.project(y)
    sh = shrinkage(spec, lam)
    resid, slack, _ = _resid_slack(spec, y, uty, [lam])
    resid, slack = resid[0], slack[0]
    bad = np.flatnonzero(slack <= LEVERAGE_EPS)
    if bad.size:
        raise LeverageOne(int(bad[0]))
    loo = resid / slack
    return RidgeEvaluation(
        lam, y - resid, resid, 1.0 - slack, loo, float(np.mean(loo**2)), float(sh.sum())
    )


def loo_squared_errors(spec, lambdas, y=None):
    """Matrix of squared leave-one-out errors, one row per penalty value.

    At ``lambda = 0`` rows with saturated leverage take the limit from the
    right (see :func:`zero_limit_loo`), so the criterion is continuous there.
    """
    y, uty = spec.project(y)
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    resid, slack, _ = _resid_slack(spec, y, uty, lambdas)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (resid / slack) ** 2
    zero = lambdas == 0
    if zero.any() and np.any(slack[zero] <= LEVERAGE_EPS):
        f[zero] = zero_limit_loo(spec, y) ** 2
    return f


def cv_path(spec, lambdas, y=None):
    """Mean squared leave-one-out error at each penalty value."""
    return loo_squared_errors(spec, lambdas, y).mean(axis=1)


def _local_minima(values, k):
    """Indices of up to ``k`` best local minima of a sampled curve."""
    v = np.asarray(values)
    m = v.shape[0]
    left = np.concatenate([[np.inf], v[:-1]])
    right = np.concatenate([v[1:], [np.inf]])
    cand = np.flatnonzero((v <= left) & (v <= right) & np.isfinite(v))
    if cand.size == 0:
        cand = np.array([int(np.argmin(v))]) if np.isfinite(v).any() else np.array([m - 1])
    order = np.argsort(v[cand], kind="stable")
    return cand[order[:k]]


def golden_section_batch(func, lo, hi, log_scale, tol):
    """Golden-section search on many independent brackets at once.

    ``func(x)`` receives one abscissa per problem and returns one value per
    problem. Brackets flagged in ``log_scale`` are searched in ``log(x)`` and
    stop once their log-width is below ``tol`` (relative accuracy); the others
    are searched linearly and stop at width ``tol * hi``. Returns the midpoints
    of the final brackets.
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    log_scale = np.asarray(log_scale, dtype=bool)
    a = np.where(log_scale, np.log(np.where(log_scale, lo, 1.0)), lo)
    b = np.where(log_scale, np.log(np.where(log_scale, hi, 1.0)), hi)
    target = np.where(log_scale, tol, tol * np.abs(hi))
    width = b - a
    with np.errstate(divide="ignore"):
        steps = np.where(width > target, np.ceil(np.log(target / np.maximum(width, 1e-300)) / math.log(INV_PHI)), 0)
    n_iter = int(steps.max()) if steps.size else 0

    def to_x(u):
        return np.where(log_scale, np.exp(u), u)

    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = func(to_x(c))
    fd = func(to_x(d))
    for it in range(n_iter):
        active = steps > it
        left = active & (fc <= fd)
        right = active & ~(fc <= fd)
        # left keeps [a, d] and reuses c as the new d; right keeps [c, b]
        b = np.where(left, d, b)
        a = np.where(right, c, a)
        d_next = np.where(left, c, d)
        fd_next = np.where(left, fc, fd)
        c_next = np.where(right, d, c)
        fc_next = np.where(right, fd, fc)
        c_next = np.where(left, b - INV_PHI * (b - a), c_next)
        d_next = np.where(right, a + INV_PHI * (b - a), d_next)
        fprobe = func(to_x(np.where(left, c_next, d_next)))
        c, d = c_next, d_next
        fc = np.where(left, fprobe, fc_next)
        fd = np.where(right, fprobe, fd_next)
    return to_x(0.5 * (a + b))


def minimize_on_grid(objective, grid, grid_values, opts):
    """Shared minimizer: coarse grid bracketing, then golden-section refinement.

    ``grid_values`` is ``(P, m)``: the value of each of ``P`` objectives on the
    ``m`` grid points (``grid[0] == 0``). ``objective(lams, which)`` evaluates
    objective ``which[k]`` at ``lams[k]``. Up to ``opts.n_brackets`` local minima
    per objective are refined and the best one kept.

    When the objective is undefined at ``lambda = 0`` (some leverage equals
    one, as for interpolating fits with ``p >= n``) and the minimum lies below
    the first positive grid point, the minimizer is reported as ``0`` with the
    ``at_zero`` flag; ``value`` then holds the limit approached from the right.

    Returns ``(lambda_hat, value, flags)`` with flags from :class:`Boundary`.
    """
    grid = np.asarray(grid, dtype=float)
    grid_values = np.atleast_2d(grid_values)
    P, m = grid_values.shape
    cap = grid[-1]

    owners, los, his, logs = [], [], [], []
    for p in range(P):
        for k in _local_minima(grid_values[p], opts.n_brackets):
            lo_k = grid[max(k - 1, 0)]
            hi_k = grid[min(k + 1, m - 1)]
            owners.append(p)
            los.append(lo_k)
            his.append(hi_k)
            logs.append(lo_k > 0)
    owners = np.asarray(owners, dtype=int)

    refined = golden_section_batch(
        lambda x: objective(x, owners), los, his, logs, opts.tol
    )
    refined_vals = objective(refined, owners)

    best_lam = grid[np.argmin(grid_values, axis=1)].astype(float)
    best_val = grid_values.min(axis=1).astype(float)
    for k in range(owners.size):
        p = owners[k]
        if refined_vals[k] < best_val[p]:
            best_val[p] = refined_vals[k]
            best_lam[p] = refined[k]

    zero_vals = grid_values[:, 0]
    flags = []
    for p in range(P):
        gap = opts.cv_tol * abs(best_val[p])
        if np.isfinite(zero_vals[p]) and zero_vals[p] <= best_val[p] + gap:
            best_lam[p], best_val[p] = 0.0, zero_vals[p]
        elif not np.isfinite(zero_vals[p]) and best_lam[p] <= grid[1]:
            # criterion undefined at 0 (saturated leverage), best value is its limit from the right
            best_lam[p] = 0.0
        if best_lam[p] == 0.0:
            flags.append(Boundary.AT_ZERO)
        elif best_lam[p] >= cap * (1.0 - opts.tol):
            best_lam[p] = cap
            flags.append(Boundary.AT_CAP)
        else:
            flags.append(Boundary.INTERIOR)
    return best_lam, best_val, flags


def minimize_cv(spec, y=None, opts=None):
    """Locate the penalty minimizing the leave-one-out CV error."""
    opts = opts or SolverOptions()
    y, _ = spec.project(y)
    grid = opts.grid(spec)
    values = cv_path(spec, grid, y)

    def objective(lams, which):
        return cv_path(spec, lams, y)

    lam, val, flags = minimize_on_grid(objective, grid, values[None, :], opts)
    return CvCurve(grid, values, float(lam[0]), float(val[0]), flags[0])
