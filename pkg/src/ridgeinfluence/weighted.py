"""Single-normalized-weight CV and the per-observation optimal-penalty curves.

Observation ``i`` gets weight ``w``; each of the other ``n - 1`` observations
gets ``(1 - w) / (n - 1)``. Weights are usually given as factors ``t`` of the
uniform weight, ``w = t / n``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange, InputError, WeightOutOfRange
from .loocv import (
    Boundary,
    SolverOptions,
    loo_squared_errors,
    minimize_on_grid,
    shrinkage,
)


class CurveJumpWarning(UserWarning):
    """The optimal penalty switches between separate local minima."""


@dataclass(frozen=True)
class WeightGrid:
    """Increasing weight factors ``t`` (``w = t / n``); always contains ``t = 1``."""

    factors: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.factors, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise InputError("weight grid must be a non-empty vector")
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise InputError("weight factors must be finite and non-negative")
        if np.any(np.diff(t) <= 0):
            raise InputError("weight factors must be strictly increasing")
        if not np.any(t == 1.0):
            raise InputError("weight grid must contain the factor 1")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "factors", t)

    @classmethod
    def regular(cls, max_factor=4.0, step=0.05):
        count = int(round(max_factor / step))
        t = np.round(np.arange(count + 1) * step, 12)
        if not np.any(t == 1.0):
            t = np.union1d(t, [1.0])
        return cls(t)

    def weights(self, n):
        w = self.factors / n
        if np.any(w > 1.0):
            raise WeightOutOfRange(float(w.max()))
        return w

    @property
    def unit_index(self):
        return int(np.flatnonzero(self.factors == 1.0)[0])


@dataclass(frozen=True)
class InfluenceCurve:
    """Optimal penalty as a function of one observation's weight.

    ``observation`` is the 0-based row index. ``jumps`` lists factor intervals
    ``(t_lo, t_hi)`` narrowed around points where the minimizer switches
    branch.
    """

    observation: int
    grid: WeightGrid
    lambda_hat: np.ndarray
    df_hat: np.ndarray
    boundary_flags: tuple
    jumps: tuple = field(default=())

    @property
    def factors(self):
        return self.grid.factors


def _check_weight(w):
    w = float(w)
    if not 0.0 <= w <= 1.0:
        raise WeightOutOfRange(w)
    return w


def _check_index(i, n):
    if not 0 <= int(i) < n:
        raise IndexOutOfRange(f"observation index {i} outside 0..{n - 1}")
    return int(i)


def weighted_cv_value(evaluation, i, w):
    """Criterion value ``w e_(i)^2 + (1 - w)/(n - 1) * sum_{j != i} e_(j)^2``."""
    w = _check_weight(w)
    f = evaluation.loo_errors**2
    n = f.shape[0]
    i = _check_index(i, n)
    return float(w * f[i] + (1.0 - w) / (n - 1) * (f.sum() - f[i]))


def _weighted(f_i, total, w, n):
    return w * f_i + (1.0 - w) / (n - 1) * (total - f_i)


class _PathCache:
    """Squared LOO errors on the coarse grid, shared by every weighted solve."""

    def __init__(self, spec, y, opts):
        self.spec = spec
        self.y, _ = spec.project(y)
        self.opts = opts
        self.grid = opts.grid(spec)
        self.F = loo_squared_errors(spec, self.grid, self.y)
        self.S = self.F.sum(axis=1)
        self.n = spec.n

    def solve(self, i, weights):
        weights = np.asarray(weights, dtype=float)
        n = self.n
        with np.errstate(invalid="ignore"):
            values = _weighted(self.F[:, i][None, :], self.S[None, :], weights[:, None], n)
        values = np.where(np.isfinite(self.S)[None, :], values, np.inf)

        def objective(lams, which):
            f = loo_squared_errors(self.spec, lams, self.y)
            return _weighted(f[:, i], f.sum(axis=1), weights[which], n)

        return minimize_on_grid(objective, self.grid, values, self.opts)


def solve_lambda_for_weight(spec, y, i, w, opts=None):
    """Minimizer of the weighted criterion for observation ``i`` at weight ``w``.

    Uses the same grid bracketing and golden-section refinement as
    :func:`~ridgeinfluence.loocv.minimize_cv`. Returns ``(lambda_hat, flag)``.
    """
    w = _check_weight(w)
    i = _check_index(i, spec.n)
    cache = _PathCache(spec, y, opts or SolverOptions())
    lam, _, flags = cache.solve(i, [w])
    return float(lam[0]), flags[0]


def _locate_jumps(cache, i, factors, lam, flags, ratio, bisections):
    n = cache.n
    jumps = []
    for k in range(len(factors) - 1):
        if flags[k] is not Boundary.INTERIOR or flags[k + 1] is not Boundary.INTERIOR:
            continue
        if abs(math.log(lam[k + 1] / lam[k])) <= math.log(ratio):
            continue
        lo, hi = factors[k], factors[k + 1]
        lam_lo, lam_hi = lam[k], lam[k + 1]
        for _ in range(bisections):
            mid = 0.5 * (lo + hi)
            lam_mid = float(cache.solve(i, [mid / n])[0][0])
            if abs(math.log(max(lam_mid, 1e-300) / lam_lo)) < abs(math.log(lam_hi / max(lam_mid, 1e-300))):
                lo, lam_lo = mid, lam_mid
            else:
                hi, lam_hi = mid, lam_mid
        jumps.append((float(lo), float(hi)))
        warnings.warn(
            f"observation {i}: optimal penalty jumps from {lam[k]:.4g} to "
            f"{lam[k + 1]:.4g} between factors {lo:.6g} and {hi:.6g}",
            CurveJumpWarning,
            stacklevel=3,
        )
    return tuple(jumps)


def _curve_from_cache(cache, i, grid, jump_ratio, jump_bisections):
    weights = grid.weights(cache.n)
    lam, _, flags = cache.solve(i, weights)
    df = np.array([float(np.sum(shrinkage(cache.spec, l))) for l in lam])
    jumps = _locate_jumps(cache, i, grid.factors, lam, flags, jump_ratio, jump_bisections)
    lam.setflags(write=False)
    df.setflags(write=False)
    return InfluenceCurve(i, grid, lam, df, tuple(flags), jumps)


def influence_curve(spec, y, i, grid=None, opts=None, jump_ratio=10.0, jump_bisections=12):
    """Optimal penalty and effective degrees of freedom along the weight grid.

    Every grid point is bracketed from the shared coarse path, so no warm start
    is needed. Adjacent interior points whose penalties differ by more than
    ``jump_ratio`` are treated as a branch switch: the switch is localised by
    bisection on the factor and a :class:`CurveJumpWarning` is issued.
    """
    grid = grid or WeightGrid.regular()
    cache = _PathCache(spec, y, opts or SolverOptions())
    i = _check_index(i, spec.n)
    return _curve_from_cache(cache, i, grid, jump_ratio, jump_bisections)


def influence_curves(spec, y=None, grid=None, opts=None, observations=None, n_jobs=1,
                     jump_ratio=10.0, jump_bisections=12):
    """Curves for many observations, returned in observation order.

    ``n_jobs > 1`` runs observations on a thread pool; results are identical to
    the sequential run.
    """
    grid = grid or WeightGrid.regular()
    cache = _PathCache(spec, y, opts or SolverOptions())
    idx = range(spec.n) if observations is None else [_check_index(i, spec.n) for i in observations]
    grid.weights(spec.n)

    def one(i):
        return _curve_from_cache(cache, i, grid, jump_ratio, jump_bisections)

    if n_jobs is None or n_jobs <= 1:
        return [one(i) for i in idx]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(one, idx))


def deletion_lambda(raw, i, opts=None, scale_outcome=False):
    """Penalty chosen after physically removing row ``i`` and re-running everything.

    ``raw`` is a :class:`~ridgeinfluence.spectral.RawDataset`; the reduced data
    are re-standardized and re-decomposed. Diagnostic only: it need not equal
    the weight-zero end of the curve, whose leave-one-out errors still come from
    folds that contain row ``i``.
    """
    from .loocv import minimize_cv
    from .spectral import decompose, standardize

    reduced = standardize(raw.drop_rows([i]), scale_outcome=scale_outcome)
    return minimize_cv(decompose(reduced), None, opts or SolverOptions())
