"""Datasets, standardization and the thin SVD that every penalty computation uses."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConstantColumn,
    DecompositionFailure,
    IndexOutOfRange,
    InputError,
    NonFinite,
    TooFewObservations,
)

DEFAULT_RANK_TOL = 1e-12
STD_DDOF = 1


def _freeze(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RawDataset:
    """Covariates ``X`` (n x p) and outcome ``y`` (n) as read from disk.

    Row labels default to ``1..n`` so that reports match the usual
    "observation 39" numbering.
    """

    X: np.ndarray
    y: np.ndarray
    row_labels: tuple = None
    column_labels: tuple = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or y.ndim != 1:
            raise InputError("X must be a matrix and y a vector")
        if X.shape[0] != y.shape[0]:
            raise InputError(
                f"X has {X.shape[0]} rows but y has {y.shape[0]} entries"
            )
        if X.shape[0] < 3:
            raise TooFewObservations(
                f"need at least 3 observations, got {X.shape[0]}"
            )
        if X.shape[1] < 1:
            raise InputError("no covariate columns")
        bad = ~np.isfinite(X)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise NonFinite(f"non-finite covariate at row {i + 1}, column {j + 1}")
        if not np.isfinite(y).all():
            i = int(np.flatnonzero(~np.isfinite(y))[0])
            raise NonFinite(f"non-finite outcome at row {i + 1}")
        n, p = X.shape
        rows = tuple(range(1, n + 1)) if self.row_labels is None else tuple(self.row_labels)
        cols = (
            tuple(f"x{j + 1}" for j in range(p))
            if self.column_labels is None
            else tuple(str(c) for c in self.column_labels)
        )
        if len(rows) != n or len(cols) != p:
            raise InputError("label lengths do not match the data shape")
        object.__setattr__(self, "X", _freeze(X))
        object.__setattr__(self, "y", _freeze(y))
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "column_labels", cols)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def drop_columns(self, names):
        """Return a copy without the named (or 0-based integer) columns."""
        drop = set()
        for name in names:
            if isinstance(name, (int, np.integer)):
                if not 0 <= name < self.p:
                    raise IndexOutOfRange(f"column index {name} out of range")
                drop.add(int(name))
            else:
                matches = [j for j, c in enumerate(self.column_labels) if c.lower() == str(name).lower()]
                if not matches:
                    raise InputError(f"unknown column {name!r}")
                drop.update(matches)
        keep = [j for j in range(self.p) if j not in drop]
        return RawDataset(
            self.X[:, keep],
            self.y,
            self.row_labels,
            tuple(self.column_labels[j] for j in keep),
        )

    def drop_rows(self, indices):
        keep = np.setdiff1d(np.arange(self.n), np.asarray(list(indices), dtype=int))
        return RawDataset(
            self.X[keep],
            self.y[keep],
            tuple(self.row_labels[i] for i in keep),
            self.column_labels,
        )


@dataclass(frozen=True)
class StandardizedDataset:
    """Centered, unit-variance covariates and a centered outcome.

    ``X == (raw.X - column_means) / column_scales`` and
    ``y == (raw.y - y_mean) / y_scale``; ``y_scale`` is 1 unless the outcome was
    scaled on request.
    """

    X: np.ndarray
    y: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    y_mean: float
    y_scale: float = 1.0
    row_labels: tuple = None
    column_labels: tuple = None
    ddof: int = STD_DDOF

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def transform(self, X_new):
        """Map raw covariate rows into the standardized space."""
        return (np.asarray(X_new, dtype=float) - self.column_means) / self.column_scales

    def inverse_transform(self, X_std):
        return np.asarray(X_std, dtype=float) * self.column_scales + self.column_means

    def with_outcome(self, y):
        """Same covariates, new (already centered or not) outcome, re-centered."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n,):
            raise InputError("outcome length does not match the dataset")
        mean = float(y.mean())
        return StandardizedDataset(
            self.X, _freeze(y - mean), self.column_means, self.column_scales,
            mean, 1.0, self.row_labels, self.column_labels, self.ddof,
        )


def standardize(raw, scale_outcome=False):
    """Center and scale each covariate column; center the outcome.

    The scale is the sample standard deviation with divisor ``n - 1``. The
    outcome is only centered unless ``scale_outcome`` is set.
    """
    if not isinstance(raw, RawDataset):
        raise InputError("standardize expects a RawDataset")
    X, y = raw.X, raw.y
    means = X.mean(axis=0)
    centered = X - means
    scales = centered.std(axis=0, ddof=STD_DDOF)
    # relative test: a column of identical large values has roundoff-level spread
    magnitude = np.maximum(np.abs(means), np.abs(X).max(axis=0))
    flat = scales <= 1e-12 * np.maximum(magnitude, 1.0)
    if flat.any():
        j = int(np.flatnonzero(flat)[0])
        raise ConstantColumn(j, raw.column_labels[j])
    Xs = centered / scales
    y_mean = float(y.mean())
    yc = y - y_mean
    y_scale = 1.0
    if scale_outcome:
        s = float(yc.std(ddof=STD_DDOF))
        if s > 0:
            y_scale = s
            yc = yc / s
    return StandardizedDataset(
        _freeze(Xs), _freeze(yc), _freeze(means), _freeze(scales),
        y_mean, y_scale, raw.row_labels, raw.column_labels, STD_DDOF,
    )


@dataclass(frozen=True)
class RidgeSpectrum:
    """Thin SVD ``X = U diag(d) V^T`` truncated to the numerical rank.

    ``Uty`` caches ``U^T y`` for the outcome the spectrum was built with; the
    squared singular values ``alpha`` are the eigenvalues of ``X^T X``.

    With ``intercept`` set, every fit also carries an unpenalized intercept
    that is re-estimated in each leave-one-out fold. The columns of ``U`` are
    then orthogonal to the constant vector (centered data), and each leverage
    gains ``1/n``.
    """

    U: np.ndarray
    d: np.ndarray
    V: np.ndarray
    Uty: np.ndarray
    y: np.ndarray = field(repr=False)
    rank_tolerance: float = DEFAULT_RANK_TOL
    intercept: bool = False

    @property
    def leverage_offset(self):
        return 1.0 / self.n if self.intercept else 0.0

    @property
    def rank(self):
        return self.d.shape[0]

    @property
    def n(self):
        return self.U.shape[0]

    @property
    def p(self):
        return self.V.shape[0]

    @property
    def alpha(self):
        return self.d**2

    def project(self, y=None):
        """Return ``(y, U^T y)``, reusing the cache when ``y`` is omitted."""
        if y is None:
            return self.y, self.Uty
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n,):
            raise InputError(f"outcome must have length {self.n}")
        if y is self.y or np.array_equal(y, self.y):
            return self.y, self.Uty
        return y, self.U.T @ y


def decompose(data, y=None, rank_tolerance=DEFAULT_RANK_TOL, intercept=False):
    """Thin SVD of the standardized design.

    ``data`` is a :class:`StandardizedDataset` or a plain matrix (then ``y`` is
    used as the outcome, zeros if omitted). Singular values below
    ``rank_tolerance * d[0]`` are dropped. Each left singular vector is signed so
    that its largest-magnitude entry is positive.

    ``intercept=True`` requires centered columns and a centered outcome (as
    produced by :func:`standardize`).
    """
    if isinstance(data, StandardizedDataset):
        X = data.X
        y = data.y if y is None else y
    else:
        X = np.asarray(data, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
    n = X.shape[0]
    y = np.zeros(n) if y is None else np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise InputError("outcome length does not match the design")
    if not np.isfinite(X).all():
        raise NonFinite("design matrix has non-finite entries")
    if intercept:
        scale = max(float(np.abs(X).max()), 1.0)
        if np.abs(X.mean(axis=0)).max() > 1e-8 * scale or abs(y.mean()) > 1e-8 * max(float(np.abs(y).max()), 1.0):
            raise InputError("intercept mode needs centered covariates and outcome")
    try:
        U, d, Vt = np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionFailure(str(exc)) from exc
    if d.size == 0 or d[0] <= 0:
        raise DecompositionFailure("design matrix is identically zero")
    r = int(np.sum(d > rank_tolerance * d[0]))
    U, d, V = U[:, :r], d[:r], Vt[:r].T
    pivot = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivot, np.arange(r)])
    signs[signs == 0] = 1.0
    U = U * signs
    V = V * signs
    return RidgeSpectrum(
        _freeze(U), _freeze(d), _freeze(V), _freeze(U.T @ y), _freeze(y),
        rank_tolerance, bool(intercept),
    )


def pc_scores(spec, k=1):
    """Scores on the ``k``-th principal component (1-based) and its variance share.

    Returns ``(U[:, k-1] * d[k-1], d[k-1]**2 / sum(d**2))``.
    """
    if not 1 <= k <= spec.rank:
        raise IndexOutOfRange(f"component {k} outside 1..{spec.rank}")
    scores = spec.U[:, k - 1] * spec.d[k - 1]
    explained = float(spec.d[k - 1] ** 2 / np.sum(spec.d**2))
    return scores, explained


def explained_variance(spec):
    """Variance shares of all retained components."""
    a = spec.d**2
    return a / a.sum()
