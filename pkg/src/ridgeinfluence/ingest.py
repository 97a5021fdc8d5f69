"""Reading covariate/outcome tables from delimited text and the StatLib body-fat file."""

from __future__ import annotations

import io
import re
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import IndexOutOfRange, InputError, NonFinite
from .spectral import RawDataset

BODYFAT_URL = "http://lib.stat.cmu.edu/datasets/bodyfat"
BODYFAT_COLUMNS = (
    "Density", "BodyFat", "Age", "Weight", "Height", "Neck", "Chest", "Abdomen",
    "Hip", "Thigh", "Knee", "Ankle", "Biceps", "Forearm", "Wrist",
)
BODYFAT_OUTCOME = "BodyFat"
# Age is categorical-ish and dropped; Density is the measurement the outcome is
# computed from (Siri: 495/Density - 450), so it cannot act as a covariate.
BODYFAT_DROP = ("Age", "Density")

_NUMBER = re.compile(r"^[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")


def _resolve_column(selector, names):
    if isinstance(selector, (int, np.integer)) or (isinstance(selector, str) and selector.lstrip("-").isdigit() and selector not in names):
        j = int(selector)
        if not -len(names) <= j < len(names):
            raise IndexOutOfRange(f"column index {j} out of range (0..{len(names) - 1})")
        return j % len(names)
    lowered = [str(c).lower() for c in names]
    try:
        return lowered.index(str(selector).lower())
    except ValueError:
        raise InputError(f"no column named {selector!r}; have {list(names)}") from None


def read_table(path_or_buffer, outcome, header=True, delimiter=",", drop=(), row_label_column=None):
    """Read a numeric table and split it into covariates and an outcome.

    ``outcome`` and entries of ``drop`` are column names (matched
    case-insensitively) or 0-based indices. ``row_label_column`` optionally names
    a column holding observation identifiers.
    """
    try:
        frame = pd.read_csv(
            path_or_buffer,
            sep=delimiter,
            header=0 if header else None,
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError:
        raise InputError(f"{path_or_buffer}: input is empty") from None
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from None
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise InputError(f"{path_or_buffer}: {exc}") from None
    if frame.shape[0] == 0:
        raise InputError(f"{path_or_buffer}: no data rows")
    names = [str(c) for c in frame.columns]
    row_labels = None
    skip = set()
    if row_label_column is not None:
        k = _resolve_column(row_label_column, names)
        row_labels = tuple(frame.iloc[:, k].tolist())
        skip.add(k)
    j_out = _resolve_column(outcome, names)
    skip.add(j_out)
    for d in drop:
        skip.add(_resolve_column(d, names))
    cov = [j for j in range(len(names)) if j not in skip]
    if not cov:
        raise InputError("no covariate columns left after dropping")
    try:
        X = frame.iloc[:, cov].apply(pd.to_numeric, errors="raise").to_numpy(dtype=float)
        y = pd.to_numeric(frame.iloc[:, j_out], errors="raise").to_numpy(dtype=float)
    except (ValueError, TypeError) as exc:
        raise InputError(f"non-numeric entry: {exc}") from None
    if np.isnan(X).any() or np.isnan(y).any():
        i = int(np.flatnonzero(np.isnan(X).any(axis=1) | np.isnan(y))[0])
        raise NonFinite(f"missing or non-finite value in data row {i + 1}")
    labels = tuple(names[j] for j in cov) if header else tuple(f"x{j + 1}" for j in cov)
    return RawDataset(X, y, row_labels, labels)


def read_covariates(path_or_buffer, delimiter=",", header=True):
    """Covariate-only table (every column numeric); the outcome is left at zero."""
    try:
        frame = pd.read_csv(path_or_buffer, sep=delimiter, header=0 if header else None)
        X = frame.apply(pd.to_numeric, errors="raise").to_numpy(dtype=float)
    except pd.errors.EmptyDataError:
        raise InputError(f"{path_or_buffer}: input is empty") from None
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from None
    except (ValueError, TypeError, pd.errors.ParserError) as exc:
        raise InputError(f"{path_or_buffer}: {exc}") from None
    labels = tuple(str(c) for c in frame.columns) if header else None
    return RawDataset(X, np.zeros(X.shape[0]), None, labels)


def parse_bodyfat(text):
    """Parse the whitespace-separated StatLib body-fat layout.

    Any line made of exactly 15 numbers is a data row; everything else (the
    descriptive header) is ignored. Returns all 14 non-outcome columns as
    covariates with ``BodyFat`` as the outcome.
    """
    rows = []
    for line in text.splitlines():
        tokens = line.split()
        if len(tokens) == len(BODYFAT_COLUMNS) and all(_NUMBER.match(t) for t in tokens):
            rows.append([float(t) for t in tokens])
    if not rows:
        raise InputError("no body-fat data rows found")
    data = np.array(rows)
    j = BODYFAT_COLUMNS.index(BODYFAT_OUTCOME)
    cov = [k for k in range(len(BODYFAT_COLUMNS)) if k != j]
    return RawDataset(data[:, cov], data[:, j], None, tuple(BODYFAT_COLUMNS[k] for k in cov))


def bundled_bodyfat_text():
    return resources.files("ridgeinfluence").joinpath("data/bodyfat.dat").read_text()


def load_bodyfat(path=None, drop=BODYFAT_DROP):
    """Body-fat data (252 men) with the analysis columns.

    Reads ``path`` when given, otherwise the copy shipped with the package.
    """
    text = Path(path).read_text() if path is not None else bundled_bodyfat_text()
    raw = parse_bodyfat(text)
    return raw.drop_columns(drop) if drop else raw


def fetch_bodyfat(url=BODYFAT_URL, timeout=30.0):
    """Download the public body-fat file and return its text."""
    import urllib.request

    with urllib.request.urlopen(url, timeout=timeout) as response:
        payload = response.read()
    return io.TextIOWrapper(io.BytesIO(payload), encoding="latin-1").read()
