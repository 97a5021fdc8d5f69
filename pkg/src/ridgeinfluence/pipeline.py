"""End-to-end analysis: data in, curves, influence reports and a manifest out."""

from __future__ import annotations

import csv
import json
import platform
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError, LeverageOne
from .influence import classify, influence_derivatives, normalize_univariate, univariate_sign_analysis
from .ingest import BODYFAT_DROP, BODYFAT_OUTCOME, load_bodyfat, read_table
from .loocv import Boundary, SolverOptions, minimize_cv
from .spectral import RawDataset, decompose, pc_scores, standardize
from .weighted import WeightGrid, influence_curves

PLOT_KINDS = ("lambda", "df", "pc")


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything that determines an analysis run.

    ``input`` of ``None`` means the bundled body-fat data. ``input_format`` is
    ``"csv"`` (delimited table with ``outcome`` among its columns) or
    ``"bodyfat"`` (the whitespace StatLib layout). ``intercept`` is ``True``,
    ``False`` or ``"auto"``; auto refits an intercept in every leave-one-out
    fold only when the centered design has rank ``n - 1`` or more, where fits
    without it interpolate every held-out point.
    """

    input: str = None
    input_format: str = "bodyfat"
    outcome: str = BODYFAT_OUTCOME
    drop: tuple = BODYFAT_DROP
    delimiter: str = ","
    header: bool = True
    row_label_column: str = None
    max_factor: float = 4.0
    step: float = 0.05
    solver: SolverOptions = field(default_factory=SolverOptions)
    scale_outcome: bool = False
    intercept: object = "auto"
    out_dir: str = None
    plots: tuple = PLOT_KINDS
    highlight: tuple = None
    top_k: int = 3
    n_jobs: int = 1

    def __post_init__(self):
        if self.input_format not in ("csv", "bodyfat"):
            raise InputError(f"unknown input format {self.input_format!r}")
        if self.intercept not in (True, False, "auto"):
            raise InputError("intercept must be true, false or 'auto'")
        bad = set(self.plots) - set(PLOT_KINDS)
        if bad:
            raise InputError(f"unknown plot kinds {sorted(bad)}")
        if self.step <= 0 or self.max_factor < 1:
            raise InputError("need step > 0 and max_factor >= 1")

    def grid(self):
        return WeightGrid.regular(self.max_factor, self.step)

    def echo(self):
        out = asdict(self)
        out["solver"] = asdict(self.solver)
        return out


@dataclass(frozen=True)
class AnalysisBundle:
    """Results of :func:`run_analysis`; ``curves`` and ``reports`` are in row order."""

    raw: RawDataset
    curves: list
    reports: list
    cv_curve: object
    pc1: tuple
    metadata: dict

    @property
    def labels(self):
        return self.raw.row_labels

    def highlighted(self, explicit=None, k=3):
        """0-based rows to draw in bold: the explicit labels, else the top ``k`` rank scores."""
        if explicit:
            lookup = {str(lab): i for i, lab in enumerate(self.labels)}
            rows = []
            for lab in explicit:
                if str(lab) not in lookup:
                    raise InputError(f"no observation labelled {lab!r}")
                rows.append(lookup[str(lab)])
            return rows
        scores = np.array([r.rank_score for r in self.reports])
        return [int(i) for i in np.argsort(-scores, kind="stable")[:k]]


def load_data(config):
    if config.input is None:
        return load_bodyfat(None, config.drop)
    if config.input_format == "bodyfat":
        return load_bodyfat(config.input, config.drop)
    return read_table(
        config.input, config.outcome, config.header, config.delimiter,
        config.drop, config.row_label_column,
    )


def spectrum_for(data, intercept="auto"):
    """Spectrum of ``data``, with per-fold intercept refits on, off or chosen by rank."""
    spec = decompose(data)
    if intercept == "auto":
        intercept = spec.rank >= data.n - 1
    return replace(spec, intercept=True) if intercept else spec


def _nominators(data, spec, lam):
    # one covariate: rescale to unit sum of squares; the penalty scales alike
    if data.p != 1 or spec.intercept:
        return None
    x, y = normalize_univariate(data.X[:, 0], data.y)
    scale = float(np.sum((data.X[:, 0]) ** 2))
    return univariate_sign_analysis(x, y, lam / scale).nominator


def run_analysis(config, raw=None):
    """Ingest, standardize, decompose, solve, trace every curve and classify.

    ``raw`` overrides reading ``config.input``.
    """
    t0 = time.perf_counter()
    raw = load_data(config) if raw is None else raw
    data = standardize(raw, scale_outcome=config.scale_outcome)
    spec = spectrum_for(data, config.intercept)
    opts = config.solver
    cv = minimize_cv(spec, None, opts)
    t1 = time.perf_counter()
    grid = config.grid()
    curves = influence_curves(spec, None, grid, opts, n_jobs=config.n_jobs)
    t2 = time.perf_counter()
    try:
        deriv, numeric = influence_derivatives(spec, None, cv, opts)
    except LeverageOne as exc:
        raise LeverageOne(raw.row_labels[exc.index]) from None
    nominator = _nominators(data, spec, cv.minimizer) if not numeric else None
    reports = classify(deriv, None, numeric, nominator)
    scores, fraction = pc_scores(spec, 1)
    meta = {
        "package_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "config": config.echo(),
        "n": raw.n,
        "p": raw.p,
        "covariates": list(raw.column_labels),
        "rank": spec.rank,
        "intercept_per_fold": bool(spec.intercept),
        "lambda_cv": cv.minimizer,
        "cv_min": cv.min_value,
        "boundary": str(cv.at_boundary),
        "df_cv": float(np.sum(spec.d**2 / (spec.d**2 + cv.minimizer))),
        "derivatives_boundary_derived": bool(numeric),
        "pc1_explained": fraction,
        "timing_seconds": {"cv": t1 - t0, "curves": t2 - t1, "total": time.perf_counter() - t0},
    }
    return AnalysisBundle(raw, curves, reports, cv, (scores, fraction), meta)


def _num(v):
    return repr(float(v))


def write_curves(bundle, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["observation", "factor", "weight", "lambda_hat", "df_hat", "flag"])
        n = bundle.raw.n
        for c in bundle.curves:
            lab = bundle.labels[c.observation]
            for t, lam, df, flag in zip(c.factors, c.lambda_hat, c.df_hat, c.boundary_flags):
                w.writerow([lab, _num(t), _num(t / n), _num(lam), _num(df), str(flag)])


def write_report(bundle, path):
    with_nom = any(r.nominator_factor is not None for r in bundle.reports)
    order = sorted(range(len(bundle.reports)), key=lambda i: (-bundle.reports[i].rank_score, i))
    rank = {i: k + 1 for k, i in enumerate(order)}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        head = ["observation", "derivative", "label", "rank_score", "rank", "boundary_derived"]
        w.writerow(head + (["nominator_factor"] if with_nom else []))
        for r in bundle.reports:
            row = [
                bundle.labels[r.observation], _num(r.derivative), r.label,
                _num(r.rank_score), rank[r.observation], int(r.boundary_derived),
            ]
            if with_nom:
                row.append(_num(r.nominator_factor))
            w.writerow(row)


def write_cv(cv, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "cv"])
        for lam, v in zip(cv.lambdas, cv.cv_values):
            w.writerow([_num(lam), _num(v)])


def write_manifest(bundle, path):
    with open(path, "w") as fh:
        json.dump(bundle.metadata, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def write_outputs(bundle, config, out_dir=None):
    """Write CSVs, manifest and the requested plots; return the written paths."""
    out = Path(out_dir or config.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "curves": out / "curves.csv",
        "report": out / "report.csv",
        "cv": out / "cv.csv",
        "manifest": out / "meta.json",
    }
    write_curves(bundle, paths["curves"])
    write_report(bundle, paths["report"])
    write_cv(bundle.cv_curve, paths["cv"])
    write_manifest(bundle, paths["manifest"])
    if config.plots:
        from .plots import render_plots

        paths.update(render_plots(bundle, config, out / "plots"))
    return paths


def boundary_counts(bundle):
    """How many curve points sit at each boundary flag."""
    counts = {b.value: 0 for b in Boundary}
    for c in bundle.curves:
        for f in c.boundary_flags:
            counts[str(f)] += 1
    return counts
