"""Command-line entry point.

Exit codes: 0 success, 2 bad input or arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .errors import InputError, NumericalError
from .ingest import BODYFAT_DROP, BODYFAT_OUTCOME, BODYFAT_URL, bundled_bodyfat_text, fetch_bodyfat, parse_bodyfat
from .loocv import SolverOptions
from .pipeline import PLOT_KINDS, AnalysisConfig, load_data, run_analysis, write_cv, write_outputs
from .spectral import standardize

EXIT_INPUT = 2
EXIT_NUMERIC = 3

log = logging.getLogger("ridgeinfluence")


def _data_args(p):
    p.add_argument("input", nargs="?", help="data file (default: bundled body-fat data)")
    p.add_argument("--format", dest="input_format", choices=("csv", "bodyfat"),
                   help="input layout (default: bodyfat without INPUT, csv with it)")
    p.add_argument("--outcome", help=f"outcome column name or 0-based index (default {BODYFAT_OUTCOME})")
    p.add_argument("--drop", action="append", default=None, metavar="COL",
                   help="covariate column to leave out; repeatable (default for body fat: Age, Density)")
    p.add_argument("--keep-all", action="store_true", help="drop no columns")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--row-labels", dest="row_label_column", help="column holding observation labels")
    p.add_argument("--scale-outcome", action="store_true", help="also scale the outcome to unit variance")
    p.add_argument("--intercept", choices=("auto", "yes", "no"), default="auto",
                   help="refit an intercept in every leave-one-out fold (auto: only when p >= n - 1)")


def _solver_args(p):
    d = SolverOptions()
    p.add_argument("--lambda-cap-mult", type=float, default=d.lambda_cap_mult)
    p.add_argument("--grid-min-mult", type=float, default=d.grid_min_mult)
    p.add_argument("--grid-points", type=int, default=d.grid_points)
    p.add_argument("--tol", type=float, default=d.tol)


def _curve_args(p):
    p.add_argument("--max-factor", type=float, default=4.0)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--n-jobs", type=int, default=1)


def _output_args(p):
    p.add_argument("--out", default="ridgeinfluence-out", help="output directory")
    p.add_argument("--plots", default=",".join(PLOT_KINDS),
                   help="comma list of lambda, df, pc; empty for none")
    p.add_argument("--highlight", action="append", default=None, metavar="OBS",
                   help="observation label to draw in bold; repeatable (default: top 3)")
    p.add_argument("--top-k", type=int, default=3)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ridgeinfluence",
        description="Influence of single observations on the leave-one-out tuned ridge penalty.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full pipeline: curves, report, plots")
    _data_args(p)
    _solver_args(p)
    _curve_args(p)
    _output_args(p)

    p = sub.add_parser("cv", help="unweighted CV curve and its minimizer")
    _data_args(p)
    _solver_args(p)
    p.add_argument("--out", default=None, help="directory for cv.csv (default: print only)")

    p = sub.add_parser("curve", help="optimal-penalty curve of one observation")
    _data_args(p)
    _solver_args(p)
    _curve_args(p)
    p.add_argument("--obs", required=True, help="observation label (1-based row number by default)")
    p.add_argument("--out", default=None, help="CSV file (default: stdout)")

    p = sub.add_parser("simulate", help="simulate a planted-influence scenario and analyze it")
    p.add_argument("--scenario", default=None, help="builtin name or number (1-5)")
    p.add_argument("--config", default=None, help="scenario INI file (overrides --scenario)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--covariates", default=None, help="CSV of covariates (default: synthetic stand-in)")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--list", action="store_true", help="list builtin scenarios and exit")
    p.add_argument("--no-analyze", action="store_true")
    _solver_args(p)
    _curve_args(p)
    _output_args(p)

    p = sub.add_parser("fetch-bodyfat", help="download (or copy) the body-fat data as CSV")
    p.add_argument("--url", default=BODYFAT_URL)
    p.add_argument("--local", default=None, help="parse this local copy instead of downloading")
    p.add_argument("--bundled", action="store_true", help="use the copy shipped with the package")
    p.add_argument("--timeout", type=float, default=30.0)
    p.add_argument("--out", default="bodyfat.csv")
    return parser


def _solver(args):
    return SolverOptions(
        lambda_cap_mult=args.lambda_cap_mult,
        grid_min_mult=args.grid_min_mult,
        grid_points=args.grid_points,
        tol=args.tol,
    )


def _config(args, **extra):
    fmt = args.input_format or ("csv" if args.input else "bodyfat")
    if args.keep_all:
        drop = ()
    elif args.drop is not None:
        drop = tuple(args.drop)
    else:
        drop = BODYFAT_DROP if fmt == "bodyfat" else ()
    intercept = {"auto": "auto", "yes": True, "no": False}[args.intercept]
    kw = dict(
        input=args.input,
        input_format=fmt,
        outcome=args.outcome or BODYFAT_OUTCOME,
        drop=drop,
        delimiter=args.delimiter,
        header=not args.no_header,
        row_label_column=args.row_label_column,
        solver=_solver(args),
        scale_outcome=args.scale_outcome,
        intercept=intercept,
    )
    if hasattr(args, "max_factor"):
        kw.update(max_factor=args.max_factor, step=args.step, n_jobs=args.n_jobs)
    kw.update(extra)
    return AnalysisConfig(**kw)


def _plots(args):
    return tuple(k.strip() for k in args.plots.split(",") if k.strip())


def _print_summary(bundle, out=sys.stdout):
    m = bundle.metadata
    print(f"n={m['n']} p={m['p']} lambda_cv={m['lambda_cv']:.6g} ({m['boundary']}) df={m['df_cv']:.4g}", file=out)
    order = sorted(bundle.reports, key=lambda r: (-r.rank_score, r.observation))
    for r in order[:5]:
        print(f"  obs {bundle.labels[r.observation]}: {r.label} derivative={r.derivative:.6g} score={r.rank_score:.3g}", file=out)


def cmd_analyze(args):
    cfg = _config(args, out_dir=args.out, plots=_plots(args),
                  highlight=tuple(args.highlight) if args.highlight else None, top_k=args.top_k)
    bundle = run_analysis(cfg)
    paths = write_outputs(bundle, cfg)
    _print_summary(bundle)
    for k, v in paths.items():
        log.info("wrote %s: %s", k, v)
    return 0


def cmd_cv(args):
    from .loocv import minimize_cv
    from .pipeline import spectrum_for

    cfg = _config(args)
    raw = load_data(cfg)
    spec = spectrum_for(standardize(raw, cfg.scale_outcome), cfg.intercept)
    cv = minimize_cv(spec, None, cfg.solver)
    print(f"lambda_cv={cv.minimizer!r} cv={cv.min_value!r} flag={cv.at_boundary}")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_cv(cv, Path(args.out) / "cv.csv")
    return 0


def cmd_curve(args):
    from .pipeline import spectrum_for
    from .weighted import influence_curve

    cfg = _config(args)
    raw = load_data(cfg)
    lookup = {str(lab): i for i, lab in enumerate(raw.row_labels)}
    if str(args.obs) not in lookup:
        raise InputError(f"no observation labelled {args.obs!r}")
    i = lookup[str(args.obs)]
    spec = spectrum_for(standardize(raw, cfg.scale_outcome), cfg.intercept)
    curve = influence_curve(spec, None, i, cfg.grid(), cfg.solver)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["observation", "factor", "weight", "lambda_hat", "df_hat", "flag"])
        for t, lam, df, flag in zip(curve.factors, curve.lambda_hat, curve.df_hat, curve.boundary_flags):
            w.writerow([args.obs, repr(float(t)), repr(float(t / raw.n)), repr(float(lam)), repr(float(df)), flag])
    finally:
        if args.out:
            fh.close()
    return 0


def cmd_simulate(args):
    from . import simgen
    from .ingest import read_covariates

    if args.list:
        for t in simgen.builtin_scenarios():
            print(f"{t.kind}  {t.name:<18} {t.description}")
        return 0
    if args.covariates:
        data = standardize(read_covariates(args.covariates, args.delimiter))
    else:
        data = simgen.stand_in_dataset()
    if args.config:
        spec = simgen.read_spec(args.config)
    elif args.scenario:
        spec = simgen.scenario_by_name(args.scenario).build(data, args.seed)
    else:
        raise InputError("give --scenario or --config")
    sim = simgen.generate(data, spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    simgen.write_spec(spec, out / "scenario.ini")
    with open(out / "simulated.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["observation", "y"] + list(sim.raw.column_labels))
        for k in range(sim.raw.n):
            w.writerow([sim.raw.row_labels[k], repr(float(sim.y[k]))] + [repr(float(v)) for v in sim.raw.X[k]])
    with open(out / "truth.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["observation", "role"])
        for pos, role in sorted(sim.truth.items()):
            w.writerow([sim.raw.row_labels[pos], role])
    print(f"scenario {spec.name} seed {spec.seed}: n={sim.raw.n} p={sim.raw.p}, wrote {out}")
    if args.no_analyze:
        return 0
    cfg = AnalysisConfig(
        input=str(out / "simulated.csv"), input_format="csv", outcome="y", drop=(),
        row_label_column="observation", solver=_solver(args), max_factor=args.max_factor,
        step=args.step, n_jobs=args.n_jobs, out_dir=str(out), plots=_plots(args),
        highlight=tuple(args.highlight) if args.highlight else None, top_k=args.top_k,
    )
    bundle = run_analysis(cfg, raw=sim.raw)
    write_outputs(bundle, cfg)
    _print_summary(bundle)
    return 0


def cmd_fetch(args):
    if args.bundled:
        text = bundled_bodyfat_text()
    elif args.local:
        text = Path(args.local).read_text(encoding="latin-1")
    else:
        try:
            text = fetch_bodyfat(args.url, args.timeout)
        except OSError as exc:
            raise InputError(f"download failed ({exc}); use --local FILE or --bundled") from None
    raw = parse_bodyfat(text)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["BodyFat"] + list(raw.column_labels))
        for k in range(raw.n):
            w.writerow([repr(float(raw.y[k]))] + [repr(float(v)) for v in raw.X[k]])
    print(f"{raw.n} rows written to {args.out}")
    return 0


COMMANDS = {
    "analyze": cmd_analyze,
    "cv": cmd_cv,
    "curve": cmd_curve,
    "simulate": cmd_simulate,
    "fetch-bodyfat": cmd_fetch,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
