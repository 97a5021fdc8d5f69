"""Static SVG figures: penalty curves, degrees-of-freedom curves and the PC1 scatter.

Each observation curve is one ``<path>`` carrying ``gid="curve-<label>"``, so
the files can be checked structurally. Output is byte-stable: the SVG hash
salt is fixed and the date metadata is dropped.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GREY = "#9a9a9a"
BOLD = ("#c0392b", "#1f5fa8", "#2a8c4a", "#8e44ad", "#d68910", "#16a085")


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": "ridgeinfluence", "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _curve_plot(bundle, highlight, values, ylabel, log_y, path):
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    bold = {i: BOLD[k % len(BOLD)] for k, i in enumerate(highlight)}
    for c in bundle.curves:
        if c.observation in bold:
            continue
        y = values(c)
        ax.plot(c.factors, y, color=GREY, lw=0.6, gid=f"curve-{bundle.labels[c.observation]}")
    for i, color in bold.items():
        c = bundle.curves[i]
        lab = bundle.labels[i]
        ax.plot(c.factors, values(c), color=color, lw=2.2, gid=f"curve-{lab}", label=f"obs {lab}")
    ax.axvline(1.0, color="black", lw=0.8, ls="-", gid="reference-t1")
    if log_y:
        ax.set_yscale("symlog", linthresh=_linthresh(bundle))
    ax.set_xlabel("weight relative to 1/n")
    ax.set_ylabel(ylabel)
    if bold:
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def _linthresh(bundle):
    lam = np.concatenate([c.lambda_hat for c in bundle.curves])
    pos = lam[lam > 0]
    return float(pos.min()) if pos.size else 1.0


def plot_lambda_curves(bundle, highlight, path, log_y=False):
    _curve_plot(bundle, highlight, lambda c: c.lambda_hat, "optimal penalty", log_y, path)


def plot_df_curves(bundle, highlight, path):
    _curve_plot(bundle, highlight, lambda c: c.df_hat, "effective degrees of freedom", False, path)


def plot_pc_scatter(bundle, highlight, path):
    """Outcome against the first PC score, with the fitted line (dashed) and the mean (dotted)."""
    scores, fraction = bundle.pc1
    y = bundle.raw.y
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    ax.scatter(scores, y, s=12, color=GREY, gid="points")
    slope, intercept = np.polyfit(scores, y, 1)
    xs = np.array([scores.min(), scores.max()])
    ax.plot(xs, intercept + slope * xs, color="black", ls="--", lw=1.0, gid="regression-line")
    ax.axhline(float(y.mean()), color="black", ls=":", lw=1.0, gid="mean-line")
    for k, i in enumerate(highlight):
        ax.scatter([scores[i]], [y[i]], s=36, color=BOLD[k % len(BOLD)], zorder=3)
        ax.annotate(str(bundle.labels[i]), (scores[i], y[i]), textcoords="offset points", xytext=(4, 4), fontsize=8)
    ax.set_xlabel(f"first principal component ({100 * fraction:.2f}% of variance)")
    ax.set_ylabel("outcome")
    fig.tight_layout()
    _save(fig, path)


def render_plots(bundle, config, out_dir):
    """Write the requested SVGs into ``out_dir``; returns ``{kind: path}``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    highlight = bundle.highlighted(config.highlight, config.top_k)
    written = {}
    if "lambda" in config.plots:
        written["lambda_plot"] = out / "lambda_curves.svg"
        plot_lambda_curves(bundle, highlight, written["lambda_plot"])
    if "df" in config.plots:
        written["df_plot"] = out / "df_curves.svg"
        plot_df_curves(bundle, highlight, written["df_plot"])
    if "pc" in config.plots:
        written["pc_plot"] = out / "pc1_scatter.svg"
        plot_pc_scatter(bundle, highlight, written["pc_plot"])
    return written
