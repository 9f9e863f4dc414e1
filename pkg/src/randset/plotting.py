"""Figure rendering for the report path.

Each function writes one PNG next to the delimited output and returns the
path. Rendering is headless (Agg backend) and purely cosmetic: every number
shown is taken verbatim from the records.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_bound_vs_gap",
    "plot_term_breakdown",
    "plot_dim_fit",
    "render_report_figures",
]


def plot_bound_vs_gap(records, path) -> str:
    included = [r for r in records if not r.flagged]
    fids = sorted({rep["formula_id"] for r in included for rep in r.reports})
    fig, ax = plt.subplots(figsize=(7, 4.5), dpi=130)
    trials = [r.trial for r in included]
    ax.plot(trials, [r.gap_mean for r in included], "k.-", lw=1.0, ms=4,
            label="empirical worst gap (replicate mean)")
    for fid in fids:
        xs, ys = [], []
        for r in included:
            for rep in r.reports:
                if rep["formula_id"] == fid:
                    xs.append(r.trial)
                    ys.append(rep["value"])
        ax.plot(xs, ys, ".", ms=4, alpha=0.8, label=fid)
    ax.set_xlabel("trial")
    ax.set_ylabel("value")
    ax.grid(True, lw=0.4, alpha=0.5)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def plot_term_breakdown(records, path) -> str:
    meta = ("formula_id", "side", "zeta", "lambda", "lambda_value", "value",
            "gamma", "claimed_confidence", "mcdiarmid_constant",
            "universal_constant", "metric", "assumption_conditional",
            "holds_with_probability")
    sums: dict[str, dict[str, list]] = {}
    for r in records:
        if r.flagged:
            continue
        for rep in r.reports:
            terms = sums.setdefault(rep["formula_id"], {})
            for key, val in rep.items():
                if key not in meta and isinstance(val, (int, float)):
                    terms.setdefault(key, []).append(val)
    fig, ax = plt.subplots(figsize=(7, 4.5), dpi=130)
    fids = sorted(sums)
    xs = np.arange(len(fids))
    term_names = sorted({t for terms in sums.values() for t in terms})
    bottom_pos = np.zeros(len(fids))
    bottom_neg = np.zeros(len(fids))
    for name in term_names:
        heights = np.array([
            float(np.mean(sums[f][name])) if name in sums[f] else 0.0 for f in fids
        ])
        bottoms = np.where(heights >= 0, bottom_pos, bottom_neg)
        ax.bar(xs, heights, bottom=bottoms, width=0.6, label=name)
        bottom_pos += np.maximum(heights, 0.0)
        bottom_neg += np.minimum(heights, 0.0)
    ax.set_xticks(xs)
    ax.set_xticklabels(fids, rotation=20, ha="right", fontsize=7)
    ax.set_ylabel("mean term value")
    ax.grid(True, axis="y", lw=0.4, alpha=0.5)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def plot_dim_fit(records, path) -> str | None:
    curves = [r.curve for r in records if r.curve]
    if not curves:
        return None
    fig, ax = plt.subplots(figsize=(6, 4.5), dpi=130)
    for curve in curves[:8]:
        xs = np.log(1.0 / np.asarray(curve["scales"]))
        ys = np.log(np.asarray(curve["cover_sizes"], dtype=float))
        ax.plot(xs, ys, "o-", ms=4, lw=0.8,
                label=f"{curve['metric']}: dim={curve['dimension']:.3f}")
        ax.plot(xs, np.log(np.asarray(curve["pack_sizes"], dtype=float)),
                "s--", ms=3, lw=0.6, alpha=0.6)
    ax.set_xlabel("log(1/scale)")
    ax.set_ylabel("log(cover size)  [squares: packing]")
    ax.grid(True, lw=0.4, alpha=0.5)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def render_report_figures(records, outdir) -> list[str]:
    """Render every applicable figure into outdir; returns written paths."""
    os.makedirs(outdir, exist_ok=True)
    written = []
    if any(r.reports for r in records):
        written.append(
            plot_bound_vs_gap(records, os.path.join(outdir, "bound_vs_gap.png"))
        )
        written.append(
            plot_term_breakdown(records, os.path.join(outdir, "term_breakdown.png"))
        )
    dim_path = plot_dim_fit(records, os.path.join(outdir, "dim_fit.png"))
    if dim_path:
        written.append(dim_path)
    return written
