"""Figure rendering for experiment outputs (PNG files next to the CSVs)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from scipy.stats import norm as _normal

__all__ = [
    "transport_figure",
    "rank_figure",
    "stability_figure",
    "gc_figure",
    "clt_figure",
    "counterexample_a_figure",
    "counterexample_b_figure",
    "null_domain_figure",
]

_DPI = 150


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def transport_figure(coupling, path):
    """Source/target scatter (first two coordinates) with transport segments."""
    xs, ys = coupling.support_points()
    if xs.shape[1] == 1:
        xs = np.column_stack([xs[:, 0], np.zeros(len(xs))])
        ys = np.column_stack([ys[:, 0], np.ones(len(ys))])
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    for a, b, m in zip(xs, ys, coupling.mass):
        ax.plot([a[0], b[0]], [a[1], b[1]], color="gray", lw=0.6, alpha=0.6)
    ax.scatter(coupling.src.points[:, 0],
               coupling.src.points[:, 1] if coupling.src.dim > 1 else np.zeros(coupling.src.n_atoms),
               s=14, label="source", zorder=3)
    ax.scatter(coupling.tgt.points[:, 0],
               coupling.tgt.points[:, 1] if coupling.tgt.dim > 1 else np.ones(coupling.tgt.n_atoms),
               s=20, marker="s", label="target", zorder=3)
    ax.set_title(f"optimal coupling, cost = {coupling.cost:.6g}")
    ax.legend(fontsize=8)
    _save(fig, path)


def rank_figure(rank_map, path):
    """Data-to-rank arrows in the first two coordinates."""
    x = rank_map.data_points
    r = rank_map.ranks
    if x.shape[1] == 1:
        x = np.column_stack([x[:, 0], np.zeros(len(x))])
        r = np.column_stack([r[:, 0], np.ones(len(r))])
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    for a, b in zip(x, r):
        ax.annotate("", xy=b[:2], xytext=a[:2],
                    arrowprops=dict(arrowstyle="->", color="gray", lw=0.6, alpha=0.7))
    ax.scatter(x[:, 0], x[:, 1], s=14, label="data")
    ax.scatter(r[:, 0], r[:, 1], s=20, marker="s", label="reference atoms")
    ax.set_title("center-outward rank assignment")
    ax.legend(fontsize=8)
    _save(fig, path)


def stability_figure(rows, verdicts, path):
    """Per-direction sup gaps plus norm and potential gaps against n."""
    dirs = sorted({r["direction_index"] for r in rows})
    reps = sorted({r["rep"] for r in rows})
    ns = sorted({r["n"] for r in rows})
    fig, axes = plt.subplots(1, 3, figsize=(11.5, 3.6))
    for h in dirs:
        med = [np.nanmedian([r["gap"] for r in rows if r["n"] == n and r["direction_index"] == h]) for n in ns]
        axes[0].plot(ns, med, marker="o", label=f"h{h}")
    axes[0].set_title("directional sup gap (median over reps)")
    axes[0].legend(fontsize=8)
    for rep in reps:
        vals = [next(r["norm_gap"] for r in rows if r["n"] == n and r["rep"] == rep and r["direction_index"] == 0) for n in ns]
        axes[1].plot(ns, vals, marker="o", alpha=0.7)
    axes[1].set_title("norm sup gap (per rep)")
    for rep in reps:
        vals = [next(r["potential_gap"] for r in rows if r["n"] == n and r["rep"] == rep and r["direction_index"] == 0) for n in ns]
        axes[2].plot(ns, vals, marker="o", alpha=0.7)
    axes[2].set_title("potential sup gap (per rep)")
    for ax in axes:
        ax.set_xscale("log", base=2)
        ax.set_yscale("log")
        ax.set_xlabel("n")
    fig.suptitle(
        "trend verdicts: directional="
        + ("pass" if verdicts.get("directional_all") else "fail")
        + f", norm={'pass' if verdicts.get('norm') else 'fail'}"
        + f", potential={'pass' if verdicts.get('potential') else 'fail'}",
        fontsize=9,
    )
    _save(fig, path)


def gc_figure(rows, path):
    """Rank-map sup gaps against n, one line per direction (median over reps)."""
    dirs = sorted({r["direction_index"] for r in rows})
    ns = sorted({r["n"] for r in rows})
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    for h in dirs:
        med = [np.nanmedian([r["gap"] for r in rows if r["n"] == n and r["direction_index"] == h]) for n in ns]
        ax.plot(ns, med, marker="o", label=f"h{h}")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("sup gap on region")
    ax.set_title("empirical rank map vs population map")
    ax.legend(fontsize=8)
    _save(fig, path)


def clt_figure(report, path):
    """Histogram of standardized fluctuations with the standard normal overlay."""
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    if report.degenerate or report.sigma2_formula <= 0:
        ax.text(0.5, 0.5, "degenerate configuration", ha="center")
    else:
        std = report.statistics / np.sqrt(report.sigma2_formula)
        ax.hist(std, bins=40, density=True, alpha=0.6, label="standardized fluctuations")
        grid = np.linspace(-4, 4, 300)
        ax.plot(grid, _normal.pdf(grid), "k-", lw=1.2, label="N(0,1)")
        ax.set_title(
            f"n={report.n}, reps={report.reps}: KS={report.ks_to_normal:.3f}, "
            f"var ratio={report.variance_ratio:.3f}"
        )
        ax.legend(fontsize=8)
    _save(fig, path)


def counterexample_a_figure(result, path):
    """Image-norm growth in the truncation and the per-n reported gaps."""
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ns = sorted({r["n"] for r in result.norm_growth})
    for n in ns:
        ms = [r["m"] for r in result.norm_growth if r["n"] == n]
        vals = [r["image_norm"] for r in result.norm_growth if r["n"] == n]
        axes[0].plot(ms, vals, marker=".", label=f"n={n}")
    axes[0].set_yscale("log")
    axes[0].set_xlabel("truncation prefix m")
    axes[0].set_ylabel("|T_n(x_m)|")
    axes[0].set_title("image-norm growth along x")
    axes[0].legend(fontsize=8)
    grid_n = [r["n"] for r in result.rows]
    axes[1].plot(grid_n, [r["gap_found_h"] for r in result.rows], marker="o", label="found direction")
    axes[1].plot(grid_n, [r["gap_e_d"] for r in result.rows], marker="s", label="last coordinate")
    axes[1].set_xscale("log", base=2)
    axes[1].set_xlabel("n")
    axes[1].set_ylabel("inner-product gap")
    axes[1].set_title("gap along tested directions")
    axes[1].legend(fontsize=8)
    _save(fig, path)


def counterexample_b_figure(result, path):
    """Subdifferential staircase with the boundary interval at x = 1."""
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    ax.plot(result.grid_x, result.grid_lo, "b-", lw=1.0, label="lower selection")
    ax.plot(result.grid_x, result.grid_hi, "r--", lw=1.0, label="upper selection")
    ax.plot(result.grid_x, result.grid_x, "k:", lw=0.8, label="identity")
    probes = sorted({r["probe"] for r in result.rows})
    for p in probes:
        ax.axvline(p, color="gray", lw=0.5, alpha=0.5)
    ax.set_xlabel("x")
    ax.set_ylabel("subdifferential")
    ax.set_title("two-interval boundary counterexample")
    ax.legend(fontsize=8)
    _save(fig, path)


def null_domain_figure(table, mean_curve, path):
    """Running-sum trajectories S_d with the analytic mean."""
    fig, ax = plt.subplots(figsize=(5.6, 4.0))
    d_axis = np.arange(1, table.shape[1] + 1)
    show = min(table.shape[0], 50)
    for k in range(show):
        ax.plot(d_axis, table[k], color="gray", lw=0.5, alpha=0.4)
    ax.plot(d_axis, mean_curve, "r-", lw=1.6, label="analytic mean 2^(d+1) - 2")
    ax.set_yscale("log")
    ax.set_xlabel("d")
    ax.set_ylabel("S_d")
    ax.set_title("growth of weighted squared-coefficient sums")
    ax.legend(fontsize=8)
    _save(fig, path)
