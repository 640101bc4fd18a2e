"""Figures for the report directory (Agg backend, reproducible PNG bytes)."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "legend.fontsize": 7,
    "figure.dpi": 100,
    "savefig.dpi": 120,
    "path.simplify": False,
}

# dense / sparse / passive, in that order
LABEL_COLORS = ["#f2d13b", "#3bb26e", "#46236e"]
LABEL_CMAP = ListedColormap(LABEL_COLORS)
LABEL_CODES = {ord("D"): 0, ord("S"): 1, ord("P"): 2}


def figsize(width: float = 6.0, ratio: float | None = None) -> tuple[float, float]:
    if ratio is None:
        ratio = (math.sqrt(5) - 1.0) / 2.0
    return (width, width * ratio)


def save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # drop the Software tag so bytes do not depend on the matplotlib build
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
    return path


def _codes(labels: np.ndarray) -> np.ndarray:
    out = np.zeros(labels.shape, dtype=np.int8)
    for code, v in LABEL_CODES.items():
        out[labels == code] = v
    return out


def _group_ticks(ax, groups: list[str]):
    """Mark contiguous runs of equal group labels on the y axis."""
    ticks, names = [], []
    start = 0
    for i in range(1, len(groups) + 1):
        if i == len(groups) or groups[i] != groups[start]:
            ticks.append((start + i - 1) / 2.0)
            names.append(groups[start])
            if i < len(groups):
                ax.axhline(i - 0.5, color="white", lw=0.4)
            start = i
    ax.set_yticks(ticks)
    ax.set_yticklabels(names)


def label_heatmap(labels: np.ndarray, groups: list[str], path, title: str = "",
                  dt: int = 20, origin: int | None = None):
    """Rows are nodes (already ordered), columns grid instants."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize(7.0, 0.7))
        if labels.size:
            ax.imshow(_codes(labels), aspect="auto", interpolation="nearest", cmap=LABEL_CMAP,
                      vmin=0, vmax=2)
            _group_ticks(ax, groups)
        n_steps = labels.shape[1] if labels.ndim == 2 else 0
        if n_steps:
            hours = np.arange(0, n_steps * dt / 3600.0 + 1e-9, 1.0)
            ax.set_xticks(hours * 3600.0 / dt)
            ax.set_xticklabels([f"{h:g}h" for h in hours])
        ax.set_xlabel("time since first contact")
        handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in LABEL_COLORS]
        ax.legend(handles, ["dense", "sparse", "passive"], loc="upper right", ncol=3, frameon=True)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return save(fig, path)


def rates_scatter(tau_a, d_bar, tau_d, tau_s, path, title: str = ""):
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=figsize(7.0, 0.4), sharey=True)
        for ax, colour, name in zip(axes, (tau_d, tau_s), ("tau_D", "tau_S")):
            sc = ax.scatter(d_bar, tau_a, c=colour, s=8, cmap="viridis")
            ax.set_xlabel("average degree")
            fig.colorbar(sc, ax=ax, label=name)
        axes[0].set_ylabel("tau_A")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        return save(fig, path)


def silhouette_curve(ks, mean, std, path, marked: list[int] = (), title: str = ""):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize(5.0))
        ks = np.asarray(ks)
        ax.errorbar(ks, mean, yerr=std, fmt="-o", ms=3, lw=1, capsize=2)
        for k in marked:
            i = int(np.flatnonzero(ks == k)[0])
            ax.plot(k, mean[i], "s", ms=7, mfc="none", mec="crimson")
        ax.set_xlabel("number of clusters k")
        ax.set_ylabel("mean silhouette")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return save(fig, path)
