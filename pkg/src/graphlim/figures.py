"""Rendering of simulation reports to PNG files."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from scipy import stats

from .asymptotics import NormalityReport

__all__ = ["save_histogram", "save_qq_plot"]


def save_histogram(
    report: NormalityReport,
    path,
    sigma2: float | None = None,
    title: str | None = None,
) -> None:
    """Render the report's histogram as a density bar chart.

    Overlays the normal density with the sample mean and either the given
    variance (when a theoretical value is known) or the sample variance.
    """
    lefts = np.array([b[0] for b in report.histogram])
    rights = np.array([b[1] for b in report.histogram])
    counts = np.array([b[2] for b in report.histogram], dtype=float)
    widths = rights - lefts
    density = np.divide(
        counts,
        report.n_samples * widths,
        out=np.zeros_like(counts),
        where=widths > 0,
    )
    var = report.sample_var if sigma2 is None else sigma2
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.bar(lefts, density, width=widths, align="edge", color="#7aa6c2", edgecolor="white")
    grid = np.linspace(lefts[0], rights[-1], 400)
    ax.plot(
        grid,
        stats.norm.pdf(grid, loc=report.sample_mean, scale=math.sqrt(var)),
        color="#b03a2e",
        linewidth=1.6,
        label=f"normal, var={var:.4g}",
    )
    ax.set_xlabel("scaled statistic")
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_qq_plot(samples, path, title: str | None = None) -> None:
    """Render a standard-normal QQ plot of the standardized samples."""
    s = np.asarray(samples, dtype=float)
    m = s.shape[0]
    z = np.sort(s - s.mean()) / s.std(ddof=1)
    theo = stats.norm.ppf((np.arange(1, m + 1) - 0.5) / m)
    r = np.corrcoef(z, theo)[0, 1]
    fig, ax = plt.subplots(figsize=(4.8, 4.8))
    ax.scatter(theo, z, s=6, color="#31708f", alpha=0.6, linewidths=0)
    lo, hi = theo[0], theo[-1]
    ax.plot([lo, hi], [lo, hi], color="#b03a2e", linewidth=1.2)
    ax.set_xlabel("standard normal quantiles")
    ax.set_ylabel("sample quantiles (standardized)")
    ax.annotate(f"$R^2$ = {r * r:.5f}", xy=(0.05, 0.92), xycoords="axes fraction")
    if title:
        ax.set_title(title)
    ax.set_aspect("equal", adjustable="box")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
