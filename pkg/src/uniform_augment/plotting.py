"""Figures written next to the JSON reports (PNG via the Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_uniformity(report, path) -> Path:
    """Per-transform selection counts against the uniform expectation."""
    fig, ax = plt.subplots(figsize=(9, 4))
    x = np.arange(len(report.counts))
    expected = report.n_draws / len(report.counts)
    ax.bar(x, report.counts, color="#4c72b0")
    ax.axhline(expected, color="k", lw=1, ls="--", label=f"expected {expected:.0f}")
    sigma = np.sqrt(expected * (1 - 1 / len(report.counts)))
    ax.axhspan(expected - 3 * sigma, expected + 3 * sigma, color="0.85", zorder=0, label="±3σ")
    ax.set_xticks(x)
    ax.set_xticklabels(report.transform_names, rotation=45, ha="right")
    ax.set_ylim(0, max(report.counts) * 1.3)
    ax.set_ylabel("draws")
    ax.set_title(
        f"chi2={report.chi_square:.2f} (crit {report.chi_square_critical:.2f}), "
        f"KS λ={report.ks_lambda:.5f}, KS p={report.ks_p:.5f} (crit {report.ks_critical:.5f})",
        fontsize=9,
    )
    ax.legend(loc="upper right", ncol=2, fontsize=8)
    return _save(fig, path)


def plot_shift(runs, path, xlabel="run") -> Path:
    """Histogram distance and fill-fraction change across ablation runs."""
    labels = [r.label.split("=")[-1] for r in runs]
    hist = [r.report.mean_hist_l1 for r in runs]
    fill = [r.report.fill_fraction_delta for r in runs]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(labels, hist, "o-")
    ax1.set_xlabel(xlabel)
    ax1.set_ylabel("mean channel histogram L1")
    ax2.plot(labels, fill, "s-", color="#c44e52")
    ax2.set_xlabel(xlabel)
    ax2.set_ylabel("fill-color fraction change")
    for ax in (ax1, ax2):
        ax.grid(alpha=0.3)
    return _save(fig, path)
