"""Posterior-band figure over the l2 norm of vertex embeddings.

Renders the learned induced-conductance curve: training points as a scatter
against their embedding norms, the predictive mean with a 2-sigma band at the
test points, and optionally a few posterior function samples. Output is a
self-contained SVG plus a CSV holding the exact plotted numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# Stable ids and no embedded date keep the SVG byte-reproducible.
matplotlib.rcParams["svg.hashsalt"] = "conducta"


class PlotError(ValueError):
    """Empty or inconsistent series passed to the plot builder."""


@dataclass(frozen=True)
class PlotSpec:
    """Series of the posterior-band figure, sorted by x.

    x is the l2 norm of each test vertex embedding; lo/hi bound the 2-sigma
    band around the mean. sample_paths, when present, holds one posterior
    function draw per row, aligned with x.
    """

    x: np.ndarray
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    train_x: np.ndarray
    train_y: np.ndarray
    sample_paths: np.ndarray | None = None

    def __post_init__(self):
        lengths = {len(self.x), len(self.mean), len(self.lo), len(self.hi)}
        if len(lengths) != 1:
            raise PlotError("x, mean, lo and hi must have equal length")
        if len(self.x) == 0:
            raise PlotError("nothing to plot: empty prediction set")
        if self.sample_paths is not None and self.sample_paths.shape[1] != len(self.x):
            raise PlotError("sample paths must align with x")
        if np.any(self.lo > self.mean + 1e-12) or np.any(self.mean > self.hi + 1e-12):
            raise PlotError("band must satisfy lo <= mean <= hi pointwise")


def build_plot_spec(test_norms, mean, var, train_norms, train_y, sample_paths=None):
    """Assemble and sort the figure series; the band is mean +/- 2 sqrt(var)."""
    x = np.asarray(test_norms, dtype=float)
    mean = np.asarray(mean, dtype=float)
    var = np.clip(np.asarray(var, dtype=float), 0.0, None)
    order = np.argsort(x, kind="stable")
    sd = np.sqrt(var)
    paths = None
    if sample_paths is not None:
        paths = np.asarray(sample_paths, dtype=float)[:, order]
    return PlotSpec(
        x=x[order],
        mean=mean[order],
        lo=(mean - 2.0 * sd)[order],
        hi=(mean + 2.0 * sd)[order],
        train_x=np.asarray(train_norms, dtype=float),
        train_y=np.asarray(train_y, dtype=float),
        sample_paths=paths,
    )


def render_posterior_band(spec, svg_path, csv_path=None):
    """Write the figure as SVG and, optionally, its exact series as CSV."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.fill_between(spec.x, spec.lo, spec.hi, color="#c6dbef", label="mean ± 2σ")
    if spec.sample_paths is not None:
        for row in spec.sample_paths:
            ax.plot(spec.x, row, color="#9e9e9e", lw=0.6, alpha=0.7)
    ax.plot(spec.x, spec.mean, color="#d62728", lw=1.8, label="predictive mean")
    ax.scatter(spec.train_x, spec.train_y, s=18, color="#1f77b4", zorder=3, label="training")
    ax.set_xlabel("embedding l2 norm")
    ax.set_ylabel("induced conductance")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    if csv_path is not None:
        write_series_csv(spec, csv_path)


def write_series_csv(spec, path):
    """CSV of the plotted band: x_norm, mean, lo, hi (+ sample_i columns)."""
    n_paths = 0 if spec.sample_paths is None else spec.sample_paths.shape[0]
    header = ["x_norm", "mean", "lo", "hi"] + [f"sample_{i}" for i in range(n_paths)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(len(spec.x)):
            cells = [
                f"{spec.x[i]:.17g}",
                f"{spec.mean[i]:.17g}",
                f"{spec.lo[i]:.17g}",
                f"{spec.hi[i]:.17g}",
            ]
            cells += [f"{spec.sample_paths[p][i]:.17g}" for p in range(n_paths)]
            fh.write(",".join(cells) + "\n")
