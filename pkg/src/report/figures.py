"""SVG figures of an experiment.

Each SVG carries a `<!-- labgan-data {...} -->` comment holding every number
it plots. Series lines get an SVG id of the form `series-...` so their
vertices can be counted in the output.
"""

import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from scipy.stats import gaussian_kde  # noqa: E402

from ..exceptions import ValidationError  # noqa: E402
from ..models.reports import PredictivityReport  # noqa: E402
from ..models.series import NormBounds  # noqa: E402
from ..utils.seeding import rng_for  # noqa: E402

logger = logging.getLogger(__name__)

DATA_MARKER = "labgan-data"
NORMAL_RANGE_MGDL = (200.0, 240.0)
HIST_BINS = 20
DENSITY_POINTS = 200
MATCHES_PER_CLUSTER = 2

plt.rcParams.update(
    {
        "svg.hashsalt": "labgan",
        "svg.fonttype": "none",
        "path.simplify": False,
        "font.size": 9,
        "axes.spines.top": False,
        "axes.spines.right": False,
    }
)

SOURCE_STYLES = {
    "real": {"color": "#222222", "label": "real"},
    "sub": {"color": "#1f77b4", "label": "subGAN"},
    "total": {"color": "#d62728", "label": "totalGAN"},
}


@dataclass
class ClusterFigureData:
    """What the per-cluster figures need from one cluster."""

    cluster: int
    real: np.ndarray
    sub_synth: np.ndarray
    total_synth: np.ndarray
    sub_report: PredictivityReport
    total_report: PredictivityReport


@dataclass
class FigureInputs:
    """Outputs of a completed experiment seed."""

    coordinates: np.ndarray
    labels: list[int]
    raw_values: np.ndarray
    bounds: NormBounds
    total: np.ndarray
    n_pre: int
    clusters: list[ClusterFigureData] = field(default_factory=list)
    seed: int = 0


def _floats(a: np.ndarray | list[float]) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=np.float64).ravel()]


def save_svg(fig: Figure, data: dict[str, Any], path: Path) -> Path:
    """Write a figure as SVG with its data embedded as a comment after the XML header."""
    buffer = io.StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    svg = buffer.getvalue()
    comment = f"<!-- {DATA_MARKER} {json.dumps(data, sort_keys=True)} -->\n"
    head, sep, body = svg.partition("?>\n")
    text = head + sep + comment + body if sep else comment + svg
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def read_figure_data(path: Path) -> dict[str, Any]:
    """Parse the embedded data comment of a figure written by save_svg."""
    text = path.read_text()
    start = text.find(f"<!-- {DATA_MARKER} ")
    if start < 0:
        raise ValidationError(f"{path}: no {DATA_MARKER} comment")
    start += len(f"<!-- {DATA_MARKER} ")
    end = text.index(" -->", start)
    return json.loads(text[start:end])


def tsne_scatter(coordinates: np.ndarray, labels: list[int], path: Path) -> Path:
    """Planar embedding colored by cluster."""
    xy = np.asarray(coordinates, dtype=np.float64)
    lab = np.asarray(labels)
    fig, ax = plt.subplots(figsize=(5, 5))
    for c in sorted(set(labels)):
        pts = xy[lab == c]
        ax.scatter(pts[:, 0], pts[:, 1], s=8, label=f"cluster {c}")
    ax.set_xlabel("t-SNE 1")
    ax.set_ylabel("t-SNE 2")
    ax.legend(frameon=False)
    data = {"x": _floats(xy[:, 0]), "y": _floats(xy[:, 1]), "labels": [int(v) for v in lab]}
    return save_svg(fig, data, path)


def mean_bands(clusters: list[ClusterFigureData], n_pre: int, path: Path) -> Path:
    """Per cluster mean +- SD of real, subGAN and totalGAN series."""
    fig, axes = plt.subplots(1, len(clusters), figsize=(4 * len(clusters), 3.2), sharey=True, squeeze=False)
    data: dict[str, Any] = {"n_pre": n_pre, "clusters": []}
    for ax, cd in zip(axes[0], clusters):
        entry: dict[str, Any] = {"cluster": cd.cluster}
        for source, matrix in (("real", cd.real), ("sub", cd.sub_synth), ("total", cd.total_synth)):
            mean = matrix.mean(axis=0)
            sd = matrix.std(axis=0)
            x = np.arange(len(mean))
            style = SOURCE_STYLES[source]
            (line,) = ax.plot(x, mean, color=style["color"], label=style["label"])
            line.set_gid(f"series-{source}-cluster-{cd.cluster}")
            ax.fill_between(x, mean - sd, mean + sd, color=style["color"], alpha=0.15, linewidth=0)
            entry[source] = {"mean": _floats(mean), "sd": _floats(sd)}
        ax.axvline(n_pre - 0.5, color="#888888", linestyle=":")
        ax.set_title(f"cluster {cd.cluster}")
        ax.set_xlabel("time point")
        data["clusters"].append(entry)
    axes[0][0].set_ylabel("normalized value")
    axes[0][0].legend(frameon=False)
    fig.tight_layout()
    return save_svg(fig, data, path)


def value_density(values: np.ndarray, bounds: NormBounds, path: Path) -> Path:
    """Kernel density of raw mg/dL values with normal-range and bound markers."""
    v = np.asarray(values, dtype=np.float64)
    grid = np.linspace(float(v.min()), float(v.max()), DENSITY_POINTS)
    density = gaussian_kde(v)(grid) if np.unique(v).size > 1 else np.zeros_like(grid)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    (line,) = ax.plot(grid, density, color="#1f77b4")
    line.set_gid("density")
    for mark in NORMAL_RANGE_MGDL:
        ax.axvline(mark, color="#2ca02c", linestyle="--")
    for mark in (bounds.lo, bounds.hi):
        ax.axvline(mark, color="#d62728", linestyle=":")
    ax.set_xlabel("value (mg/dL)")
    ax.set_ylabel("density")
    data = {
        "grid": _floats(grid),
        "density": _floats(density),
        "normal_range": list(NORMAL_RANGE_MGDL),
        "bounds": [bounds.lo, bounds.hi],
        "n": int(v.size),
    }
    return save_svg(fig, data, path)


def normalized_histograms(total: np.ndarray, clusters: list[ClusterFigureData], n_pre: int, path: Path) -> Path:
    """Histograms of normalized values, rows total + clusters, columns overall/pre/during."""
    groups = [("total", total)] + [(f"cluster {cd.cluster}", cd.real) for cd in clusters]
    parts = {
        "overall": lambda m: m.ravel(),
        "pre": lambda m: m[:, :n_pre].ravel(),
        "during": lambda m: m[:, n_pre:].ravel(),
    }
    edges = np.linspace(-1.0, 1.0, HIST_BINS + 1)
    fig, axes = plt.subplots(len(groups), 3, figsize=(9, 2.2 * len(groups)), sharex=True, squeeze=False)
    data: dict[str, Any] = {"edges": _floats(edges), "groups": []}
    for row, (name, matrix) in enumerate(groups):
        entry: dict[str, Any] = {"name": name}
        for col, (part, take) in enumerate(parts.items()):
            counts, _ = np.histogram(take(matrix), bins=edges)
            axes[row][col].stairs(counts, edges, fill=True, alpha=0.6)
            axes[row][col].set_title(f"{name}, {part}")
            entry[part] = [int(c) for c in counts]
        data["groups"].append(entry)
    fig.tight_layout()
    return save_svg(fig, data, path)


def closest_matches(clusters: list[ClusterFigureData], n_pre: int, seed: int, path: Path) -> Path:
    """Randomly picked real series with their closest-pre synthetic match from both models.

    The matches shown are the ones recorded in the predictivity reports.
    """
    rng = rng_for(seed, "figure-matches")
    picks = []
    for cd in clusters:
        count = min(MATCHES_PER_CLUSTER, len(cd.real))
        picks.append((cd, sorted(int(i) for i in rng.choice(len(cd.real), size=count, replace=False))))
    n_rows = sum(len(p) for _, p in picks)
    fig, axes = plt.subplots(n_rows, 1, figsize=(5, 1.8 * n_rows), sharex=True, squeeze=False)
    data: dict[str, Any] = {"n_pre": n_pre, "panels": []}
    row = 0
    for cd, indices in picks:
        for k in indices:
            ax = axes[row][0]
            j_sub = cd.sub_report.matched_index[k]
            j_total = cd.total_report.matched_index[k]
            x = np.arange(cd.real.shape[1])
            for source, series in (
                ("real", cd.real[k]),
                ("sub", cd.sub_synth[j_sub]),
                ("total", cd.total_synth[j_total]),
            ):
                style = SOURCE_STYLES[source]
                (line,) = ax.plot(x, series, color=style["color"], label=style["label"])
                line.set_gid(f"series-{source}-cluster-{cd.cluster}-real-{k}")
            ax.axvline(n_pre - 0.5, color="#888888", linestyle=":")
            ax.set_title(f"cluster {cd.cluster}, real series {k}")
            data["panels"].append(
                {
                    "cluster": cd.cluster,
                    "real_index": k,
                    "sub_index": j_sub,
                    "total_index": j_total,
                    "real": _floats(cd.real[k]),
                    "sub": _floats(cd.sub_synth[j_sub]),
                    "total": _floats(cd.total_synth[j_total]),
                }
            )
            row += 1
    axes[0][0].legend(frameon=False)
    fig.tight_layout()
    return save_svg(fig, data, path)


def emit_figures(inputs: FigureInputs, out_dir: Path) -> list[Path]:
    """Write all five figures into out_dir.

    Raises:
        ValidationError: If the per-cluster outputs are missing
    """
    if not inputs.clusters:
        raise ValidationError("no per-cluster outputs to plot; run the comparison stage first")
    paths = [
        tsne_scatter(inputs.coordinates, inputs.labels, out_dir / "tsne.svg"),
        mean_bands(inputs.clusters, inputs.n_pre, out_dir / "mean_bands.svg"),
        value_density(inputs.raw_values, inputs.bounds, out_dir / "value_density.svg"),
        normalized_histograms(inputs.total, inputs.clusters, inputs.n_pre, out_dir / "normalized_histograms.svg"),
        closest_matches(inputs.clusters, inputs.n_pre, inputs.seed, out_dir / "closest_matches.svg"),
    ]
    logger.info("wrote %d figures to %s", len(paths), out_dir)
    return paths
