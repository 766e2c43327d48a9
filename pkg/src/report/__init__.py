"""Experiment orchestration and figures."""

from .experiment import align_clusters, median_rows, run_experiment, run_seed, stage
from .figures import ClusterFigureData, FigureInputs, emit_figures, read_figure_data, save_svg

__all__ = [
    "ClusterFigureData",
    "FigureInputs",
    "align_clusters",
    "emit_figures",
    "median_rows",
    "read_figure_data",
    "run_experiment",
    "run_seed",
    "save_svg",
    "stage",
]
