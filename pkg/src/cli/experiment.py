"""Full experiment command."""

from pathlib import Path

import typer

from ..config import LabganSettings
from ..exceptions import LabganError
from ..models import ExperimentConfig
from ..report import run_experiment as run_full_experiment
from ..utils import JSON_OPTION, console, emit_json, print_error, print_info, print_success, spinner
from ._shared import CONFIG_OPTION_HELP, load_config, parse_seeds, table_rows_table


def run_experiment(
    config: Path = typer.Option(None, "--config", "-c", help=CONFIG_OPTION_HELP),
    output_dir: Path = typer.Option(None, "--output-dir", "-o", help="Output directory (overrides the config)"),
    seeds: str = typer.Option(None, "--seeds", help="Comma-separated seed list, e.g. 0,1,2"),
    workers: int = typer.Option(None, "--workers", "-w", help="Threads for per-cluster GAN training"),
    no_figures: bool = typer.Option(False, "--no-figures", help="Skip the SVG figures"),
    json_output: bool = JSON_OPTION,
) -> None:
    """Simulate, stratify, train and compare; write summary.json and table1.csv."""
    try:
        cfg = load_config(
            config,
            ExperimentConfig,
            output_dir=output_dir,
            seeds=parse_seeds(seeds),
            figures=False if no_figures else None,
        )
        n_workers = workers or LabganSettings().workers
        with spinner(f"Running {len(cfg.seeds)} seed(s)..."):
            summary = run_full_experiment(cfg, workers=n_workers)
    except LabganError as e:
        print_error(str(e))
        raise typer.Exit(1)

    if json_output:
        emit_json(summary.model_dump(mode="json"))
        return
    console.print(table_rows_table(summary.table, f"Median over {len(cfg.seeds)} seed(s)"))
    for result in summary.seeds:
        print_info(
            f"seed {result.seed}: {result.n_included}/{result.n_simulated} patients, "
            f"ARI {result.oracle.ari:.3f}, DLE {result.dle.mean_pre:.1f} -> {result.dle.mean_during:.1f} mg/dL"
        )
    print_success(f"Results in {cfg.output_dir}")
