"""Patient stratification command."""

from pathlib import Path

import numpy as np
import typer

from ..cohortsim import oracle_report
from ..exceptions import LabganError, ValidationError
from ..files import read_covariates, read_dataset, read_model, write_model
from ..models import GroundTruth, StratifyConfig
from ..report.figures import tsne_scatter
from ..stratify import encode_code_sets, stratify_covariates
from ..utils import JSON_OPTION, console, create_table, emit_json, print_error, print_info, print_success, spinner
from ._shared import CONFIG_OPTION_HELP, load_config


def stratify(
    dataset: Path = typer.Option(..., "--dataset", "-d", help="Dataset JSON from `preprocess`"),
    out: Path = typer.Option(..., "--out", "-o", help="clusters.json to write"),
    covariates: Path = typer.Option(None, "--covariates", help="Long-form patient_id,code CSV (default: dataset covariates)"),
    k: int = typer.Option(None, "--k", "-k", help="Number of clusters"),
    seed: int = typer.Option(None, "--seed", "-s", help="Stratification seed"),
    config: Path = typer.Option(None, "--config", "-c", help=CONFIG_OPTION_HELP),
    plot: Path = typer.Option(None, "--plot", help="Also write a t-SNE scatter SVG"),
    truth: Path = typer.Option(None, "--truth", help="truth.json of a simulated cohort, reports the ARI"),
    json_output: bool = JSON_OPTION,
) -> None:
    """Cluster patients on their pre-exposure covariates."""
    try:
        cfg = load_config(config, StratifyConfig, k=k, seed=seed)
        ds = read_dataset(dataset)
        if covariates is not None:
            codes = read_covariates(covariates)
            _, rows = encode_code_sets({pid: codes.get(pid, set()) for pid in ds.patient_ids})
            matrix = np.array([r.bits for r in rows], dtype=np.float64)
        elif ds.covariates is not None:
            matrix = ds.covariate_matrix()
        else:
            raise ValidationError("dataset has no covariates; pass --covariates")
        with spinner(f"Stratifying {len(ds.series)} patients into {cfg.k} clusters..."):
            result = stratify_covariates(matrix, ds.patient_ids, cfg)
        write_model(result, "clusters", out)
        if plot is not None:
            tsne_scatter(np.asarray(result.coordinates), list(result.assignment.labels), plot)
        oracle = oracle_report(read_model(truth, "truth", GroundTruth), result.assignment) if truth else None
    except LabganError as e:
        print_error(str(e))
        raise typer.Exit(1)

    sizes = result.assignment.sizes()
    if json_output:
        emit_json({"out": str(out), "k": result.assignment.k, "sizes": sizes, "ari": oracle.ari if oracle else None})
        return
    table = create_table(title="Clusters", columns=[("Cluster", "cyan"), ("Patients", "")])
    for c, size in enumerate(sizes):
        table.add_row(str(c), str(size))
    console.print(table)
    if oracle is not None:
        print_info(f"Adjusted Rand index vs truth: {oracle.ari:.3f}")
    print_success(f"Wrote {out}")
