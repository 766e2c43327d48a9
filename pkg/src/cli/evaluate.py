"""Predictivity and drug-laboratory effect commands."""

from pathlib import Path

import typer

from ..evaluate import compare_models, dle_test, predictivity_error
from ..exceptions import LabganError
from ..files import read_dataset, write_model, write_rows
from ..gan import load_model
from ..models import TableRow
from ..utils import (
    JSON_OPTION,
    console,
    create_table,
    emit_json,
    format_p_value,
    format_pm,
    print_error,
    print_success,
    print_warning,
    spinner,
)
from ._shared import read_assignment, select_cluster, table_rows_table


def evaluate(
    real: Path = typer.Option(..., "--real", "-r", help="Real dataset JSON"),
    synth: Path = typer.Option(..., "--synth", help="Synthetic dataset JSON from `generate`"),
    out: Path = typer.Option(None, "--out", "-o", help="Predictivity report JSON to write"),
    cluster_file: Path = typer.Option(None, "--cluster-file", help="clusters.json, scores one cluster"),
    cluster_id: int = typer.Option(None, "--cluster-id", help="Cluster to score"),
    json_output: bool = JSON_OPTION,
) -> None:
    """Predictivity error P_err of a synthetic set against real series."""
    try:
        real_ds = select_cluster(read_dataset(real), cluster_file, cluster_id)
        report = predictivity_error(real_ds.series, read_dataset(synth).series)
        if out is not None:
            write_model(report, "predictivity", out)
    except LabganError as e:
        print_error(str(e))
        raise typer.Exit(1)

    if json_output:
        emit_json(report.model_dump(mode="json"))
        return
    console.print(
        f"P_err {format_pm(report.p_err, report.sd, decimals=4)} over N={report.n_real} real, V={report.n_synth} synthetic"
    )
    if out is not None:
        print_success(f"Wrote {out}")


def compare(
    real: Path = typer.Option(..., "--real", "-r", help="Real dataset JSON"),
    sub_model: Path = typer.Option(..., "--sub-model", help="subGAN model JSON"),
    total_model: Path = typer.Option(..., "--total-model", help="totalGAN model JSON"),
    largest: int = typer.Option(..., "--largest", help="Size of the largest cluster (sizes the synthetic pool)"),
    seed: int = typer.Option(0, "--seed", "-s", help="Generation seed shared by both models"),
    cluster_file: Path = typer.Option(None, "--cluster-file", help="clusters.json, restricts the real series"),
    cluster_id: int = typer.Option(None, "--cluster-id", help="Cluster of the real series"),
    oversample: int = typer.Option(10, "--oversample", help="Pool size as a multiple of --largest"),
    out: Path = typer.Option(None, "--out", "-o", help="Comparison report JSON to write"),
    csv: Path = typer.Option(None, "--csv", help="Also write the comparison as a CSV row"),
    variant: str = typer.Option("clinical", "--variant", help="Row label in the CSV: clinical or random"),
    json_output: bool = JSON_OPTION,
) -> None:
    """Compare a subGAN with the totalGAN on the same real series."""
    if variant not in ("clinical", "random"):
        raise typer.BadParameter("variant must be clinical or random", param_hint="--variant")
    try:
        real_ds = select_cluster(read_dataset(real), cluster_file, cluster_id)
        with spinner("Generating and matching synthetic series..."):
            report = compare_models(
                real_ds.series,
                load_model(sub_model),
                load_model(total_model),
                largest,
                seed,
                cluster_id=cluster_id or 0,
                oversample_factor=oversample,
            )
        row = TableRow(
            cluster=report.cluster_id,
            variant=variant,  # type: ignore[arg-type]
            seed=seed,
            size=report.sub.n_real,
            sub_p_err=report.sub.p_err,
            sub_sd=report.sub.sd,
            total_p_err=report.total.p_err,
            total_sd=report.total.sd,
            p_value=report.p_value,
        )
        if out is not None:
            write_model(report, "comparison", out)
        if csv is not None:
            write_rows([row.model_dump(mode="json")], csv)
    except LabganError as e:
        print_error(str(e))
        raise typer.Exit(1)

    if json_output:
        emit_json(report.model_dump(mode="json"))
        return
    console.print(table_rows_table([row], "subGAN vs totalGAN"))
    if report.zero_variance:
        print_warning("All per-series differences are equal; p-value set to 1.")


def dle(
    dataset: Path = typer.Option(..., "--dataset", "-d", help="Dataset JSON"),
    mgdl: bool = typer.Option(False, "--mgdl", help="Denormalize to mg/dL before testing"),
    cluster_file: Path = typer.Option(None, "--cluster-file", help="clusters.json, one test per cluster"),
    out: Path = typer.Option(None, "--out", "-o", help="DLE report JSON to write (whole cohort)"),
    json_output: bool = JSON_OPTION,
) -> None:
    """Paired t-test of during-exposure vs pre-exposure means."""
    try:
        ds = read_dataset(dataset)
        bounds = ds.bounds if mgdl else None
        reports = {"cohort": dle_test(ds.series, bounds)}
        if cluster_file is not None:
            for c in range(read_assignment(cluster_file).k):
                reports[f"cluster {c}"] = dle_test(select_cluster(ds, cluster_file, c).series, bounds)
        if out is not None:
            write_model(reports["cohort"], "dle", out)
    except LabganError as e:
        print_error(str(e))
        raise typer.Exit(1)

    if json_output:
        emit_json({name: r.model_dump(mode="json") for name, r in reports.items()})
        return
    table = create_table(
        title=f"Drug-laboratory effect ({reports['cohort'].units})",
        columns=[("Group", "cyan"), ("N", ""), ("Pre", ""), ("During", ""), ("Effect", ""), ("t", ""), ("p", "")],
    )
    for name, r in reports.items():
        table.add_row(
            name,
            str(r.n),
            f"{r.mean_pre:.3f}",
            f"{r.mean_during:.3f}",
            f"{r.effect_size:+.3f}",
            f"{r.t_stat:.2f}",
            format_p_value(r.p_value),
        )
    console.print(table)
