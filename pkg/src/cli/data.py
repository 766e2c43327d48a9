"""Cohort simulation and preprocessing commands."""

from pathlib import Path

import typer

from ..cohortsim import simulate_cohort, write_cohort
from ..exceptions import LabganError
from ..files import (
    read_diagnoses,
    read_observations,
    read_prescriptions,
    write_covariates,
    write_dataset,
)
from ..models import PreprocessConfig, Provenance, SimConfig
from ..preprocess import preprocess_pipeline
from ..utils import JSON_OPTION, console, create_table, emit_json, print_error, print_success, spinner
from ._shared import CONFIG_OPTION_HELP, load_config


def simulate(
    out_dir: Path = typer.Option(..., "--out-dir", "-o", help="Directory for the CSV tables and truth.json"),
    config: Path = typer.Option(None, "--config", "-c", help=CONFIG_OPTION_HELP),
    seed: int = typer.Option(None, "--seed", "-s", help="Simulation seed (overrides the config)"),
    n_patients: int = typer.Option(None, "--n-patients", "-n", help="Cohort size (overrides the config)"),
    json_output: bool = JSON_OPTION,
) -> None:
    """Simulate a cohort with known clusters and drug effects."""
    try:
        cfg = load_config(config, SimConfig, seed=seed, n_patients=n_patients)
        with spinner(f"Simulating {cfg.n_patients} patients..."):
            cohort = simulate_cohort(cfg)
            write_cohort(cohort, out_dir)
    except LabganError as e:
        print_error(str(e))
        raise typer.Exit(1)

    sizes = [list(cohort.truth.labels.values()).count(c) for c in range(cfg.k_clusters)]
    if json_output:
        emit_json(
            {
                "out_dir": str(out_dir),
                "seed": cfg.seed,
                "observations": len(cohort.observations),
                "prescriptions": len(cohort.prescriptions),
                "diagnoses": len(cohort.diagnoses),
                "cluster_sizes": sizes,
            }
        )
        return

    table = create_table(
        title="Simulated clusters",
        columns=[("Cluster", "cyan"), ("Patients", ""), ("Baseline (mg/dL)", ""), ("Effect (mg/dL)", "")],
    )
    for c, spec in enumerate(cfg.clusters):
        table.add_row(str(c), str(sizes[c]), f"{spec.baseline_mean:.1f}", f"{spec.effect:+.1f}")
    console.print(table)
    print_success(
        f"Wrote {len(cohort.observations)} observations, {len(cohort.prescriptions)} prescriptions "
        f"and {len(cohort.diagnoses)} diagnoses to {out_dir}"
    )


def preprocess(
    observations: Path = typer.Option(..., "--observations", help="patient_id,day,value CSV"),
    prescriptions: Path = typer.Option(..., "--prescriptions", help="patient_id,drug_code,start_day,end_day CSV"),
    out: Path = typer.Option(..., "--out", "-o", help="Dataset JSON to write"),
    diagnoses: Path = typer.Option(None, "--diagnoses", help="patient_id,icd9_code,day CSV, builds covariates"),
    covariates_out: Path = typer.Option(None, "--covariates-out", help="Also write covariates in long form"),
    config: Path = typer.Option(None, "--config", "-c", help=CONFIG_OPTION_HELP),
    drug_prefix: str = typer.Option(None, "--drug-prefix", help="Drug code prefix of the exposure (e.g. C10AA)"),
    max_gap: int = typer.Option(None, "--max-gap", help="Days between prescriptions that still merge into one era"),
    lookback: int = typer.Option(None, "--lookback", help="Pre-exposure window in days"),
    n_pre: int = typer.Option(None, "--n-pre", help="Interpolated points before the era start"),
    n_during: int = typer.Option(None, "--n-during", help="Interpolated points during exposure"),
    central_mass: float = typer.Option(None, "--central-mass", help="Share of values inside the normalization bounds"),
    json_output: bool = JSON_OPTION,
) -> None:
    """Turn raw observations and prescriptions into aligned normalized series."""
    if covariates_out is not None and diagnoses is None:
        print_error("--covariates-out needs --diagnoses")
        raise typer.Exit(1)
    try:
        cfg = load_config(
            config,
            PreprocessConfig,
            drug_prefix=drug_prefix,
            max_gap_days=max_gap,
            lookback_days=lookback,
            n_pre=n_pre,
            n_during=n_during,
            central_mass=central_mass,
        )
        obs = read_observations(observations)
        dataset = preprocess_pipeline(
            obs,
            read_prescriptions(prescriptions),
            cfg,
            diagnoses=read_diagnoses(diagnoses) if diagnoses is not None else None,
            provenance=Provenance(kind="real"),
        )
        write_dataset(dataset, out)
        if covariates_out is not None and dataset.covariates is not None:
            write_covariates(dataset.vocabulary or (), dataset.covariates, covariates_out)
    except LabganError as e:
        print_error(str(e))
        raise typer.Exit(1)

    n_patients = len({o.patient_id for o in obs})
    summary = {
        "out": str(out),
        "patients": n_patients,
        "included": len(dataset.series),
        "bounds": dataset.bounds.model_dump(),
        "vocabulary_size": len(dataset.vocabulary) if dataset.vocabulary is not None else None,
    }
    if json_output:
        emit_json(summary)
        return
    print_success(
        f"{len(dataset.series)} of {n_patients} patients included, "
        f"bounds [{dataset.bounds.lo:.1f}, {dataset.bounds.hi:.1f}] mg/dL -> {out}"
    )
