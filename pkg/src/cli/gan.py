"""GAN training and generation commands."""

from pathlib import Path

import typer

from ..exceptions import LabganError
from ..files import read_dataset, write_dataset
from ..gan import generate_dataset, load_model, save_model, train_gan_on_dataset, write_loss_curves
from ..models import GanTrainConfig
from ..utils import JSON_OPTION, emit_json, print_error, print_info, print_success, spinner
from ._shared import CONFIG_OPTION_HELP, load_config, select_cluster


def train_gan(
    dataset: Path = typer.Option(..., "--dataset", "-d", help="Dataset JSON from `preprocess`"),
    out: Path = typer.Option(..., "--out", "-o", help="Model JSON to write"),
    cluster_file: Path = typer.Option(None, "--cluster-file", help="clusters.json, trains a subGAN"),
    cluster_id: int = typer.Option(None, "--cluster-id", help="Cluster to train on"),
    config: Path = typer.Option(None, "--config", "-c", help=CONFIG_OPTION_HELP),
    epochs: int = typer.Option(None, "--epochs", "-e", help="Adversarial epochs"),
    seed: int = typer.Option(None, "--seed", "-s", help="Training seed"),
    loss_curves: Path = typer.Option(None, "--loss-curves", help="Also write the training log as CSV"),
    json_output: bool = JSON_OPTION,
) -> None:
    """Train a GAN on a dataset or on one of its clusters."""
    try:
        cfg = load_config(config, GanTrainConfig, epochs=epochs, seed=seed)
        ds = select_cluster(read_dataset(dataset), cluster_file, cluster_id)
        batch = cfg.effective_batch_size(len(ds.series))
        with spinner(f"Training on {len(ds.series)} series (batch size {batch})..."):
            model = train_gan_on_dataset(ds, cfg)
        save_model(model, out)
        if loss_curves is not None:
            write_loss_curves(model.log, loss_curves)
    except LabganError as e:
        print_error(str(e))
        raise typer.Exit(1)

    final = {
        "d_loss": model.log.d_loss[-1] if model.log.d_loss else None,
        "g_loss": model.log.g_loss[-1] if model.log.g_loss else None,
    }
    if json_output:
        emit_json({"out": str(out), "series": len(ds.series), "batch_size": batch, **final})
        return
    if final["d_loss"] is not None:
        print_info(f"Final discriminator loss {final['d_loss']:.4f}, generator loss {final['g_loss']:.4f}")
    print_success(f"Wrote {out}")


def generate(
    model: Path = typer.Option(..., "--model", "-m", help="Model JSON from `train-gan`"),
    n: int = typer.Option(..., "--n", "-n", help="Number of synthetic series"),
    out: Path = typer.Option(..., "--out", "-o", help="Synthetic dataset JSON to write"),
    seed: int = typer.Option(0, "--seed", "-s", help="Generation seed"),
    json_output: bool = JSON_OPTION,
) -> None:
    """Generate synthetic series from a trained model."""
    try:
        synth = generate_dataset(load_model(model), n, seed)
        write_dataset(synth, out)
    except LabganError as e:
        print_error(str(e))
        raise typer.Exit(1)

    if json_output:
        emit_json({"out": str(out), "count": len(synth.series), "seed": seed})
        return
    print_success(f"Generated {len(synth.series)} series -> {out}")
