"""Main CLI application."""

import typer
from rich.console import Console

from .. import __version__
from ..config import LabganSettings
from ..utils import ordered_group
from ..utils.log import setup_logging, verbosity_level
from . import data, evaluate, experiment, gan, stratify

console = Console()

COMMAND_ORDER = [
    "simulate",
    "preprocess",
    "stratify",
    "train-gan",
    "generate",
    "evaluate",
    "compare",
    "dle",
    "run-experiment",
]

app = typer.Typer(
    name="labgan",
    help="Synthetic drug-exposed laboratory time series with GANs",
    cls=ordered_group(COMMAND_ORDER),
    no_args_is_help=True,
    context_settings={"help_option_names": ["-h", "--help"]},
)

app.command("simulate")(data.simulate)
app.command("preprocess")(data.preprocess)
app.command("stratify")(stratify.stratify)
app.command("train-gan")(gan.train_gan)
app.command("generate")(gan.generate)
app.command("evaluate")(evaluate.evaluate)
app.command("compare")(evaluate.compare)
app.command("dle")(evaluate.dle)
app.command("run-experiment")(experiment.run_experiment)


def version_callback(value: bool) -> None:
    """Print version and exit.

    Args:
        value: Whether version flag was set
    """
    if value:
        console.print(f"labgan version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        None,
        "--version",
        help="Show version and exit",
        callback=version_callback,
        is_eager=True,
    ),
    verbose: int = typer.Option(0, "--verbose", "-V", count=True, help="More log output (-V info, -VV debug)"),
) -> None:
    """labgan - synthetic drug-exposed laboratory time series.

    Simulate or load a cohort, stratify patients on their diagnoses, train
    one GAN per cluster and check whether the per-cluster models beat a
    single model trained on everyone.

    Get started:
        labgan simulate -o cohort/          # Cohort with known clusters
        labgan run-experiment --seeds 0     # Whole pipeline, one seed
        labgan --help                       # Show all available commands
    """
    setup_logging(verbosity_level(verbose, LabganSettings().log_level))


def run() -> None:
    """Console entry point."""
    app()


if __name__ == "__main__":
    run()
