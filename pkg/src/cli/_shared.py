"""Helpers shared by the labgan commands."""

from pathlib import Path
from typing import TypeVar

import typer
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError
from rich.table import Table

from ..config import ConfigManager
from ..exceptions import ConfigError, ValidationError
from ..files import read_model
from ..models import ClusterAssignment, Dataset, StratificationResult, TableRow
from ..utils import create_table, format_p_value, format_pm

ModelT = TypeVar("ModelT", bound=BaseModel)

CONFIG_OPTION_HELP = "YAML or JSON config file (defaults when omitted)"


def load_config(path: Path | None, model: type[ModelT], **overrides: object) -> ModelT:
    """Load a config model and apply the CLI flags that were actually given."""
    config = ConfigManager().load_or_default(path, model)
    given = {k: v for k, v in overrides.items() if v is not None}
    if not given:
        return config
    try:
        return model(**{**config.model_dump(), **given})
    except PydanticValidationError as e:
        raise ConfigError(f"Invalid option value: {e}") from e


def read_assignment(path: Path) -> ClusterAssignment:
    """Cluster assignment of a clusters.json written by `stratify`."""
    return read_model(path, "clusters", StratificationResult).assignment


def select_cluster(dataset: Dataset, cluster_file: Path | None, cluster_id: int | None) -> Dataset:
    """The dataset, or only the members of one cluster of it.

    Raises:
        ValidationError: If only one of cluster_file / cluster_id is given,
            or the assignment does not cover the dataset
    """
    if cluster_file is None and cluster_id is None:
        return dataset
    if cluster_file is None or cluster_id is None:
        raise ValidationError("--cluster-file and --cluster-id go together")
    assignment = read_assignment(cluster_file)
    if not 0 <= cluster_id < assignment.k:
        raise ValidationError(f"cluster id {cluster_id} outside [0, {assignment.k})")
    labels = dict(zip(assignment.patient_ids, assignment.labels))
    missing = [pid for pid in dataset.patient_ids if pid not in labels]
    if missing:
        raise ValidationError(f"{len(missing)} dataset patients have no cluster label, e.g. {missing[0]}")
    return dataset.subset([i for i, pid in enumerate(dataset.patient_ids) if labels[pid] == cluster_id])


def parse_seeds(value: str | None) -> list[int] | None:
    """Parse a comma-separated seed list such as "0,1,2"."""
    if value is None:
        return None
    try:
        return [int(s) for s in value.split(",") if s.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"seeds must be comma-separated integers, got '{value}'") from e


def table_rows_table(rows: list[TableRow], title: str) -> Table:
    """Rich table of comparison rows, one per cluster and variant."""
    table = create_table(
        title=title,
        columns=[
            ("Variant", "cyan"),
            ("Cluster", ""),
            ("Size", ""),
            ("subGAN P_err", "green"),
            ("totalGAN P_err", "red"),
            ("p-value", ""),
        ],
    )
    for row in rows:
        table.add_row(
            row.variant,
            str(row.cluster),
            str(row.size),
            format_pm(row.sub_p_err, row.sub_sd),
            format_pm(row.total_p_err, row.total_sd),
            format_p_value(row.p_value),
        )
    return table
