"""Evaluation, stratification and experiment report models."""

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class DleReport(BaseModel):
    """Drug-laboratory effect: paired t-test on pre vs during means.

    Attributes:
        effect_size: Mean of (during mean - pre mean); negative is a decrease.
        units: "normalized" or "mg/dL".
    """

    n: int = Field(..., ge=2)
    mean_pre: float
    mean_during: float
    effect_size: float
    standard_error: float
    t_stat: float
    p_value: float = Field(..., ge=0.0, le=1.0)
    units: Literal["normalized", "mg/dL"] = "normalized"


class PredictivityReport(BaseModel):
    """P_err of a synthetic set against a real set.

    Attributes:
        per_series_errors: MSE_exp of each real series with its best pre match.
        matched_index: Index in the synthetic set of each real series' match.
        n_real: N, size of the real set.
        n_synth: V, size of the synthetic set.
    """

    per_series_errors: list[float]
    matched_index: list[int]
    p_err: float
    sd: float
    n_real: int
    n_synth: int

    @model_validator(mode="after")
    def validate_lengths(self) -> "PredictivityReport":
        """Check one error and one match per real series."""
        if len(self.per_series_errors) != self.n_real or len(self.matched_index) != self.n_real:
            raise ValueError("per-series arrays must have one entry per real series")
        return self


class ComparisonReport(BaseModel):
    """subGAN vs totalGAN on the same real series.

    Attributes:
        p_value: Paired two-sided t-test on per-series error differences.
            None when fewer than two real series exist.
        zero_variance: True when every difference was identical and
            p_value was set to 1 by convention.
    """

    cluster_id: int
    sub: PredictivityReport
    total: PredictivityReport
    p_value: float | None = None
    zero_variance: bool = False

    @model_validator(mode="after")
    def validate_same_real_set(self) -> "ComparisonReport":
        """Both reports must score the same real series."""
        if self.sub.n_real != self.total.n_real:
            raise ValueError("sub and total reports were computed on different real sets")
        return self


class ClusterAssignment(BaseModel):
    """Partition of patients into k clusters."""

    model_config = ConfigDict(frozen=True)

    patient_ids: tuple[str, ...]
    labels: tuple[int, ...]
    k: int = Field(..., ge=1)

    @model_validator(mode="after")
    def validate_partition(self) -> "ClusterAssignment":
        """Every label in [0, k) and every cluster non-empty."""
        if len(self.patient_ids) != len(self.labels):
            raise ValueError("one label per patient is required")
        if any(not 0 <= label < self.k for label in self.labels):
            raise ValueError(f"labels must lie in [0, {self.k})")
        if set(self.labels) != set(range(self.k)):
            raise ValueError("every cluster must hold at least one patient")
        return self

    def members(self, cluster: int) -> list[int]:
        """Indices of the patients in a cluster."""
        return [i for i, label in enumerate(self.labels) if label == cluster]

    def sizes(self) -> list[int]:
        """Cluster sizes indexed by label."""
        return [len(self.members(c)) for c in range(self.k)]


class StratificationResult(BaseModel):
    """What `stratify` writes to clusters.json."""

    assignment: ClusterAssignment
    coordinates: list[tuple[float, float]]
    ae_loss: list[float]
    kl_history: list[tuple[int, float]]
    seed: int


class GroundTruth(BaseModel):
    """Simulator ground truth."""

    labels: dict[str, int]
    effects: list[float]
    baselines: list[float]
    seed: int

    @model_validator(mode="after")
    def validate_labels(self) -> "GroundTruth":
        """Labels must index into effects."""
        k = len(self.effects)
        if any(not 0 <= label < k for label in self.labels.values()):
            raise ValueError(f"labels must lie in [0, {k})")
        return self


class ClusterEffect(BaseModel):
    """Configured vs measured effect for one true cluster."""

    cluster: int
    size: int
    configured_effect: float
    measured_effect: float | None = None


class OracleReport(BaseModel):
    """Agreement between a clustering and the simulator ground truth."""

    ari: float
    effects: list[ClusterEffect] = []


class TableRow(BaseModel):
    """One comparison row: a cluster scored by its subGAN and the totalGAN."""

    cluster: int
    variant: Literal["clinical", "random"]
    seed: int | None = None
    size: int
    sub_p_err: float
    sub_sd: float
    total_p_err: float
    total_sd: float
    p_value: float | None = None


class SeedResult(BaseModel):
    """Everything one seed of an experiment produced, apart from artifacts on disk."""

    seed: int
    n_simulated: int
    n_included: int
    cluster_sizes: list[int]
    clinical: list[TableRow]
    random: list[TableRow] = []
    oracle: OracleReport
    dle: DleReport
    dle_normalized: DleReport
    cluster_dle: list[DleReport | None] = []


class ExperimentSummary(BaseModel):
    """Contents of summary.json.

    Attributes:
        table: Median rows across seeds, clinical rows first.
    """

    config: dict[str, Any]
    seeds: list[SeedResult]
    table: list[TableRow]
