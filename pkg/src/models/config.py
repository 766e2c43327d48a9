"""Configuration models."""

from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, field_validator, model_validator


class PreprocessConfig(BaseModel):
    """Era construction, segment extraction and normalization parameters."""

    drug_prefix: str = "C10AA"
    max_gap_days: int = Field(default=30, ge=0)
    lookback_days: int = Field(default=365, ge=1)
    n_pre: int = Field(default=8, ge=1)
    n_during: int = Field(default=8, ge=1)
    central_mass: float = Field(default=0.99, gt=0.0, le=1.0)


class AutoencoderConfig(BaseModel):
    """Stratification autoencoder (binary covariates -> 32-d code)."""

    hidden_dims: list[int] = Field(default_factory=lambda: [256, 128, 64, 32])
    epochs: int = Field(default=100, ge=0)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0.0)

    @field_validator("hidden_dims")
    @classmethod
    def validate_dims(cls, v: list[int]) -> list[int]:
        """Require at least one positive hidden width.

        Args:
            v: Encoder widths, last one is the code size

        Returns:
            Validated widths

        Raises:
            ValueError: If empty or non-positive
        """
        if not v or any(d <= 0 for d in v):
            raise ValueError("hidden_dims must be a non-empty list of positive widths")
        return v


class TsneConfig(BaseModel):
    """Exact t-SNE hyperparameters."""

    perplexity: float = Field(default=30.0, gt=0.0)
    iterations: int = Field(default=1000, ge=1)
    learning_rate: float = Field(default=200.0, gt=0.0)
    early_exaggeration: float = Field(default=12.0, ge=1.0)
    exaggeration_iterations: int = Field(default=250, ge=0)
    initial_momentum: float = 0.5
    final_momentum: float = 0.8
    init_scale: float = Field(default=1e-4, gt=0.0)
    bisection_steps: int = Field(default=50, ge=1)


class StratifyConfig(BaseModel):
    """Deep patient stratification: autoencoder, t-SNE, spectral clustering."""

    k: int = Field(default=4, ge=1)
    seed: int = 0
    autoencoder: AutoencoderConfig = Field(default_factory=AutoencoderConfig)
    tsne: TsneConfig = Field(default_factory=TsneConfig)
    kmeans_restarts: int = Field(default=10, ge=1)


class GanTrainConfig(BaseModel):
    """GAN training parameters.

    Attributes:
        batch_size: Minibatch size for training sets of at least
            small_cluster_threshold series.
        small_batch_size: Minibatch size below that threshold.
    """

    epochs: int = Field(default=100, ge=0)
    batch_size: int = Field(default=10, ge=1)
    small_batch_size: int = Field(default=5, ge=1)
    small_cluster_threshold: int = Field(default=50, ge=0)
    ae_pretrain_epochs: int = Field(default=100, ge=0)
    ae_learning_rate: float = Field(default=1e-3, gt=0.0)
    generator_learning_rate: float = Field(default=1e-3, gt=0.0)
    discriminator_learning_rate: float = Field(default=1e-3, gt=0.0)
    noise_dim: int = Field(default=16, ge=1)
    seed: int = 0

    def effective_batch_size(self, n: int) -> int:
        """Batch size used for a training set of n series."""
        return self.small_batch_size if n < self.small_cluster_threshold else self.batch_size


class ClusterSpec(BaseModel):
    """One simulated patient cluster.

    Attributes:
        codes: Diagnosis codes flagged with probability p_signal for members.
    """

    weight: float = Field(default=1.0, gt=0.0)
    baseline_mean: float = Field(default=180.0, ge=0.0)
    baseline_sd: float = Field(default=20.0, gt=0.0)
    effect: float = 0.0
    noise_sd: float = Field(default=10.0, gt=0.0)
    codes: list[str] = Field(default_factory=list)


def _default_clusters() -> list[ClusterSpec]:
    return [
        ClusterSpec(baseline_mean=150.0, effect=-5.0, codes=["250.00", "250.02", "357.2", "362.01", "583.81"]),
        ClusterSpec(baseline_mean=185.0, effect=-20.0, codes=["401.1", "402.10", "428.0", "427.31", "414.01"]),
        ClusterSpec(baseline_mean=215.0, effect=-45.0, codes=["272.0", "272.4", "278.00", "530.81", "715.90"]),
        ClusterSpec(baseline_mean=245.0, effect=-70.0, codes=["244.9", "311", "300.00", "724.2", "493.90"]),
    ]


class SimConfig(BaseModel):
    """Simulated cohort parameters."""

    n_patients: int = Field(default=500, ge=1)
    clusters: list[ClusterSpec] = Field(default_factory=_default_clusters)
    background_codes: list[str] = Field(
        default_factory=lambda: ["780.79", "786.50", "599.0", "462", "465.9", "719.46"]
    )
    p_signal: float = Field(default=0.7, ge=0.0, le=1.0)
    p_noise: float = Field(default=0.05, ge=0.0, le=1.0)
    observation_rate: float = Field(default=2.0, gt=0.0)
    era_length_min: int = Field(default=180, ge=0)
    era_length_max: int = Field(default=540, ge=0)
    lookback_days: int = Field(default=365, ge=1)
    lookback_occupancy: float = Field(default=1.0, gt=0.0, le=1.0)
    diagnosis_window_days: int = Field(default=730, ge=1)
    first_start_day: int = 800
    last_start_day: int = 4000
    drug_code: str = "C10AA05"
    prescription_days: int = Field(default=90, ge=1)
    max_refill_gap: int = Field(default=20, ge=0)
    seed: int = 0

    @property
    def k_clusters(self) -> int:
        """Number of simulated clusters."""
        return len(self.clusters)

    @model_validator(mode="after")
    def validate_ranges(self) -> "SimConfig":
        """Check cluster count and day ranges."""
        if not self.clusters:
            raise ValueError("at least one cluster is required")
        if self.era_length_min > self.era_length_max:
            raise ValueError("era_length_min exceeds era_length_max")
        if self.first_start_day > self.last_start_day:
            raise ValueError("first_start_day exceeds last_start_day")
        return self


class ExperimentConfig(BaseModel):
    """Full experiment: simulate, preprocess, stratify, train, compare.

    Attributes:
        cluster_gan: Training parameters for subGANs, defaults to gan.
        oversample_factor: Synthetic pool size per model, as a multiple of
            the largest cluster.
    """

    sim: SimConfig = Field(default_factory=SimConfig)
    preprocess: PreprocessConfig = Field(default_factory=PreprocessConfig)
    stratify: StratifyConfig = Field(default_factory=StratifyConfig)
    gan: GanTrainConfig = Field(default_factory=GanTrainConfig)
    cluster_gan: GanTrainConfig | None = None
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    oversample_factor: int = Field(default=10, ge=1)
    random_baseline: bool = True
    figures: bool = True
    output_dir: Path = Path("experiment")

    @field_validator("seeds")
    @classmethod
    def validate_seeds(cls, v: list[int]) -> list[int]:
        """Require at least one seed."""
        if not v:
            raise ValueError("at least one seed is required")
        return v

    def sub_gan(self) -> GanTrainConfig:
        """Training parameters for per-cluster GANs."""
        return self.cluster_gan or self.gan

    def describe(self) -> dict[str, Any]:
        """JSON-friendly dump, output_dir excluded so summaries stay location independent."""
        return self.model_dump(mode="json", exclude={"output_dir"})
