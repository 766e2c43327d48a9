"""Shared fixtures."""

import logging

import numpy as np
import pytest

from src.cohortsim import SimulatedCohort, simulate_cohort
from src.models import (
    AlignedSeries,
    AutoencoderConfig,
    ClusterSpec,
    Dataset,
    ExperimentConfig,
    GanTrainConfig,
    NormBounds,
    SimConfig,
    StratifyConfig,
    TsneConfig,
)
from src.preprocess import preprocess_pipeline


@pytest.fixture(autouse=True)
def reset_src_logger():
    """Undo setup_logging from CLI tests so caplog sees library records."""
    yield
    root = logging.getLogger("src")
    root.handlers.clear()
    root.setLevel(logging.NOTSET)
    root.propagate = True


def make_series(values, patient_id="p1", n_pre=8):
    """AlignedSeries from any sequence of floats."""
    vals = tuple(float(v) for v in values)
    return AlignedSeries(patient_id=patient_id, values=vals, n_pre=n_pre, n_during=len(vals) - n_pre)


def two_cluster_sim(n_patients=60, seed=0):
    """Two clusters with disjoint code blocks and distinct levels."""
    return SimConfig(
        n_patients=n_patients,
        seed=seed,
        clusters=[
            ClusterSpec(baseline_mean=160.0, effect=-10.0, codes=["250.00", "357.2", "362.01", "583.81"]),
            ClusterSpec(baseline_mean=240.0, effect=-60.0, codes=["244.9", "311", "300.00", "724.2"]),
        ],
    )


@pytest.fixture
def bounds():
    return NormBounds(lo=75.0, hi=319.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_dataset(rng, bounds):
    """30 series of random values in [-1, 1]."""
    matrix = rng.uniform(-1.0, 1.0, size=(30, 16))
    return Dataset(
        series=tuple(make_series(row, f"p{i:03d}") for i, row in enumerate(matrix)),
        bounds=bounds,
    )


@pytest.fixture(scope="session")
def small_cohort() -> SimulatedCohort:
    return simulate_cohort(two_cluster_sim(n_patients=60, seed=7))


@pytest.fixture(scope="session")
def small_dataset(small_cohort) -> Dataset:
    return preprocess_pipeline(
        small_cohort.observations,
        small_cohort.prescriptions,
        diagnoses=small_cohort.diagnoses,
    )


@pytest.fixture
def tiny_gan_config():
    """Fast training parameters for plumbing tests."""
    return GanTrainConfig(
        epochs=2,
        ae_pretrain_epochs=2,
        batch_size=5,
        small_batch_size=5,
        small_cluster_threshold=0,
        seed=3,
    )


def tiny_experiment_config(output_dir, **overrides):
    """Experiment small enough to run in seconds; clusters of any size can train."""
    fields = {
        "sim": two_cluster_sim(n_patients=40),
        "stratify": StratifyConfig(
            k=2,
            autoencoder=AutoencoderConfig(hidden_dims=[8, 4], epochs=2, batch_size=8),
            tsne=TsneConfig(iterations=60, exaggeration_iterations=30),
        ),
        "gan": GanTrainConfig(
            epochs=1,
            ae_pretrain_epochs=1,
            batch_size=2,
            small_batch_size=1,
            small_cluster_threshold=10,
        ),
        "seeds": [0],
        "oversample_factor": 2,
        "figures": False,
        "output_dir": output_dir,
    }
    fields.update(overrides)
    return ExperimentConfig(**fields)
