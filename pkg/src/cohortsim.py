"""Seeded simulator of raw cohorts with known clusters and drug effects.

Every patient gets one exposure era, Poisson-spaced lab observations before
and during it, a step change of its cluster's effect at the era start, and
diagnosis codes drawn from its cluster's code block. Patient i draws from
the stream (seed, "patient", i) only, and effects are added after all draws,
so changing one cluster's effect leaves every other series untouched.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.metrics import adjusted_rand_score

from .evaluate import dle_test
from .exceptions import ValidationError, ZeroVarianceError
from .files import write_diagnoses, write_model, write_observations, write_prescriptions
from .models.config import SimConfig
from .models.records import DiagnosisRecord, LabObservation, PrescriptionRecord
from .models.reports import ClusterAssignment, ClusterEffect, GroundTruth, OracleReport
from .models.series import Dataset
from .utils.seeding import rng_for

logger = logging.getLogger(__name__)

OBSERVATIONS_FILE = "observations.csv"
PRESCRIPTIONS_FILE = "prescriptions.csv"
DIAGNOSES_FILE = "diagnoses.csv"
TRUTH_FILE = "truth.json"


@dataclass(frozen=True)
class SimulatedCohort:
    """Raw tables of a simulated cohort and its ground truth."""

    observations: list[LabObservation]
    prescriptions: list[PrescriptionRecord]
    diagnoses: list[DiagnosisRecord]
    truth: GroundTruth


def patient_id(index: int) -> str:
    """Zero-padded patient id, e.g. p0001 for index 0."""
    return f"p{index + 1:04d}"


def _poisson_days(rng: np.random.Generator, first: int, last: int, rate_per_day: float) -> list[int]:
    """Days of a Poisson process on [first, last]; one uniform day if it yields none."""
    days: list[int] = []
    t = first + rng.exponential(1.0 / rate_per_day)
    while t < last + 1:
        days.append(int(t))
        t += rng.exponential(1.0 / rate_per_day)
    if not days:
        days.append(int(rng.integers(first, last + 1)))
    return sorted(set(days))


def _check_expectations(cfg: SimConfig) -> None:
    rate = cfg.observation_rate / 100.0
    pre_window = cfg.lookback_days * cfg.lookback_occupancy
    if rate * pre_window < 1.0 or rate * (cfg.era_length_min + 1) < 1.0:
        logger.warning(
            "observation rate %.2f per 100 days yields < 1 expected observation per window; "
            "one observation per side is forced",
            cfg.observation_rate,
        )


def _code_universe(cfg: SimConfig) -> list[str]:
    codes = {c for spec in cfg.clusters for c in spec.codes} | set(cfg.background_codes)
    return sorted(codes)


def simulate_cohort(cfg: SimConfig | None = None) -> SimulatedCohort:
    """Simulate raw observations, prescriptions and diagnoses.

    Args:
        cfg: Simulation parameters

    Returns:
        SimulatedCohort; records sorted by patient then day
    """
    cfg = cfg or SimConfig()
    _check_expectations(cfg)
    weights = np.array([c.weight for c in cfg.clusters], dtype=np.float64)
    labels = rng_for(cfg.seed, "assign").choice(cfg.k_clusters, size=cfg.n_patients, p=weights / weights.sum())
    universe = _code_universe(cfg)
    rate = cfg.observation_rate / 100.0
    pre_window = max(1, int(round(cfg.lookback_days * cfg.lookback_occupancy)))

    observations: list[LabObservation] = []
    prescriptions: list[PrescriptionRecord] = []
    diagnoses: list[DiagnosisRecord] = []
    truth_labels: dict[str, int] = {}

    for i, label in enumerate(labels):
        spec = cfg.clusters[int(label)]
        pid = patient_id(i)
        truth_labels[pid] = int(label)
        rng = rng_for(cfg.seed, "patient", i)

        start = int(rng.integers(cfg.first_start_day, cfg.last_start_day + 1))
        end = start + int(rng.integers(cfg.era_length_min, cfg.era_length_max + 1))
        baseline = rng.normal(spec.baseline_mean, spec.baseline_sd)
        pre_days = _poisson_days(rng, start - pre_window, start - 1, rate)
        during_days = _poisson_days(rng, start, end, rate)
        noise = rng.normal(0.0, spec.noise_sd, size=len(pre_days) + len(during_days))

        shift = np.concatenate([np.zeros(len(pre_days)), np.full(len(during_days), spec.effect)])
        values = np.maximum(baseline + noise + shift, 0.0)
        for day, value in zip(pre_days + during_days, values):
            observations.append(LabObservation(patient_id=pid, day=day, value=round(float(value), 1)))

        cur = start
        while True:
            stop = min(cur + cfg.prescription_days - 1, end)
            prescriptions.append(
                PrescriptionRecord(patient_id=pid, drug_code=cfg.drug_code, start_day=cur, end_day=stop)
            )
            if stop >= end:
                break
            cur = min(stop + 1 + int(rng.integers(0, cfg.max_refill_gap + 1)), end)

        draws = rng.random(len(universe))
        dates = rng.integers(start - cfg.diagnosis_window_days, start, size=len(universe))
        own = set(spec.codes)
        patient_dx = [
            DiagnosisRecord(patient_id=pid, icd9_code=code, day=int(day))
            for code, u, day in zip(universe, draws, dates)
            if u < (cfg.p_signal if code in own else cfg.p_noise)
        ]
        diagnoses.extend(sorted(patient_dx, key=lambda d: (d.day, d.icd9_code)))

    truth = GroundTruth(
        labels=truth_labels,
        effects=[c.effect for c in cfg.clusters],
        baselines=[c.baseline_mean for c in cfg.clusters],
        seed=cfg.seed,
    )
    logger.info(
        "simulated %d patients: %d observations, %d prescriptions, %d diagnoses",
        cfg.n_patients,
        len(observations),
        len(prescriptions),
        len(diagnoses),
    )
    return SimulatedCohort(observations, prescriptions, diagnoses, truth)


def write_cohort(cohort: SimulatedCohort, out_dir: Path) -> None:
    """Write the three CSV tables and truth.json into out_dir."""
    out_dir.mkdir(parents=True, exist_ok=True)
    write_observations(cohort.observations, out_dir / OBSERVATIONS_FILE)
    write_prescriptions(cohort.prescriptions, out_dir / PRESCRIPTIONS_FILE)
    write_diagnoses(cohort.diagnoses, out_dir / DIAGNOSES_FILE)
    write_model(cohort.truth, "truth", out_dir / TRUTH_FILE)


def oracle_report(
    truth: GroundTruth,
    assignment: ClusterAssignment,
    dataset: Dataset | None = None,
) -> OracleReport:
    """ARI of a clustering against the truth, and per true cluster effects.

    Measured effects come from dle_test on the dataset's series of each true
    cluster, in mg/dL; they stay None without a dataset, with fewer than two
    series, or when all differences are equal.

    Raises:
        ValidationError: If the assignment names patients the truth does not know
    """
    unknown = [pid for pid in assignment.patient_ids if pid not in truth.labels]
    if unknown:
        raise ValidationError(f"{len(unknown)} assigned patients are not in the ground truth, e.g. {unknown[0]}")
    true_labels = [truth.labels[pid] for pid in assignment.patient_ids]
    ari = float(adjusted_rand_score(true_labels, list(assignment.labels)))

    by_id = {s.patient_id: s for s in dataset.series} if dataset is not None else {}
    effects = []
    for cluster, configured in enumerate(truth.effects):
        members = [pid for pid in assignment.patient_ids if truth.labels[pid] == cluster]
        measured = None
        series = [by_id[pid] for pid in members if pid in by_id]
        if dataset is not None and len(series) >= 2:
            try:
                measured = dle_test(series, dataset.bounds).effect_size
            except ZeroVarianceError:
                measured = None
        effects.append(
            ClusterEffect(cluster=cluster, size=len(members), configured_effect=configured, measured_effect=measured)
        )
    return OracleReport(ari=ari, effects=effects)
