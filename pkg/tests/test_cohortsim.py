"""Tests for the cohort simulator and the ground-truth oracle."""

import logging

import numpy as np
import pytest

from conftest import two_cluster_sim
from src.cohortsim import (
    DIAGNOSES_FILE,
    OBSERVATIONS_FILE,
    PRESCRIPTIONS_FILE,
    TRUTH_FILE,
    oracle_report,
    patient_id,
    simulate_cohort,
    write_cohort,
)
from src.evaluate import dle_test
from src.exceptions import ValidationError, ZeroVarianceError
from src.files import read_model, read_observations
from src.models import ClusterAssignment, ClusterSpec, GroundTruth, SimConfig
from src.preprocess import preprocess_pipeline


def _dataset(cohort):
    return preprocess_pipeline(cohort.observations, cohort.prescriptions, diagnoses=cohort.diagnoses)


class TestSimulate:
    def test_deterministic(self, small_cohort):
        again = simulate_cohort(two_cluster_sim(n_patients=60, seed=7))
        assert again.observations == small_cohort.observations
        assert again.prescriptions == small_cohort.prescriptions
        assert again.diagnoses == small_cohort.diagnoses
        assert again.truth == small_cohort.truth

    def test_files_byte_identical(self, small_cohort, tmp_path):
        write_cohort(small_cohort, tmp_path / "a")
        write_cohort(simulate_cohort(two_cluster_sim(n_patients=60, seed=7)), tmp_path / "b")
        for name in (OBSERVATIONS_FILE, PRESCRIPTIONS_FILE, DIAGNOSES_FILE, TRUTH_FILE):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_written_tables_read_back(self, small_cohort, tmp_path):
        write_cohort(small_cohort, tmp_path)
        assert read_observations(tmp_path / OBSERVATIONS_FILE) == small_cohort.observations
        assert read_model(tmp_path / TRUTH_FILE, "truth", GroundTruth) == small_cohort.truth

    def test_seed_changes_cohort(self, small_cohort):
        other = simulate_cohort(two_cluster_sim(n_patients=60, seed=8))
        assert other.observations != small_cohort.observations

    def test_patient_ids_and_labels(self, small_cohort):
        assert patient_id(0) == "p0001"
        assert sorted(small_cohort.truth.labels) == [patient_id(i) for i in range(60)]
        assert set(small_cohort.truth.labels.values()) == {0, 1}
        assert small_cohort.truth.effects == [-10.0, -60.0]

    def test_default_envelope_and_inclusion(self):
        cohort = simulate_cohort(SimConfig(seed=0))
        values = np.array([o.value for o in cohort.observations])
        assert values.min() >= 40.0 and values.max() <= 400.0
        ds = _dataset(cohort)
        assert len(ds.series) >= 0.95 * 500

    def test_diagnoses_precede_era(self, small_cohort):
        start = {}
        for p in small_cohort.prescriptions:
            start[p.patient_id] = min(p.start_day, start.get(p.patient_id, p.start_day))
        assert all(d.day < start[d.patient_id] for d in small_cohort.diagnoses)

    def test_one_effect_changes_one_cluster(self):
        base = two_cluster_sim(n_patients=40, seed=3)
        changed = base.model_copy(deep=True)
        changed.clusters[1].effect = -20.0
        a, b = simulate_cohort(base), simulate_cohort(changed)
        labels = a.truth.labels
        for x, y in zip(a.observations, b.observations):
            assert (x.patient_id, x.day) == (y.patient_id, y.day)
            if labels[x.patient_id] == 0:
                assert x.value == y.value
        assert a.diagnoses == b.diagnoses
        assert any(x.value != y.value for x, y in zip(a.observations, b.observations))

    def test_low_observation_rate_warns(self, caplog):
        with caplog.at_level(logging.WARNING, logger="src.cohortsim"):
            cohort = simulate_cohort(SimConfig(n_patients=5, observation_rate=0.1, seed=1))
        assert "expected observation" in caplog.text
        # one observation per side is still forced
        assert len(_dataset(cohort).series) == 5

    def test_recovers_effect(self):
        cfg = SimConfig(n_patients=200, seed=2, clusters=[ClusterSpec(effect=-30.0, noise_sd=5.0)])
        ds = _dataset(simulate_cohort(cfg))
        report = dle_test(ds.series, ds.bounds)
        assert abs(report.effect_size + 30.0) < 5.0
        assert report.p_value < 1e-6

    def test_null_effect_calibrated(self):
        calibrated = 0
        for seed in range(5):
            cfg = SimConfig(n_patients=200, seed=seed, clusters=[ClusterSpec(effect=0.0)])
            ds = _dataset(simulate_cohort(cfg))
            report = dle_test(ds.series, ds.bounds)
            if report.p_value > 0.01 and abs(report.effect_size) < 2 * report.standard_error:
                calibrated += 1
        assert calibrated >= 4


class TestOracle:
    def test_identity(self, small_cohort):
        ids = tuple(sorted(small_cohort.truth.labels))
        labels = tuple(small_cohort.truth.labels[p] for p in ids)
        report = oracle_report(small_cohort.truth, ClusterAssignment(patient_ids=ids, labels=labels, k=2))
        assert report.ari == 1.0
        assert [e.measured_effect for e in report.effects] == [None, None]
        assert sum(e.size for e in report.effects) == 60

    def test_single_cluster(self):
        rng = np.random.default_rng(0)
        ids = [patient_id(i) for i in range(100)]
        truth = GroundTruth(
            labels={p: int(label) for p, label in zip(ids, rng.integers(0, 4, size=100))},
            effects=[0.0] * 4,
            baselines=[180.0] * 4,
            seed=0,
        )
        report = oracle_report(truth, ClusterAssignment(patient_ids=tuple(ids), labels=(0,) * 100, k=1))
        assert report.ari == 0.0

    def test_random_assignment(self):
        rng = np.random.default_rng(1)
        ids = [patient_id(i) for i in range(400)]
        truth = GroundTruth(
            labels={p: int(label) for p, label in zip(ids, rng.integers(0, 4, size=400))},
            effects=[0.0] * 4,
            baselines=[180.0] * 4,
            seed=0,
        )
        assignment = ClusterAssignment(
            patient_ids=tuple(ids), labels=tuple(int(x) for x in rng.integers(0, 4, size=400)), k=4
        )
        assert abs(oracle_report(truth, assignment).ari) < 0.05

    def test_measured_effects(self, small_cohort, small_dataset):
        ids = tuple(small_dataset.patient_ids)
        labels = tuple(small_cohort.truth.labels[p] for p in ids)
        report = oracle_report(small_cohort.truth, ClusterAssignment(patient_ids=ids, labels=labels, k=2), small_dataset)
        for effect in report.effects:
            members = [small_dataset.series[i] for i, p in enumerate(ids) if small_cohort.truth.labels[p] == effect.cluster]
            assert effect.size == len(members)
            assert effect.measured_effect == pytest.approx(dle_test(members, small_dataset.bounds).effect_size)
        assert report.effects[1].measured_effect < report.effects[0].measured_effect

    def test_unknown_patient(self, small_cohort):
        assignment = ClusterAssignment(patient_ids=("nobody", "p0001"), labels=(0, 1), k=2)
        with pytest.raises(ValidationError):
            oracle_report(small_cohort.truth, assignment)

    def test_zero_variance_effect_is_none(self, small_cohort, small_dataset, mocker):
        mocker.patch("src.cohortsim.dle_test", side_effect=ZeroVarianceError("flat"))
        ids = tuple(small_dataset.patient_ids)
        labels = tuple(small_cohort.truth.labels[p] for p in ids)
        report = oracle_report(small_cohort.truth, ClusterAssignment(patient_ids=ids, labels=labels, k=2), small_dataset)
        assert [e.measured_effect for e in report.effects] == [None, None]
