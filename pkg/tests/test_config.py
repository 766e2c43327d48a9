"""Tests for configuration loading, logging setup and the shared helpers."""

import logging

import numpy as np
import pytest
import typer
from pydantic import ValidationError as PydanticValidationError
from rich.logging import RichHandler

from src.cli._shared import load_config, parse_seeds, select_cluster
from src.config import ConfigManager, LabganSettings
from src.exceptions import ConfigError, ValidationError
from src.files import write_model
from src.models import (
    ClusterAssignment,
    ExperimentConfig,
    GanTrainConfig,
    SimConfig,
    StratificationResult,
)
from src.utils import derive_seed, format_p_value, format_pm, rng_for
from src.utils.log import setup_logging, verbosity_level


class TestConfigManager:
    def test_save_and_load(self, tmp_path):
        cfg = ExperimentConfig(seeds=[3, 4], oversample_factor=5, output_dir=tmp_path / "out")
        ConfigManager().save(cfg, tmp_path / "nested" / "exp.yaml")
        loaded = ConfigManager().load(tmp_path / "nested" / "exp.yaml", ExperimentConfig)
        assert loaded == cfg

    def test_partial_file_keeps_defaults(self, tmp_path):
        (tmp_path / "gan.yaml").write_text("epochs: 7\nseed: 2\n")
        cfg = ConfigManager().load(tmp_path / "gan.yaml", GanTrainConfig)
        assert (cfg.epochs, cfg.seed) == (7, 2)
        assert cfg.batch_size == GanTrainConfig().batch_size

    def test_json_file(self, tmp_path):
        (tmp_path / "sim.json").write_text('{"n_patients": 12, "seed": 9}')
        assert ConfigManager().load(tmp_path / "sim.json", SimConfig).n_patients == 12

    def test_empty_file_is_defaults(self, tmp_path):
        (tmp_path / "empty.yaml").write_text("")
        assert ConfigManager().load(tmp_path / "empty.yaml", SimConfig) == SimConfig()

    def test_missing(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            ConfigManager().load(tmp_path / "missing.yaml", SimConfig)

    @pytest.mark.parametrize(
        "text,message",
        [
            ("epochs: [1, 2\n", "Invalid YAML"),
            ("- 1\n- 2\n", "mapping"),
            ("epochs: -1\n", "Invalid configuration"),
        ],
    )
    def test_invalid(self, tmp_path, text, message):
        (tmp_path / "bad.yaml").write_text(text)
        with pytest.raises(ConfigError, match=message):
            ConfigManager().load(tmp_path / "bad.yaml", GanTrainConfig)

    def test_load_or_default(self):
        assert ConfigManager().load_or_default(None, GanTrainConfig) == GanTrainConfig()


class TestSettings:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("LABGAN_LOG_LEVEL", raising=False)
        monkeypatch.delenv("LABGAN_WORKERS", raising=False)
        settings = LabganSettings()
        assert (settings.log_level, settings.workers) == ("WARNING", 1)

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("LABGAN_LOG_LEVEL", "DEBUG")
        monkeypatch.setenv("LABGAN_WORKERS", "4")
        settings = LabganSettings()
        assert (settings.log_level, settings.workers) == ("DEBUG", 4)

    def test_rejects_bad_values(self, monkeypatch):
        monkeypatch.setenv("LABGAN_WORKERS", "0")
        with pytest.raises(PydanticValidationError):
            LabganSettings()


class TestLoadConfig:
    def test_flags_override_file(self, tmp_path):
        (tmp_path / "gan.yaml").write_text("epochs: 7\nseed: 2\n")
        cfg = load_config(tmp_path / "gan.yaml", GanTrainConfig, epochs=3, seed=None)
        assert (cfg.epochs, cfg.seed) == (3, 2)

    def test_no_flags(self):
        assert load_config(None, SimConfig, seed=None) == SimConfig()

    def test_invalid_flag(self):
        with pytest.raises(ConfigError, match="Invalid option value"):
            load_config(None, SimConfig, n_patients=0)

    def test_parse_seeds(self):
        assert parse_seeds(None) is None
        assert parse_seeds("0,1, 2,") == [0, 1, 2]
        with pytest.raises(typer.BadParameter):
            parse_seeds("1,two")


class TestSelectCluster:
    @pytest.fixture
    def cluster_file(self, random_dataset, tmp_path):
        ids = tuple(random_dataset.patient_ids)
        labels = tuple(i % 3 for i in range(len(ids)))
        result = StratificationResult(
            assignment=ClusterAssignment(patient_ids=ids, labels=labels, k=3),
            coordinates=[(0.0, 0.0)] * len(ids),
            ae_loss=[],
            kl_history=[],
            seed=0,
        )
        write_model(result, "clusters", tmp_path / "clusters.json")
        return tmp_path / "clusters.json"

    def test_whole_dataset(self, random_dataset):
        assert select_cluster(random_dataset, None, None) is random_dataset

    def test_members(self, random_dataset, cluster_file):
        subset = select_cluster(random_dataset, cluster_file, 1)
        assert subset.patient_ids == random_dataset.patient_ids[1::3]

    def test_errors(self, random_dataset, cluster_file):
        with pytest.raises(ValidationError, match="go together"):
            select_cluster(random_dataset, cluster_file, None)
        with pytest.raises(ValidationError, match="outside"):
            select_cluster(random_dataset, cluster_file, 3)
        other = random_dataset.subset(list(range(5)))
        assert len(select_cluster(other, cluster_file, 0).series) == 2
        bigger = random_dataset.model_copy(
            update={"series": random_dataset.series + (random_dataset.series[0].model_copy(update={"patient_id": "new"}),)}
        )
        with pytest.raises(ValidationError, match="no cluster label"):
            select_cluster(bigger, cluster_file, 0)


class TestLogging:
    @pytest.mark.parametrize("verbose,expected", [(0, "ERROR"), (1, "INFO"), (2, "DEBUG"), (5, "DEBUG")])
    def test_verbosity(self, verbose, expected):
        assert verbosity_level(verbose, default="ERROR") == expected

    def test_setup(self):
        setup_logging("info")
        root = logging.getLogger("src")
        assert root.level == logging.INFO
        assert not root.propagate
        (handler,) = root.handlers
        assert isinstance(handler, RichHandler)

    def test_setup_replaces_handlers(self):
        setup_logging()
        setup_logging("DEBUG")
        assert len(logging.getLogger("src").handlers) == 1


class TestSeeding:
    def test_streams_repeat(self):
        assert np.array_equal(rng_for(3, "a", 1).random(5), rng_for(3, "a", 1).random(5))

    def test_keys_separate_streams(self):
        assert not np.array_equal(rng_for(3, "a").random(5), rng_for(3, "b").random(5))
        assert not np.array_equal(rng_for(3, 0).random(5), rng_for(4, 0).random(5))

    def test_derive_seed(self):
        seed = derive_seed(7, "protocol-pool")
        assert seed == derive_seed(7, "protocol-pool")
        assert 0 <= seed < 2**31
        assert seed != derive_seed(7, "protocol-pick")


class TestFormatting:
    def test_pm(self):
        assert format_pm(0.1234, 0.2) == "0.12 (±0.20)"
        assert format_pm(1.0, 0.5, decimals=1) == "1.0 (±0.5)"

    def test_p_value(self):
        assert format_p_value(None) == "-"
        assert format_p_value(0.000123) == "1.2e-04"
