"""Configuration manager for labgan."""

from pathlib import Path
from typing import TypeVar

import yaml
from pydantic import BaseModel, Field
from pydantic import ValidationError as PydanticValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..exceptions import ConfigError

ModelT = TypeVar("ModelT", bound=BaseModel)


class LabganSettings(BaseSettings):
    """Process-level settings read from LABGAN_* environment variables."""

    model_config = SettingsConfigDict(env_prefix="LABGAN_")

    log_level: str = Field(default="WARNING", pattern="^(DEBUG|INFO|WARNING|ERROR)$")
    workers: int = Field(default=1, ge=1)


class ConfigManager:
    """Load and save YAML (or JSON) config files into pydantic models."""

    def load(self, path: Path, model: type[ModelT]) -> ModelT:
        """Load a config file.

        JSON is read through the YAML parser, JSON documents being valid YAML.

        Args:
            path: Config file path
            model: Pydantic model to validate against

        Returns:
            Validated configuration

        Raises:
            ConfigError: If the file is missing or invalid
        """
        if not path.exists():
            raise ConfigError(f"Configuration file not found at {path}")
        try:
            with open(path) as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML in {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a mapping at top level")
        try:
            return model(**data)
        except PydanticValidationError as e:
            raise ConfigError(f"Invalid configuration in {path}: {e}") from e

    def load_or_default(self, path: Path | None, model: type[ModelT]) -> ModelT:
        """Load a config file, or build the model defaults when no path is given."""
        if path is None:
            return model()
        return self.load(path, model)

    def save(self, config: BaseModel, path: Path) -> None:
        """Save a configuration as YAML.

        Args:
            config: Configuration to save
            path: Destination file

        Raises:
            ConfigError: If save fails
        """
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            data = config.model_dump(mode="json", exclude_none=True)
            with open(path, "w") as f:
                yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)
        except OSError as e:
            raise ConfigError(f"Failed to save config: {e}") from e
