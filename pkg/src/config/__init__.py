"""Configuration management."""

from .manager import ConfigManager, LabganSettings

__all__ = ["ConfigManager", "LabganSettings"]
