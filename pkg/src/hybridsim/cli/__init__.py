"""Scenario runner, presets and acceptance suite behind the ``hybridsim`` command."""
from .config import PRESETS, ConfigError, ScenarioConfig, load, load_preset, resolve
from .main import main

__all__ = ["PRESETS", "ConfigError", "ScenarioConfig", "load", "load_preset", "resolve", "main"]
