"""Validation sub-package public re-exports."""

from .validation_layer import ConfigValidator, ExperimentConfig, load_config, load_config_file

__all__: list[str] = [
    "ConfigValidator",
    "ExperimentConfig",
    "load_config",
    "load_config_file",
]
