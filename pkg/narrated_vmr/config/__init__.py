"""
Run configuration: JSON5 profiles, schema validation and typed views.
"""

from narrated_vmr.config.loader import (
    discover_profiles,
    load_profile,
    load_run_config,
    merge_config_with_patch,
    validate_run_config,
)
from narrated_vmr.config.types import DatasetConfig, EncoderConfig, FusionConfig, RunConfig, TrainConfig

__all__ = [
    "DatasetConfig",
    "EncoderConfig",
    "FusionConfig",
    "RunConfig",
    "TrainConfig",
    "discover_profiles",
    "load_profile",
    "load_run_config",
    "merge_config_with_patch",
    "validate_run_config",
]
