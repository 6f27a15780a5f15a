"""
Discovering, loading, merging and validating run configuration files.

Configs are JSON5 (comments and trailing commas allowed). A config may name
a ``base_profile``; the effective config is that profile with the file
applied on top as an RFC 7386 merge patch. Profiles are only read from the
configured profile directories.
"""

import logging
from pathlib import Path

import json5
from jsonmerge import merge
from jsonschema import Draft7Validator

from narrated_vmr.config.schema import NARRATOR_MODES, RUN_CONFIG_SCHEMA
from narrated_vmr.config.types import RunConfig
from narrated_vmr.exceptions import ValidationError
from narrated_vmr.settings import settings

logger = logging.getLogger(__name__)

MAX_PROFILE_DEPTH = 8

# Filesystem paths. Relative ones in a user config resolve against that file's directory, the rest against the cwd.
PATH_KEYS = {
    "dataset": ("train", "val", "embeddings"),
    "narrator": ("frames_dir", "fixture_path", "cache_dir"),
}

_validator = Draft7Validator(RUN_CONFIG_SCHEMA)


def get_profile_directories() -> list[Path]:
    """Existing profile directories from ``settings.PROFILE_DIRS``."""
    paths = []
    for dir_path in settings.PROFILE_DIRS:
        path = Path(dir_path).resolve()
        if path.is_dir():
            paths.append(path)
        else:
            logger.warning("Profile directory does not exist: %s", dir_path)
    return paths


def is_safe_profile_path(profile_path: str) -> bool:
    """
    True when *profile_path* is relative, free of ``..`` and names a file
    inside one of the profile directories.
    """
    if not profile_path:
        return False
    if ".." in profile_path or profile_path.startswith("/"):
        logger.warning("Rejected unsafe profile path: %s", profile_path)
        return False

    for base_dir in get_profile_directories():
        full_path = (base_dir / profile_path).resolve()
        try:
            full_path.relative_to(base_dir)
        except ValueError:
            continue
        if full_path.is_file():
            return True
    return False


def discover_profiles() -> list[str]:
    """Relative paths of every built-in profile, sorted."""
    profiles = set()
    for base_dir in get_profile_directories():
        for json_file in base_dir.rglob("*.json"):
            profiles.add(str(json_file.relative_to(base_dir)))
    return sorted(profiles)


def _read_json5(path: Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json5.load(f)
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read config ({exc})") from exc
    except ValueError as exc:
        # json5 raises ValueError for invalid JSON5
        raise ValidationError(f"{path}: invalid JSON5 ({exc})") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: config must be an object, got {type(data).__name__}")
    return data


def _resolve_paths(data: dict, base_dir: Path) -> dict:
    for section, keys in PATH_KEYS.items():
        values = data.get(section)
        if not isinstance(values, dict):
            continue
        for key in keys:
            if isinstance(values.get(key), str):
                values[key] = str((base_dir / values[key]).resolve())
    dataset = data.get("dataset")
    if isinstance(dataset, dict) and isinstance(dataset.get("splits"), dict):
        dataset["splits"] = {
            name: str((base_dir / path).resolve()) if isinstance(path, str) else path
            for name, path in dataset["splits"].items()
        }
    if isinstance(data.get("output_dir"), str):
        data["output_dir"] = str((base_dir / data["output_dir"]).resolve())
    return data


def load_profile(profile_path: str, _depth: int = 0) -> dict:
    """
    Load a built-in profile, following its own ``base_profile`` chain.

    Relative paths inside profiles are resolved against the working directory
    once the effective config is built.

    Raises:
        ValidationError: if the path is unsafe, missing or not valid JSON5
    """
    if _depth > MAX_PROFILE_DEPTH:
        raise ValidationError(f"base_profile chain deeper than {MAX_PROFILE_DEPTH} at '{profile_path}'")
    if not is_safe_profile_path(profile_path):
        raise ValidationError(f"base_profile: profile '{profile_path}' not found in the profile directories")

    for base_dir in get_profile_directories():
        full_path = base_dir / profile_path
        if full_path.is_file():
            data = _read_json5(full_path)
            logger.debug("Loaded profile: %s", profile_path)
            parent = data.pop("base_profile", None)
            if parent:
                return merge_config_with_patch(load_profile(parent, _depth + 1), data)
            return data

    raise ValidationError(f"base_profile: profile '{profile_path}' not found")


def merge_config_with_patch(base_config: dict, patch: dict) -> dict:
    """Apply *patch* to *base_config* as an RFC 7386 merge patch."""
    if not patch:
        return dict(base_config)
    return merge(base_config, patch)


def validate_run_config(config: dict) -> tuple[bool, list[str]]:
    """
    Validate an effective config against the schema and semantic rules.

    Returns:
        Tuple of (is_valid, error_messages)
    """
    if not isinstance(config, dict):
        return False, [f"config must be an object, got {type(config).__name__}"]

    errors = []
    for error in _validator.iter_errors(config):
        path = ".".join(str(p) for p in error.path) if error.path else "root"
        errors.append(f"{path}: {error.message}")
    if not errors:
        errors.extend(_validate_semantics(config))
    return not errors, errors


def _validate_semantics(config: dict) -> list[str]:
    """Checks the schema cannot express."""
    errors = []

    encoder = config.get("encoder", {})
    d, heads = encoder.get("d", 128), encoder.get("heads", 8)
    if d % heads:
        errors.append(f"encoder.d: {d} is not divisible by encoder.heads ({heads})")

    narrator = config["narrator"]
    mode = narrator["mode"]
    if mode not in NARRATOR_MODES and "." not in mode:
        errors.append(f"narrator.mode: '{mode}' is neither one of {', '.join(NARRATOR_MODES)} nor a dotted path")
    if mode == "fixture" and not narrator.get("fixture_path"):
        errors.append("narrator.fixture_path: required when narrator.mode is 'fixture'")
    model = narrator.get("model")
    if mode in ("remote", "prompt_free") and model is not None and "/" not in model:
        errors.append(f"narrator.model: '{model}' must have the format 'provider/model_name'")

    return errors


def load_run_config(path=None, overrides=None) -> RunConfig:
    """
    Build the effective run configuration.

    Order of precedence, lowest first: ``base_profile`` chain, the file at
    *path*, then *overrides* (CLI flags) as a final merge patch. Without a
    *path* the ``base/default.json`` profile is used alone.

    Raises:
        ValidationError: listing every schema and semantic violation
    """
    if path is None:
        config = load_profile("base/default.json")
        source = "base/default.json"
    else:
        path = Path(path)
        user = _resolve_paths(_read_json5(path), path.resolve().parent)
        base_profile = user.pop("base_profile", None)
        config = merge_config_with_patch(load_profile(base_profile), user) if base_profile else user
        source = str(path)

    if overrides:
        config = merge_config_with_patch(config, overrides)
    config = _resolve_paths(config, Path.cwd())

    is_valid, errors = validate_run_config(config)
    if not is_valid:
        raise ValidationError([f"{source}: {e}" for e in errors])

    logger.info("Loaded run config from %s", source)
    return RunConfig.from_dict(config)
