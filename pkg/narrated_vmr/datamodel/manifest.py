"""
Loading, validating and writing dataset manifests.

A manifest is a JSONL file. Line 1 is a header naming the split, every
further line is one video-query entry::

    {"manifest_version": 1, "split": "train"}
    {"video_id": "v1", "feature_path": "features/v1.nvmf", "duration": 30.0,
     "query_id": "q1", "query": "a man opens a door", "tau_s": 2.0, "tau_e": 8.5}

``feature_path`` is relative to the manifest's directory. ``periods`` is
optional: a list of ``[start, end]`` pairs, one per raw feature row.
"""

import json
import logging
from pathlib import Path

from jsonschema import Draft7Validator

from narrated_vmr.datamodel.types import SPLIT_NAMES, DatasetManifest, ManifestEntry, validate_periods
from narrated_vmr.exceptions import ValidationError
from narrated_vmr.utils import write_jsonl

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1

HEADER_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["manifest_version", "split"],
    "properties": {
        "manifest_version": {"const": MANIFEST_VERSION},
        "split": {"type": "string", "enum": list(SPLIT_NAMES)},
    },
    "additionalProperties": True,
}

ENTRY_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["video_id", "feature_path", "duration", "query_id", "query", "tau_s", "tau_e"],
    "properties": {
        "video_id": {"type": "string", "minLength": 1},
        "feature_path": {"type": "string", "minLength": 1},
        "duration": {"type": "number", "exclusiveMinimum": 0},
        "query_id": {"type": "string", "minLength": 1},
        "query": {"type": "string", "minLength": 1},
        "tau_s": {"type": "number", "minimum": 0},
        "tau_e": {"type": "number"},
        "periods": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": {"type": "number"},
            },
        },
    },
    "additionalProperties": True,
}

_header_validator = Draft7Validator(HEADER_SCHEMA)
_entry_validator = Draft7Validator(ENTRY_SCHEMA)


def _schema_errors(validator, record, prefix) -> list[str]:
    errors = []
    for error in validator.iter_errors(record):
        path = ".".join(str(p) for p in error.path) if error.path else "root"
        errors.append(f"{prefix} {path}: {error.message}")
    return errors


def _validate_entry_semantics(record, prefix) -> list[str]:
    """Checks beyond the JSON schema: the annotation must lie inside the video."""
    errors = []
    duration = record["duration"]
    if not record["tau_s"] < record["tau_e"]:
        errors.append(f"{prefix}: tau_s {record['tau_s']} must be < tau_e {record['tau_e']}")
    if record["tau_e"] > duration:
        errors.append(f"{prefix}: tau_e {record['tau_e']} exceeds duration {duration}")
    if "periods" in record:
        errors.extend(f"{prefix}: {e}" for e in validate_periods(record["periods"], duration))
    return errors


def load_manifest(path) -> DatasetManifest:
    """
    Load and validate a manifest file.

    Every violation is collected and reported together, each naming its
    entry index (0-based, header excluded) and line number.

    Raises:
        ValidationError: on parse errors, schema violations or out-of-bounds annotations
    """
    path = Path(path)
    records = []
    errors = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    records.append((line_number, json.loads(line)))
                except json.JSONDecodeError as e:
                    errors.append(f"line {line_number}: invalid JSON ({e.msg})")
    except OSError as e:
        raise ValidationError(f"{path}: cannot read manifest ({e.strerror or e})") from e
    except UnicodeDecodeError as e:
        raise ValidationError(f"{path}: manifest is not valid UTF-8 ({e.reason} at byte {e.start})") from e
    if errors:
        raise ValidationError([f"{path}: {e}" for e in errors])
    if not records:
        raise ValidationError(f"{path}: manifest is empty")

    _, header = records[0]
    errors.extend(_schema_errors(_header_validator, header, "header"))

    entries = []
    seen = {}
    for index, (line_number, record) in enumerate(records[1:]):
        prefix = f"entry {index} (line {line_number})"
        entry_errors = _schema_errors(_entry_validator, record, prefix)
        if not entry_errors:
            entry_errors = _validate_entry_semantics(record, prefix)
        if not entry_errors:
            key = (record["video_id"], record["query_id"])
            if key in seen:
                entry_errors = [f"{prefix}: duplicate video/query pair {key}, first at entry {seen[key]}"]
            seen.setdefault(key, index)
        if entry_errors:
            errors.extend(entry_errors)
            continue
        entries.append(ManifestEntry(
            video_id=record["video_id"],
            feature_path=record["feature_path"],
            duration=float(record["duration"]),
            query_id=record["query_id"],
            query=record["query"],
            tau_s=float(record["tau_s"]),
            tau_e=float(record["tau_e"]),
            periods=tuple(tuple(p) for p in record["periods"]) if "periods" in record else None,
        ))

    if errors:
        raise ValidationError([f"{path}: {e}" for e in errors])
    if not entries:
        raise ValidationError(f"{path}: manifest has no entries")

    manifest = DatasetManifest(entries=entries, split_name=header["split"], root=str(path.parent))
    logger.info("Loaded manifest %s: split=%s, %d entries", path, manifest.split_name, len(manifest))
    return manifest


def write_manifest(path, split_name, entries) -> None:
    """Write *entries* (ManifestEntry objects) to a manifest file."""
    records = [{"manifest_version": MANIFEST_VERSION, "split": split_name}]
    for entry in entries:
        record = {
            "video_id": entry.video_id,
            "feature_path": entry.feature_path,
            "duration": entry.duration,
            "query_id": entry.query_id,
            "query": entry.query,
            "tau_s": entry.tau_s,
            "tau_e": entry.tau_e,
        }
        if entry.periods is not None:
            record["periods"] = [list(p) for p in entry.periods]
        records.append(record)
    write_jsonl(path, records)
