"""
Utility functions for narrated_vmr.
"""

import hashlib
import json
import random
from pathlib import Path

import numpy as np
import torch

from narrated_vmr import __version__


def canonical_json(data) -> str:
    """
    Serialize *data* with sorted keys and compact separators.

    Every JSONL record and every fingerprint in this package goes through here,
    so identical data always produces identical bytes.
    """
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def fingerprint(data) -> str:
    """Return the SHA-256 hex digest of the canonical JSON of *data*."""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def read_jsonl(path):
    """
    Read a line-delimited JSON file.

    Returns:
        list of (line_number, record) tuples; blank lines are skipped.
    """
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            records.append((line_number, json.loads(line)))
    return records


def write_jsonl(path, records, append=False):
    """Write *records* to *path*, one canonical JSON object per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a" if append else "w", encoding="utf-8") as f:
        for record in records:
            f.write(canonical_json(record) + "\n")


def seed_everything(seed: int) -> None:
    """Seed Python, NumPy and torch RNGs."""
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


def artifact_stamp(config_fingerprint: str, seed: int) -> dict:
    """
    Return the provenance fields embedded in every emitted artifact.
    """
    return {
        "config_fingerprint": config_fingerprint,
        "seed": seed,
        "code_version": __version__,
    }


TIMESTAMP_DIGITS = 6


def round_timestamp(timestamp: float) -> float:
    """Round seconds to the precision used as a lookup key for frames."""
    return round(float(timestamp), TIMESTAMP_DIGITS)
