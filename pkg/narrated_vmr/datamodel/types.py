"""
Canonical domain types shared by every stage of the pipeline.

All types are frozen; array fields are marked read-only on construction so
instances can be shared across threads.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from narrated_vmr.exceptions import ShapeError, ValidationError

SPLIT_NAMES = (
    "train",
    "val",
    "cd-test-ood",
    "cg-novel-word",
    "cg-novel-composition",
    "iid-test",
)

# Tolerance used when checking that periods tile [0, duration].
PERIOD_TOLERANCE = 1e-6


def _frozen_array(array, dtype=None):
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def validate_periods(periods, duration) -> list[str]:
    """
    Check that *periods* are sorted, contiguous and cover ``[0, duration]``.

    Returns:
        list of error messages (empty when valid)
    """
    errors = []
    if not periods:
        return ["periods must not be empty"]
    if abs(periods[0][0]) > PERIOD_TOLERANCE:
        errors.append(f"first period starts at {periods[0][0]}, expected 0")
    if abs(periods[-1][1] - duration) > PERIOD_TOLERANCE:
        errors.append(f"last period ends at {periods[-1][1]}, expected duration {duration}")
    for i, (start, end) in enumerate(periods):
        if not end > start:
            errors.append(f"period {i} is empty or reversed: ({start}, {end})")
        if i > 0 and abs(start - periods[i - 1][1]) > PERIOD_TOLERANCE:
            errors.append(f"period {i} does not start where period {i - 1} ends")
    return errors


@dataclass(frozen=True)
class VideoFeatureSequence:
    """
    Snippet feature matrix of one video on the fixed-length grid.

    ``periods`` holds one ``(start, end)`` pair per real snippet; padded rows
    have no period, are all-zero and carry ``mask == False``.
    """

    video_id: str
    snippets: np.ndarray
    periods: tuple
    mask: np.ndarray
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "snippets", _frozen_array(self.snippets, np.float32))
        object.__setattr__(self, "mask", _frozen_array(self.mask, bool))
        object.__setattr__(self, "periods", tuple((float(s), float(e)) for s, e in self.periods))

        errors = []
        if self.snippets.ndim != 2:
            raise ShapeError(f"snippets must be a matrix, got shape {self.snippets.shape}")
        if self.mask.shape != (self.snippets.shape[0],):
            raise ShapeError(f"mask shape {self.mask.shape} does not match {self.snippets.shape[0]} rows")
        n_real = int(self.mask.sum())
        if not self.mask[:n_real].all():
            errors.append("mask must be a prefix of True values")
        if len(self.periods) != n_real:
            errors.append(f"{len(self.periods)} periods for {n_real} real snippets")
        if np.any(self.snippets[~self.mask] != 0):
            errors.append("masked-out snippet rows must be zero")
        errors.extend(validate_periods(self.periods, self.duration))
        if errors:
            raise ValidationError([f"video '{self.video_id}': {e}" for e in errors])

    @property
    def length(self) -> int:
        """Row count of the grid, padding included."""
        return self.snippets.shape[0]

    @property
    def n_real(self) -> int:
        """Number of real (unpadded) snippets."""
        return len(self.periods)

    @property
    def feature_dim(self) -> int:
        return self.snippets.shape[1]


@dataclass(frozen=True)
class Query:
    """Tokenized query sentence with word-level embeddings."""

    query_id: str
    tokens: tuple
    embeddings: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "embeddings", _frozen_array(self.embeddings, np.float32))
        object.__setattr__(self, "mask", _frozen_array(self.mask, bool))
        if not self.tokens:
            raise ValidationError(f"query '{self.query_id}' has no tokens")
        if self.embeddings.ndim != 2 or self.embeddings.shape[0] != self.mask.shape[0]:
            raise ShapeError(
                f"query '{self.query_id}': embeddings {self.embeddings.shape} do not match mask {self.mask.shape}"
            )
        if np.any(self.embeddings[~self.mask] != 0):
            raise ValidationError(f"query '{self.query_id}': padding embedding rows must be zero")


@dataclass(frozen=True)
class MomentAnnotation:
    """
    Ground-truth moment in seconds plus its snippet-index view.
    """

    tau_s: float
    tau_e: float
    start_idx: int
    end_idx: int
    candidate_starts: frozenset = field(default_factory=frozenset)
    candidate_ends: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "candidate_starts", frozenset(self.candidate_starts) or frozenset({self.start_idx}))
        object.__setattr__(self, "candidate_ends", frozenset(self.candidate_ends) or frozenset({self.end_idx}))
        errors = []
        if not 0 <= self.tau_s < self.tau_e:
            errors.append(f"annotation requires 0 <= tau_s < tau_e, got ({self.tau_s}, {self.tau_e})")
        if self.start_idx > self.end_idx:
            errors.append(f"start_idx {self.start_idx} > end_idx {self.end_idx}")
        if self.start_idx not in self.candidate_starts:
            errors.append("start_idx must be a candidate start")
        if self.end_idx not in self.candidate_ends:
            errors.append("end_idx must be a candidate end")
        if errors:
            raise ValidationError(errors)


@dataclass(frozen=True)
class ManifestEntry:
    """One video-query pair listed in a dataset manifest."""

    video_id: str
    feature_path: str
    duration: float
    query_id: str
    query: str
    tau_s: float
    tau_e: float
    periods: Optional[tuple] = None

    @property
    def key(self) -> tuple:
        return (self.video_id, self.query_id)


@dataclass(frozen=True)
class DatasetManifest:
    """Entries of one dataset split."""

    entries: tuple
    split_name: str
    root: str = "."

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise ValidationError(f"manifest for split '{self.split_name}' has no entries")
        if self.split_name not in SPLIT_NAMES:
            raise ValidationError(f"unknown split '{self.split_name}', expected one of {', '.join(SPLIT_NAMES)}")

    def __len__(self):
        return len(self.entries)

    def video_ids(self) -> list[str]:
        """Distinct video ids in first-seen order."""
        return list(dict.fromkeys(entry.video_id for entry in self.entries))
