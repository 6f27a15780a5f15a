"""
Time to snippet-index conversion and the fixed-length snippet grid.

Snippet periods are half-open ``[start, end)``; the video's final instant
belongs to the last real snippet.
"""

import bisect
import logging

import numpy as np

from narrated_vmr.datamodel.types import VideoFeatureSequence, validate_periods
from narrated_vmr.exceptions import RangeError, ShapeError, ValidationError
from narrated_vmr.settings import settings

logger = logging.getLogger(__name__)


def uniform_periods(n: int, duration: float) -> list[tuple[float, float]]:
    """Split ``[0, duration]`` into *n* equal contiguous periods."""
    bounds = np.linspace(0.0, float(duration), n + 1)
    return [(float(bounds[i]), float(bounds[i + 1])) for i in range(n)]


def seconds_to_snippet_index(t: float, periods) -> int:
    """
    Return the index of the snippet whose period contains *t*.

    Raises:
        RangeError: if *t* lies outside ``[0, duration]``
    """
    if not periods:
        raise ValidationError("periods must not be empty")
    duration = periods[-1][1]
    if t < periods[0][0] or t > duration:
        raise RangeError(f"t={t} outside [{periods[0][0]}, {duration}]")
    starts = [start for start, _ in periods]
    return min(bisect.bisect_right(starts, t) - 1, len(periods) - 1)


def build_snippet_grid(
    raw_features,
    duration: float,
    periods=None,
    max_snippets: int = None,
    video_id: str = "",
) -> VideoFeatureSequence:
    """
    Put raw snippet features on the fixed-length grid.

    Longer inputs are max-pooled over consecutive groups down to exactly
    *max_snippets* rows; shorter ones are zero-padded with ``mask == False``.

    Args:
        raw_features: array ``[N, d_v]``
        duration: video duration in seconds
        periods: optional ``(start, end)`` per raw row; uniform when omitted
        max_snippets: grid length, ``settings.MAX_SNIPPETS`` by default
        video_id: carried into the resulting sequence
    """
    max_snippets = max_snippets or settings.MAX_SNIPPETS
    raw = np.asarray(raw_features, dtype=np.float32)
    if raw.ndim != 2:
        raise ShapeError(f"raw features must be a matrix, got shape {raw.shape}")
    n_raw, feature_dim = raw.shape
    if n_raw == 0:
        raise ValidationError(f"video '{video_id}' has no snippet features")

    if periods is None:
        periods = uniform_periods(n_raw, duration)
    else:
        periods = [(float(s), float(e)) for s, e in periods]
        if len(periods) != n_raw:
            raise ShapeError(f"video '{video_id}': {len(periods)} periods for {n_raw} feature rows")
        errors = validate_periods(periods, duration)
        if errors:
            raise ValidationError([f"video '{video_id}': {e}" for e in errors])

    if n_raw > max_snippets:
        group_starts = (np.arange(max_snippets) * n_raw) // max_snippets
        group_ends = np.append(group_starts[1:], n_raw)
        pooled = np.maximum.reduceat(raw, group_starts, axis=0)
        periods = [(periods[s][0], periods[e - 1][1]) for s, e in zip(group_starts, group_ends)]
        logger.debug("Pooled %d raw snippets of video '%s' to %d", n_raw, video_id, max_snippets)
        raw = pooled
        n_raw = max_snippets

    snippets = np.zeros((max_snippets, feature_dim), dtype=np.float32)
    snippets[:n_raw] = raw
    mask = np.zeros(max_snippets, dtype=bool)
    mask[:n_raw] = True

    return VideoFeatureSequence(
        video_id=video_id,
        snippets=snippets,
        periods=periods,
        mask=mask,
        duration=float(duration),
    )
