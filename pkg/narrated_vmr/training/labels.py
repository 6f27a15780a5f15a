"""
Snippet-index labels: ground-truth endpoints and their expanded candidate sets.
"""

import logging

import numpy as np

from narrated_vmr.datamodel.grid import seconds_to_snippet_index
from narrated_vmr.datamodel.types import MomentAnnotation

logger = logging.getLogger(__name__)


def span_iou_table(periods, tau_s: float, tau_e: float):
    """
    Temporal IoU of every inclusive snippet span ``(i, j)`` with ``[tau_s, tau_e]``.

    Span ``(i, j)`` covers ``[periods[i][0], periods[j][1]]`` in seconds.

    Returns:
        (starts, ends, ious) flat arrays over all spans in row-major order
    """
    bounds = np.asarray(periods, dtype=np.float64).reshape(-1, 2)
    starts, ends = np.triu_indices(len(bounds))
    span_s, span_e = bounds[starts, 0], bounds[ends, 1]
    intersection = np.maximum(0.0, np.minimum(span_e, tau_e) - np.maximum(span_s, tau_s))
    union = (span_e - span_s) + (tau_e - tau_s) - intersection
    ious = np.divide(intersection, union, out=np.zeros_like(union), where=union > 0)
    return starts, ends, ious


def expand_labels(annotation: MomentAnnotation, periods, threshold: float = 0.7):
    """
    Candidate endpoint sets from all spans overlapping the ground truth enough.

    Every snippet span is scored by the temporal IoU of the seconds it covers
    with ``(tau_s, tau_e)``; spans with IoU >= *threshold* contribute their
    start to the candidate starts and their end to the candidate ends.

    Returns:
        (candidate_starts, candidate_ends) as frozensets of snippet indices
    """
    starts, ends, ious = span_iou_table(periods, annotation.tau_s, annotation.tau_e)
    kept = ious >= threshold
    candidate_starts = frozenset(int(i) for i in np.unique(starts[kept])) | {annotation.start_idx}
    candidate_ends = frozenset(int(j) for j in np.unique(ends[kept])) | {annotation.end_idx}
    return candidate_starts, candidate_ends


def snippet_indices(tau_s: float, tau_e: float, periods) -> tuple[int, int]:
    """
    Snippets holding the moment's start and end.

    An end time falling exactly on a snippet boundary belongs to the snippet
    before it, unless that would put the end before the start.
    """
    start_idx = seconds_to_snippet_index(tau_s, periods)
    end_idx = seconds_to_snippet_index(tau_e, periods)
    if end_idx > start_idx and tau_e <= periods[end_idx][0]:
        end_idx -= 1
    return start_idx, end_idx


def build_annotation(tau_s: float, tau_e: float, periods, threshold: float = 0.7) -> MomentAnnotation:
    """MomentAnnotation with snippet indices and expanded candidate sets."""
    start_idx, end_idx = snippet_indices(tau_s, tau_e, periods)
    exact = MomentAnnotation(tau_s=tau_s, tau_e=tau_e, start_idx=start_idx, end_idx=end_idx)
    candidate_starts, candidate_ends = expand_labels(exact, periods, threshold)
    return MomentAnnotation(
        tau_s=tau_s,
        tau_e=tau_e,
        start_idx=start_idx,
        end_idx=end_idx,
        candidate_starts=candidate_starts,
        candidate_ends=candidate_ends,
    )


def highlight_labels(candidate_starts, candidate_ends, length: int) -> np.ndarray:
    """Indicator of ``min(candidate_starts) <= i <= max(candidate_ends)`` over *length* snippets."""
    indices = np.arange(length)
    return ((indices >= min(candidate_starts)) & (indices <= max(candidate_ends))).astype(np.float32)
