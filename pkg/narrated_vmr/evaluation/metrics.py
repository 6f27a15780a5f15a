"""
Temporal IoU, IoU@m and mIoU.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from narrated_vmr.exceptions import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (0.5, 0.7)


def temporal_iou(a, b) -> float:
    """
    Intersection over union of two ``(start, end)`` intervals in seconds.

    Raises:
        ValidationError: if either interval has ``start >= end``
    """
    (a_s, a_e), (b_s, b_e) = a, b
    if not a_s < a_e or not b_s < b_e:
        raise ValidationError(f"degenerate interval in IoU: {tuple(a)} vs {tuple(b)}")
    intersection = max(0.0, min(a_e, b_e) - max(a_s, b_s))
    union = (a_e - a_s) + (b_e - b_s) - intersection
    return intersection / union


@dataclass(frozen=True)
class Prediction:
    """Top-1 predicted moment of one video-query pair."""

    video_id: str
    query_id: str
    tau_s: float
    tau_e: float
    start_idx: int = -1
    end_idx: int = -1
    branch_scores: dict = field(default_factory=dict, compare=False)

    @property
    def key(self) -> tuple:
        return (self.video_id, self.query_id)

    def as_record(self) -> dict:
        return {
            "video_id": self.video_id,
            "query_id": self.query_id,
            "tau_s": self.tau_s,
            "tau_e": self.tau_e,
            "start_idx": self.start_idx,
            "end_idx": self.end_idx,
            "branch_scores": self.branch_scores,
        }


@dataclass(frozen=True)
class EvalReport:
    """
    Metrics of one split.

    Percentages are in ``[0, 100]`` at full precision; ``per_sample`` holds
    ``((video_id, query_id), iou)`` pairs in annotation order.
    """

    split_name: str
    iou_at: dict
    miou: float
    n: int
    per_sample: tuple = ()

    def as_record(self) -> dict:
        return {
            "split": self.split_name,
            "iou_at": {str(m): value for m, value in self.iou_at.items()},
            "miou": self.miou,
            "n": self.n,
            "per_sample": [
                {"video_id": video_id, "query_id": query_id, "iou": iou}
                for (video_id, query_id), iou in self.per_sample
            ],
        }


def evaluate(predictions, annotations, thresholds=DEFAULT_THRESHOLDS, split_name: str = "") -> EvalReport:
    """
    Score predictions against ground truth.

    ``IoU@m`` counts samples with IoU strictly greater than ``m``.

    Args:
        predictions: Prediction objects
        annotations: objects with ``key``, ``tau_s`` and ``tau_e`` (e.g. ManifestEntry)
        thresholds: IoU thresholds m

    Raises:
        ValidationError: on an empty prediction set, duplicate or unmatched ids
    """
    predictions = list(predictions)
    annotations = list(annotations)
    if not predictions:
        raise ValidationError("no predictions to evaluate")

    by_key = {prediction.key: prediction for prediction in predictions}
    annotated = {annotation.key for annotation in annotations}
    errors = []
    duplicated = sorted(key for key, count in Counter(p.key for p in predictions).items() if count > 1)
    if duplicated:
        errors.append(f"duplicate predictions: {duplicated}")
    unannotated = sorted(set(by_key) - annotated)
    if unannotated:
        errors.append(f"predictions without annotation: {unannotated}")
    unpredicted = sorted(annotated - set(by_key))
    if unpredicted:
        errors.append(f"annotations without prediction: {unpredicted}")
    if errors:
        raise ValidationError(errors)

    per_sample = []
    for annotation in annotations:
        prediction = by_key[annotation.key]
        iou = temporal_iou((prediction.tau_s, prediction.tau_e), (annotation.tau_s, annotation.tau_e))
        per_sample.append((annotation.key, iou))

    ious = np.array([iou for _, iou in per_sample], dtype=np.float64)
    report = EvalReport(
        split_name=split_name,
        iou_at={m: 100.0 * float(np.count_nonzero(ious > m)) / len(ious) for m in thresholds},
        miou=100.0 * float(ious.mean()),
        n=len(ious),
        per_sample=tuple(per_sample),
    )
    logger.debug("Evaluated %d samples of split '%s': mIoU %.2f", report.n, split_name, report.miou)
    return report
