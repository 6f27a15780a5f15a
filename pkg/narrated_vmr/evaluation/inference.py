"""
Running a model over a dataset and decoding its branch scores into moments.

Branch distributions are kept per sample so any alpha can be applied later
without running the model again.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch
from torch.utils.data import DataLoader

from narrated_vmr.datamodel.dataset import collate_batch
from narrated_vmr.evaluation.metrics import Prediction
from narrated_vmr.modeling.paragraph_branch import fuse
from narrated_vmr.modeling.predictor import SpanDistributions, decode_span, snippet_span_to_seconds

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BranchScores:
    """Real-snippet endpoint distributions of both branches for one sample."""

    video_id: str
    query_id: str
    periods: tuple
    video: SpanDistributions
    paragraph: Optional[SpanDistributions]

    @property
    def key(self) -> tuple:
        return (self.video_id, self.query_id)


def _to_numpy(dist: SpanDistributions, b: int, n_real: int) -> SpanDistributions:
    return SpanDistributions(
        p_start=dist.p_start[b, :n_real].double().numpy(),
        p_end=dist.p_end[b, :n_real].double().numpy(),
        highlight=dist.highlight[b, :n_real].double().numpy(),
    )


@torch.no_grad()
def branch_scores(model, dataset, batch_size: int = 32) -> list[BranchScores]:
    """Evaluate *model* on every sample of *dataset* in order, with dropout off."""
    was_training = model.training
    model.eval()
    dtype = next(model.parameters()).dtype
    scores = []
    for batch in DataLoader(dataset, batch_size=batch_size, shuffle=False, collate_fn=collate_batch):
        output = model(batch.to(dtype=dtype))
        for b, sample in enumerate(batch.samples):
            n_real = sample.video.n_real
            scores.append(BranchScores(
                video_id=sample.entry.video_id,
                query_id=sample.entry.query_id,
                periods=sample.video.periods,
                video=_to_numpy(output.video, b, n_real),
                paragraph=_to_numpy(output.paragraph, b, n_real) if output.paragraph is not None else None,
            ))
    model.train(was_training)
    return scores


def decode_predictions(scores, alpha: float) -> list[Prediction]:
    """Fuse each sample's branch scores with *alpha* and decode the top span."""
    predictions = []
    for sample in scores:
        p_start, p_end = fuse(sample.video, sample.paragraph, alpha)
        start_idx, end_idx = decode_span(p_start, p_end)
        tau_s, tau_e = snippet_span_to_seconds(start_idx, end_idx, sample.periods)
        branch = {"video": [float(sample.video.p_start[start_idx]), float(sample.video.p_end[end_idx])]}
        if sample.paragraph is not None:
            branch["paragraph"] = [float(sample.paragraph.p_start[start_idx]), float(sample.paragraph.p_end[end_idx])]
        branch["fused"] = [float(np.asarray(p_start)[start_idx]), float(np.asarray(p_end)[end_idx])]
        predictions.append(Prediction(
            video_id=sample.video_id,
            query_id=sample.query_id,
            tau_s=tau_s,
            tau_e=tau_e,
            start_idx=start_idx,
            end_idx=end_idx,
            branch_scores=branch,
        ))
    return predictions


def predict(model, dataset, alpha: float = None, batch_size: int = 32) -> list[Prediction]:
    """Top-1 moment for every sample; *alpha* defaults to the model's."""
    alpha = model.effective_alpha if alpha is None else alpha
    return decode_predictions(branch_scores(model, dataset, batch_size), alpha)
