"""
Training losses: log-mass endpoint loss and highlight cross-entropy.

Inputs are batched ``[B, L]`` tensors; both losses average over the batch.
"""

import torch
from torch import Tensor

from narrated_vmr.exceptions import ValidationError

EPS = 1e-12


def vmr_loss(p_start: Tensor, p_end: Tensor, candidate_starts: Tensor, candidate_ends: Tensor) -> Tensor:
    """
    ``-log(sum of p_start over candidate starts) - log(sum of p_end over candidate ends)``.

    Args:
        candidate_starts: boolean ``[B, L]`` membership of each candidate set
        candidate_ends: same for ends
    """
    if not candidate_starts.any(dim=-1).all() or not candidate_ends.any(dim=-1).all():
        raise ValidationError("candidate endpoint sets must not be empty")
    start_mass = (p_start * candidate_starts.to(p_start.dtype)).sum(dim=-1)
    end_mass = (p_end * candidate_ends.to(p_end.dtype)).sum(dim=-1)
    loss = -torch.log(start_mass.clamp(min=EPS)) - torch.log(end_mass.clamp(min=EPS))
    return loss.mean()


def highlight_loss(h: Tensor, labels: Tensor, mask: Tensor) -> Tensor:
    """Mean binary cross-entropy over real snippets, padded snippets excluded."""
    weights = mask.to(h.dtype)
    labels = labels.to(h.dtype)
    bce = -(labels * torch.log(h.clamp(min=EPS)) + (1 - labels) * torch.log((1 - h).clamp(min=EPS)))
    per_sample = (bce * weights).sum(dim=-1) / weights.sum(dim=-1).clamp(min=1)
    return per_sample.mean()


def total_loss(vmr: Tensor, highlight: Tensor, lambda_h: float) -> Tensor:
    return vmr + lambda_h * highlight


def model_loss(output, batch, lambda_h: float, alpha: float, separate_branch_losses: bool = False) -> dict:
    """
    Loss of a model output against a collated batch.

    The endpoint loss is taken on the fused scores scaled by ``1 / (1 + alpha)``
    so each fused vector sums to 1 again, or on each branch separately when
    *separate_branch_losses* is set. The highlight loss covers every branch
    that ran.

    Returns:
        dict with ``total``, ``vmr`` and ``highlight`` tensors
    """
    targets = (batch.candidate_starts, batch.candidate_ends)
    if separate_branch_losses and output.paragraph is not None:
        vmr = vmr_loss(output.video.p_start, output.video.p_end, *targets)
        vmr = vmr + vmr_loss(output.paragraph.p_start, output.paragraph.p_end, *targets)
    else:
        scale = 1.0 + (alpha if output.paragraph is not None else 0.0)
        vmr = vmr_loss(output.start_scores / scale, output.end_scores / scale, *targets)

    highlight = highlight_loss(output.video.highlight, batch.highlight_labels, batch.video_mask)
    if output.paragraph is not None:
        highlight = highlight + highlight_loss(output.paragraph.highlight, batch.highlight_labels, batch.video_mask)

    return {"total": total_loss(vmr, highlight, lambda_h), "vmr": vmr, "highlight": highlight}
