"""
Encoder building blocks: the four-FC attention unit, video-narrative merging,
guided aggregation and the self/cross attention block.

Tensors are batch-first: sequences are ``[B, L, d]`` with boolean masks
``[B, L]`` (True = real position). Every layer returns zeros at masked rows.
"""

import logging
import math
from dataclasses import dataclass

import torch
from torch import Tensor, nn

from narrated_vmr.exceptions import ShapeError, ValidationError

logger = logging.getLogger(__name__)


def apply_mask(x: Tensor, mask: Tensor) -> Tensor:
    """Zero the rows of ``x [B, L, ...]`` where ``mask [B, L]`` is False."""
    return x * mask.reshape(*mask.shape, *([1] * (x.dim() - mask.dim()))).to(x.dtype)


def masked_softmax(scores: Tensor, mask: Tensor, dim: int = -1) -> Tensor:
    """
    Softmax over *dim* with masked positions excluded.

    Masked positions get exactly zero weight; a slice with no unmasked
    position comes out all-zero instead of NaN.
    """
    mask = mask.to(torch.bool)
    scores = scores.masked_fill(~mask, torch.finfo(scores.dtype).min)
    return torch.softmax(scores, dim=dim) * mask.to(scores.dtype)


def _check_hidden(name: str, x: Tensor, d: int) -> None:
    if x.dim() != 3 or x.shape[-1] != d:
        raise ShapeError(f"{name} must be [B, L, {d}], got {tuple(x.shape)}")


class AttentionUnit(nn.Module):
    """
    Target attends reference through four independent FC layers.

    ``out = fc_o(target + R @ fc_v(reference))`` with
    ``R = softmax(fc_q(target) @ fc_k(reference).T / sqrt(d_head))`` per head,
    then layer norm (optional) and dropout. A target row whose reference is
    fully masked receives ``fc_o(target)``.
    """

    def __init__(self, d: int, heads: int = 1, dropout: float = 0.0, layer_norm: bool = True):
        super().__init__()
        if d % heads:
            raise ValidationError(f"hidden size {d} is not divisible by {heads} heads")
        self.d = d
        self.heads = heads
        self.d_head = d // heads
        self.fc_q = nn.Linear(d, d)
        self.fc_k = nn.Linear(d, d)
        self.fc_v = nn.Linear(d, d)
        self.fc_o = nn.Linear(d, d)
        self.layer_norm = nn.LayerNorm(d) if layer_norm else nn.Identity()
        self.dropout = nn.Dropout(dropout)

    def _split_heads(self, x: Tensor) -> Tensor:
        batch, length, _ = x.shape
        return x.view(batch, length, self.heads, self.d_head).transpose(1, 2)

    def attention_weights(self, target: Tensor, reference: Tensor, reference_mask: Tensor) -> Tensor:
        """Attention weights ``[B, heads, L_t, L_r]``; rows sum to 1 over unmasked reference positions."""
        q = self._split_heads(self.fc_q(target))
        k = self._split_heads(self.fc_k(reference))
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.d_head)
        return masked_softmax(scores, reference_mask[:, None, None, :])

    def forward(self, target: Tensor, reference: Tensor, target_mask: Tensor, reference_mask: Tensor) -> Tensor:
        _check_hidden("target", target, self.d)
        _check_hidden("reference", reference, self.d)
        if target.shape[0] != reference.shape[0]:
            raise ShapeError(f"batch sizes differ: {target.shape[0]} vs {reference.shape[0]}")

        weights = self.attention_weights(target, reference, reference_mask)
        attended = weights @ self._split_heads(self.fc_v(reference))
        attended = attended.transpose(1, 2).reshape(target.shape)
        out = self.dropout(self.layer_norm(self.fc_o(target + attended)))
        return apply_mask(out, target_mask)


class MergeLayer(nn.Module):
    """
    Merge snippet features with aligned narrative embeddings into ``[B, L, d]``.

    Modes: ``concat_mlp`` (concatenate, two-layer perceptron), ``add``
    (sum of two projections) and ``attention`` (projected video attends the
    projected narratives). With ``narrative_merge=False`` the snippets are
    projected alone and the narratives are ignored.
    """

    def __init__(self, video_dim: int, narrative_dim: int, d: int, merge_mode: str = "concat_mlp",
                 heads: int = 1, dropout: float = 0.0, layer_norm: bool = True, narrative_merge: bool = True):
        super().__init__()
        self.merge_mode = merge_mode if narrative_merge else "none"
        if self.merge_mode == "concat_mlp":
            self.mlp = nn.Sequential(
                nn.Linear(video_dim + narrative_dim, d),
                nn.ReLU(),
                nn.Dropout(dropout),
                nn.Linear(d, d),
            )
        elif self.merge_mode in ("add", "attention", "none"):
            self.video_proj = nn.Linear(video_dim, d)
            if self.merge_mode != "none":
                self.narrative_proj = nn.Linear(narrative_dim, d)
            if self.merge_mode == "attention":
                self.attention = AttentionUnit(d, heads, dropout, layer_norm)
        else:
            raise ValidationError(f"unknown merge_mode '{merge_mode}'")

    def forward(self, video: Tensor, narratives: Tensor, mask: Tensor) -> Tensor:
        if video.shape[:2] != narratives.shape[:2]:
            raise ShapeError(
                f"narratives have {tuple(narratives.shape[:2])} rows, video has {tuple(video.shape[:2])}"
            )
        if self.merge_mode == "concat_mlp":
            merged = self.mlp(torch.cat([video, narratives], dim=-1))
        elif self.merge_mode == "add":
            merged = self.video_proj(video) + self.narrative_proj(narratives)
        elif self.merge_mode == "attention":
            merged = self.attention(self.video_proj(video), self.narrative_proj(narratives), mask, mask)
        else:
            merged = self.video_proj(video)
        return apply_mask(merged, mask)


def running_means(x: Tensor, mask: Tensor) -> tuple[Tensor, Tensor]:
    """
    Masked forward and backward running means along the sequence.

    Row ``t`` of the forward output is the mean of real rows ``1..t``; row
    ``t`` of the backward output is the mean of real rows ``t..L``.
    """
    weights = mask.to(x.dtype).unsqueeze(-1)
    x = x * weights
    forward_sum = torch.cumsum(x, dim=1)
    forward_count = torch.cumsum(weights, dim=1).clamp(min=1)
    backward_sum = torch.flip(torch.cumsum(torch.flip(x, [1]), dim=1), [1])
    backward_count = torch.flip(torch.cumsum(torch.flip(weights, [1]), dim=1), [1]).clamp(min=1)
    return forward_sum / forward_count, backward_sum / backward_count


class GuidedAggregation(nn.Module):
    """
    Mix each row with its forward and backward running means.

    The three ``[L, d]`` maps are stacked as channels and reduced by a 1x1
    convolution to one channel.
    """

    def __init__(self):
        super().__init__()
        self.conv = nn.Conv2d(3, 1, kernel_size=1)
        nn.init.zeros_(self.conv.bias)

    def forward(self, x: Tensor, mask: Tensor) -> Tensor:
        forward_mean, backward_mean = running_means(x, mask)
        channels = torch.stack([x, forward_mean, backward_mean], dim=1)
        return apply_mask(self.conv(channels).squeeze(1), mask)


@dataclass
class EnhancedPair:
    """Knowledge-enhanced video and query features."""

    v_e: Tensor
    q_e: Tensor


class AttnBlock(nn.Module):
    """
    Self and cross attention between a video-like and a query sequence.

    Applied in order: ``v <- A(v, v)``, ``v <- A(v, q)``, ``q <- A(q, q)``,
    ``q <- A(q, v)``; the last step sees the updated ``v``.
    """

    def __init__(self, d: int, heads: int = 1, dropout: float = 0.0, layer_norm: bool = True):
        super().__init__()
        self.video_self = AttentionUnit(d, heads, dropout, layer_norm)
        self.video_cross = AttentionUnit(d, heads, dropout, layer_norm)
        self.query_self = AttentionUnit(d, heads, dropout, layer_norm)
        self.query_cross = AttentionUnit(d, heads, dropout, layer_norm)

    def forward(self, v: Tensor, q: Tensor, v_mask: Tensor, q_mask: Tensor) -> EnhancedPair:
        if v.shape[0] != q.shape[0] or v.shape[-1] != q.shape[-1]:
            raise ShapeError(f"video {tuple(v.shape)} and query {tuple(q.shape)} do not share batch and hidden size")
        v = self.video_self(v, v, v_mask, v_mask)
        v = self.video_cross(v, q, v_mask, q_mask)
        q = self.query_self(q, q, q_mask, q_mask)
        q = self.query_cross(q, v, q_mask, v_mask)
        return EnhancedPair(v_e=v, q_e=q)
