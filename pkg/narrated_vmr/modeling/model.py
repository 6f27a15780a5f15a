"""
The full grounding model: video-query branch, paragraph-query branch and fusion.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Optional

from torch import Tensor, nn

from narrated_vmr.config.types import EncoderConfig, FusionConfig
from narrated_vmr.modeling.layers import AttnBlock, EnhancedPair, GuidedAggregation, MergeLayer, apply_mask
from narrated_vmr.modeling.paragraph_branch import ParagraphQueryBranch, fuse
from narrated_vmr.modeling.predictor import SpanDistributions, SpanPredictor

logger = logging.getLogger(__name__)


@dataclass
class ModelOutput:
    video: SpanDistributions
    paragraph: Optional[SpanDistributions]
    start_scores: Tensor
    end_scores: Tensor


class VideoQueryBranch(nn.Module):
    """Merge, guided aggregation, self/cross attention and span prediction on video features."""

    def __init__(self, video_dim: int, narrative_dim: int, word_dim: int, encoder: EncoderConfig):
        super().__init__()
        d, heads, dropout, layer_norm = encoder.d, encoder.heads, encoder.dropout, encoder.layer_norm
        self.merge = MergeLayer(
            video_dim, narrative_dim, d,
            merge_mode=encoder.merge_mode,
            heads=heads,
            dropout=dropout,
            layer_norm=layer_norm,
            narrative_merge=encoder.narrative_merge,
        )
        self.query_proj = nn.Linear(word_dim, d)
        self.aggregation = GuidedAggregation()
        self.block = AttnBlock(d, heads, dropout, layer_norm)
        self.predictor = SpanPredictor(d, dropout)

    def enhance(self, video: Tensor, paragraph: Tensor, query: Tensor, v_mask: Tensor, q_mask: Tensor) -> EnhancedPair:
        merged = self.merge(video, paragraph, v_mask)
        aggregated = self.aggregation(merged, v_mask)
        q = apply_mask(self.query_proj(query), q_mask)
        return self.block(aggregated, q, v_mask, q_mask)

    def forward(self, video, paragraph, query, v_mask, q_mask) -> SpanDistributions:
        pair = self.enhance(video, paragraph, query, v_mask, q_mask)
        return self.predictor(pair.v_e, pair.q_e, v_mask, q_mask)


class NarratedGroundingModel(nn.Module):
    """
    Predict moment endpoints from snippet features, the aligned paragraph and the query.

    Args:
        dims: ``{"video_dim", "narrative_dim", "word_dim"}`` input sizes
        encoder: hidden size, heads, dropout and merge variant
        fusion: alpha and the paragraph-branch toggle
    """

    def __init__(self, dims: dict, encoder: EncoderConfig = None, fusion: FusionConfig = None):
        super().__init__()
        self.dims = dict(dims)
        self.encoder_config = encoder or EncoderConfig()
        self.fusion_config = fusion or FusionConfig()
        self.alpha = self.fusion_config.alpha

        self.video_branch = VideoQueryBranch(
            self.dims["video_dim"], self.dims["narrative_dim"], self.dims["word_dim"], self.encoder_config
        )
        self.paragraph_branch = None
        if self.fusion_config.paragraph_branch:
            self.paragraph_branch = ParagraphQueryBranch(
                self.dims["narrative_dim"],
                self.dims["word_dim"],
                self.encoder_config.d,
                self.encoder_config.heads,
                self.encoder_config.dropout,
                self.encoder_config.layer_norm,
            )
        logger.debug(
            "Built model: %s, paragraph_branch=%s, %d parameters",
            asdict(self.encoder_config), self.paragraph_branch is not None,
            sum(p.numel() for p in self.parameters()),
        )

    @property
    def effective_alpha(self) -> float:
        """Alpha actually applied; 0 without a paragraph branch."""
        return self.alpha if self.paragraph_branch is not None else 0.0

    def forward(self, batch, alpha: float = None) -> ModelOutput:
        """
        Run both branches on a collated batch and fuse their scores.

        Args:
            batch: object with ``video``, ``video_mask``, ``paragraph``, ``query`` and ``query_mask`` tensors
            alpha: overrides the configured alpha for this call
        """
        alpha = self.alpha if alpha is None else alpha
        video = self.video_branch(batch.video, batch.paragraph, batch.query, batch.video_mask, batch.query_mask)
        paragraph = None
        if self.paragraph_branch is not None:
            paragraph = self.paragraph_branch(batch.paragraph, batch.query, batch.video_mask, batch.query_mask)
        start_scores, end_scores = fuse(video, paragraph, alpha)
        return ModelOutput(video=video, paragraph=paragraph, start_scores=start_scores, end_scores=end_scores)
