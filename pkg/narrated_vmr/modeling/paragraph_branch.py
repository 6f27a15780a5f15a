"""
Paragraph-query branch and alpha-weighted score fusion.
"""

import logging

from torch import Tensor, nn

from narrated_vmr.exceptions import RangeError, ShapeError
from narrated_vmr.modeling.layers import AttnBlock, EnhancedPair, apply_mask
from narrated_vmr.modeling.predictor import SpanDistributions, SpanPredictor

logger = logging.getLogger(__name__)


class ParagraphQueryBranch(nn.Module):
    """
    Predict endpoints from the aligned paragraph and the query alone.

    Holds its own projections, attention block and predictor; nothing is
    shared with the video branch.
    """

    def __init__(self, narrative_dim: int, word_dim: int, d: int, heads: int = 1, dropout: float = 0.0,
                 layer_norm: bool = True):
        super().__init__()
        self.paragraph_proj = nn.Linear(narrative_dim, d)
        self.query_proj = nn.Linear(word_dim, d)
        self.block = AttnBlock(d, heads, dropout, layer_norm)
        self.predictor = SpanPredictor(d, dropout)

    def attend(self, c: Tensor, q: Tensor, c_mask: Tensor, q_mask: Tensor) -> EnhancedPair:
        """Self and cross attention between projected paragraph and query."""
        c = apply_mask(self.paragraph_proj(c), c_mask)
        q = apply_mask(self.query_proj(q), q_mask)
        return self.block(c, q, c_mask, q_mask)

    def predict(self, c: Tensor, q: Tensor, c_mask: Tensor, q_mask: Tensor) -> SpanDistributions:
        return self.predictor(c, q, c_mask, q_mask)

    def forward(self, c: Tensor, q: Tensor, c_mask: Tensor, q_mask: Tensor) -> SpanDistributions:
        pair = self.attend(c, q, c_mask, q_mask)
        return self.predict(pair.v_e, pair.q_e, c_mask, q_mask)


def fuse(video_dist: SpanDistributions, para_dist: SpanDistributions, alpha: float):
    """
    ``p = p_video + alpha * p_paragraph`` for starts and ends.

    The sums are scores, not renormalized. With ``alpha == 0`` the video
    scores are returned as they are.

    Returns:
        (start_scores, end_scores)
    """
    if alpha < 0:
        raise RangeError(f"alpha must be >= 0, got {alpha}")
    if para_dist is None or alpha == 0:
        return video_dist.p_start, video_dist.p_end
    if video_dist.p_start.shape != para_dist.p_start.shape or video_dist.p_end.shape != para_dist.p_end.shape:
        raise ShapeError(
            f"branch lengths differ: video {tuple(video_dist.p_start.shape)}, "
            f"paragraph {tuple(para_dist.p_start.shape)}"
        )
    return video_dist.p_start + alpha * para_dist.p_start, video_dist.p_end + alpha * para_dist.p_end
