"""
Torch modules of the grounding model.
"""

from narrated_vmr.modeling.checkpoint import load_checkpoint, model_from_checkpoint, save_checkpoint
from narrated_vmr.modeling.gradcheck import GradientSample, check_gradients, parameter_fingerprint
from narrated_vmr.modeling.layers import (
    AttentionUnit,
    AttnBlock,
    EnhancedPair,
    GuidedAggregation,
    MergeLayer,
    masked_softmax,
    running_means,
)
from narrated_vmr.modeling.model import ModelOutput, NarratedGroundingModel
from narrated_vmr.modeling.paragraph_branch import ParagraphQueryBranch, fuse
from narrated_vmr.modeling.predictor import (
    ContextQueryAttention,
    Highlighter,
    SentencePool,
    SpanDistributions,
    SpanPredictor,
    SpanScorer,
    decode_span,
    snippet_span_to_seconds,
)

__all__ = [
    "AttentionUnit",
    "AttnBlock",
    "ContextQueryAttention",
    "EnhancedPair",
    "GradientSample",
    "GuidedAggregation",
    "Highlighter",
    "MergeLayer",
    "ModelOutput",
    "NarratedGroundingModel",
    "ParagraphQueryBranch",
    "SentencePool",
    "SpanDistributions",
    "SpanPredictor",
    "SpanScorer",
    "check_gradients",
    "decode_span",
    "fuse",
    "load_checkpoint",
    "masked_softmax",
    "model_from_checkpoint",
    "parameter_fingerprint",
    "running_means",
    "save_checkpoint",
    "snippet_span_to_seconds",
]
