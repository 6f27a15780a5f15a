"""
Span-based endpoint prediction.

Context-query attention fuses the query into every snippet, a highlighter
scores query relevance per snippet, and a bidirectional LSTM turns the
highlighted sequence into independent start and end distributions.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import Tensor, nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from narrated_vmr.exceptions import RangeError, ShapeError, ValidationError
from narrated_vmr.modeling.layers import apply_mask, masked_softmax

logger = logging.getLogger(__name__)


@dataclass
class SpanDistributions:
    """
    Per-snippet endpoint probabilities and highlight scores, each ``[B, L]``.

    ``p_start`` and ``p_end`` sum to 1 over real snippets; masked snippets
    carry exactly zero probability and zero highlight.
    """

    p_start: Tensor
    p_end: Tensor
    highlight: Tensor

    def detach(self) -> "SpanDistributions":
        return SpanDistributions(self.p_start.detach(), self.p_end.detach(), self.highlight.detach())


class SentencePool(nn.Module):
    """Attention-pool word features into one sentence vector."""

    def __init__(self, d: int):
        super().__init__()
        self.score = nn.Linear(d, 1)

    def weights(self, q: Tensor, mask: Tensor) -> Tensor:
        if not mask.any(dim=1).all():
            raise ValidationError("every query needs at least one unmasked word")
        return masked_softmax(self.score(q).squeeze(-1), mask)

    def forward(self, q: Tensor, mask: Tensor) -> Tensor:
        return (self.weights(q, mask).unsqueeze(-1) * q).sum(dim=1)


class ContextQueryAttention(nn.Module):
    """
    ``fc([V, X_v2q, V * X_v2q, V * X_q2v])`` with row/column softmaxed similarity.

    ``X_v2q = R_r @ Q`` and ``X_q2v = R_r @ R_c.T @ V``, where ``R_r`` is
    softmaxed over query words and ``R_c`` over snippets.
    """

    def __init__(self, d: int, dropout: float = 0.0):
        super().__init__()
        self.d = d
        self.fc_video = nn.Linear(d, d)
        self.fc_query = nn.Linear(d, d)
        self.fc_out = nn.Linear(4 * d, d)
        self.dropout = nn.Dropout(dropout)

    def similarity(self, v: Tensor, q: Tensor) -> Tensor:
        return self.fc_video(v) @ self.fc_query(q).transpose(1, 2) / math.sqrt(self.d)

    def forward(self, v: Tensor, q: Tensor, v_mask: Tensor, q_mask: Tensor) -> Tensor:
        if v.shape[0] != q.shape[0] or v.shape[-1] != self.d or q.shape[-1] != self.d:
            raise ShapeError(f"video {tuple(v.shape)} and query {tuple(q.shape)} must be [B, L, {self.d}]")
        scores = self.similarity(v, q)
        row_weights = masked_softmax(scores, q_mask[:, None, :], dim=2)
        col_weights = masked_softmax(scores, v_mask[:, :, None], dim=1)
        v2q = row_weights @ q
        q2v = row_weights @ col_weights.transpose(1, 2) @ v
        out = self.fc_out(self.dropout(torch.cat([v, v2q, v * v2q, v * q2v], dim=-1)))
        return apply_mask(out, v_mask)


class Highlighter(nn.Module):
    """``sigmoid(Conv1d([V, q]))`` per snippet; zero at masked snippets."""

    def __init__(self, d: int):
        super().__init__()
        self.conv = nn.Conv1d(2 * d, 1, kernel_size=1)

    def forward(self, v: Tensor, sentence: Tensor, mask: Tensor) -> Tensor:
        features = torch.cat([v, sentence.unsqueeze(1).expand_as(v)], dim=-1)
        logits = self.conv(features.transpose(1, 2)).squeeze(1)
        return torch.sigmoid(logits) * mask.to(logits.dtype)


class SpanScorer(nn.Module):
    """Bidirectional LSTM over highlighted snippets, two logits per snippet."""

    def __init__(self, d: int):
        super().__init__()
        self.lstm = nn.LSTM(d, d, num_layers=1, batch_first=True, bidirectional=True)
        self.fc = nn.Linear(2 * d, 2)

    def logits(self, v: Tensor, highlight: Tensor, mask: Tensor) -> tuple[Tensor, Tensor]:
        x = v * highlight.unsqueeze(-1)
        lengths = mask.sum(dim=1).cpu()
        packed = pack_padded_sequence(x, lengths, batch_first=True, enforce_sorted=False)
        hidden, _ = pad_packed_sequence(self.lstm(packed)[0], batch_first=True, total_length=x.shape[1])
        start_logits, end_logits = self.fc(hidden).unbind(dim=-1)
        return start_logits, end_logits

    def forward(self, v: Tensor, highlight: Tensor, mask: Tensor) -> SpanDistributions:
        start_logits, end_logits = self.logits(v, highlight, mask)
        return SpanDistributions(
            p_start=endpoint_softmax(start_logits, mask),
            p_end=endpoint_softmax(end_logits, mask),
            highlight=highlight,
        )


def endpoint_softmax(logits: Tensor, mask: Tensor) -> Tensor:
    """Softmax over snippets with masked snippets at ``-inf``."""
    return torch.softmax(logits.masked_fill(~mask.to(torch.bool), float("-inf")), dim=-1)


class SpanPredictor(nn.Module):
    """Sentence pooling, context-query attention, highlighting and span scoring."""

    def __init__(self, d: int, dropout: float = 0.0):
        super().__init__()
        self.sentence_pool = SentencePool(d)
        self.cqa = ContextQueryAttention(d, dropout)
        self.highlighter = Highlighter(d)
        self.scorer = SpanScorer(d)

    def forward(self, v: Tensor, q: Tensor, v_mask: Tensor, q_mask: Tensor) -> SpanDistributions:
        sentence = self.sentence_pool(q, q_mask)
        v_bar = self.cqa(v, q, v_mask, q_mask)
        highlight = self.highlighter(v_bar, sentence, v_mask)
        return self.scorer(v_bar, highlight, v_mask)


def decode_span(p_start, p_end, length=None) -> tuple[int, int]:
    """
    Best ``(i, j)`` with ``i <= j`` by ``p_start[i] * p_end[j]``.

    Ties go to the smaller ``i``, then the smaller ``j``. Only the first
    *length* positions are considered when given.
    """
    p_start = np.asarray(p_start, dtype=np.float64)
    p_end = np.asarray(p_end, dtype=np.float64)
    if p_start.shape != p_end.shape or p_start.ndim != 1:
        raise ShapeError(f"start {p_start.shape} and end {p_end.shape} scores must be vectors of one length")
    if length is not None:
        p_start, p_end = p_start[:length], p_end[:length]
    n = p_start.shape[0]
    if n == 0:
        raise ValidationError("cannot decode a span from empty scores")
    scores = np.where(np.triu(np.ones((n, n), dtype=bool)), np.outer(p_start, p_end), -np.inf)
    start_idx, end_idx = np.unravel_index(np.argmax(scores), scores.shape)
    return int(start_idx), int(end_idx)


def snippet_span_to_seconds(start_idx: int, end_idx: int, periods) -> tuple[float, float]:
    """Start of the start snippet and end of the end snippet, in seconds."""
    if start_idx > end_idx:
        raise ValidationError(f"start index {start_idx} is after end index {end_idx}")
    if start_idx < 0 or end_idx >= len(periods):
        raise RangeError(f"span ({start_idx}, {end_idx}) outside {len(periods)} snippets")
    return float(periods[start_idx][0]), float(periods[end_idx][1])
