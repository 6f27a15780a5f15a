"""
Structured paragraphs: timestamped narratives aligned to the snippet grid.
"""

import logging
from dataclasses import dataclass

import numpy as np

from narrated_vmr.datamodel.grid import seconds_to_snippet_index
from narrated_vmr.datamodel.types import VideoFeatureSequence
from narrated_vmr.exceptions import RangeError, ValidationError
from narrated_vmr.narration.text import EmbeddingTable, embed_sentence, tokenize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NarrativeEntry:
    """Caption of the frame sampled at ``timestamp`` seconds."""

    timestamp: float
    text: str

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValidationError(f"narrative at t={self.timestamp} has empty text")
        if self.timestamp < 0:
            raise RangeError(f"narrative timestamp {self.timestamp} is negative")


@dataclass(frozen=True)
class StructuredParagraph:
    """
    Narratives of one video plus their snippet-aligned sentence embeddings.

    ``aligned`` has one row per grid snippet; ``fill_flags[k]`` is True when
    snippet ``k`` received at least one narrative before forward-filling.
    """

    entries: tuple
    aligned: np.ndarray
    fill_flags: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        for array in (self.aligned, self.fill_flags):
            array.setflags(write=False)
        timestamps = [entry.timestamp for entry in self.entries]
        if timestamps != sorted(timestamps):
            raise ValidationError("paragraph entries must be sorted by timestamp")

    def text(self) -> str:
        """Render the paragraph as ``t: caption`` lines."""
        return "\n".join(f"{entry.timestamp:g}: {entry.text}" for entry in self.entries)


def align_paragraph(entries, video: VideoFeatureSequence, embedding_table: EmbeddingTable) -> StructuredParagraph:
    """
    Mean-pool narrative sentence embeddings into the snippet periods they fall in.

    Real snippets without a narrative take the vector of the nearest preceding
    filled snippet; snippets before the first filled one take the first filled
    vector. Padded snippets stay zero.

    Raises:
        ValidationError: if *entries* is empty
        RangeError: if a narrative timestamp lies outside the video
    """
    if not entries:
        raise ValidationError(f"video '{video.video_id}': no narratives to align")

    # Sorting first makes the result independent of input order, bit for bit.
    ordered = sorted(entries, key=lambda entry: (entry.timestamp, entry.text))

    bins = [[] for _ in range(video.n_real)]
    for entry in ordered:
        k = seconds_to_snippet_index(entry.timestamp, video.periods)
        if not tokenize(entry.text):
            logger.warning(
                "Video '%s': skipping narrative at t=%g with no word tokens: %r",
                video.video_id, entry.timestamp, entry.text,
            )
            continue
        bins[k].append(embed_sentence(entry.text, embedding_table))

    aligned = np.zeros((video.length, embedding_table.dim), dtype=np.float32)
    fill_flags = np.zeros(video.length, dtype=bool)
    for k, vectors in enumerate(bins):
        if vectors:
            aligned[k] = np.stack(vectors).mean(axis=0)
            fill_flags[k] = True

    filled = np.flatnonzero(fill_flags)
    if filled.size == 0:
        logger.warning("Video '%s': no usable narratives, paragraph left at zero", video.video_id)
        return StructuredParagraph(entries=ordered, aligned=aligned, fill_flags=fill_flags)
    first = filled[0]
    aligned[:first] = aligned[first]
    last = first
    for k in range(first + 1, video.n_real):
        if fill_flags[k]:
            last = k
        else:
            aligned[k] = aligned[last]

    n_empty = video.n_real - len(filled)
    if n_empty:
        logger.debug("Video '%s': filled %d empty snippet bins", video.video_id, n_empty)

    return StructuredParagraph(entries=ordered, aligned=aligned, fill_flags=fill_flags)
