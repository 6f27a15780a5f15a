"""
Narration: frame captions aligned to the snippet grid as a structured paragraph.
"""

from narrated_vmr.narration.cache import NarrativeCache
from narrated_vmr.narration.clients import NarratorClient, get_narrator_client
from narrated_vmr.narration.narrate import (
    NarrationSummary,
    load_narratives,
    narrate,
    narrate_videos,
    prompt_hash,
    sample_frame_timestamps,
)
from narrated_vmr.narration.paragraph import NarrativeEntry, StructuredParagraph, align_paragraph
from narrated_vmr.narration.text import EmbeddingTable, build_query, embed_sentence, tokenize

__all__ = [
    "EmbeddingTable",
    "NarrationSummary",
    "NarrativeCache",
    "NarrativeEntry",
    "NarratorClient",
    "StructuredParagraph",
    "align_paragraph",
    "build_query",
    "embed_sentence",
    "get_narrator_client",
    "load_narratives",
    "narrate",
    "narrate_videos",
    "prompt_hash",
    "sample_frame_timestamps",
    "tokenize",
]
