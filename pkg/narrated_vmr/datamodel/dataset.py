"""
Torch dataset joining manifest entries, feature files, cached narratives and
word embeddings into model-ready samples.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import Dataset

from narrated_vmr.datamodel.features import read_feature_file
from narrated_vmr.datamodel.grid import build_snippet_grid
from narrated_vmr.datamodel.types import DatasetManifest, ManifestEntry, MomentAnnotation, Query, VideoFeatureSequence
from narrated_vmr.narration.cache import NarrativeCache
from narrated_vmr.narration.narrate import load_narratives
from narrated_vmr.narration.paragraph import StructuredParagraph, align_paragraph
from narrated_vmr.narration.text import EmbeddingTable, build_query
from narrated_vmr.training.labels import build_annotation, highlight_labels

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroundingSample:
    entry: ManifestEntry
    video: VideoFeatureSequence
    paragraph: StructuredParagraph
    query: Query
    annotation: MomentAnnotation


@dataclass
class GroundingBatch:
    """
    Padded tensors of a list of samples.

    ``video``/``paragraph`` are ``[B, L, d]`` on the snippet grid, ``query`` is
    padded to the longest query in the batch. ``candidate_starts`` and
    ``candidate_ends`` are boolean ``[B, L]`` memberships.
    """

    video: torch.Tensor
    video_mask: torch.Tensor
    paragraph: torch.Tensor
    query: torch.Tensor
    query_mask: torch.Tensor
    candidate_starts: torch.Tensor
    candidate_ends: torch.Tensor
    highlight_labels: torch.Tensor
    samples: list

    @property
    def keys(self) -> list:
        return [sample.entry.key for sample in self.samples]

    def to(self, dtype=None, device=None) -> "GroundingBatch":
        """Cast the float tensors to *dtype* and move everything to *device*."""
        def convert(tensor):
            if dtype is not None and tensor.is_floating_point():
                tensor = tensor.to(dtype)
            return tensor.to(device) if device is not None else tensor

        return GroundingBatch(
            video=convert(self.video),
            video_mask=convert(self.video_mask),
            paragraph=convert(self.paragraph),
            query=convert(self.query),
            query_mask=convert(self.query_mask),
            candidate_starts=convert(self.candidate_starts),
            candidate_ends=convert(self.candidate_ends),
            highlight_labels=convert(self.highlight_labels),
            samples=self.samples,
        )


class GroundingDataset(Dataset):
    """
    All samples of one manifest, built eagerly.

    Feature files are read once per video; narratives must already be in
    the cache (see the ``narrate`` command).

    Args:
        manifest: DatasetManifest to load
        embedding_table: shared word vectors for queries and narratives
        narrator: client whose cached captions are used
        cache: narrative cache
        interval: frame sampling interval in seconds
        max_snippets: snippet grid length
        expansion_iou_threshold: label expansion threshold
    """

    def __init__(self, manifest: DatasetManifest, embedding_table: EmbeddingTable, narrator, cache: NarrativeCache,
                 interval: float = 1.0, max_snippets: int = None, expansion_iou_threshold: float = 0.7):
        self.manifest = manifest
        videos = {}
        paragraphs = {}
        self.samples = []
        for entry in manifest.entries:
            if entry.video_id not in videos:
                raw = read_feature_file(Path(manifest.root) / entry.feature_path)
                video = build_snippet_grid(
                    raw, entry.duration, periods=entry.periods, max_snippets=max_snippets, video_id=entry.video_id
                )
                narratives = load_narratives(entry.video_id, entry.duration, interval, narrator, cache)
                videos[entry.video_id] = video
                paragraphs[entry.video_id] = align_paragraph(narratives, video, embedding_table)
            video = videos[entry.video_id]
            self.samples.append(GroundingSample(
                entry=entry,
                video=video,
                paragraph=paragraphs[entry.video_id],
                query=build_query(entry.query_id, entry.query, embedding_table),
                annotation=build_annotation(entry.tau_s, entry.tau_e, video.periods, expansion_iou_threshold),
            ))
        logger.info(
            "Built %d samples over %d videos for split '%s'", len(self.samples), len(videos), manifest.split_name
        )

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, index) -> GroundingSample:
        return self.samples[index]

    @property
    def dims(self) -> dict:
        """Input sizes the model is built for."""
        sample = self.samples[0]
        return {
            "video_dim": sample.video.feature_dim,
            "narrative_dim": sample.paragraph.aligned.shape[1],
            "word_dim": sample.query.embeddings.shape[1],
        }


def collate_batch(samples) -> GroundingBatch:
    """Stack samples into padded float32 tensors."""
    batch_size = len(samples)
    length = samples[0].video.length
    max_words = max(len(sample.query.tokens) for sample in samples)
    word_dim = samples[0].query.embeddings.shape[1]

    query = np.zeros((batch_size, max_words, word_dim), dtype=np.float32)
    query_mask = np.zeros((batch_size, max_words), dtype=bool)
    starts = np.zeros((batch_size, length), dtype=bool)
    ends = np.zeros((batch_size, length), dtype=bool)
    labels = np.zeros((batch_size, length), dtype=np.float32)
    for b, sample in enumerate(samples):
        n_words = len(sample.query.tokens)
        query[b, :n_words] = sample.query.embeddings
        query_mask[b, :n_words] = sample.query.mask
        annotation = sample.annotation
        starts[b, sorted(annotation.candidate_starts)] = True
        ends[b, sorted(annotation.candidate_ends)] = True
        labels[b] = highlight_labels(annotation.candidate_starts, annotation.candidate_ends, length)
        labels[b, ~sample.video.mask] = 0

    return GroundingBatch(
        video=torch.from_numpy(np.stack([sample.video.snippets for sample in samples])),
        video_mask=torch.from_numpy(np.stack([sample.video.mask for sample in samples])),
        paragraph=torch.from_numpy(np.stack([sample.paragraph.aligned for sample in samples])),
        query=torch.from_numpy(query),
        query_mask=torch.from_numpy(query_mask),
        candidate_starts=torch.from_numpy(starts),
        candidate_ends=torch.from_numpy(ends),
        highlight_labels=torch.from_numpy(labels),
        samples=list(samples),
    )
