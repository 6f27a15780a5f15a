"""
Generated video-query data for overfit and ablation experiments.

Every video is ``n_snippets`` seconds long with one snippet per second and
holds two action motifs: the target named by its query and a distractor.
A motif shows up as a fixed feature direction added to the snippets it
covers and as its verb in the fixture narrations of those seconds. For the
``narrative_only_fraction`` of pairs the target motif is left out of the
features, so only the narratives locate it.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from narrated_vmr.datamodel.features import write_feature_file
from narrated_vmr.datamodel.manifest import write_manifest
from narrated_vmr.datamodel.types import ManifestEntry
from narrated_vmr.exceptions import ValidationError
from narrated_vmr.narration.narrate import sample_frame_timestamps

logger = logging.getLogger(__name__)

MOTIFS = ("opens", "jumps", "waves", "cooks", "reads", "sings", "sweeps", "throws")
FILLER_WORDS = ("a", "person", "the", "door", "someone", "is", "standing", "still", "in", "room", "now")

MANIFEST_NAME = "train.jsonl"
EMBEDDINGS_NAME = "embeddings.txt"
NARRATIVES_NAME = "narratives.json"
FEATURES_DIR = "features"

WORD_DIM = 16
NOISE_SCALE = 0.1
MOTIF_SCALE = 1.0


@dataclass(frozen=True)
class SyntheticPaths:
    manifest: Path
    features_dir: Path
    narratives: Path
    embeddings: Path


def _span(rng, n_snippets, min_len=2, max_len=5):
    length = int(rng.integers(min_len, max_len + 1))
    start = int(rng.integers(0, n_snippets - length + 1))
    return start, start + length - 1


def _disjoint_span(rng, n_snippets, taken):
    for _ in range(100):
        start, end = _span(rng, n_snippets, max_len=3)
        if end < taken[0] or start > taken[1]:
            return start, end
    return None


def _write_embeddings(path, rng):
    words = list(FILLER_WORDS) + list(MOTIFS)
    vectors = rng.normal(size=(len(words), WORD_DIM))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    with open(path, "w", encoding="utf-8") as f:
        for word, vector in zip(words, vectors):
            f.write(word + " " + " ".join(f"{value:.6f}" for value in vector) + "\n")


def build_synthetic_dataset(out_dir, n_pairs: int = 48, d_v: int = 32, n_snippets: int = 16,
                            narrative_only_fraction: float = 0.0, seed: int = 0) -> SyntheticPaths:
    """
    Write a synthetic training split to *out_dir*.

    Layout::

        out_dir/train.jsonl          manifest, split "train"
        out_dir/features/<id>.nvmf   one [n_snippets, d_v] feature file per video
        out_dir/narratives.json      fixture captions at 1-second bin centers
        out_dir/embeddings.txt       word vectors for every word used

    Args:
        n_pairs: one video and one query per pair
        d_v: snippet feature size
        n_snippets: video length in seconds and snippets
        narrative_only_fraction: share of pairs whose target motif is absent from the features
        seed: generator seed; equal seeds give byte-identical files

    Returns:
        SyntheticPaths
    """
    if not 0 <= narrative_only_fraction <= 1:
        raise ValidationError(f"narrative_only_fraction must be in [0, 1], got {narrative_only_fraction}")
    if n_snippets < 4:
        raise ValidationError(f"n_snippets must be at least 4, got {n_snippets}")

    out_dir = Path(out_dir)
    features_dir = out_dir / FEATURES_DIR
    features_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    directions = rng.normal(size=(len(MOTIFS), d_v))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)

    n_narrative_only = int(round(n_pairs * narrative_only_fraction))
    narrative_only = set(rng.permutation(n_pairs)[:n_narrative_only].tolist())

    duration = float(n_snippets)
    timestamps = sample_frame_timestamps(duration, 1.0)
    entries = []
    narratives = {}
    for i in range(n_pairs):
        video_id = f"syn{i:04d}"
        target, distractor = rng.choice(len(MOTIFS), size=2, replace=False)
        target_span = _span(rng, n_snippets)
        distractor_span = _disjoint_span(rng, n_snippets, target_span)

        features = NOISE_SCALE * rng.normal(size=(n_snippets, d_v))
        if i not in narrative_only:
            features[target_span[0]:target_span[1] + 1] += MOTIF_SCALE * directions[target]
        if distractor_span is not None:
            features[distractor_span[0]:distractor_span[1] + 1] += MOTIF_SCALE * directions[distractor]
        feature_path = f"{FEATURES_DIR}/{video_id}.nvmf"
        write_feature_file(out_dir / feature_path, features.astype(np.float32))

        captions = {}
        for t in timestamps:
            k = int(t)
            if target_span[0] <= k <= target_span[1]:
                text = f"someone {MOTIFS[target]} the door"
            elif distractor_span is not None and distractor_span[0] <= k <= distractor_span[1]:
                text = f"someone {MOTIFS[distractor]} in the room"
            else:
                text = "a person is standing still in the room"
            captions[str(t)] = text
        narratives[video_id] = captions

        entries.append(ManifestEntry(
            video_id=video_id,
            feature_path=feature_path,
            duration=duration,
            query_id=f"{video_id}-q0",
            query=f"a person {MOTIFS[target]} the door",
            tau_s=float(target_span[0]),
            tau_e=float(target_span[1] + 1),
        ))

    paths = SyntheticPaths(
        manifest=out_dir / MANIFEST_NAME,
        features_dir=features_dir,
        narratives=out_dir / NARRATIVES_NAME,
        embeddings=out_dir / EMBEDDINGS_NAME,
    )
    write_manifest(paths.manifest, "train", entries)
    with open(paths.narratives, "w", encoding="utf-8") as f:
        json.dump(narratives, f, sort_keys=True, indent=1)
    _write_embeddings(paths.embeddings, rng)
    logger.info(
        "Wrote %d synthetic pairs (%d narrative-only) to %s", n_pairs, len(narrative_only), out_dir
    )
    return paths
