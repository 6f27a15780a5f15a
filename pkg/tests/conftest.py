"""
Shared fixtures for the narrated_vmr test suite.

``NARRATED_VMR_SETTINGS`` must be set before any package module is imported.
"""

import os

os.environ.setdefault("NARRATED_VMR_SETTINGS", "test")

# pylint: disable=wrong-import-position
import numpy as np  # noqa: E402
import pytest  # noqa: E402

from narrated_vmr.datamodel.dataset import GroundingDataset  # noqa: E402
from narrated_vmr.datamodel.grid import build_snippet_grid  # noqa: E402
from narrated_vmr.datamodel.manifest import load_manifest  # noqa: E402
from narrated_vmr.narration.cache import NarrativeCache  # noqa: E402
from narrated_vmr.narration.clients.fixture import FixtureNarrator  # noqa: E402
from narrated_vmr.narration.narrate import narrate_videos  # noqa: E402
from narrated_vmr.narration.text import EmbeddingTable  # noqa: E402
from narrated_vmr.training.synthetic import build_synthetic_dataset  # noqa: E402


@pytest.fixture
def embedding_table():
    """
    Four words in three dimensions.
    """
    return EmbeddingTable(
        ["a", "man", "opens", "door"],
        np.array([
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 0.0],
        ], dtype=np.float32),
    )


@pytest.fixture
def two_snippet_video():
    """4-second video on a 2-snippet grid: periods (0, 2) and (2, 4)."""
    return build_snippet_grid(np.ones((2, 3), dtype=np.float32), 4.0, max_snippets=2, video_id="v1")


@pytest.fixture
def synthetic_paths(tmp_path):
    """Eight synthetic pairs on disk."""
    return build_synthetic_dataset(tmp_path / "synthetic", n_pairs=8, seed=0)


@pytest.fixture
def synthetic_dataset(synthetic_paths, tmp_path):
    """The eight synthetic pairs narrated from the fixture and loaded on a 16-snippet grid."""
    table = EmbeddingTable.from_text_file(synthetic_paths.embeddings)
    narrator = FixtureNarrator({"fixture_path": str(synthetic_paths.narratives)})
    cache = NarrativeCache(tmp_path / "narratives")
    manifest = load_manifest(synthetic_paths.manifest)
    narrate_videos(sorted({(e.video_id, e.duration) for e in manifest.entries}), narrator, cache, interval=1.0)
    return GroundingDataset(manifest, table, narrator, cache, interval=1.0, max_snippets=16)
