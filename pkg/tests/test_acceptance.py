"""
Full-length training runs on the synthetic dataset. Minutes on a CPU; run with ``-m slow``.
"""

import pytest
from helpers import write_run_config

from narrated_vmr.config.loader import load_run_config
from narrated_vmr.datamodel.dataset import GroundingDataset
from narrated_vmr.datamodel.manifest import load_manifest
from narrated_vmr.evaluation.inference import branch_scores
from narrated_vmr.evaluation.sweep import alpha_sweep
from narrated_vmr.narration.cache import NarrativeCache
from narrated_vmr.narration.clients.fixture import FixtureNarrator
from narrated_vmr.narration.narrate import narrate_videos
from narrated_vmr.narration.text import EmbeddingTable
from narrated_vmr.training.synthetic import build_synthetic_dataset
from narrated_vmr.training.trainer import build_model, fit

pytestmark = pytest.mark.slow


def _train(tmp_path, narrative_only_fraction=0.0, **sections):
    paths = build_synthetic_dataset(tmp_path / "synthetic", n_pairs=48, narrative_only_fraction=narrative_only_fraction)
    sections["train"] = {"epochs": 200, "batch_size": 16}
    config = load_run_config(write_run_config(tmp_path / "run.json", paths, **sections))

    narrator = FixtureNarrator({"fixture_path": str(paths.narratives)})
    cache = NarrativeCache(config.narrator["cache_dir"])
    manifest = load_manifest(paths.manifest)
    narrate_videos([(e.video_id, e.duration) for e in manifest.entries], narrator, cache, interval=1.0)
    dataset = GroundingDataset(
        manifest, EmbeddingTable.from_text_file(paths.embeddings), narrator, cache, max_snippets=16
    )

    model = build_model(config, dataset.dims)
    fit(model, dataset, config)
    return model, dataset


def test_overfits_the_synthetic_set(tmp_path):
    model, dataset = _train(tmp_path)
    scores = branch_scores(model, dataset)
    (row,) = alpha_sweep(scores, [sample.entry for sample in dataset.samples], alphas=(0.5,))
    assert row["iou@0.7"] >= 90.0
    assert row["miou"] >= 85.0


def test_paragraph_branch_recovers_moments_missing_from_the_features(tmp_path):
    # The video branch sees features only, so half of the moments are invisible to it.
    model, dataset = _train(tmp_path, narrative_only_fraction=0.5, encoder={"narrative_merge": False})
    annotations = [sample.entry for sample in dataset.samples]
    video_only, fused = alpha_sweep(branch_scores(model, dataset), annotations, alphas=(0.0, 0.5))
    assert fused["miou"] > video_only["miou"]


def _train_miou(tmp_path, alpha):
    model, dataset = _train(tmp_path, narrative_only_fraction=0.5, fusion={"alpha": alpha})
    annotations = [sample.entry for sample in dataset.samples]
    (row,) = alpha_sweep(branch_scores(model, dataset), annotations, alphas=(alpha,))
    return row["miou"]


def test_fused_model_beats_a_model_trained_without_the_paragraph_branch(tmp_path):
    assert _train_miou(tmp_path / "fused", 0.5) > _train_miou(tmp_path / "video", 0.0)
