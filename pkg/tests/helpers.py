"""
Builders shared by several test modules.
"""

import json

import torch


class Batch:
    """Stand-in for GroundingBatch holding only the model inputs."""

    def __init__(self, video, video_mask, paragraph, query, query_mask):
        self.video = video
        self.video_mask = video_mask
        self.paragraph = paragraph
        self.query = query
        self.query_mask = query_mask


def random_batch(batch_size=2, length=6, n_words=4, video_dim=5, narrative_dim=3, word_dim=3,
                 dtype=torch.float64, seed=0, real_lengths=None, word_lengths=None):
    """Random model inputs with prefix masks; padded rows are zero."""
    generator = torch.Generator().manual_seed(seed)
    real_lengths = real_lengths or [length] * batch_size
    word_lengths = word_lengths or [n_words] * batch_size
    video_mask = torch.arange(length)[None, :] < torch.tensor(real_lengths)[:, None]
    query_mask = torch.arange(n_words)[None, :] < torch.tensor(word_lengths)[:, None]
    video = torch.randn(batch_size, length, video_dim, generator=generator, dtype=dtype) * video_mask[..., None]
    paragraph = torch.randn(batch_size, length, narrative_dim, generator=generator, dtype=dtype) * video_mask[..., None]
    query = torch.randn(batch_size, n_words, word_dim, generator=generator, dtype=dtype) * query_mask[..., None]
    return Batch(video, video_mask, paragraph, query, query_mask)


def write_run_config(path, synthetic_paths, **sections):
    """
    Write a run config extending the synthetic profile and pointing at *synthetic_paths*.

    Keyword arguments are top-level sections; dict sections are merged into the defaults.
    """
    root = synthetic_paths.manifest.parent
    config = {
        "base_profile": "experimental/synthetic.json",
        "dataset": {
            "train": str(synthetic_paths.manifest),
            "embeddings": str(synthetic_paths.embeddings),
        },
        "narrator": {
            "fixture_path": str(synthetic_paths.narratives),
            "cache_dir": str(root / "narratives"),
        },
        "output_dir": str(path.parent / "run"),
        "train": {"epochs": 2, "batch_size": 4},
    }
    for key, value in sections.items():
        if isinstance(value, dict) and isinstance(config.get(key), dict):
            config[key] = {**config[key], **value}
        else:
            config[key] = value
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return path
