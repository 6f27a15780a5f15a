"""
Domain types, the snippet grid, feature files and dataset manifests.
"""

from .features import read_feature_file, write_feature_file
from .grid import build_snippet_grid, seconds_to_snippet_index, uniform_periods
from .manifest import load_manifest, write_manifest
from .types import (
    SPLIT_NAMES,
    DatasetManifest,
    ManifestEntry,
    MomentAnnotation,
    Query,
    VideoFeatureSequence,
)

__all__ = [
    "SPLIT_NAMES",
    "DatasetManifest",
    "ManifestEntry",
    "MomentAnnotation",
    "Query",
    "VideoFeatureSequence",
    "build_snippet_grid",
    "load_manifest",
    "read_feature_file",
    "seconds_to_snippet_index",
    "uniform_periods",
    "write_feature_file",
    "write_manifest",
]
