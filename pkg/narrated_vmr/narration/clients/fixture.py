"""
Deterministic offline narrator backed by a JSON fixture file.
"""

import json
import logging

from narrated_vmr.exceptions import ValidationError
from narrated_vmr.narration.clients.base import NarratorClient
from narrated_vmr.utils import fingerprint, round_timestamp

logger = logging.getLogger(__name__)


class FixtureMissError(LookupError):
    """The fixture holds no caption for a requested frame."""


class FixtureNarrator(NarratorClient):
    """
    Keyed caption lookup for tests and CI.

    The fixture maps ``video_id -> {timestamp: caption}``; timestamps are
    compared after rounding to 6 decimals. Captions come from
    ``config["fixtures"]`` when given, otherwise from ``config["fixture_path"]``.
    """

    def __init__(self, config=None):
        super().__init__(config)
        raw = self.config.get("fixtures")
        if raw is None:
            fixture_path = self.config.get("fixture_path")
            if not fixture_path:
                raise ValidationError("narrator.fixture_path is required in fixture mode")
            with open(fixture_path, "r", encoding="utf-8") as f:
                raw = json.load(f)
            logger.info("Loaded narration fixtures for %d videos from %s", len(raw), fixture_path)

        self.captions = {}
        for video_id, captions in raw.items():
            for timestamp, text in captions.items():
                self.captions[(video_id, round_timestamp(timestamp))] = text
        self._fingerprint = fingerprint(
            sorted([video_id, timestamp, text] for (video_id, timestamp), text in self.captions.items())
        )

    @property
    def identity(self) -> str:
        return f"FixtureNarrator:{self._fingerprint[:16]}"

    def _caption(self, video_id, timestamp):
        try:
            return self.captions[(video_id, round_timestamp(timestamp))]
        except KeyError as exc:
            raise FixtureMissError(f"no fixture caption for video '{video_id}' at t={timestamp}") from exc
