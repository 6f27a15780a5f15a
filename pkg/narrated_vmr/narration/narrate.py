"""
Frame sampling and cached, parallel narration of videos.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

from tqdm import tqdm

from narrated_vmr.exceptions import NarrationError, ValidationError
from narrated_vmr.narration.cache import NarrativeCache
from narrated_vmr.narration.clients.base import NarratorClient
from narrated_vmr.narration.paragraph import NarrativeEntry
from narrated_vmr.settings import settings
from narrated_vmr.utils import fingerprint, round_timestamp

logger = logging.getLogger(__name__)


def sample_frame_timestamps(duration: float, interval: float) -> list[float]:
    """
    Bin-center frame times ``interval/2, 3*interval/2, ...`` strictly before *duration*.

    Videos shorter than half an interval get one frame at ``duration / 2``.
    """
    if not duration > 0 or not interval > 0:
        raise ValidationError(f"duration and interval must be positive, got {duration} and {interval}")
    n_frames = max(0, math.ceil(duration / interval - 0.5))
    timestamps = [(k + 0.5) * interval for k in range(n_frames)]
    # Guard against ceil() overshooting on inexact division.
    timestamps = [t for t in timestamps if t < duration]
    return timestamps or [duration / 2]


def prompt_hash(client: NarratorClient) -> str:
    """Cache key of everything that determines a client's captions."""
    return fingerprint({"narrator": client.identity, "prompt": client.prompt})


@dataclass
class NarrationSummary:
    """Hit, miss and failure counts of one narration run."""

    videos: int = 0
    hits: int = 0
    misses: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {
            "videos": self.videos,
            "hits": self.hits,
            "misses": self.misses,
            "failures": [{"video_id": v, "timestamp": t, "error": e} for v, t, e in self.failures],
        }


def narrate(video_id, timestamps, client: NarratorClient, cache: NarrativeCache, parallelism=None, summary=None):
    """
    Caption every frame of *video_id* at *timestamps*, going through the cache.

    Cache misses are requested with at most *parallelism* concurrent calls.
    Successful captions are cached in timestamp order before any failure is
    raised, so a rerun only requests the frames that failed.

    Returns:
        list of NarrativeEntry, one per timestamp, in input order

    Raises:
        NarrationError: naming the earliest timestamp that failed
    """
    parallelism = parallelism or settings.NARRATOR_PARALLELISM
    key = prompt_hash(client)
    cached = cache.load(video_id, key)
    wanted = list(dict.fromkeys(round_timestamp(t) for t in timestamps))
    missing = [t for t in wanted if t not in cached]

    fresh = {}
    failed = {}
    if missing:
        with ThreadPoolExecutor(max_workers=min(parallelism, len(missing))) as executor:
            futures = {executor.submit(client.caption, video_id, t): t for t in missing}
            for future in as_completed(futures):
                t = futures[future]
                try:
                    fresh[t] = future.result()
                except Exception as exc:  # pylint: disable=broad-exception-caught
                    logger.warning("Narrator gave up on video '%s' at t=%s: %s", video_id, t, exc)
                    failed[t] = exc

        cache.append(video_id, key, sorted(fresh.items()))

    if summary is not None:
        summary.hits += len(wanted) - len(missing)
        summary.misses += len(missing)
        summary.failures.extend((video_id, t, str(failed[t])) for t in sorted(failed))

    if failed:
        first = min(failed)
        raise NarrationError(video_id, first, failed[first]) from failed[first]

    captions = {**cached, **fresh}
    return [NarrativeEntry(timestamp=t, text=captions[round_timestamp(t)]) for t in timestamps]


def narrate_videos(videos, client: NarratorClient, cache: NarrativeCache, interval: float, parallelism=None):
    """
    Narrate every ``(video_id, duration)`` in *videos*.

    A failing video is recorded and the run continues with the next one.

    Returns:
        NarrationSummary
    """
    summary = NarrationSummary()
    for video_id, duration in tqdm(list(videos), desc="narrate", unit="video"):
        summary.videos += 1
        hits, misses = summary.hits, summary.misses
        try:
            narrate(video_id, sample_frame_timestamps(duration, interval), client, cache, parallelism, summary)
        except NarrationError as exc:
            logger.info("Video '%s': %s", video_id, exc)
            continue
        logger.info(
            "Video '%s': %d cache hits, %d narrated",
            video_id, summary.hits - hits, summary.misses - misses,
        )
    return summary


def load_narratives(video_id, duration, interval, client: NarratorClient, cache: NarrativeCache):
    """
    Cached narratives of one video, without calling the narrator.

    Raises:
        ValidationError: if any sampled frame has no cached caption
    """
    captions = cache.load(video_id, prompt_hash(client))
    timestamps = sample_frame_timestamps(duration, interval)
    missing = [t for t in timestamps if round_timestamp(t) not in captions]
    if missing:
        raise ValidationError(
            f"video '{video_id}': {len(missing)} frames have no cached narrative (first at t={missing[0]}); "
            "run the narrate command first"
        )
    return [NarrativeEntry(timestamp=t, text=captions[round_timestamp(t)]) for t in timestamps]
