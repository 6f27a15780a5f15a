"""
Persistent narrative cache.

One JSONL file per video under the cache directory. Each line is one
caption, written as canonical JSON (sorted keys, compact separators,
UTF-8)::

    {"prompt_hash":"<64 hex chars>","text":"a man opens a door","timestamp":0.5}

``prompt_hash`` is the SHA-256 of the narrator identity and prompt, so
captions from different narrators or prompts live side by side in one file.
Files are append-only; the first record for a ``(prompt_hash, timestamp)``
pair wins.
"""

import hashlib
import logging
import re
import threading
from pathlib import Path

from narrated_vmr.utils import read_jsonl, round_timestamp, write_jsonl

logger = logging.getLogger(__name__)

_UNSAFE_CHARS = re.compile(r"[^A-Za-z0-9._-]")


class NarrativeCache:
    """Reads and appends per-video caption records; writes are serialized by a lock."""

    def __init__(self, cache_dir):
        self.cache_dir = Path(cache_dir)
        self._write_lock = threading.Lock()

    def path_for(self, video_id: str) -> Path:
        safe = _UNSAFE_CHARS.sub("_", video_id)
        if safe != video_id:
            safe = f"{safe}-{hashlib.sha256(video_id.encode('utf-8')).hexdigest()[:8]}"
        return self.cache_dir / f"{safe}.jsonl"

    def load(self, video_id: str, prompt_hash: str) -> dict:
        """
        Cached captions of *video_id* under *prompt_hash*.

        Returns:
            dict mapping rounded timestamp to caption text
        """
        path = self.path_for(video_id)
        if not path.exists():
            return {}
        captions = {}
        for _, record in read_jsonl(path):
            if record.get("prompt_hash") != prompt_hash:
                continue
            captions.setdefault(round_timestamp(record["timestamp"]), record["text"])
        return captions

    def append(self, video_id: str, prompt_hash: str, captions) -> None:
        """Append ``(timestamp, text)`` pairs in the order given."""
        records = [
            {"prompt_hash": prompt_hash, "text": text, "timestamp": float(timestamp)}
            for timestamp, text in captions
        ]
        if not records:
            return
        with self._write_lock:
            write_jsonl(self.path_for(video_id), records, append=True)
        logger.debug("Cached %d captions for video '%s'", len(records), video_id)
