"""
Remote frame captioning through LiteLLM.
"""

import base64
import logging
import mimetypes
import os
from pathlib import Path

from litellm import completion

from narrated_vmr.exceptions import ValidationError
from narrated_vmr.narration.clients.base import NarratorClient
from narrated_vmr.settings import settings
from narrated_vmr.settings.common import NARRATOR_API_BASE_ENV, NARRATOR_API_KEY_ENV

logger = logging.getLogger(__name__)

DEFAULT_FRAME_PATTERN = "{video_id}/{frame_index:05d}.jpg"


class LitellmNarrator(NarratorClient):
    """
    Send ``{image, prompt}`` to a multimodal chat model and return its answer.

    Frames are referenced through ``frame_pattern``, formatted with
    ``video_id``, ``frame_index`` (``int(timestamp / interval)``) and
    ``timestamp``. Patterns producing an ``http(s)`` URL are sent as-is;
    anything else is read from ``frames_dir`` and inlined as a data URL.

    Transport failures are retried by LiteLLM (``num_retries``, exponential
    backoff); the last error propagates to the caller.
    """

    def __init__(self, config=None):
        super().__init__(config)
        self.model = self.config.get("model") or settings.NARRATOR_MODEL
        if not isinstance(self.model, str) or "/" not in self.model:
            raise ValidationError(
                "narrator.model must have the format 'provider/model_name', e.g. 'openai/gpt-4o-mini'"
            )
        self.provider = self.model.split("/")[0]
        self.prompt = self._load_prompt()
        self.frames_dir = Path(self.config.get("frames_dir") or ".")
        self.frame_pattern = self.config.get("frame_pattern") or DEFAULT_FRAME_PATTERN
        self.interval = float(self.config.get("interval", 1.0))

        num_retries = self.config.get("num_retries")
        self.extra_params = {
            "num_retries": settings.NARRATOR_NUM_RETRIES if num_retries is None else num_retries,
            "timeout": self.config.get("timeout", settings.NARRATOR_TIMEOUT),
        }
        for key in ("temperature", "max_tokens"):
            if key in self.config:
                self.extra_params[key] = self.config[key]
        api_base = self.config.get("endpoint") or os.environ.get(NARRATOR_API_BASE_ENV)
        if api_base:
            self.extra_params["api_base"] = api_base
        api_key = os.environ.get(NARRATOR_API_KEY_ENV)
        if api_key:
            self.extra_params["api_key"] = api_key

    def _load_prompt(self):
        return self.config.get("prompt") or settings.NARRATOR_PROMPT

    @property
    def identity(self) -> str:
        return f"{self.__class__.__name__}:{self.model}"

    def image_ref(self, video_id: str, timestamp: float) -> str:
        """Resolve the frame reference of *video_id* at *timestamp*."""
        return self.frame_pattern.format(
            video_id=video_id,
            frame_index=int(timestamp / self.interval),
            timestamp=timestamp,
        )

    def image_url(self, video_id: str, timestamp: float) -> str:
        ref = self.image_ref(video_id, timestamp)
        if ref.startswith(("http://", "https://", "data:")):
            return ref
        path = self.frames_dir / ref
        mime_type = mimetypes.guess_type(path.name)[0] or "image/jpeg"
        encoded = base64.b64encode(path.read_bytes()).decode("ascii")
        return f"data:{mime_type};base64,{encoded}"

    def build_messages(self, video_id: str, timestamp: float) -> list[dict]:
        content = []
        if self.prompt:
            content.append({"type": "text", "text": self.prompt})
        content.append({"type": "image_url", "image_url": {"url": self.image_url(video_id, timestamp)}})
        return [{"role": "user", "content": content}]

    def _caption(self, video_id, timestamp):
        response = completion(
            model=self.model,
            messages=self.build_messages(video_id, timestamp),
            **self.extra_params,
        )
        return response.choices[0].message.content


class PromptFreeNarrator(LitellmNarrator):
    """
    Captioner that takes the image alone.

    For captioning models that accept no instructions; compares prompt-free
    narration against the promptable default.
    """

    def _load_prompt(self):
        return None
