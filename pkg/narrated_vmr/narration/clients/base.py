"""
Base class and factory for narrator clients.
"""

import importlib
import logging
import threading

from narrated_vmr.exceptions import ValidationError

logger = logging.getLogger(__name__)

LOCAL_PATH_MAPPING = {
    "remote": "narrated_vmr.narration.clients.litellm_narrator.LitellmNarrator",
    "prompt_free": "narrated_vmr.narration.clients.litellm_narrator.PromptFreeNarrator",
    "fixture": "narrated_vmr.narration.clients.fixture.FixtureNarrator",
}


class NarratorClient:
    """
    Captions one video frame per call.

    Subclasses implement :meth:`_caption`. ``identity`` and ``prompt`` together
    key the narrative cache, so two clients with the same identity must return
    the same text for the same frame.
    """

    def __init__(self, config=None):
        self.config = config or {}
        self.prompt = None
        self.calls = 0
        self._calls_lock = threading.Lock()

    @property
    def identity(self) -> str:
        raise NotImplementedError("Subclasses must define identity")

    def caption(self, video_id: str, timestamp: float) -> str:
        """Return the caption of the frame of *video_id* sampled at *timestamp* seconds."""
        with self._calls_lock:
            self.calls += 1
        text = self._caption(video_id, timestamp)
        if not isinstance(text, str) or not text.strip():
            raise ValueError(f"narrator returned an empty caption for '{video_id}' at t={timestamp}")
        return text.strip()

    def _caption(self, video_id, timestamp):
        raise NotImplementedError("Subclasses must implement _caption")


def get_narrator_client(config) -> NarratorClient:
    """
    Resolve and instantiate the narrator client named by ``config["mode"]``.

    ``mode`` is either a short name (``remote``, ``prompt_free``, ``fixture``)
    or a dotted path to a :class:`NarratorClient` subclass.

    Raises:
        ValidationError: if the mode cannot be resolved to a NarratorClient subclass
    """
    mode = (config or {}).get("mode", "remote")
    dotted_path = LOCAL_PATH_MAPPING.get(mode, mode)

    try:
        module_path, class_name = dotted_path.rsplit(".", 1)
    except ValueError as exc:
        raise ValidationError(f"narrator.mode: unknown narrator mode '{mode}'") from exc
    try:
        module = importlib.import_module(module_path)
        client_class = getattr(module, class_name)
    except ImportError as exc:
        raise ValidationError(f"narrator.mode: could not import module '{module_path}'") from exc
    except AttributeError as exc:
        raise ValidationError(f"narrator.mode: class '{class_name}' not found in '{module_path}'") from exc

    if not isinstance(client_class, type) or not issubclass(client_class, NarratorClient):
        raise ValidationError(f"narrator.mode: {class_name} is not a subclass of NarratorClient")

    logger.debug("Using narrator client %s for mode '%s'", class_name, mode)
    return client_class(config)
