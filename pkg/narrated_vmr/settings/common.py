"""
Common settings for narrated_vmr.
"""

import logging
from pathlib import Path

logger = logging.getLogger(__name__)

BASE_DIR = Path(__file__).resolve().parent.parent

DEFAULT_NARRATOR_PROMPT = (
    "This is one image frame sampled from a video. Please caption this frame in two or three "
    "sentences, to describe this frame with some details but without any analysis."
)
DEFAULT_NARRATOR_MODEL = "openai/gpt-4o-mini"

# Environment variables holding narrator secrets. Nothing else is read from the environment.
NARRATOR_API_KEY_ENV = "NARRATED_VMR_NARRATOR_API_KEY"
NARRATOR_API_BASE_ENV = "NARRATED_VMR_NARRATOR_API_BASE"

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
            "stream": "ext://sys.stderr",
        },
    },
    "loggers": {
        "narrated_vmr": {
            "handlers": ["console"],
            "level": "INFO",
            "propagate": False,
        },
        # LiteLLM is chatty at INFO.
        "LiteLLM": {
            "handlers": ["console"],
            "level": "WARNING",
            "propagate": False,
        },
    },
}


def plugin_settings(settings):
    """
    Add package defaults to a settings object.

    Values already present on *settings* are left untouched.

    Args:
        settings: namespace object to populate
    """
    # -------------------------
    # Config profiles
    # -------------------------
    if not hasattr(settings, "PROFILE_DIRS"):
        settings.PROFILE_DIRS = []

    profile_dir = BASE_DIR / "config" / "profiles"
    if profile_dir not in settings.PROFILE_DIRS:
        settings.PROFILE_DIRS.append(profile_dir)

    # -------------------------
    # Narration
    # -------------------------
    if not hasattr(settings, "NARRATOR_PROMPT"):
        settings.NARRATOR_PROMPT = DEFAULT_NARRATOR_PROMPT
    if not hasattr(settings, "NARRATOR_MODEL"):
        settings.NARRATOR_MODEL = DEFAULT_NARRATOR_MODEL
    if not hasattr(settings, "NARRATOR_PARALLELISM"):
        settings.NARRATOR_PARALLELISM = 4
    if not hasattr(settings, "NARRATOR_NUM_RETRIES"):
        settings.NARRATOR_NUM_RETRIES = 3
    if not hasattr(settings, "NARRATOR_TIMEOUT"):
        settings.NARRATOR_TIMEOUT = 60

    # -------------------------
    # Snippet grid
    # -------------------------
    if not hasattr(settings, "MAX_SNIPPETS"):
        settings.MAX_SNIPPETS = 128

    if not hasattr(settings, "LOGGING"):
        settings.LOGGING = LOGGING
