"""
Test settings for narrated_vmr.
"""

from narrated_vmr.settings.common import LOGGING
from narrated_vmr.settings.common import plugin_settings as common_settings


def plugin_settings(settings):
    """
    Set up test-specific settings.

    Args:
        settings: namespace object to populate
    """
    # Tests never wait on a remote narrator.
    settings.NARRATOR_NUM_RETRIES = 0
    settings.NARRATOR_PARALLELISM = 2

    # Records must reach pytest's caplog handler on the root logger.
    settings.LOGGING = {
        **LOGGING,
        "loggers": {
            **LOGGING["loggers"],
            "narrated_vmr": {"level": "INFO", "propagate": True},
        },
    }

    # Apply common settings
    common_settings(settings)
