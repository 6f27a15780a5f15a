"""
Narrator clients: remote LiteLLM captioning and offline fixtures.
"""

from narrated_vmr.narration.clients.base import LOCAL_PATH_MAPPING, NarratorClient, get_narrator_client

__all__ = ["LOCAL_PATH_MAPPING", "NarratorClient", "get_narrator_client"]
