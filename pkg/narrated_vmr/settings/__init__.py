"""
Settings namespace for narrated_vmr.

``NARRATED_VMR_SETTINGS`` selects the settings module (``common`` by default,
``test`` under pytest).
"""

import importlib
import os
from types import SimpleNamespace

settings = SimpleNamespace()

_module = importlib.import_module(
    f"narrated_vmr.settings.{os.environ.get('NARRATED_VMR_SETTINGS', 'common')}"
)
_module.plugin_settings(settings)
