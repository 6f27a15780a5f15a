"""
Decorators for narrated_vmr command handlers.
"""

import json
import logging
import sys
from datetime import datetime, timezone
from functools import wraps

from litellm.exceptions import (
    APIConnectionError,
    AuthenticationError,
    NotFoundError,
    RateLimitError,
    ServiceUnavailableError,
    Timeout,
)

from narrated_vmr.exceptions import (
    CheckpointError,
    FingerprintMismatchError,
    NarrationError,
    NonFiniteLossError,
    ValidationError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_NARRATOR = 3

# Mapping of exception types to error codes, messages, and process exit codes.
# Order matters: the first matching entry wins.
EXCEPTION_MAP = {
    ValidationError: {
        "code": "validation_error",
        "message": "The provided input or configuration is invalid.",
        "exit_code": EXIT_VALIDATION,
    },
    NarrationError: {
        "code": "narration_failed",
        "message": "The narrator failed to caption one or more frames.",
        "exit_code": EXIT_NARRATOR,
    },
    AuthenticationError: {
        "code": "invalid_api_key",
        "message": "The narrator service rejected the configured credentials.",
        "exit_code": EXIT_NARRATOR,
    },
    NotFoundError: {
        "code": "narrator_config_error",
        "message": "The narrator service is misconfigured. Please check the model settings.",
        "exit_code": EXIT_NARRATOR,
    },
    (APIConnectionError, RateLimitError, ServiceUnavailableError, Timeout): {
        "code": "narrator_unavailable",
        "message": "The narrator service is currently unavailable. Please try again later.",
        "exit_code": EXIT_NARRATOR,
    },
    FingerprintMismatchError: {
        "code": "fingerprint_mismatch",
        "message": "The checkpoint was produced under a different configuration.",
        "exit_code": EXIT_RUNTIME,
    },
    CheckpointError: {
        "code": "checkpoint_error",
        "message": "The checkpoint could not be loaded.",
        "exit_code": EXIT_RUNTIME,
    },
    NonFiniteLossError: {
        "code": "non_finite_loss",
        "message": "Training diverged to a non-finite loss.",
        "exit_code": EXIT_RUNTIME,
    },
}


def error_config_for(exc):
    """
    Return the EXCEPTION_MAP entry for *exc*, or the internal-error fallback.
    """
    for exc_type, config in EXCEPTION_MAP.items():
        if isinstance(exc, exc_type):
            return config
    return {
        "code": "internal_error",
        "message": "An unexpected error occurred.",
        "exit_code": EXIT_RUNTIME,
    }


def handle_cli_errors(func):
    """
    Decorate CLI command handlers to turn exceptions into exit codes.

    The wrapped handler returns its own exit code (or None for success).
    On failure a one-line JSON error contract is written to stderr.
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            result = func(*args, **kwargs)
            return EXIT_OK if result is None else result
        except Exception as e:  # pylint: disable=broad-exception-caught
            logger.error("Command failure: %s", str(e), exc_info=True)
            error_config = error_config_for(e)
            detail = e.messages if isinstance(e, ValidationError) else str(e) or error_config["message"]
            sys.stderr.write(json.dumps({
                "error": {
                    "code": error_config["code"],
                    "message": detail,
                },
                "status": "error",
                "timestamp": datetime.now(timezone.utc).isoformat(),
            }) + "\n")
            return error_config["exit_code"]
    return wrapper
