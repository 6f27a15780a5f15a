"""
Exception types raised across narrated_vmr.
"""


class NarratedVMRError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NarratedVMRError):
    """
    Invalid input, configuration or data file.

    Carries every message found so callers can report them all at once.
    """

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class ShapeError(ValidationError):
    """Tensor or matrix shapes do not line up."""


class RangeError(ValidationError):
    """A value lies outside its allowed range."""


class NarrationError(NarratedVMRError):
    """A narrator client failed for one frame of one video."""

    def __init__(self, video_id, timestamp, cause=None):
        self.video_id = video_id
        self.timestamp = timestamp
        self.cause = cause
        detail = f": {cause}" if cause else ""
        super().__init__(f"Narration failed for video '{video_id}' at t={timestamp}{detail}")


class NonFiniteLossError(NarratedVMRError):
    """Training produced a NaN or infinite loss."""

    def __init__(self, message, snapshot=None):
        self.snapshot = snapshot or {}
        super().__init__(message)


class FingerprintMismatchError(NarratedVMRError):
    """A checkpoint was produced under a different configuration."""

    def __init__(self, expected, found):
        self.expected = expected
        self.found = found
        super().__init__(f"Config fingerprint mismatch: expected {expected}, checkpoint has {found}")


class CheckpointError(NarratedVMRError):
    """A checkpoint archive is missing or unreadable."""
