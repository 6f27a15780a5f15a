"""
Checkpoint archives: named tensors plus the configuration they were trained under.
"""

import logging
from dataclasses import asdict
from pathlib import Path

import torch

from narrated_vmr import __version__
from narrated_vmr.config.types import EncoderConfig, FusionConfig
from narrated_vmr.exceptions import CheckpointError, FingerprintMismatchError
from narrated_vmr.modeling.model import NarratedGroundingModel

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "narrated_vmr.checkpoint"
CHECKPOINT_VERSION = 1


def save_checkpoint(path, model: NarratedGroundingModel, fingerprint: str, seed: int, epoch: int, **extra) -> None:
    """
    Write *model* and its provenance to *path*.

    ``extra`` holds optional resume state (optimizer, scheduler, RNG, trainer
    bookkeeping) and is stored as-is.
    """
    state_dict = {name: tensor.detach().cpu() for name, tensor in model.state_dict().items()}
    archive = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "code_version": __version__,
        "fingerprint": fingerprint,
        "config": {
            "encoder": asdict(model.encoder_config),
            "fusion": asdict(model.fusion_config),
        },
        "dims": model.dims,
        "state_dict": state_dict,
        "shapes": {name: list(tensor.shape) for name, tensor in state_dict.items()},
        "seed": seed,
        "epoch": epoch,
        **extra,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    torch.save(archive, tmp_path)
    tmp_path.replace(path)
    logger.debug("Saved checkpoint %s (epoch %d)", path, epoch)


def load_checkpoint(path, expected_fingerprint: str = None) -> dict:
    """
    Read a checkpoint archive.

    Raises:
        CheckpointError: if the file is missing or not a checkpoint archive
        FingerprintMismatchError: if *expected_fingerprint* is given and differs
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        archive = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:  # pylint: disable=broad-exception-caught
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(archive, dict) or archive.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a {CHECKPOINT_FORMAT} archive")
    if archive.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {archive.get('version')}")
    if expected_fingerprint is not None and archive["fingerprint"] != expected_fingerprint:
        raise FingerprintMismatchError(expected_fingerprint, archive["fingerprint"])
    return archive


def model_from_checkpoint(archive: dict, alpha: float = None) -> NarratedGroundingModel:
    """
    Rebuild the model stored in a loaded archive.

    Args:
        alpha: replaces the stored fusion alpha
    """
    fusion = dict(archive["config"]["fusion"])
    if alpha is not None:
        fusion["alpha"] = alpha
    model = NarratedGroundingModel(
        archive["dims"],
        EncoderConfig(**archive["config"]["encoder"]),
        FusionConfig(**fusion),
    )
    expected = {name: list(tensor.shape) for name, tensor in model.state_dict().items()}
    if expected != archive["shapes"]:
        raise CheckpointError("checkpoint tensor shapes do not match the configured model")
    model.load_state_dict(archive["state_dict"])
    return model
