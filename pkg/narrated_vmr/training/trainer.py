"""
The optimization loop.

Determinism: parameters are initialized right after seeding, and every epoch
reseeds torch with ``seed + epoch`` before drawing its batch order and
dropout masks, so a run resumed from ``last.pt`` replays the same epochs as
an uninterrupted one.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch.nn.utils import clip_grad_norm_
from torch.optim import Adam
from torch.optim.lr_scheduler import LambdaLR
from torch.utils.data import Subset
from tqdm import tqdm

from narrated_vmr.config.types import RunConfig
from narrated_vmr.datamodel.dataset import collate_batch
from narrated_vmr.evaluation.inference import predict
from narrated_vmr.evaluation.metrics import evaluate
from narrated_vmr.exceptions import NonFiniteLossError, ValidationError
from narrated_vmr.modeling.checkpoint import load_checkpoint, save_checkpoint
from narrated_vmr.modeling.gradcheck import parameter_fingerprint
from narrated_vmr.modeling.model import NarratedGroundingModel
from narrated_vmr.training.losses import model_loss
from narrated_vmr.utils import artifact_stamp, seed_everything, write_jsonl

logger = logging.getLogger(__name__)

LAST_CHECKPOINT = "last.pt"
BEST_CHECKPOINT = "best.pt"
TRAIN_LOG = "train_log.jsonl"


@dataclass
class FitResult:
    best_path: Path
    last_path: Path
    log_path: Path
    history: list = field(default_factory=list)
    init_fingerprint: str = ""


def build_model(config: RunConfig, dims: dict) -> NarratedGroundingModel:
    """Seed every RNG with the run seed, then initialize the model."""
    seed_everything(config.seed)
    return NarratedGroundingModel(dims, config.encoder, config.fusion)


def linear_decay(epochs: int):
    """
    LambdaLR factor falling linearly from 1 at epoch 0 to 0 at the final epoch.

    A single-epoch run keeps the full learning rate.
    """
    if epochs <= 1:
        return lambda epoch: 1.0
    return lambda epoch: max(0.0, 1.0 - epoch / (epochs - 1))


def split_validation(dataset, val_fraction: float, seed: int):
    """
    Hold out the last ``val_fraction`` of a seeded permutation of *dataset*.

    Returns:
        (train_subset, val_subset or None)
    """
    n = len(dataset)
    n_val = int(round(n * val_fraction))
    if n_val == 0 or n_val >= n:
        return dataset, None
    order = np.random.default_rng(seed).permutation(n)
    return Subset(dataset, order[:-n_val].tolist()), Subset(dataset, order[-n_val:].tolist())


def _samples(dataset) -> list:
    if isinstance(dataset, Subset):
        return [dataset.dataset.samples[i] for i in dataset.indices]
    return list(dataset.samples)


def _miou(model, dataset) -> float:
    samples = _samples(dataset)
    return evaluate(predict(model, samples), [sample.entry for sample in samples]).miou


def _parameter_norms(model) -> dict:
    return {name: float(p.detach().norm()) for name, p in model.named_parameters()}


def fit(model: NarratedGroundingModel, train_set, config: RunConfig, output_dir=None, val_set=None, resume=False):
    """
    Train *model* with Adam, linear learning-rate decay and gradient clipping.

    Writes ``last.pt`` after every epoch, ``best.pt`` whenever the selection
    mIoU improves (validation set, else the training set) and one JSONL log
    record per epoch.

    Args:
        model: freshly built (see :func:`build_model`) or to be restored from ``last.pt``
        train_set: GroundingDataset
        config: effective run configuration
        output_dir: checkpoint and log directory, ``config.output_dir`` by default
        val_set: explicit validation set; otherwise carved from *train_set* by ``train.val_fraction``
        resume: continue from ``output_dir/last.pt``

    Raises:
        FingerprintMismatchError: when resuming a run with a different configuration
        NonFiniteLossError: when a batch loss is NaN or infinite
    """
    train = config.train
    output_dir = Path(output_dir or config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    last_path, best_path, log_path = output_dir / LAST_CHECKPOINT, output_dir / BEST_CHECKPOINT, output_dir / TRAIN_LOG

    run_fingerprint = config.run_fingerprint(model.dims)
    model_fingerprint = config.model_fingerprint(model.dims)
    stamp = artifact_stamp(run_fingerprint, config.seed)

    if val_set is None:
        train_set, val_set = split_validation(train_set, train.val_fraction, config.seed)
    if len(train_set) == 0:
        raise ValidationError("training set is empty")

    optimizer = Adam(model.parameters(), lr=train.learning_rate)
    scheduler = LambdaLR(optimizer, linear_decay(train.epochs))

    start_epoch = 0
    best_score = -math.inf
    history = []
    init_fingerprint = parameter_fingerprint(model)
    if resume:
        archive = load_checkpoint(last_path, expected_fingerprint=run_fingerprint)
        model.load_state_dict(archive["state_dict"])
        optimizer.load_state_dict(archive["optimizer"])
        scheduler.load_state_dict(archive["scheduler"])
        start_epoch = archive["epoch"] + 1
        best_score = archive["trainer"]["best_score"]
        history = archive["trainer"]["history"]
        init_fingerprint = archive["trainer"]["init_fingerprint"]
        logger.info("Resuming %s from epoch %d", output_dir, start_epoch)
    else:
        log_path.unlink(missing_ok=True)

    logger.info(
        "Training %d samples (%d held out) for %d epochs, init fingerprint %s",
        len(train_set), len(val_set) if val_set is not None else 0, train.epochs, init_fingerprint[:12],
    )

    alpha = model.effective_alpha
    for epoch in tqdm(range(start_epoch, train.epochs), desc="train", unit="epoch", initial=start_epoch,
                      total=train.epochs):
        torch.manual_seed(config.seed + epoch)
        order = torch.randperm(len(train_set)).tolist()
        lr = optimizer.param_groups[0]["lr"]
        model.train()
        totals = {"total": 0.0, "vmr": 0.0, "highlight": 0.0}
        n_batches = 0
        for first in range(0, len(order), train.batch_size):
            indices = order[first:first + train.batch_size]
            batch = collate_batch([train_set[i] for i in indices])
            losses = model_loss(model(batch), batch, train.lambda_h, alpha, config.fusion.separate_branch_losses)
            if not torch.isfinite(losses["total"]):
                raise NonFiniteLossError(
                    f"non-finite loss at epoch {epoch}",
                    snapshot={
                        "epoch": epoch,
                        "batch_ids": [list(key) for key in batch.keys],
                        "losses": {name: float(value) for name, value in losses.items()},
                        "parameter_norms": _parameter_norms(model),
                    },
                )
            optimizer.zero_grad()
            losses["total"].backward()
            clip_grad_norm_(model.parameters(), train.grad_clip)
            optimizer.step()
            for name, value in losses.items():
                totals[name] += float(value)
            n_batches += 1
        scheduler.step()

        record = {
            "epoch": epoch,
            "lr": lr,
            **{f"loss_{name}": value / n_batches for name, value in totals.items()},
            "train_miou": _miou(model, train_set),
            **stamp,
        }
        if val_set is not None:
            record["val_miou"] = _miou(model, val_set)
        score = record.get("val_miou", record["train_miou"])
        history.append(record)
        write_jsonl(log_path, [record], append=True)
        logger.info(
            "Epoch %d: loss %.4f (vmr %.4f, highlight %.4f), train mIoU %.2f%s",
            epoch, record["loss_total"], record["loss_vmr"], record["loss_highlight"], record["train_miou"],
            f", val mIoU {record['val_miou']:.2f}" if "val_miou" in record else "",
        )

        if score > best_score:
            best_score = score
            save_checkpoint(best_path, model, model_fingerprint, config.seed, epoch, selection_miou=score)
        save_checkpoint(
            last_path, model, run_fingerprint, config.seed, epoch,
            optimizer=optimizer.state_dict(),
            scheduler=scheduler.state_dict(),
            trainer={"best_score": best_score, "history": history, "init_fingerprint": init_fingerprint},
        )

    return FitResult(
        best_path=best_path, last_path=last_path, log_path=log_path, history=history, init_fingerprint=init_fingerprint
    )
