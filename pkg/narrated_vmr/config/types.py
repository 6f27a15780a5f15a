"""
Typed views of a validated run configuration.
"""

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from narrated_vmr.exceptions import ValidationError
from narrated_vmr.utils import fingerprint


@dataclass(frozen=True)
class EncoderConfig:
    """Hidden size, heads and merge variant shared by both branches."""

    d: int = 128
    heads: int = 8
    dropout: float = 0.2
    merge_mode: str = "concat_mlp"
    layer_norm: bool = True
    narrative_merge: bool = True

    def __post_init__(self):
        errors = []
        if self.d % self.heads:
            errors.append(f"encoder.d ({self.d}) must be divisible by encoder.heads ({self.heads})")
        if not 0 <= self.dropout < 1:
            errors.append(f"encoder.dropout must be in [0, 1), got {self.dropout}")
        if errors:
            raise ValidationError(errors)


@dataclass(frozen=True)
class FusionConfig:
    alpha: float = 0.5
    paragraph_branch: bool = True
    separate_branch_losses: bool = False

    def __post_init__(self):
        if self.alpha < 0:
            raise ValidationError(f"fusion.alpha must be >= 0, got {self.alpha}")


@dataclass(frozen=True)
class TrainConfig:
    """
    Optimization settings.

    ``seed`` and ``alpha`` mirror the run's seed and ``fusion.alpha``.
    """

    epochs: int = 100
    batch_size: int = 16
    learning_rate: float = 0.0005
    grad_clip: float = 1.0
    lambda_h: float = 5.0
    expansion_iou_threshold: float = 0.7
    val_fraction: float = 0.1
    seed: int = 0
    alpha: float = 0.5

    def __post_init__(self):
        errors = []
        for name in ("epochs", "batch_size", "grad_clip"):
            if not getattr(self, name) > 0:
                errors.append(f"train.{name} must be positive, got {getattr(self, name)}")
        if self.learning_rate < 0:
            errors.append(f"train.learning_rate must be >= 0, got {self.learning_rate}")
        if self.lambda_h < 0:
            errors.append(f"train.lambda_h must be >= 0, got {self.lambda_h}")
        if not 0 < self.expansion_iou_threshold <= 1:
            errors.append(f"train.expansion_iou_threshold must be in (0, 1], got {self.expansion_iou_threshold}")
        if errors:
            raise ValidationError(errors)


@dataclass(frozen=True)
class DatasetConfig:
    train: Optional[str] = None
    val: Optional[str] = None
    splits: dict = field(default_factory=dict)
    embeddings: Optional[str] = None
    embedding_limit: Optional[int] = None
    max_snippets: int = 128

    def manifests(self) -> dict:
        """Manifest path by split name: every ``splits`` entry plus ``train`` and ``val`` when set."""
        manifests = dict(self.splits)
        manifests.update({name: getattr(self, name) for name in ("train", "val") if getattr(self, name)})
        return manifests


@dataclass(frozen=True)
class RunConfig:
    """
    Effective configuration of one command.

    ``raw`` is the merged, validated dictionary the typed fields were built
    from; paths in it are already resolved against the config file location.
    """

    dataset: DatasetConfig
    narrator: dict
    encoder: EncoderConfig
    fusion: FusionConfig
    train: TrainConfig
    output_dir: str
    seed: int
    eval_splits: Optional[tuple] = None
    raw: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        fusion = FusionConfig(**data.get("fusion", {}))
        dataset = dict(data.get("dataset", {}))
        dataset["splits"] = {k: v for k, v in (dataset.get("splits") or {}).items() if v}
        eval_splits = data.get("eval_splits")
        return cls(
            dataset=DatasetConfig(**dataset),
            narrator=dict(data.get("narrator", {})),
            encoder=EncoderConfig(**data.get("encoder", {})),
            fusion=fusion,
            train=TrainConfig(**data.get("train", {}), seed=data["seed"], alpha=fusion.alpha),
            output_dir=data["output_dir"],
            seed=data["seed"],
            eval_splits=tuple(eval_splits) if eval_splits else None,
            raw=data,
        )

    def model_fingerprint(self, dims: dict) -> str:
        """
        Fingerprint of everything that shapes the parameters.

        ``alpha`` is left out: it only weights the branch scores, so one
        checkpoint serves every alpha.
        """
        return fingerprint({
            "encoder": asdict(self.encoder),
            "paragraph_branch": self.fusion.paragraph_branch,
            "dims": dims,
        })

    def run_fingerprint(self, dims: dict) -> str:
        """Model fingerprint plus the optimization settings and seed."""
        return fingerprint({
            "model": self.model_fingerprint(dims),
            "fusion": asdict(self.fusion),
            "train": asdict(self.train),
            "seed": self.seed,
        })

    def require_paths(self, *names) -> None:
        """
        Check that the named ``dataset``/``narrator`` paths are set and exist.

        Names are dotted, e.g. ``"dataset.train"``.

        Raises:
            ValidationError: listing every missing path
        """
        errors = []
        for name in names:
            section, key = name.split(".", 1)
            value = self.raw.get(section, {}).get(key)
            if not value:
                errors.append(f"{name}: required for this command")
            elif not Path(value).exists():
                errors.append(f"{name}: path does not exist: {value}")
        if errors:
            raise ValidationError(errors)
