"""
Command-line interface: ``narrated-vmr <command> [options]``.

Commands follow the pipeline stages so the narration cache is built once and
reused by every training and evaluation run::

    narrated-vmr make-synthetic --out synthetic
    narrated-vmr narrate --config run.json
    narrated-vmr train --config run.json [--resume]
    narrated-vmr eval --config run.json [--split cd-test-ood] [--alpha 0.5]
    narrated-vmr predict --config run.json --split cd-test-ood
    narrated-vmr sweep --config run.json --split cd-test-ood

Exit codes: 0 success, 1 invalid input, 2 runtime failure, 3 narrator failure.
"""

import argparse
import json
import logging
import logging.config
import sys
from pathlib import Path

from dotenv import load_dotenv

from narrated_vmr import __version__
from narrated_vmr.config.loader import load_run_config
from narrated_vmr.datamodel.dataset import GroundingDataset
from narrated_vmr.datamodel.manifest import load_manifest
from narrated_vmr.decorators import handle_cli_errors
from narrated_vmr.evaluation.inference import branch_scores, predict
from narrated_vmr.evaluation.plots import plot_alpha_sweep, plot_iou_histogram
from narrated_vmr.evaluation.splits import EVAL_SPLITS, evaluate_splits
from narrated_vmr.evaluation.sweep import DEFAULT_ALPHAS, alpha_sweep, write_sweep
from narrated_vmr.exceptions import NarrationError, ValidationError
from narrated_vmr.modeling.checkpoint import load_checkpoint, model_from_checkpoint
from narrated_vmr.narration.cache import NarrativeCache
from narrated_vmr.narration.clients import get_narrator_client
from narrated_vmr.narration.narrate import narrate_videos
from narrated_vmr.narration.text import EmbeddingTable
from narrated_vmr.settings import settings
from narrated_vmr.training.synthetic import build_synthetic_dataset
from narrated_vmr.training.trainer import BEST_CHECKPOINT, build_model, fit
from narrated_vmr.utils import artifact_stamp, write_jsonl

logger = logging.getLogger(__name__)

EVAL_REPORT = "eval_report.jsonl"
EVAL_TABLE = "eval_table.txt"


def config_overrides(args) -> dict:
    """Merge patch built from the flags that shadow config keys."""
    patch = {}
    if getattr(args, "alpha", None) is not None:
        patch["fusion"] = {"alpha": args.alpha}
    if getattr(args, "seed", None) is not None:
        patch["seed"] = args.seed
    if getattr(args, "narrator_mode", None):
        patch["narrator"] = {"mode": args.narrator_mode}
    if getattr(args, "split", None):
        patch["eval_splits"] = [args.split]
    return patch


def _load_config(args):
    return load_run_config(args.config, overrides=config_overrides(args))


def _selected_splits(config) -> list:
    """Configured eval splits, else the standard generalization splits."""
    return list(config.eval_splits or EVAL_SPLITS)


def _report(data) -> None:
    sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


class DatasetLoader:
    """Builds datasets of a run config, sharing one embedding table and narrator."""

    def __init__(self, config):
        config.require_paths("dataset.embeddings")
        self.config = config
        self.table = EmbeddingTable.from_text_file(config.dataset.embeddings, limit=config.dataset.embedding_limit)
        self.narrator = get_narrator_client(config.narrator)
        self.cache = NarrativeCache(config.narrator["cache_dir"])

    def load(self, manifest_path):
        return GroundingDataset(
            load_manifest(manifest_path),
            self.table,
            self.narrator,
            self.cache,
            interval=self.config.narrator["interval"],
            max_snippets=self.config.dataset.max_snippets,
            expansion_iou_threshold=self.config.train.expansion_iou_threshold,
        )

    def load_splits(self, splits) -> dict:
        """Dataset per requested split; None where the manifest is not configured or not on disk."""
        manifests = self.config.dataset.manifests()
        datasets = {}
        for split in splits:
            path = manifests.get(split)
            datasets[split] = self.load(path) if path and Path(path).is_file() else None
        return datasets


def _loaded(datasets: dict, action: str) -> dict:
    """The splits that have a dataset, warning about the others."""
    loaded = {}
    for split, dataset in datasets.items():
        if dataset is None:
            logger.warning("No manifest for split '%s'; skipping", split)
        else:
            loaded[split] = dataset
    if not loaded:
        raise ValidationError(f"no split to {action} has a manifest; set dataset.splits or pass --split")
    return loaded


def _load_model(config, args, dims):
    checkpoint = Path(args.checkpoint) if args.checkpoint else Path(config.output_dir) / BEST_CHECKPOINT
    model_fingerprint = config.model_fingerprint(dims)
    archive = load_checkpoint(checkpoint, expected_fingerprint=model_fingerprint)
    logger.info("Loaded %s (epoch %d)", checkpoint, archive["epoch"])
    return model_from_checkpoint(archive, alpha=config.fusion.alpha), model_fingerprint


@handle_cli_errors
def cmd_make_synthetic(args):
    paths = build_synthetic_dataset(
        args.out,
        n_pairs=args.pairs,
        d_v=args.feature_dim,
        n_snippets=args.snippets,
        narrative_only_fraction=args.narrative_only_fraction,
        seed=args.seed,
    )
    _report({name: str(path) for name, path in vars(paths).items()})


@handle_cli_errors
def cmd_narrate(args):
    config = _load_config(args)
    config.require_paths("dataset.train")
    videos = {}
    for split, path in config.dataset.manifests().items():
        if not Path(path).is_file():
            logger.warning("No manifest for split '%s' at %s; skipping", split, path)
            continue
        for entry in load_manifest(path).entries:
            videos.setdefault(entry.video_id, entry.duration)

    client = get_narrator_client(config.narrator)
    summary = narrate_videos(
        videos.items(),
        client,
        NarrativeCache(config.narrator["cache_dir"]),
        interval=config.narrator["interval"],
        parallelism=config.narrator.get("parallelism"),
    )
    _report({**summary.as_dict(), "client_calls": client.calls})
    if not summary.ok:
        video_id, timestamp, error = summary.failures[0]
        raise NarrationError(video_id, timestamp, error)


@handle_cli_errors
def cmd_train(args):
    config = _load_config(args)
    config.require_paths("dataset.train", "dataset.embeddings")
    loader = DatasetLoader(config)
    train_set = loader.load(config.dataset.train)
    val_set = loader.load(config.dataset.val) if config.dataset.val else None

    model = build_model(config, train_set.dims)
    result = fit(model, train_set, config, val_set=val_set, resume=args.resume)
    _report({
        "best": str(result.best_path),
        "last": str(result.last_path),
        "log": str(result.log_path),
        "init_fingerprint": result.init_fingerprint,
        "final": result.history[-1] if result.history else None,
    })


@handle_cli_errors
def cmd_eval(args):
    config = _load_config(args)
    loader = DatasetLoader(config)
    splits = _selected_splits(config)
    datasets = loader.load_splits(splits)
    loaded = [dataset for dataset in datasets.values() if dataset is not None]
    if not loaded:
        raise ValidationError(f"no evaluation split has a manifest: {', '.join(splits)}; set dataset.splits")
    model, model_fingerprint = _load_model(config, args, loaded[0].dims)

    reports, table = evaluate_splits(model, datasets, splits=splits)
    output_dir = Path(config.output_dir)
    stamp = {**artifact_stamp(model_fingerprint, config.seed), "alpha": config.fusion.alpha}
    write_jsonl(output_dir / EVAL_REPORT, [{**report.as_record(), **stamp} for report in reports])
    (output_dir / EVAL_TABLE).write_text(table, encoding="utf-8")
    for report in reports:
        plot_iou_histogram(report, output_dir / f"iou_{report.split_name}.png")
    sys.stdout.write(table)


@handle_cli_errors
def cmd_predict(args):
    config = _load_config(args)
    loader = DatasetLoader(config)
    datasets = _loaded(loader.load_splits(_selected_splits(config)), "predict")
    model, model_fingerprint = _load_model(config, args, next(iter(datasets.values())).dims)

    stamp = {**artifact_stamp(model_fingerprint, config.seed), "alpha": config.fusion.alpha}
    written = {}
    for split, dataset in datasets.items():
        path = Path(config.output_dir) / f"predictions_{split}.jsonl"
        write_jsonl(path, [{**prediction.as_record(), **stamp} for prediction in predict(model, dataset)])
        written[split] = str(path)
    _report(written)


@handle_cli_errors
def cmd_sweep(args):
    config = _load_config(args)
    loader = DatasetLoader(config)
    datasets = _loaded(loader.load_splits(_selected_splits(config)), "sweep")
    model, model_fingerprint = _load_model(config, args, next(iter(datasets.values())).dims)
    alphas = [float(a) for a in args.alphas.split(",")] if args.alphas else list(DEFAULT_ALPHAS)

    stamp = artifact_stamp(model_fingerprint, config.seed)
    output_dir = Path(config.output_dir)
    results = {}
    for split, dataset in datasets.items():
        rows = alpha_sweep(branch_scores(model, dataset), [sample.entry for sample in dataset.samples], alphas)
        write_sweep(rows, output_dir / f"sweep_{split}.tsv", output_dir / f"sweep_{split}.jsonl", stamp=stamp)
        if not args.no_plot:
            plot_alpha_sweep(rows, output_dir / f"sweep_{split}.png")
        results[split] = rows
    _report(results)


def _add_run_arguments(parser, split=True):
    parser.add_argument("--config", help="run config (JSON5); base/default.json profile when omitted")
    parser.add_argument("--seed", type=int, help="overrides seed")
    parser.add_argument("--narrator-mode", help="overrides narrator.mode")
    if split:
        parser.add_argument("--split", help="evaluate only this split")
        parser.add_argument("--alpha", type=float, help="overrides fusion.alpha")
        parser.add_argument("--checkpoint", help=f"checkpoint to load, <output_dir>/{BEST_CHECKPOINT} by default")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="narrated-vmr", description="Narrative-enhanced video moment retrieval")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    synthetic = commands.add_parser("make-synthetic", help="write a synthetic training split")
    synthetic.add_argument("--out", default="synthetic")
    synthetic.add_argument("--pairs", type=int, default=48)
    synthetic.add_argument("--feature-dim", type=int, default=32)
    synthetic.add_argument("--snippets", type=int, default=16)
    synthetic.add_argument("--narrative-only-fraction", type=float, default=0.0)
    synthetic.add_argument("--seed", type=int, default=0)
    synthetic.set_defaults(handler=cmd_make_synthetic)

    narrate = commands.add_parser("narrate", help="caption sampled frames into the narrative cache")
    _add_run_arguments(narrate, split=False)
    narrate.set_defaults(handler=cmd_narrate)

    train = commands.add_parser("train", help="train a model")
    _add_run_arguments(train, split=False)
    train.add_argument("--alpha", type=float, help="overrides fusion.alpha")
    train.add_argument("--resume", action="store_true", help="continue from <output_dir>/last.pt")
    train.set_defaults(handler=cmd_train)

    for name, handler, help_text in (
        ("eval", cmd_eval, "evaluate a checkpoint on the generalization splits"),
        ("predict", cmd_predict, "write top-1 moments"),
    ):
        command = commands.add_parser(name, help=help_text)
        _add_run_arguments(command)
        command.set_defaults(handler=handler)

    sweep = commands.add_parser("sweep", help="metrics over a grid of fusion weights")
    _add_run_arguments(sweep)
    sweep.add_argument("--alphas", help="comma-separated alpha grid, default " + ",".join(map(str, DEFAULT_ALPHAS)))
    sweep.add_argument("--no-plot", action="store_true")
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    load_dotenv()
    logging.config.dictConfig(settings.LOGGING)
    if args.verbose:
        logging.getLogger("narrated_vmr").setLevel(logging.DEBUG)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
