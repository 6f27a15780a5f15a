"""
Alpha sweep over cached branch scores.
"""

import logging
from pathlib import Path

from narrated_vmr.evaluation.inference import decode_predictions
from narrated_vmr.evaluation.metrics import evaluate
from narrated_vmr.utils import write_jsonl

logger = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.0, 0.25, 0.5, 0.75, 1.0)


def alpha_sweep(scores, annotations, alphas=DEFAULT_ALPHAS) -> list[dict]:
    """
    Metrics for every alpha in *alphas* from one set of branch scores.

    Args:
        scores: BranchScores from :func:`~narrated_vmr.evaluation.inference.branch_scores`
        annotations: ground truth with ``key``, ``tau_s``, ``tau_e``

    Returns:
        rows of ``{"alpha", "iou@0.5", "iou@0.7", "miou"}``
    """
    annotations = list(annotations)
    rows = []
    for alpha in alphas:
        report = evaluate(decode_predictions(scores, alpha), annotations)
        rows.append({
            "alpha": float(alpha),
            "iou@0.5": report.iou_at[0.5],
            "iou@0.7": report.iou_at[0.7],
            "miou": report.miou,
        })
        logger.debug("alpha=%.2f: mIoU %.2f", alpha, report.miou)
    return rows


def write_sweep(rows, tsv_path, jsonl_path=None, stamp=None) -> None:
    """Write the sweep table as TSV (2 decimals) and, optionally, full-precision JSONL."""
    lines = ["alpha\tIoU@0.5\tIoU@0.7\tmIoU"]
    lines.extend(f"{row['alpha']:.2f}\t{row['iou@0.5']:.2f}\t{row['iou@0.7']:.2f}\t{row['miou']:.2f}" for row in rows)
    tsv_path = Path(tsv_path)
    tsv_path.parent.mkdir(parents=True, exist_ok=True)
    tsv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    if jsonl_path is not None:
        write_jsonl(jsonl_path, [{**row, **(stamp or {})} for row in rows])
