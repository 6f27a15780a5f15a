"""
Evaluation over the generalization splits and the grouped result table.
"""

import logging

from narrated_vmr.evaluation.inference import predict
from narrated_vmr.evaluation.metrics import evaluate

logger = logging.getLogger(__name__)

EVAL_SPLITS = ("cd-test-ood", "cg-novel-word", "cg-novel-composition")

CELL_WIDTH = 7


def evaluate_splits(model, datasets: dict, alpha: float = None, splits=EVAL_SPLITS, method_name: str = "narrated_vmr"):
    """
    Evaluate *model* on each split that has a dataset.

    Args:
        datasets: split name -> GroundingDataset; missing or None splits are skipped
        alpha: fusion weight, the model's own when None

    Returns:
        (reports, table) where table is :func:`format_table` of the reports
    """
    reports = []
    for split in splits:
        dataset = datasets.get(split)
        if dataset is None:
            logger.warning("No manifest for split '%s'; skipping", split)
            continue
        predictions = predict(model, dataset, alpha=alpha)
        report = evaluate(predictions, [sample.entry for sample in dataset.samples], split_name=split)
        logger.info(
            "Split %s: %s mIoU %.2f (n=%d)",
            split,
            " ".join(f"IoU@{m} {value:.2f}" for m, value in report.iou_at.items()),
            report.miou,
            report.n,
        )
        reports.append(report)
    return reports, format_table(reports, method_name)


def format_table(reports, method_name: str = "narrated_vmr") -> str:
    """
    Render reports side by side, one column group per split.

    Row 1 names the splits, row 2 the metrics, row 3 holds the method's
    values with 2 decimals::

        Method       |       cd-test-ood
                     | IoU@0.5 IoU@0.7    mIoU
        narrated_vmr |   54.28   33.04   50.28
    """
    if not reports:
        return ""
    method_width = max(len("Method"), len(method_name))

    split_cells, metric_cells, value_cells = [], [], []
    for report in reports:
        metric_names = [f"IoU@{m}" for m in report.iou_at] + ["mIoU"]
        values = list(report.iou_at.values()) + [report.miou]
        group_width = max(len(report.split_name), len(metric_names) * (CELL_WIDTH + 1) - 1)
        split_cells.append(report.split_name.center(group_width))
        metric_cells.append(" ".join(f"{name:>{CELL_WIDTH}}" for name in metric_names).ljust(group_width))
        value_cells.append(" ".join(f"{value:{CELL_WIDTH}.2f}" for value in values).ljust(group_width))

    rows = [
        ("Method", split_cells),
        ("", metric_cells),
        (method_name, value_cells),
    ]
    return "\n".join(f"{label.ljust(method_width)} | {' | '.join(cells)}".rstrip() for label, cells in rows) + "\n"
