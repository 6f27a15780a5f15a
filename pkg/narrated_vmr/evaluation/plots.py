"""
Static plots: per-sample IoU histogram and the alpha-sweep curve.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  pylint: disable=wrong-import-position


def plot_iou_histogram(report, path, bins: int = 20) -> Path:
    ious = [iou for _, iou in report.per_sample]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(ious, bins=bins, range=(0.0, 1.0), color="tab:blue", edgecolor="white")
    for m, value in report.iou_at.items():
        ax.axvline(m, color="tab:red", linestyle="--", linewidth=1)
        ax.text(m, ax.get_ylim()[1] * 0.95, f" IoU@{m}: {value:.1f}", fontsize=8, va="top")
    ax.set_xlabel("temporal IoU")
    ax.set_ylabel("samples")
    ax.set_title(f"{report.split_name or 'all'} (n={report.n}, mIoU {report.miou:.2f})")
    return _save(fig, path)


def plot_alpha_sweep(rows, path) -> Path:
    alphas = [row["alpha"] for row in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, label in (("iou@0.5", "IoU@0.5"), ("iou@0.7", "IoU@0.7"), ("miou", "mIoU")):
        ax.plot(alphas, [row[key] for row in rows], marker="o", label=label)
    ax.set_xlabel("alpha")
    ax.set_ylabel("%")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
