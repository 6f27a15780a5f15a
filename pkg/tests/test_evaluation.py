"""
Tests for temporal IoU metrics, decoding, split evaluation, the alpha sweep and plots.
"""

import json
import logging

import numpy as np
import pytest
import torch

from narrated_vmr.config.types import EncoderConfig, FusionConfig
from narrated_vmr.datamodel.types import ManifestEntry
from narrated_vmr.evaluation.inference import BranchScores, branch_scores, decode_predictions, predict
from narrated_vmr.evaluation.metrics import EvalReport, Prediction, evaluate, temporal_iou
from narrated_vmr.evaluation.plots import plot_alpha_sweep, plot_iou_histogram
from narrated_vmr.evaluation.splits import EVAL_SPLITS, evaluate_splits, format_table
from narrated_vmr.evaluation.sweep import alpha_sweep, write_sweep
from narrated_vmr.exceptions import ValidationError
from narrated_vmr.modeling.model import NarratedGroundingModel
from narrated_vmr.modeling.predictor import SpanDistributions, decode_span

PERIODS = tuple((float(i), float(i + 1)) for i in range(4))


def _entry(query_id, tau_s, tau_e, video_id="v1"):
    return ManifestEntry(video_id, "f.nvmf", 10.0, query_id, "a man opens a door", tau_s, tau_e)


def _prediction(query_id, tau_s, tau_e, video_id="v1"):
    return Prediction(video_id=video_id, query_id=query_id, tau_s=tau_s, tau_e=tau_e)


def _scores(query_id, video, paragraph=None):
    def dist(pair):
        p_start, p_end = (np.asarray(p, dtype=np.float64) for p in pair)
        return SpanDistributions(p_start, p_end, np.zeros_like(p_start))

    return BranchScores("v1", query_id, PERIODS, dist(video), dist(paragraph) if paragraph else None)


@pytest.fixture
def small_model(synthetic_dataset):
    torch.manual_seed(0)
    return NarratedGroundingModel(synthetic_dataset.dims, EncoderConfig(d=8, heads=2, dropout=0.0), FusionConfig())


# ============================================================================
# temporal_iou / evaluate
# ============================================================================


@pytest.mark.parametrize("a,b,expected", [
    ((2.0, 6.0), (4.0, 8.0), 1 / 3),
    ((0.0, 4.0), (0.0, 4.0), 1.0),
    ((0.0, 2.0), (2.0, 4.0), 0.0),
    ((0.0, 1.0), (5.0, 9.0), 0.0),
    ((0.0, 10.0), (2.0, 4.0), 0.2),
])
def test_temporal_iou(a, b, expected):
    assert temporal_iou(a, b) == pytest.approx(expected)
    assert temporal_iou(b, a) == pytest.approx(expected)


@pytest.mark.parametrize("a", [(3.0, 3.0), (4.0, 2.0)])
def test_temporal_iou_rejects_degenerate_intervals(a):
    with pytest.raises(ValidationError):
        temporal_iou(a, (0.0, 1.0))


def test_evaluate_reports_percentages():
    annotations = [_entry("q1", 0.0, 10.0), _entry("q2", 0.0, 10.0), _entry("q3", 0.0, 10.0)]
    predictions = [_prediction("q1", 0.0, 10.0), _prediction("q2", 0.0, 6.0), _prediction("q3", 0.0, 2.0)]
    report = evaluate(predictions, annotations, split_name="cd-test-ood")
    assert report.iou_at[0.5] == pytest.approx(200 / 3)
    assert report.iou_at[0.7] == pytest.approx(100 / 3)
    assert report.miou == pytest.approx(60.0)
    assert report.n == 3
    assert [key for key, _ in report.per_sample] == [("v1", "q1"), ("v1", "q2"), ("v1", "q3")]


def test_evaluate_threshold_is_strict():
    report = evaluate([_prediction("q1", 0.0, 5.0)], [_entry("q1", 0.0, 10.0)], thresholds=(0.5,))
    assert report.iou_at[0.5] == 0.0
    assert report.miou == pytest.approx(50.0)


def test_evaluate_matches_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        gt_s, pred_s = rng.uniform(0, 8, size=2)
        gt_e, pred_e = gt_s + rng.uniform(0.1, 4), pred_s + rng.uniform(0.1, 4)
        report = evaluate([_prediction("q", pred_s, pred_e)], [_entry("q", gt_s, gt_e)])
        intersection = max(0.0, min(gt_e, pred_e) - max(gt_s, pred_s))
        iou = intersection / ((gt_e - gt_s) + (pred_e - pred_s) - intersection)
        assert report.miou == pytest.approx(100 * iou)
        assert report.iou_at[0.7] == (100.0 if iou > 0.7 else 0.0)


def test_evaluate_rejects_unmatched_ids():
    with pytest.raises(ValidationError) as excinfo:
        evaluate([_prediction("q1", 0.0, 1.0), _prediction("q9", 0.0, 1.0)],
                 [_entry("q1", 0.0, 1.0), _entry("q2", 0.0, 1.0)])
    assert "q9" in str(excinfo.value)
    assert "q2" in str(excinfo.value)


def test_evaluate_rejects_duplicate_predictions():
    with pytest.raises(ValidationError, match="duplicate predictions") as excinfo:
        evaluate([_prediction("q1", 0.0, 1.0), _prediction("q1", 2.0, 3.0)], [_entry("q1", 0.0, 1.0)])
    assert "q1" in str(excinfo.value)


def test_evaluate_rejects_empty_predictions():
    with pytest.raises(ValidationError):
        evaluate([], [_entry("q1", 0.0, 1.0)])


def test_report_record_is_json_ready():
    report = evaluate([_prediction("q1", 0.0, 1.0)], [_entry("q1", 0.0, 1.0)], split_name="cg-novel-word")
    record = json.loads(json.dumps(report.as_record()))
    assert record["iou_at"] == {"0.5": 100.0, "0.7": 100.0}
    assert record["per_sample"] == [{"video_id": "v1", "query_id": "q1", "iou": 1.0}]


# ============================================================================
# decode_predictions
# ============================================================================


def test_decode_alpha_zero_uses_video_branch_only():
    scores = [_scores("q1", ([0.7, 0.1, 0.1, 0.1], [0.1, 0.7, 0.1, 0.1]),
                      ([0.0, 0.0, 0.1, 0.9], [0.0, 0.0, 0.1, 0.9]))]
    (prediction,) = decode_predictions(scores, alpha=0.0)
    assert (prediction.start_idx, prediction.end_idx) == (0, 1)
    assert (prediction.tau_s, prediction.tau_e) == (0.0, 2.0)
    assert prediction.branch_scores["fused"] == prediction.branch_scores["video"]


def test_decode_paragraph_can_move_the_prediction():
    scores = [_scores("q1", ([0.4, 0.2, 0.2, 0.2], [0.4, 0.2, 0.2, 0.2]),
                      ([0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 0.0, 1.0]))]
    (prediction,) = decode_predictions(scores, alpha=1.0)
    assert (prediction.start_idx, prediction.end_idx) == (3, 3)
    assert prediction.branch_scores["paragraph"] == [1.0, 1.0]
    assert prediction.branch_scores["fused"] == pytest.approx([1.2, 1.2])


def test_decode_without_paragraph_branch():
    (prediction,) = decode_predictions([_scores("q1", ([0.1, 0.9, 0.0, 0.0], [0.0, 0.0, 0.9, 0.1]))], alpha=0.5)
    assert (prediction.tau_s, prediction.tau_e) == (1.0, 3.0)
    assert "paragraph" not in prediction.branch_scores


def test_branch_scores_keep_only_real_snippets(synthetic_dataset, small_model):
    scores = branch_scores(small_model, synthetic_dataset, batch_size=3)
    assert [s.key for s in scores] == [s.entry.key for s in synthetic_dataset.samples]
    assert scores[0].video.p_start.shape == (16,)
    assert np.isclose(scores[0].paragraph.p_end.sum(), 1.0)
    assert small_model.training


def test_predict_alpha_zero_equals_video_decode(synthetic_dataset, small_model):
    scores = branch_scores(small_model, synthetic_dataset)
    for prediction, sample in zip(predict(small_model, synthetic_dataset, alpha=0.0), scores):
        assert (prediction.start_idx, prediction.end_idx) == decode_span(sample.video.p_start, sample.video.p_end)


# ============================================================================
# Split evaluation and the result table
# ============================================================================


def _report(split, iou5, iou7, miou):
    return EvalReport(split_name=split, iou_at={0.5: iou5, 0.7: iou7}, miou=miou, n=10)


def test_format_table_single_split():
    table = format_table([_report("cd-test-ood", 54.28, 33.04, 50.28)])
    assert table == (
        "Method       |       cd-test-ood\n"
        "             | IoU@0.5 IoU@0.7    mIoU\n"
        "narrated_vmr |   54.28   33.04   50.28\n"
    )


def test_format_table_groups_splits():
    reports = [
        _report("cd-test-ood", 54.28, 33.04, 50.28),
        _report("cg-novel-word", 50.94, 32.66, 47.34),
        _report("cg-novel-composition", 45.0, 27.75, 42.09),
    ]
    lines = format_table(reports, method_name="ours").splitlines()
    assert len(lines) == 3
    split_names = [cell.strip() for cell in lines[0].split("|")[1:]]
    assert split_names == ["cd-test-ood", "cg-novel-word", "cg-novel-composition"]
    assert lines[2].startswith("ours   |   54.28   33.04   50.28 |   50.94")
    assert lines[2].endswith("45.00   27.75   42.09")
    assert lines[1].count("mIoU") == 3


def test_format_table_empty():
    assert format_table([]) == ""


def test_evaluate_splits_skips_missing_splits(synthetic_dataset, small_model, caplog):
    with caplog.at_level(logging.WARNING, logger="narrated_vmr.evaluation.splits"):
        reports, table = evaluate_splits(small_model, {"cd-test-ood": synthetic_dataset, "cg-novel-word": None})
    assert [report.split_name for report in reports] == ["cd-test-ood"]
    assert reports[0].n == 8
    assert "cd-test-ood" in table
    skipped = [record.getMessage() for record in caplog.records]
    assert any("cg-novel-word" in message for message in skipped)
    assert any("cg-novel-composition" in message for message in skipped)


def test_eval_split_names():
    assert EVAL_SPLITS == ("cd-test-ood", "cg-novel-word", "cg-novel-composition")


# ============================================================================
# Alpha sweep and plots
# ============================================================================


def test_alpha_sweep_rows():
    scores = [_scores("q1", ([0.4, 0.2, 0.2, 0.2], [0.4, 0.2, 0.2, 0.2]),
                      ([0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 0.0, 1.0]))]
    annotations = [ManifestEntry("v1", "f.nvmf", 4.0, "q1", "a man", 3.0, 4.0)]
    rows = alpha_sweep(scores, annotations, alphas=(0.0, 1.0))
    assert [row["alpha"] for row in rows] == [0.0, 1.0]
    assert rows[0]["miou"] == 0.0
    assert rows[1] == {"alpha": 1.0, "iou@0.5": 100.0, "iou@0.7": 100.0, "miou": 100.0}


def test_write_sweep(tmp_path):
    rows = [{"alpha": 0.0, "iou@0.5": 50.0, "iou@0.7": 25.0, "miou": 40.123}]
    write_sweep(rows, tmp_path / "sweep.tsv", tmp_path / "sweep.jsonl", stamp={"seed": 3})
    expected = "alpha\tIoU@0.5\tIoU@0.7\tmIoU\n0.00\t50.00\t25.00\t40.12\n"
    assert (tmp_path / "sweep.tsv").read_text(encoding="utf-8") == expected
    record = json.loads((tmp_path / "sweep.jsonl").read_text(encoding="utf-8"))
    assert record == {**rows[0], "seed": 3}


def test_plots_write_png(tmp_path):
    report = evaluate([_prediction("q1", 0.0, 1.0)], [_entry("q1", 0.0, 1.0)], split_name="cd-test-ood")
    histogram = plot_iou_histogram(report, tmp_path / "plots" / "iou.png")
    sweep = plot_alpha_sweep([{"alpha": 0.0, "iou@0.5": 1.0, "iou@0.7": 0.5, "miou": 2.0}], tmp_path / "sweep.png")
    for path in (histogram, sweep):
        assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
