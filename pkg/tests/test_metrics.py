import numpy as np
import pytest

from identiface.errors import DataError
from identiface.metrics import (
    EvalReport,
    classification_report,
    confusion_csv,
    confusion_matrix,
    make_report,
    render_report,
    report_from_confusion,
)


def counting_oracle(y_true, y_pred, k):
    """Independent brute-force counter over the label pairs."""
    cm = [[0] * k for _ in range(k)]
    for t, p in zip(y_true, y_pred):
        cm[t][p] += 1
    precision, recall, f1 = [], [], []
    for c in range(k):
        tp = cm[c][c]
        colsum = sum(cm[r][c] for r in range(k))
        rowsum = sum(cm[c])
        p = tp / colsum if colsum else 0.0
        r = tp / rowsum if rowsum else 0.0
        f = 2 * p * r / (p + r) if (p + r) else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(f)
    acc = sum(cm[c][c] for c in range(k)) / max(1, len(y_true))
    return np.array(cm), np.array(precision), np.array(recall), np.array(f1), acc


def test_perfect_predictions_are_diagonal():
    y = [0, 1, 2, 2, 1, 0]
    report = make_report(y, y, ["a", "b", "c"])
    assert report.accuracy == 1.0
    assert np.trace(report.confusion) == 6
    assert (report.confusion - np.diag(np.diag(report.confusion)) == 0).all()
    np.testing.assert_array_equal(report.precision, [1, 1, 1])


def test_empty_inputs_error():
    assert confusion_matrix([], [], 3).sum() == 0
    with pytest.raises(DataError):
        make_report([], [], ["a", "b", "c"])


def test_hand_counted_2x2():
    cm = confusion_matrix([0, 0, 1, 1], [0, 1, 1, 1], 2)
    np.testing.assert_array_equal(cm, [[1, 1], [0, 2]])
    report = make_report([0, 0, 1, 1], [0, 1, 1, 1], ["x", "y"])
    assert report.accuracy == pytest.approx(0.75)
    # frozen hand-evaluated values
    assert report.precision[0] == pytest.approx(1.0)
    assert report.recall[0] == pytest.approx(0.5)
    assert report.f1[0] == pytest.approx(2.0 / 3.0)
    assert report.precision[1] == pytest.approx(2.0 / 3.0)
    assert report.recall[1] == pytest.approx(1.0)
    assert report.f1[1] == pytest.approx(0.8)


def test_zero_column_precision_zero():
    cm = np.array([[3, 0], [2, 0]])
    precision, recall, f1 = classification_report(cm)
    assert precision[1] == 0.0
    assert recall[1] == 0.0
    assert f1[1] == 0.0


def test_length_mismatch_and_bad_labels():
    with pytest.raises(DataError):
        confusion_matrix([0, 1], [0], 2)
    with pytest.raises(DataError):
        confusion_matrix([0, 2], [0, 1], 2)


def test_metrics_match_counting_oracle_randomized():
    rng = np.random.default_rng(8)
    for _ in range(50):
        k = int(rng.integers(2, 7))
        n = int(rng.integers(1, 60))
        y_true = rng.integers(0, k, size=n).tolist()
        y_pred = rng.integers(0, k, size=n).tolist()
        report = make_report(y_true, y_pred, [f"c{i}" for i in range(k)])
        cm, precision, recall, f1, acc = counting_oracle(y_true, y_pred, k)
        np.testing.assert_array_equal(report.confusion, cm)
        np.testing.assert_array_equal(report.precision, precision)
        np.testing.assert_array_equal(report.recall, recall)
        np.testing.assert_array_equal(report.f1, f1)
        assert report.accuracy == acc
        # invariants: row sums are support; accuracy is support-weighted recall
        np.testing.assert_array_equal(report.support, cm.sum(axis=1))
        weighted = (report.recall * report.support).sum() / report.support.sum()
        assert report.accuracy == pytest.approx(weighted, abs=1e-12)


def test_render_perfect_report_shows_100():
    report = make_report([0, 1], [0, 1], ["neg", "pos"])
    text = render_report(report)
    assert "100%" in text
    assert "neg" in text and "pos" in text


def test_render_is_pure():
    report = make_report([0, 1, 1], [0, 1, 0], ["neg", "pos"])
    assert render_report(report) == render_report(report)


def test_render_integer_percent_rounding():
    report = EvalReport(
        confusion=np.array([[953, 47], [0, 1000]]),
        labels=["a", "b"],
        accuracy=0.953,
        precision=np.array([0.953, 0.5]),
        recall=np.array([0.4449, 0.6451]),
        f1=np.array([0.995, 0.004]),
        support=np.array([1000, 1000]),
    )
    text = render_report(report)
    assert "95%" in text   # 0.953 -> 95%
    assert "44%" in text   # 0.4449 -> 44%
    assert "65%" in text   # 0.6451 -> 65%


def test_report_dict_roundtrip():
    report = make_report([0, 1, 2, 1], [0, 1, 1, 1], ["a", "b", "c"])
    back = EvalReport.from_dict(report.to_dict())
    np.testing.assert_array_equal(back.confusion, report.confusion)
    assert back.accuracy == report.accuracy
    np.testing.assert_array_equal(back.f1, report.f1)


def test_confusion_csv_layout():
    report = make_report([0, 1], [1, 1], ["neg", "pos"])
    lines = confusion_csv(report).splitlines()
    assert lines[0] == "true\\pred,neg,pos"
    assert lines[1] == "neg,0,1"
    assert lines[2] == "pos,0,1"


def test_report_from_confusion_accuracy_identity():
    cm = np.array([[5, 1, 0], [2, 7, 1], [0, 0, 4]])
    report = report_from_confusion(cm, ["a", "b", "c"])
    assert report.accuracy == pytest.approx(np.trace(cm) / cm.sum())
