"""Classification metrics: confusion-matrix report, log loss, ROC and precision-recall curves."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ShapeError, ValidationError


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Rows are actual classes, columns predicted."""
    y_true = np.asarray(y_true, dtype=np.int64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.int64).ravel()
    if y_true.size != y_pred.size:
        raise ShapeError("y_true and y_pred lengths differ")
    if y_true.size == 0:
        raise ValidationError("metrics of an empty sample")
    for a in (y_true, y_pred):
        if a.min() < 0 or a.max() >= n_classes:
            raise ValidationError(f"labels must lie in [0, {n_classes})")
    return np.bincount(y_true * n_classes + y_pred, minlength=n_classes * n_classes).reshape(
        n_classes, n_classes)


def _safe_div(num, den):
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=den > 0)
    return out


def classification_report(y_true, y_pred, n_classes: int, class_names=None) -> dict:
    """Per-class precision/recall/F1 with micro, macro and weighted averages.

    Zero denominators yield 0 and are listed under ``zero_division``.
    """
    cm = confusion_matrix(y_true, y_pred, n_classes)
    tp = np.diag(cm).astype(np.float64)
    pred_pos = cm.sum(axis=0).astype(np.float64)
    actual = cm.sum(axis=1).astype(np.float64)
    precision = _safe_div(tp, pred_pos)
    recall = _safe_div(tp, actual)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    names = [str(c) for c in (class_names if class_names is not None else range(n_classes))]
    zero = [f"precision[{names[k]}]" for k in range(n_classes) if pred_pos[k] == 0]
    zero += [f"recall[{names[k]}]" for k in range(n_classes) if actual[k] == 0]

    total = cm.sum()
    micro_p = tp.sum() / pred_pos.sum()
    micro_r = tp.sum() / actual.sum()
    micro_f = 0.0 if micro_p + micro_r == 0 else 2 * micro_p * micro_r / (micro_p + micro_r)
    w = actual / total
    per_class = {
        names[k]: {"precision": float(precision[k]), "recall": float(recall[k]),
                   "f1": float(f1[k]), "support": int(actual[k])}
        for k in range(n_classes)
    }
    return {
        "per_class": per_class,
        "micro": {"precision": float(micro_p), "recall": float(micro_r), "f1": float(micro_f)},
        "macro": {"precision": float(precision.mean()), "recall": float(recall.mean()),
                  "f1": float(f1.mean())},
        "weighted": {"precision": float(w @ precision), "recall": float(w @ recall),
                     "f1": float(w @ f1)},
        "accuracy": float(tp.sum() / total),
        "support": int(total),
        "zero_division": zero,
        "confusion_matrix": cm.tolist(),
    }


def format_report(report: dict) -> str:
    """Plain-text table: one row per class, then the three averages."""
    lines = [f"{'class':>14} {'precision':>10} {'recall':>10} {'f1-score':>10} {'support':>8}"]
    for name, r in report["per_class"].items():
        lines.append(f"{name:>14} {r['precision']:10.2f} {r['recall']:10.2f} {r['f1']:10.2f} {r['support']:8d}")
    for avg in ("micro", "macro", "weighted"):
        r = report[avg]
        lines.append(f"{avg + ' avg':>14} {r['precision']:10.2f} {r['recall']:10.2f} {r['f1']:10.2f} "
                     f"{report['support']:8d}")
    lines.append(f"{'accuracy':>14} {report['accuracy']:10.4f}")
    return "\n".join(lines)


def log_loss(y_true, probabilities, n_classes: int | None = None) -> float:
    """Mean negative log probability of the true class, clamped at 1e-15."""
    P = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(y_true, dtype=np.int64).ravel()
    if P.ndim != 2 or P.shape[0] != y.size or (n_classes is not None and P.shape[1] != n_classes):
        raise ShapeError(f"probabilities {P.shape} do not match {y.size} labels")
    if np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-6):
        raise ValidationError("probability rows must sum to 1")
    return float(-np.mean(np.log(np.clip(P[np.arange(y.size), y], 1e-15, None))))


@dataclass
class CurvePoints:
    x: np.ndarray
    y: np.ndarray
    thresholds: np.ndarray
    x_name: str = "x"
    y_name: str = "y"


def write_curves(path, curves: dict) -> None:
    """One CSV holding several curves, keyed by the class each was computed for."""
    rows = []
    header = None
    for label, c in curves.items():
        header = ["class", c.x_name, c.y_name, "threshold"]
        rows += [[label, repr(float(a)), repr(float(b)), repr(float(t))]
                 for a, b, t in zip(c.x, c.y, c.thresholds)]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        w.writerows(rows)


def _binary_inputs(y_true, scores):
    y = np.asarray(y_true).ravel()
    s = np.asarray(scores, dtype=np.float64).ravel()
    if y.size != s.size:
        raise ShapeError("labels and scores differ in length")
    if not np.all(np.isin(y, (0, 1))):
        raise ValidationError("binary curves need 0/1 labels")
    return y.astype(np.int64), s


def _threshold_counts(y, s):
    """Cumulative (tp, fp) after admitting each distinct score, highest first."""
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    last = np.r_[np.flatnonzero(np.diff(s_sorted) != 0), s.size - 1]
    tp = np.cumsum(y_sorted)[last]
    fp = np.cumsum(1 - y_sorted)[last]
    return tp.astype(np.float64), fp.astype(np.float64), s_sorted[last]


def roc_curve(y_true, scores) -> CurvePoints:
    y, s = _binary_inputs(y_true, scores)
    P = y.sum()
    N = y.size - P
    if P == 0 or N == 0:
        raise ValidationError("ROC needs both classes present")
    tp, fp, thr = _threshold_counts(y, s)
    return CurvePoints(np.r_[0.0, fp / N], np.r_[0.0, tp / P], np.r_[np.inf, thr],
                       "false_positive_rate", "true_positive_rate")


def roc_auc(y_true, scores) -> tuple[CurvePoints, float]:
    """ROC curve with tied scores grouped into one step, and its trapezoid area."""
    curve = roc_curve(y_true, scores)
    return curve, float(np.trapezoid(curve.y, curve.x))


def pr_curve(y_true, scores) -> CurvePoints:
    """Precision and recall at each distinct threshold, highest first.

    The first point is the (recall 0, precision 1) endpoint at threshold +inf.
    """
    y, s = _binary_inputs(y_true, scores)
    P = y.sum()
    if P == 0:
        raise ValidationError("precision-recall curve needs at least one positive")
    tp, fp, thr = _threshold_counts(y, s)
    return CurvePoints(np.r_[0.0, tp / P], np.r_[1.0, tp / (tp + fp)], np.r_[np.inf, thr],
                       "recall", "precision")
