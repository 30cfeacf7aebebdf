"""Binary classification metrics and a plain-text report.

All arithmetic is plain Python floats over integer counts, so two
independent implementations of the same definitions produce bit-equal
values. Class 0 is scored like any other class: a prediction of 0 counts
as a positive for class 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .errors import EmptyInput, LengthMismatch

REPORT_ROWS = ("0", "1", "accuracy", "macro avg", "weighted avg")


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    per_class: dict[int, ClassMetrics]
    accuracy: float
    macro_avg: ClassMetrics
    weighted_avg: ClassMetrics
    confusion: dict[str, int]  # TP/FP/FN/TN with class 1 as positive
    zero_division_hit: bool

    def to_dict(self) -> dict:
        def row(m: ClassMetrics) -> dict:
            return {"precision": m.precision, "recall": m.recall,
                    "f1": m.f1, "support": m.support}

        return {
            "0": row(self.per_class[0]),
            "1": row(self.per_class[1]),
            "accuracy": self.accuracy,
            "macro avg": row(self.macro_avg),
            "weighted avg": row(self.weighted_avg),
            "confusion": dict(self.confusion),
            "zero_division_hit": self.zero_division_hit,
        }


def _safe_div(num: int, den: int) -> tuple[float, bool]:
    if den == 0:
        return 0.0, True
    return num / den, False


def compute_metrics(y_true, y_pred) -> MetricsReport:
    """Per-class precision/recall/F1 plus accuracy, macro and weighted rows.

    Undefined ratios (zero denominators) score 0.0; the report flags that a
    zero division happened and a RuntimeWarning is emitted once.
    """
    true = [int(v) for v in y_true]
    pred = [int(v) for v in y_pred]
    if len(true) != len(pred):
        raise LengthMismatch(f"{len(true)} labels vs {len(pred)} predictions")
    if not true:
        raise EmptyInput("cannot score an empty label list")
    bad = sorted({v for v in true + pred} - {0, 1})
    if bad:
        raise ValueError(f"labels must be 0 or 1, got {bad}")

    hit_zero = False
    per_class: dict[int, ClassMetrics] = {}
    for cls in (0, 1):
        tp = sum(1 for t, p in zip(true, pred) if t == cls and p == cls)
        predicted = sum(1 for p in pred if p == cls)
        actual = sum(1 for t in true if t == cls)
        precision, z1 = _safe_div(tp, predicted)
        recall, z2 = _safe_div(tp, actual)
        f1, z3 = _safe_div_f1(precision, recall)
        hit_zero = hit_zero or z1 or z2 or z3
        per_class[cls] = ClassMetrics(precision, recall, f1, actual)

    confusion = {
        "TP": sum(1 for t, p in zip(true, pred) if t == 1 and p == 1),
        "FP": sum(1 for t, p in zip(true, pred) if t == 0 and p == 1),
        "FN": sum(1 for t, p in zip(true, pred) if t == 1 and p == 0),
        "TN": sum(1 for t, p in zip(true, pred) if t == 0 and p == 0),
    }
    total = len(true)
    accuracy = (confusion["TP"] + confusion["TN"]) / total
    macro = ClassMetrics(
        (per_class[0].precision + per_class[1].precision) / 2,
        (per_class[0].recall + per_class[1].recall) / 2,
        (per_class[0].f1 + per_class[1].f1) / 2,
        total,
    )
    weighted = ClassMetrics(
        (per_class[0].precision * per_class[0].support
         + per_class[1].precision * per_class[1].support) / total,
        (per_class[0].recall * per_class[0].support
         + per_class[1].recall * per_class[1].support) / total,
        (per_class[0].f1 * per_class[0].support
         + per_class[1].f1 * per_class[1].support) / total,
        total,
    )
    if hit_zero:
        warnings.warn(
            "a precision, recall, or F1 denominator was zero; scored as 0.0",
            RuntimeWarning,
            stacklevel=2,
        )
    return MetricsReport(per_class, accuracy, macro, weighted, confusion, hit_zero)


def _safe_div_f1(precision: float, recall: float) -> tuple[float, bool]:
    if precision + recall == 0.0:
        return 0.0, True
    return 2 * precision * recall / (precision + recall), False


def render_report(report: MetricsReport) -> str:
    """Fixed-width text table with one row per entry in REPORT_ROWS."""
    header = f"{'':>14} {'precision':>9} {'recall':>9} {'f1-score':>9} {'support':>9}"
    lines = [header, ""]
    for cls in (0, 1):
        m = report.per_class[cls]
        lines.append(
            f"{cls:>14} {m.precision:>9.2f} {m.recall:>9.2f} "
            f"{m.f1:>9.2f} {m.support:>9}"
        )
    lines.append("")
    total = report.macro_avg.support
    lines.append(f"{'accuracy':>14} {'':>9} {'':>9} {report.accuracy:>9.2f} {total:>9}")
    for name, m in (("macro avg", report.macro_avg),
                    ("weighted avg", report.weighted_avg)):
        lines.append(
            f"{name:>14} {m.precision:>9.2f} {m.recall:>9.2f} "
            f"{m.f1:>9.2f} {m.support:>9}"
        )
    return "\n".join(lines) + "\n"
