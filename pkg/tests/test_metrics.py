import random
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tabext.errors import EmptyInput, LengthMismatch
from tabext.metrics import REPORT_ROWS, compute_metrics, render_report


def oracle(true, pred):
    """Independent recomputation straight from the confusion counts."""
    tp = sum(t == 1 and p == 1 for t, p in zip(true, pred))
    fp = sum(t == 0 and p == 1 for t, p in zip(true, pred))
    fn = sum(t == 1 and p == 0 for t, p in zip(true, pred))
    tn = sum(t == 0 and p == 0 for t, p in zip(true, pred))

    def prf(tp_, fp_, fn_):
        precision = tp_ / (tp_ + fp_) if tp_ + fp_ else 0.0
        recall = tp_ / (tp_ + fn_) if tp_ + fn_ else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
        return precision, recall, f1

    return {
        "confusion": {"TP": tp, "FP": fp, "FN": fn, "TN": tn},
        "accuracy": (tp + tn) / len(true),
        # class 0 scored with 0 as the positive label: its TP is TN, etc.
        0: prf(tn, fn, fp),
        1: prf(tp, fp, fn),
    }


class TestClosedForm:
    def test_worked_confusion(self):
        true = [1, 1, 1, 1, 0, 0, 0, 0, 0, 0]
        pred = [1, 1, 1, 0, 1, 0, 0, 0, 0, 0]
        report = compute_metrics(true, pred)
        assert report.confusion == {"TP": 3, "FP": 1, "FN": 1, "TN": 5}
        assert report.accuracy == 0.8
        assert report.per_class[1].precision == 3 / 4
        assert report.per_class[1].recall == 3 / 4
        assert report.per_class[1].f1 == 0.75
        assert report.per_class[0].precision == 5 / 6
        assert report.per_class[0].recall == 5 / 6
        assert report.per_class[1].support == 4
        assert report.per_class[0].support == 6
        assert not report.zero_division_hit

    def test_perfect_predictions(self):
        report = compute_metrics([0, 1, 1], [0, 1, 1])
        assert report.accuracy == 1.0
        assert report.macro_avg.f1 == 1.0
        assert report.weighted_avg.f1 == 1.0

    def test_class_zero_uses_zero_as_positive(self):
        true = [0, 0, 1, 1]
        pred = [0, 1, 1, 1]
        report = compute_metrics(true, pred)
        flipped = compute_metrics([1 - t for t in true], [1 - p for p in pred])
        assert report.per_class[0] == flipped.per_class[1]
        assert report.per_class[1] == flipped.per_class[0]

    def test_weighted_avg_definition(self):
        true = [1, 1, 1, 0]
        pred = [1, 0, 1, 0]
        report = compute_metrics(true, pred)
        expected = (report.per_class[0].f1 * 1 + report.per_class[1].f1 * 3) / 4
        assert report.weighted_avg.f1 == expected


class TestAgainstOracle:
    def test_thousand_random_pairs(self):
        rng = random.Random(20240601)
        for trial in range(1000):
            n = rng.randint(1, 40)
            true = [rng.randint(0, 1) for _ in range(n)]
            pred = [rng.randint(0, 1) for _ in range(n)]
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                report = compute_metrics(true, pred)
            want = oracle(true, pred)
            assert report.confusion == want["confusion"], trial
            assert report.accuracy == want["accuracy"], trial
            for cls in (0, 1):
                got = report.per_class[cls]
                assert (got.precision, got.recall, got.f1) == want[cls], trial

    @given(
        st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)),
                 min_size=1, max_size=60)
    )
    def test_macro_avg_bounded_by_per_class(self, pairs):
        true = [t for t, _ in pairs]
        pred = [p for _, p in pairs]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = compute_metrics(true, pred)
        f1s = [report.per_class[0].f1, report.per_class[1].f1]
        assert min(f1s) <= report.macro_avg.f1 <= max(f1s)
        assert 0.0 <= report.accuracy <= 1.0
        assert sum(report.confusion.values()) == len(pairs)


class TestZeroDivision:
    def test_absent_class_scores_zero_with_warning(self):
        with pytest.warns(RuntimeWarning):
            report = compute_metrics([0, 0, 0], [0, 0, 0])
        assert report.zero_division_hit
        assert report.per_class[1].precision == 0.0
        assert report.per_class[1].recall == 0.0
        assert report.per_class[1].f1 == 0.0
        assert report.accuracy == 1.0

    def test_no_warning_when_defined(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            report = compute_metrics([0, 1], [0, 1])
        assert not report.zero_division_hit


class TestValidation:
    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            compute_metrics([0, 1], [0])

    def test_empty(self):
        with pytest.raises(EmptyInput):
            compute_metrics([], [])

    def test_non_binary(self):
        with pytest.raises(ValueError):
            compute_metrics([0, 2], [0, 1])


class TestRender:
    def test_row_names_and_rounding(self):
        true = [1, 1, 1, 1, 0, 0, 0, 0, 0, 0]
        pred = [1, 1, 1, 0, 1, 0, 0, 0, 0, 0]
        text = render_report(compute_metrics(true, pred))
        rows = [line.split()[0] for line in text.splitlines() if line.strip()]
        assert rows[0] == "precision"
        assert rows[1:3] == ["0", "1"]
        assert rows[3] == "accuracy"
        assert rows[4:] == ["macro", "weighted"]
        named = {r.split()[0] for r in text.splitlines()[2:] if r.strip()}
        assert named == {row.split()[0] for row in REPORT_ROWS}
        assert "0.75" in text  # class-1 row, two decimals
        assert "0.80" in text  # accuracy row

    def test_accuracy_row_shape(self):
        text = render_report(compute_metrics([0, 1], [0, 1]))
        accuracy_line = next(l for l in text.splitlines() if "accuracy" in l)
        # precision and recall cells stay blank on the accuracy row
        assert accuracy_line.split() == ["accuracy", "1.00", "2"]

    def test_to_dict_round_keys(self):
        with pytest.warns(RuntimeWarning):
            report = compute_metrics([0, 1], [1, 0])
        d = report.to_dict()
        assert set(d) == set(REPORT_ROWS) | {"confusion", "zero_division_hit"}
        assert d["confusion"] == {"TP": 0, "FP": 1, "FN": 1, "TN": 0}
