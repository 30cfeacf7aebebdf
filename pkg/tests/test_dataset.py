import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tabext.dataset import (
    NUMERIC_FIELDS,
    EncodedExample,
    LabelStore,
    NormStats,
    PatternVocab,
    SplitSpec,
    apply_normalizer,
    build_pattern_vocab,
    dimension_names,
    encode,
    encode_matrix,
    feature_dimension,
    fit_normalizer,
    read_feature_rows,
    save_encoded_csv,
    split,
    write_feature_rows,
)
from tabext.errors import (
    EmptyTrainingSet,
    LabelNotFound,
    SchemaMismatch,
    TooFewDocuments,
    UnknownToken,
)
from tabext.features import FeatureRow


def make_row(**kw):
    base = dict(
        doc_id="d", token_index=0, RawText="70,63", TextPattern="F",
        BlockNo=1, BlockCharCount=10, LineWordCount=3, BlockWidth=400,
        LineCharCount=12, IsFirstInt=1, BlockWordCount=4, PageWidth=2480,
        PageHeight=3508, LeftAlignmentGroup=2, LeftAlignmentCount=6,
        RightAlignmentGroup=3, RightAlignmentCount=8,
        LineBlockRegex="W N F", Width=100, Height=40, CharCount=5,
        Left=200, Top=300, LeftMargin=200 / 2480, TopMargin=300 / 3508,
        FirstQuarter=1, SecondQuarter=0, ThirdQuarter=0, FourthQuarter=0,
        LineNo=2, PageNo=1, label=1,
    )
    base.update(kw)
    return FeatureRow(**base)


class TestEncoding:
    vocab = PatternVocab(("W N F", "W W"))

    def test_dimension(self):
        # 24 numeric + 5 pattern symbols + 2 vocab + 1 OOV
        assert feature_dimension(self.vocab) == 32
        assert len(dimension_names(self.vocab)) == 32

    def test_one_hot_positions(self):
        ex = encode(make_row(), self.vocab)
        assert isinstance(ex, EncodedExample)
        x = ex.features
        base = len(NUMERIC_FIELDS)
        # TextPattern 'F' is symbol index 3 of (?, W, N, F, A)
        assert list(x[base:base + 5]) == [0, 0, 0, 1, 0]
        assert list(x[base + 5:]) == [1, 0, 0]
        assert ex.label == 1

    def test_oov_pattern(self):
        x = encode(make_row(LineBlockRegex="? ? ?"), self.vocab).features
        assert x[-1] == 1.0
        assert x[-3:-1].sum() == 0.0

    def test_numeric_passthrough(self):
        x = encode(make_row(), self.vocab).features
        row = make_row()
        for i, name in enumerate(NUMERIC_FIELDS):
            assert x[i] == float(getattr(row, name))

    def test_group_ids_dropped_counts_kept(self):
        a = encode(make_row(LeftAlignmentGroup=0), self.vocab).features
        b = encode(make_row(LeftAlignmentGroup=9), self.vocab).features
        assert np.array_equal(a, b)
        assert "LeftAlignmentGroup" not in dimension_names(self.vocab)
        assert "LeftAlignmentCount" in dimension_names(self.vocab)

    def test_retained_fields_are_injective(self):
        base = encode(make_row(), self.vocab).features
        for name in NUMERIC_FIELDS:
            bumped = make_row(**{name: getattr(make_row(), name) + 1})
            assert not np.array_equal(base, encode(bumped, self.vocab).features), name

    def test_encode_matrix_shapes(self):
        rows = [make_row(token_index=i) for i in range(4)]
        X, y, keys = encode_matrix(rows, self.vocab)
        assert X.shape == (4, feature_dimension(self.vocab))
        assert y.tolist() == [1.0] * 4
        assert keys == [("d", i) for i in range(4)]


class TestVocab:
    def test_top_k_by_frequency_then_lexicographic(self):
        rows = (
            [make_row(LineBlockRegex="B") for _ in range(3)]
            + [make_row(LineBlockRegex="A") for _ in range(3)]
            + [make_row(LineBlockRegex="C")]
        )
        vocab = build_pattern_vocab(rows, k=2)
        assert vocab.patterns == ("A", "B")

    def test_oov_index_is_last(self):
        vocab = build_pattern_vocab([make_row()], k=4)
        assert vocab.index("W N F") == 0
        assert vocab.index("unseen") == len(vocab.patterns)
        assert vocab.size == len(vocab.patterns) + 1

    def test_duplicate_patterns_rejected(self):
        with pytest.raises(ValueError):
            PatternVocab(("A", "A"))


class TestNormalizer:
    def test_example_column(self):
        X = np.array([[0.0], [5.0], [10.0]])
        stats = fit_normalizer(X)
        assert apply_normalizer(X, stats).ravel().tolist() == [0.0, 0.5, 1.0]

    def test_constant_column_maps_to_zero(self):
        X = np.array([[7.0], [7.0]])
        stats = fit_normalizer(X)
        assert apply_normalizer(X, stats).ravel().tolist() == [0.0, 0.0]

    def test_out_of_range_clamps(self):
        stats = fit_normalizer(np.array([[0.0], [10.0]]))
        assert apply_normalizer(np.array([[12.0]]), stats).item() == 1.0
        assert apply_normalizer(np.array([[-3.0]]), stats).item() == 0.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyTrainingSet):
            fit_normalizer(np.empty((0, 3)))

    def test_round_trip_dict(self):
        stats = fit_normalizer(np.array([[0.0, 2.0], [4.0, 2.0]]))
        again = NormStats.from_dict(stats.to_dict())
        assert np.array_equal(again.mins, stats.mins)
        assert np.array_equal(again.maxs, stats.maxs)

    @given(
        st.lists(
            st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3),
            min_size=1,
            max_size=30,
        )
    )
    def test_idempotence(self, data):
        X = np.array(data)
        stats = fit_normalizer(X)
        once = apply_normalizer(X, stats)
        stats01 = NormStats(mins=np.zeros(3), maxs=np.ones(3))
        twice = apply_normalizer(once, stats01)
        assert np.allclose(once, twice)
        assert once.min() >= 0.0 and once.max() <= 1.0


class TestSplit:
    def test_ten_documents_sizes(self):
        docs = [f"doc{i}" for i in range(10)]
        parts = split(docs, SplitSpec(seed=42))
        assert (len(parts["train"]), len(parts["test"]), len(parts["validation"])) \
            == (7, 2, 1)

    def test_same_seed_identical(self):
        docs = [f"doc{i}" for i in range(25)]
        assert split(docs, SplitSpec(seed=3)) == split(docs, SplitSpec(seed=3))

    def test_input_order_irrelevant(self):
        docs = [f"doc{i}" for i in range(25)]
        assert split(docs, SplitSpec(seed=3)) == split(docs[::-1], SplitSpec(seed=3))

    def test_too_few(self):
        with pytest.raises(TooFewDocuments):
            split([f"d{i}" for i in range(9)], SplitSpec())

    def test_bad_fractions(self):
        with pytest.raises(ValueError):
            SplitSpec(train_fraction=0.5, test_fraction=0.2, validation_fraction=0.1)

    @given(st.integers(10, 200), st.integers(0, 2**32 - 1))
    def test_partition_properties(self, n, seed):
        docs = [f"doc{i}" for i in range(n)]
        parts = split(docs, SplitSpec(seed=seed))
        union = parts["train"] | parts["test"] | parts["validation"]
        assert union == set(docs)
        assert len(parts["train"]) + len(parts["test"]) + len(parts["validation"]) == n
        assert len(parts["test"]) == int(0.2 * n + 0.5)
        assert len(parts["validation"]) == int(0.1 * n + 0.5)


class TestLabelStore:
    def test_write_read_revisions(self, tmp_path):
        store = LabelStore(universe={"d": 5}, path=tmp_path / "labels.jsonl")
        first = store.write("d", 0, 1, source="seed")
        assert (first.label, first.revision) == (1, 1)
        second = store.write("d", 0, 0)
        assert (second.label, second.revision, second.source) == (0, 2, "human")
        assert store.read("d", 0).label == 0

    def test_read_unwritten(self):
        store = LabelStore(universe={"d": 5})
        with pytest.raises(LabelNotFound):
            store.read("d", 0)

    def test_unknown_token_rejected(self):
        store = LabelStore(universe={"d": 5})
        with pytest.raises(UnknownToken):
            store.write("d", 5, 1)
        with pytest.raises(UnknownToken):
            store.write("other", 0, 1)

    def test_bad_label_and_source(self):
        store = LabelStore(universe={"d": 5})
        with pytest.raises(ValueError):
            store.write("d", 0, 2)
        with pytest.raises(ValueError):
            store.write("d", 0, 1, source="robot")

    def test_human_overrides_seed(self, tmp_path):
        store = LabelStore(universe={"d": 5}, path=tmp_path / "labels.jsonl")
        store.write("d", 1, 1, source="seed")
        store.write("d", 1, 0, source="human")
        store.write("d", 1, 1, source="seed")  # later seed does not win
        assert store.effective("d", 1).source == "human"
        assert store.effective("d", 1).label == 0
        assert store.effective_labels() == {("d", 1): 0}

    def test_persistence_across_reopen(self, tmp_path):
        path = tmp_path / "labels.jsonl"
        store = LabelStore(universe={"d": 5}, path=path)
        store.write("d", 2, 1, source="seed")
        store.write("d", 2, 0)
        again = LabelStore(universe={"d": 5}, path=path)
        assert again.read("d", 2).revision == 2
        third = again.write("d", 2, 1)
        assert third.revision == 3

    def test_export_effective_deterministic(self, tmp_path):
        store = LabelStore(universe={"d": 3, "e": 3}, path=tmp_path / "l.jsonl")
        for doc in ("d", "e"):
            for i in range(3):
                store.write(doc, i, 0, source="seed")
        store.write("e", 1, 1)
        out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert store.export_effective(out1) == 6
        assert store.export_effective(out2) == 6
        assert out1.read_bytes() == out2.read_bytes()
        records = [json.loads(l) for l in out1.read_text().splitlines()]
        human = [r for r in records if r["source"] == "human"]
        assert len(human) == 1
        assert human[0]["doc_id"] == "e" and human[0]["token_index"] == 1


class TestFeatureRowIO:
    def test_jsonl_round_trip(self, tmp_path):
        rows = [make_row(token_index=i, RawText=f"w{i}") for i in range(5)]
        path = tmp_path / "features.jsonl"
        write_feature_rows(path, rows)
        assert read_feature_rows(path) == rows

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "features.jsonl"
        write_feature_rows(path, [make_row()])
        lines = path.read_text().splitlines()
        lines[0] = lines[0].replace("tabext-features-v1", "tabext-features-v0")
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(SchemaMismatch):
            read_feature_rows(path)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "features.jsonl"
        write_feature_rows(path, [make_row()])
        lines = path.read_text().splitlines()
        record = json.loads(lines[1])
        del record["CharCount"]
        lines[1] = json.dumps(record)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(SchemaMismatch):
            read_feature_rows(path)

    def test_encoded_csv_with_sidecar(self, tmp_path):
        vocab = PatternVocab(("W N F",))
        rows = [make_row(token_index=i) for i in range(3)]
        X, y, keys = encode_matrix(rows, vocab)
        stats = fit_normalizer(X)
        path = tmp_path / "encoded.csv"
        save_encoded_csv(path, apply_normalizer(X, stats), y, keys, vocab, stats)
        header = path.read_text().splitlines()[0].split(",")
        assert header[:3] == ["doc_id", "token_index", "label"]
        assert len(header) == 3 + feature_dimension(vocab)
        sidecar = json.loads(path.with_suffix(".csv.meta.json").read_text())
        assert sidecar["pattern_vocab"] == ["W N F"]
        assert "norm_stats" in sidecar
