"""Feature encoding, normalization, document splits, and the label store.

The numeric vector layout is fixed: 24 numeric passthrough fields, a 5-way
one-hot for the text pattern symbol, then a one-hot over the top-K training
line patterns plus one out-of-vocabulary slot. Raw text and the page-local
alignment group ids are dropped; their signal enters via the counts and
pattern fields.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyTrainingSet,
    LabelNotFound,
    SchemaMismatch,
    TooFewDocuments,
    UnknownToken,
)
from .features import FEATURE_ROW_FIELDS, FEATURE_SCHEMA_VERSION, FeatureRow
from .textpattern import PATTERN_SYMBOLS

# Numeric FeatureRow fields that pass straight into the vector, in order.
NUMERIC_FIELDS = (
    "BlockNo", "BlockCharCount", "LineWordCount", "BlockWidth",
    "LineCharCount", "IsFirstInt", "BlockWordCount", "PageWidth",
    "PageHeight", "LeftAlignmentCount", "RightAlignmentCount",
    "Width", "Height", "CharCount", "Left", "Top", "LeftMargin", "TopMargin",
    "FirstQuarter", "SecondQuarter", "ThirdQuarter", "FourthQuarter",
    "LineNo", "PageNo",
)

DEFAULT_VOCAB_SIZE = 64
OOV_NAME = "<OOV>"

LABEL_SOURCES = ("seed", "human")


@dataclass(frozen=True)
class PatternVocab:
    """Top-K line patterns from the training split, plus one OOV slot."""

    patterns: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.patterns)) != len(self.patterns):
            raise ValueError("vocabulary patterns must be unique")

    @property
    def size(self) -> int:
        # one slot per known pattern plus the OOV slot
        return len(self.patterns) + 1

    def index(self, pattern: str) -> int:
        try:
            return self.patterns.index(pattern)
        except ValueError:
            return len(self.patterns)


def build_pattern_vocab(train_rows: Iterable[FeatureRow], k: int = DEFAULT_VOCAB_SIZE) -> PatternVocab:
    """Vocabulary of the k most frequent line patterns in the training rows.

    Ties break lexicographically so the vocabulary is deterministic.
    """
    counts: dict[str, int] = {}
    for row in train_rows:
        counts[row.LineBlockRegex] = counts.get(row.LineBlockRegex, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return PatternVocab(patterns=tuple(p for p, _ in ranked[:k]))


def dimension_names(vocab: PatternVocab) -> list[str]:
    names = list(NUMERIC_FIELDS)
    names += [f"TextPattern={s}" for s in PATTERN_SYMBOLS]
    names += [f"LineBlockRegex={p}" for p in vocab.patterns]
    names.append(f"LineBlockRegex={OOV_NAME}")
    return names


def feature_dimension(vocab: PatternVocab) -> int:
    return len(NUMERIC_FIELDS) + len(PATTERN_SYMBOLS) + vocab.size


@dataclass
class EncodedExample:
    """One token's numeric feature vector with its label and identity."""

    features: np.ndarray
    label: int
    doc_id: str
    token_index: int


def encode(row: FeatureRow, vocab: PatternVocab) -> EncodedExample:
    """Encode one FeatureRow into the fixed-length numeric vector."""
    dim = feature_dimension(vocab)
    x = np.zeros(dim, dtype=np.float64)
    for i, name in enumerate(NUMERIC_FIELDS):
        x[i] = float(getattr(row, name))
    base = len(NUMERIC_FIELDS)
    x[base + PATTERN_SYMBOLS.index(row.TextPattern)] = 1.0
    base += len(PATTERN_SYMBOLS)
    x[base + vocab.index(row.LineBlockRegex)] = 1.0
    return EncodedExample(
        features=x, label=row.label, doc_id=row.doc_id, token_index=row.token_index
    )


def encode_matrix(
    rows: Sequence[FeatureRow], vocab: PatternVocab
) -> tuple[np.ndarray, np.ndarray, list[tuple[str, int]]]:
    """Encode many rows at once; returns (X, y, [(doc_id, token_index)])."""
    dim = feature_dimension(vocab)
    X = np.zeros((len(rows), dim), dtype=np.float64)
    y = np.zeros(len(rows), dtype=np.float64)
    keys = []
    for i, row in enumerate(rows):
        ex = encode(row, vocab)
        X[i] = ex.features
        y[i] = ex.label
        keys.append((ex.doc_id, ex.token_index))
    return X, y, keys


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormStats:
    """Per-dimension training minima and maxima for min-max scaling."""

    mins: np.ndarray
    maxs: np.ndarray

    def to_dict(self) -> dict:
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "NormStats":
        return cls(
            mins=np.asarray(data["mins"], dtype=np.float64),
            maxs=np.asarray(data["maxs"], dtype=np.float64),
        )


def _as_matrix(train: Sequence[EncodedExample] | np.ndarray) -> np.ndarray:
    if isinstance(train, np.ndarray):
        return np.atleast_2d(train)
    return np.stack([ex.features for ex in train])


def fit_normalizer(train: Sequence[EncodedExample] | np.ndarray) -> NormStats:
    """Per-dimension min/max over the training examples only."""
    if len(train) == 0:
        raise EmptyTrainingSet("cannot fit a normalizer on zero examples")
    X = _as_matrix(train)
    if not np.all(np.isfinite(X)):
        raise ValueError("training features must be finite")
    return NormStats(mins=X.min(axis=0), maxs=X.max(axis=0))


def apply_normalizer(x: np.ndarray, stats: NormStats) -> np.ndarray:
    """Min-max scale to [0,1]; constant dimensions map to 0, out-of-range clamps."""
    x = np.asarray(x, dtype=np.float64)
    span = stats.maxs - stats.mins
    safe_span = np.where(span > 0, span, 1.0)
    scaled = (x - stats.mins) / safe_span
    scaled = np.where(span > 0, scaled, 0.0)
    return np.clip(scaled, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Train/test/validation split
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    test_fraction: float = 0.2
    validation_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        total = self.train_fraction + self.test_fraction + self.validation_fraction
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1.0, got {total}")
        if min(self.train_fraction, self.test_fraction, self.validation_fraction) < 0:
            raise ValueError("split fractions must be non-negative")


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def split(documents: Sequence[str], spec: SplitSpec) -> dict[str, set[str]]:
    """Deterministic document-level partition into train/test/validation.

    Documents are shuffled by seed (independent of input order), test and
    validation sizes are round(fraction * n), and the remainder goes to
    train. Splitting at document granularity avoids leaking one invoice's
    layout between partitions.
    """
    docs = sorted(set(documents))
    n = len(docs)
    if n < 10:
        raise TooFewDocuments(f"need at least 10 documents for a split, got {n}")
    perm = np.random.default_rng(spec.seed).permutation(n)
    shuffled = [docs[i] for i in perm]
    n_test = _round_half_up(spec.test_fraction * n)
    n_val = _round_half_up(spec.validation_fraction * n)
    n_train = n - n_test - n_val
    return {
        "train": set(shuffled[:n_train]),
        "test": set(shuffled[n_train:n_train + n_test]),
        "validation": set(shuffled[n_train + n_test:]),
    }


# ---------------------------------------------------------------------------
# Label store
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LabelRecord:
    doc_id: str
    token_index: int
    label: int
    source: str
    revision: int
    timestamp: float

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "token_index": self.token_index,
            "label": self.label,
            "source": self.source,
            "revision": self.revision,
            "timestamp": self.timestamp,
        }


def label_record_line(record: LabelRecord) -> str:
    return json.dumps(record.to_dict(), separators=(",", ":"))


class LabelStore:
    """Append-only store of label records keyed by (doc_id, token_index).

    Revisions increase strictly per key on every write; human-source labels
    override seed labels in exports. Writes are serialized through a lock;
    reads operate on consistent snapshots.
    """

    def __init__(
        self,
        universe: dict[str, int] | None = None,
        path: str | Path | None = None,
    ):
        self._universe = dict(universe) if universe is not None else None
        self._path = Path(path) if path is not None else None
        self._history: dict[tuple[str, int], list[LabelRecord]] = {}
        self._lock = threading.Lock()
        if self._path is not None and self._path.exists():
            with self._path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    record = LabelRecord(
                        doc_id=rec["doc_id"],
                        token_index=rec["token_index"],
                        label=rec["label"],
                        source=rec["source"],
                        revision=rec["revision"],
                        timestamp=rec.get("timestamp", 0.0),
                    )
                    self._history.setdefault(
                        (record.doc_id, record.token_index), []
                    ).append(record)

    def _check_key(self, doc_id: str, token_index: int):
        if token_index < 0:
            raise UnknownToken(f"negative token index {token_index}")
        if self._universe is None:
            return
        count = self._universe.get(doc_id)
        if count is None:
            raise UnknownToken(f"unknown document {doc_id!r}")
        if token_index >= count:
            raise UnknownToken(
                f"token index {token_index} out of range for {doc_id!r} ({count} tokens)"
            )

    def write(
        self,
        doc_id: str,
        token_index: int,
        label: int,
        source: str = "human",
        timestamp: float = 0.0,
    ) -> LabelRecord:
        if label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {label!r}")
        if source not in LABEL_SOURCES:
            raise ValueError(f"source must be one of {LABEL_SOURCES}, got {source!r}")
        self._check_key(doc_id, token_index)
        with self._lock:
            history = self._history.setdefault((doc_id, token_index), [])
            revision = (history[-1].revision if history else 0) + 1
            record = LabelRecord(doc_id, token_index, label, source, revision, timestamp)
            history.append(record)
            if self._path is not None:
                with self._path.open("a", encoding="utf-8") as fh:
                    fh.write(label_record_line(record) + "\n")
        return record

    def read(self, doc_id: str, token_index: int) -> LabelRecord:
        """Latest record for the key, regardless of source."""
        with self._lock:
            history = self._history.get((doc_id, token_index))
        if not history:
            raise LabelNotFound(f"no label for ({doc_id!r}, {token_index})")
        return history[-1]

    def effective(self, doc_id: str, token_index: int) -> LabelRecord:
        """Latest human record if any, else latest seed record."""
        with self._lock:
            history = self._history.get((doc_id, token_index))
        if not history:
            raise LabelNotFound(f"no label for ({doc_id!r}, {token_index})")
        human = [r for r in history if r.source == "human"]
        return human[-1] if human else history[-1]

    def has_human_label(self, doc_id: str, token_index: int) -> bool:
        with self._lock:
            history = self._history.get((doc_id, token_index), [])
        return any(r.source == "human" for r in history)

    def keys(self) -> list[tuple[str, int]]:
        with self._lock:
            return sorted(self._history.keys())

    def effective_labels(self) -> dict[tuple[str, int], int]:
        """Effective label per known key (training-export view)."""
        return {key: self.effective(*key).label for key in self.keys()}

    def export_effective(self, out_path: str | Path) -> int:
        """Write the effective record per key, sorted, as JSON Lines.

        The export is a consistent snapshot: records are collected under the
        writer lock, then written to a temp file and atomically renamed.
        Returns the record count.
        """
        with self._lock:
            records = []
            for key in sorted(self._history.keys()):
                history = self._history[key]
                human = [r for r in history if r.source == "human"]
                records.append(human[-1] if human else history[-1])
        out_path = Path(out_path)
        tmp = out_path.with_name(out_path.name + f".tmp-{threading.get_ident()}")
        with tmp.open("w", encoding="utf-8") as fh:
            for record in records:
                fh.write(label_record_line(record) + "\n")
        tmp.replace(out_path)
        return len(records)


# ---------------------------------------------------------------------------
# Feature row <-> JSON Lines
# ---------------------------------------------------------------------------


def feature_row_to_dict(row: FeatureRow) -> dict:
    return {name: getattr(row, name) for name in FEATURE_ROW_FIELDS}


def feature_row_from_dict(data: dict) -> FeatureRow:
    try:
        return FeatureRow(**{name: data[name] for name in FEATURE_ROW_FIELDS})
    except KeyError as exc:
        raise SchemaMismatch(f"feature record is missing field {exc}") from None


def write_feature_rows(path: str | Path, rows: Iterable[FeatureRow]):
    """JSONL feature file: a header object, then one object per row."""
    header = {
        "schema_version": FEATURE_SCHEMA_VERSION,
        "fields": list(FEATURE_ROW_FIELDS),
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for row in rows:
            fh.write(json.dumps(feature_row_to_dict(row), separators=(",", ":")) + "\n")


def read_feature_rows(path: str | Path) -> list[FeatureRow]:
    with Path(path).open("r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise SchemaMismatch("feature file is empty")
        header = json.loads(header_line)
        version = header.get("schema_version")
        if version != FEATURE_SCHEMA_VERSION:
            raise SchemaMismatch(
                f"feature file schema {version!r} != expected {FEATURE_SCHEMA_VERSION!r}"
            )
        return [feature_row_from_dict(json.loads(line)) for line in fh if line.strip()]


def save_encoded_csv(
    path: str | Path,
    X: np.ndarray,
    y: np.ndarray,
    keys: Sequence[tuple[str, int]],
    vocab: PatternVocab,
    stats: NormStats,
):
    """Encoded dataset as CSV plus a JSON sidecar with stats and vocabulary."""
    path = Path(path)
    names = dimension_names(vocab)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(",".join(["doc_id", "token_index", "label"] + names) + "\n")
        for (doc_id, token_index), label, vec in zip(keys, y, X):
            values = ",".join(repr(float(v)) for v in vec)
            fh.write(f"{doc_id},{token_index},{int(label)},{values}\n")
    sidecar = {
        "schema_version": FEATURE_SCHEMA_VERSION,
        "dimension_names": names,
        "norm_stats": stats.to_dict(),
        "pattern_vocab": list(vocab.patterns),
    }
    path.with_suffix(path.suffix + ".meta.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True), encoding="utf-8"
    )
