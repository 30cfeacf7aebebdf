"""End-to-end plumbing from a corpus directory to a trained checkpoint.

A corpus directory holds one ``<doc_id>.tsv`` per document plus a
``labels.jsonl`` with the seed (and any human) label records. Training
fits the pattern vocabulary and the normalizer on the training partition
only, trains the network, and writes deterministic artifacts: no
timestamps, repr() floats, sorted JSON keys.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dataset import (
    DEFAULT_VOCAB_SIZE,
    LabelStore,
    NormStats,
    PatternVocab,
    SplitSpec,
    apply_normalizer,
    build_pattern_vocab,
    encode_matrix,
    fit_normalizer,
    split,
)
from .errors import EmptyTrainingSet
from .features import FeatureRow, featurize_document
from .ingest import DocumentModel, parse_tsv
from .metrics import MetricsReport, compute_metrics, render_report
from .neuralnet import (
    Mlp,
    NetworkConfig,
    TrainResult,
    load_checkpoint,
    save_checkpoint,
    train,
)

SPLIT_SCHEMA_VERSION = "tabext-split-v1"


def load_corpus(corpus_dir: str | Path) -> dict[str, DocumentModel]:
    """Parse every .tsv in the directory; doc_id is the file stem."""
    corpus_dir = Path(corpus_dir)
    paths = sorted(corpus_dir.glob("*.tsv"))
    if not paths:
        raise FileNotFoundError(f"no .tsv documents under {corpus_dir}")
    return {
        path.stem: parse_tsv(path.read_text(encoding="utf-8"), doc_id=path.stem)
        for path in paths
    }


def open_label_store(
    corpus_dir: str | Path, documents: dict[str, DocumentModel]
) -> LabelStore:
    """The corpus label store, bounded by the documents' token counts."""
    universe = {doc_id: doc.token_count for doc_id, doc in documents.items()}
    return LabelStore(universe=universe, path=Path(corpus_dir) / "labels.jsonl")


def labels_by_document(store: LabelStore) -> dict[str, dict[int, int]]:
    grouped: dict[str, dict[int, int]] = {}
    for (doc_id, token_index), label in store.effective_labels().items():
        grouped.setdefault(doc_id, {})[token_index] = label
    return grouped


def featurize_corpus(
    documents: dict[str, DocumentModel],
    store: LabelStore | None = None,
    tolerance: int | None = None,
) -> list[FeatureRow]:
    grouped = labels_by_document(store) if store is not None else {}
    rows: list[FeatureRow] = []
    for doc_id in sorted(documents):
        rows.extend(
            featurize_document(
                documents[doc_id], tolerance=tolerance, labels=grouped.get(doc_id)
            )
        )
    return rows


@dataclass(frozen=True)
class TrainingArtifacts:
    out_dir: Path
    checkpoint_path: Path
    history_path: Path
    split: dict[str, set[str]]
    result: TrainResult
    validation_report: MetricsReport
    test_report: MetricsReport

    @property
    def test_f1(self) -> float:
        """Held-out F1 of the table class."""
        return self.test_report.per_class[1].f1


def _write_history(path: Path, result: TrainResult):
    lines = ["epoch,train_loss,val_loss,val_f1"]
    for row in result.history:
        lines.append(
            f"{row.epoch},{row.train_loss!r},{row.val_loss!r},{row.val_f1!r}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_report(out_dir: Path, name: str, report: MetricsReport):
    (out_dir / f"report_{name}.txt").write_text(
        render_report(report), encoding="utf-8"
    )
    (out_dir / f"report_{name}.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def run_training(
    corpus_dir: str | Path,
    out_dir: str | Path,
    config: NetworkConfig = NetworkConfig(),
    split_spec: SplitSpec | None = None,
    vocab_size: int = DEFAULT_VOCAB_SIZE,
    tolerance: int | None = None,
) -> TrainingArtifacts:
    """Train on a corpus directory and write artifacts under out_dir.

    Artifacts: checkpoint.json, history.csv, split.json, and rendered
    text/JSON reports for the validation and held-out test partitions.
    Repeating the call with equal inputs reproduces every byte.
    """
    if split_spec is None:
        split_spec = SplitSpec(seed=config.seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    documents = load_corpus(corpus_dir)
    store = open_label_store(corpus_dir, documents)
    rows = featurize_corpus(documents, store, tolerance=tolerance)
    parts = split(sorted(documents), split_spec)

    rows_by_part = {
        name: [row for row in rows if row.doc_id in doc_ids]
        for name, doc_ids in parts.items()
    }
    if not rows_by_part["train"]:
        raise EmptyTrainingSet("the training partition holds no tokens")

    vocab = build_pattern_vocab(rows_by_part["train"], k=vocab_size)
    X_train, y_train, _ = encode_matrix(rows_by_part["train"], vocab)
    X_val, y_val, _ = encode_matrix(rows_by_part["validation"], vocab)
    X_test, y_test, _ = encode_matrix(rows_by_part["test"], vocab)

    stats = fit_normalizer(X_train)
    X_train = apply_normalizer(X_train, stats)
    X_val = apply_normalizer(X_val, stats)
    X_test = apply_normalizer(X_test, stats)

    rng = np.random.default_rng(config.seed)
    model = Mlp(X_train.shape[1], config.hidden_sizes, rng=rng)
    result = train(model, X_train, y_train, X_val, y_val, config, rng=rng)

    validation_report = compute_metrics(
        y_val.astype(int), model.predict(X_val, config.threshold)
    )
    test_report = compute_metrics(
        y_test.astype(int), model.predict(X_test, config.threshold)
    )

    checkpoint_path = out_dir / "checkpoint.json"
    save_checkpoint(
        checkpoint_path,
        model,
        stats,
        vocab,
        metadata={
            "config": {**asdict(config), "hidden_sizes": list(config.hidden_sizes)},
            "split": {
                "train_fraction": split_spec.train_fraction,
                "test_fraction": split_spec.test_fraction,
                "validation_fraction": split_spec.validation_fraction,
                "seed": split_spec.seed,
            },
            "vocab_size": vocab_size,
            "tolerance": tolerance,
            "document_count": len(documents),
            "best_epoch": result.best_epoch,
        },
    )
    history_path = out_dir / "history.csv"
    _write_history(history_path, result)
    (out_dir / "split.json").write_text(
        json.dumps(
            {
                "schema_version": SPLIT_SCHEMA_VERSION,
                "seed": split_spec.seed,
                "train": sorted(parts["train"]),
                "test": sorted(parts["test"]),
                "validation": sorted(parts["validation"]),
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    _write_report(out_dir, "validation", validation_report)
    _write_report(out_dir, "test", test_report)

    return TrainingArtifacts(
        out_dir=out_dir,
        checkpoint_path=checkpoint_path,
        history_path=history_path,
        split=parts,
        result=result,
        validation_report=validation_report,
        test_report=test_report,
    )


def predict_tokens(
    model: Mlp,
    stats: NormStats,
    vocab: PatternVocab,
    doc: DocumentModel,
    tolerance: int | None = None,
    threshold: float = 0.5,
) -> list[dict]:
    """Per-token prediction overlay for one document, in global token order.

    Each entry carries the token's box (for highlighting), the model
    probability, and the thresholded label. Empty documents yield [].
    """
    rows = featurize_document(doc, tolerance=tolerance)
    if not rows:
        return []
    X, _, _ = encode_matrix(rows, vocab)
    X = apply_normalizer(X, stats)
    probs = model.predict_proba(X)
    out = []
    for (index, page, token), proba in zip(doc.iter_tokens(), probs):
        out.append({
            "token_index": index,
            "page_num": page.page_num,
            "text": token.text,
            "box": {
                "left": token.left,
                "top": token.top,
                "width": token.width,
                "height": token.height,
            },
            "probability": float(proba),
            "label": int(proba >= threshold),
        })
    return out


def evaluate_corpus(
    checkpoint_path: str | Path,
    corpus_dir: str | Path,
    tolerance: int | None = None,
) -> MetricsReport:
    """Score a checkpoint against a labeled corpus directory."""
    model, stats, vocab, metadata = load_checkpoint(checkpoint_path)
    if tolerance is None:
        tolerance = metadata.get("tolerance")
    threshold = metadata.get("config", {}).get("threshold", 0.5)
    documents = load_corpus(corpus_dir)
    store = open_label_store(corpus_dir, documents)
    rows = featurize_corpus(documents, store, tolerance=tolerance)
    X, y, _ = encode_matrix(rows, vocab)
    X = apply_normalizer(X, stats)
    return compute_metrics(y.astype(int), model.predict(X, threshold))
