"""HTTP service for reviewing and correcting token labels.

Serves the documents of one corpus directory, their effective labels
(human corrections win over seed labels), and optional model scores when
a checkpoint is supplied. Corrections append to the label store JSONL, so
they survive restarts; the export endpoint snapshots the effective label
per token for retraining. No endpoint mutates the corpus TSVs.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .dataset import LabelStore
from .errors import LabelNotFound
from .ingest import DocumentModel
from .neuralnet import load_checkpoint
from .pipeline import load_corpus, predict_tokens

API_SCHEMA_VERSION = "tabext-api-v1"


class LabelWrite(BaseModel):
    token_index: int
    label: int


class ExportRequest(BaseModel):
    path: str | None = None


class _State:
    def __init__(
        self,
        corpus_dir: str | Path,
        checkpoint_path: str | Path | None,
        labels_path: str | Path | None,
    ):
        self.corpus_dir = Path(corpus_dir)
        try:
            self.documents: dict[str, DocumentModel] = load_corpus(self.corpus_dir)
        except FileNotFoundError:
            self.documents = {}
        universe = {doc_id: doc.token_count for doc_id, doc in self.documents.items()}
        if labels_path is None:
            labels_path = self.corpus_dir / "labels.jsonl"
        self.store = LabelStore(universe=universe, path=labels_path)
        self.model = None
        self.tolerance = None
        self.threshold = 0.5
        if checkpoint_path is not None:
            model, stats, vocab, metadata = load_checkpoint(checkpoint_path)
            self.model = (model, stats, vocab)
            self.tolerance = metadata.get("tolerance")
            self.threshold = metadata.get("config", {}).get("threshold", 0.5)
        self._prediction_cache: dict[str, list[dict]] = {}

    def predictions(self, doc_id: str) -> list[dict] | None:
        if self.model is None:
            return None
        if doc_id not in self._prediction_cache:
            model, stats, vocab = self.model
            self._prediction_cache[doc_id] = predict_tokens(
                model,
                stats,
                vocab,
                self.documents[doc_id],
                tolerance=self.tolerance,
                threshold=self.threshold,
            )
        return self._prediction_cache[doc_id]

    def reviewed_fraction(self, doc_id: str) -> float:
        doc = self.documents[doc_id]
        if doc.token_count == 0:
            return 0.0
        reviewed = sum(
            1
            for index in range(doc.token_count)
            if self.store.has_human_label(doc_id, index)
        )
        return reviewed / doc.token_count


def create_app(
    corpus_dir: str | Path,
    checkpoint_path: str | Path | None = None,
    labels_path: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    state = _State(corpus_dir, checkpoint_path, labels_path)
    app = FastAPI(title="tabext review service")

    @app.get("/health")
    def health():
        return {"schema_version": API_SCHEMA_VERSION, "status": "ok"}

    @app.get("/documents")
    def list_documents():
        documents = []
        for doc_id in sorted(state.documents):
            doc = state.documents[doc_id]
            documents.append({
                "doc_id": doc_id,
                "page_count": len(doc.pages),
                "token_count": doc.token_count,
                "reviewed_fraction": state.reviewed_fraction(doc_id),
            })
        return {
            "schema_version": API_SCHEMA_VERSION,
            "documents": documents,
            "has_model": state.model is not None,
        }

    def _get_document(doc_id: str) -> DocumentModel:
        doc = state.documents.get(doc_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"unknown document {doc_id!r}")
        return doc

    @app.get("/documents/{doc_id}/tokens")
    def document_tokens(doc_id: str):
        doc = _get_document(doc_id)
        scores = state.predictions(doc_id)
        tokens = []
        for index, page, token in doc.iter_tokens():
            try:
                record = state.store.effective(doc_id, index)
                label, source = record.label, record.source
            except LabelNotFound:
                label, source = None, None
            tokens.append({
                "token_index": index,
                "page_num": page.page_num,
                "text": token.text,
                "box": {
                    "left": token.left,
                    "top": token.top,
                    "width": token.width,
                    "height": token.height,
                },
                "probability": scores[index]["probability"] if scores else None,
                "predicted_label": scores[index]["label"] if scores else None,
                "label": label,
                "source": source,
            })
        return {
            "schema_version": API_SCHEMA_VERSION,
            "doc_id": doc_id,
            "pages": [
                {
                    "page_num": page.page_num,
                    "page_width": page.page_width,
                    "page_height": page.page_height,
                }
                for page in doc.pages
            ],
            "tokens": tokens,
        }

    @app.post("/documents/{doc_id}/labels")
    def write_labels(doc_id: str, body: list[LabelWrite]):
        doc = _get_document(doc_id)
        bad_labels = [w.token_index for w in body if w.label not in (0, 1)]
        if bad_labels:
            raise HTTPException(
                status_code=400,
                detail=f"labels must be 0 or 1; offending token indices: {bad_labels}",
            )
        bad_indices = [
            w.token_index
            for w in body
            if not 0 <= w.token_index < doc.token_count
        ]
        if bad_indices:
            raise HTTPException(
                status_code=400,
                detail=f"unknown token indices for {doc_id!r}: {bad_indices}",
            )
        records = [
            state.store.write(doc_id, w.token_index, w.label, source="human")
            for w in body
        ]
        return {
            "schema_version": API_SCHEMA_VERSION,
            "accepted": len(records),
            "revisions": [r.to_dict() for r in records],
        }

    @app.post("/export-training-set")
    def export_training_set(body: ExportRequest | None = None):
        path = Path(body.path) if body is not None and body.path else (
            state.corpus_dir / "training_labels.jsonl"
        )
        count = state.store.export_effective(path)
        records = [
            json.loads(line)
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        return {
            "schema_version": API_SCHEMA_VERSION,
            "path": str(path),
            "count": count,
            "records": records,
        }

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
