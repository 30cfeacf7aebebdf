"""Command-line front end.

Commands: synth, featurize, train, predict, eval, serve.

Exit codes: 0 success, 1 usage problems (bad flags or option values),
2 data problems (unreadable or inconsistent inputs), 3 internal errors.

Defaults can come from a JSON config file, either via --config or the
TABEXT_CONFIG environment variable, with one section per command, e.g.
``{"train": {"learning_rate": 0.001}}``. Explicit flags win over the
config file, which wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from pathlib import Path

from .dataset import DEFAULT_VOCAB_SIZE, SplitSpec
from .errors import TabextError
from .ingest import parse_tsv
from .metrics import render_report
from .neuralnet import DEFAULT_HIDDEN, NetworkConfig, load_checkpoint
from .pipeline import (
    evaluate_corpus,
    featurize_corpus,
    load_corpus,
    open_label_store,
    predict_tokens,
    run_training,
)
from .synthgen import LayoutSpec, generate_corpus

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; we reserve 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _hidden_sizes(value) -> tuple[int, ...]:
    if isinstance(value, (list, tuple)):
        sizes = tuple(int(v) for v in value)
    else:
        sizes = tuple(int(part) for part in str(value).split(",") if part.strip())
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError(f"hidden sizes must be positive integers, got {value!r}")
    return sizes


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(
        prog="tabext",
        description="Detect table tokens in OCR'd invoices.",
    )
    parser.add_argument(
        "--config",
        help="JSON config file with per-command default sections "
        "(also read from $TABEXT_CONFIG)",
    )
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)
    commands: dict[str, _Parser] = {}

    p = commands["synth"] = subparsers.add_parser(
        "synth", help="generate a synthetic invoice corpus"
    )
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--count", "--n", dest="count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter", action="store_true", default=False)
    p.add_argument("--dropout", action="store_true", default=False)
    p.add_argument("--page-width", type=int, default=2480)
    p.add_argument("--page-height", type=int, default=3508)
    p.add_argument("--rows", type=int, nargs=2, default=[6, 12],
                   metavar=("LO", "HI"))
    p.add_argument("--columns", type=int, nargs=2, default=[3, 5],
                   metavar=("LO", "HI"))

    p = commands["featurize"] = subparsers.add_parser(
        "featurize", help="compute per-token layout features for a corpus"
    )
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="output features.jsonl path")
    p.add_argument("--tolerance", type=int, default=None)

    p = commands["train"] = subparsers.add_parser(
        "train", help="train the table-token classifier on a corpus"
    )
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="artifact directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--learning-rate", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--hidden", default=",".join(str(s) for s in DEFAULT_HIDDEN),
                   help="comma-separated hidden layer widths")
    p.add_argument("--vocab-size", type=int, default=DEFAULT_VOCAB_SIZE)
    p.add_argument("--tolerance", type=int, default=None)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--validation-fraction", type=float, default=0.1)

    p = commands["predict"] = subparsers.add_parser(
        "predict", help="label the tokens of one OCR TSV document"
    )
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--tsv", required=True)
    p.add_argument("--out", default=None, help="output JSONL path (default stdout)")

    p = commands["eval"] = subparsers.add_parser(
        "eval", help="score a checkpoint against a labeled corpus"
    )
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--tolerance", type=int, default=None)

    p = commands["serve"] = subparsers.add_parser(
        "serve", help="run the label review web service"
    )
    p.add_argument("--corpus", required=True)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--labels", default=None,
                   help="label store path (default: <corpus>/labels.jsonl)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8970)
    p.add_argument("--static", default=None,
                   help="directory with the built review UI (served at /ui)")

    return parser, commands


def _apply_config(parser: _Parser, commands: dict[str, _Parser], argv: list[str]):
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    config_path = known.config or os.environ.get("TABEXT_CONFIG")
    if not config_path:
        return
    try:
        config = json.loads(Path(config_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise TabextError(f"cannot read config file {config_path}: {exc}") from exc
    if not isinstance(config, dict):
        parser.error(f"config file {config_path} must hold a JSON object")
    for section, values in config.items():
        if section not in commands:
            parser.error(f"config section {section!r} is not a known command")
        if not isinstance(values, dict):
            parser.error(f"config section {section!r} must hold a JSON object")
        sub = commands[section]
        known_dests = {action.dest for action in sub._actions}
        for key in values:
            if key not in known_dests:
                parser.error(f"config key {section}.{key!r} is not a known option")
        sub.set_defaults(**values)


def cmd_synth(args) -> int:
    spec = LayoutSpec(
        page_width=args.page_width,
        page_height=args.page_height,
        table_rows=tuple(args.rows),
        table_columns=tuple(args.columns),
        jitter=args.jitter,
        dropout=args.dropout,
    )
    manifest = generate_corpus(args.count, spec, args.seed, args.out)
    print(f"wrote {manifest['count']} documents to {args.out}")
    return EXIT_OK


def cmd_featurize(args) -> int:
    from .dataset import write_feature_rows

    documents = load_corpus(args.corpus)
    store = open_label_store(args.corpus, documents)
    rows = featurize_corpus(documents, store, tolerance=args.tolerance)
    write_feature_rows(args.out, rows)
    print(f"wrote {len(rows)} feature rows to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = NetworkConfig(
        hidden_sizes=_hidden_sizes(args.hidden),
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        seed=args.seed,
        threshold=args.threshold,
    )
    split_spec = SplitSpec(
        train_fraction=args.train_fraction,
        test_fraction=args.test_fraction,
        validation_fraction=args.validation_fraction,
        seed=args.seed,
    )
    artifacts = run_training(
        args.corpus,
        args.out,
        config=config,
        split_spec=split_spec,
        vocab_size=args.vocab_size,
        tolerance=args.tolerance,
    )
    print(f"checkpoint: {artifacts.checkpoint_path}")
    print(f"best epoch: {artifacts.result.best_epoch}")
    print(f"held-out test F1 (class 1): {artifacts.test_f1!r}")
    print(render_report(artifacts.test_report), end="")
    return EXIT_OK


def cmd_predict(args) -> int:
    model, stats, vocab, metadata = load_checkpoint(args.checkpoint)
    tsv_path = Path(args.tsv)
    doc = parse_tsv(tsv_path.read_text(encoding="utf-8"), doc_id=tsv_path.stem)
    predictions = predict_tokens(
        model,
        stats,
        vocab,
        doc,
        tolerance=metadata.get("tolerance"),
        threshold=metadata.get("config", {}).get("threshold", 0.5),
    )
    lines = [json.dumps(p, sort_keys=True, separators=(",", ":")) for p in predictions]
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {len(lines)} predictions to {args.out}")
    else:
        for line in lines:
            print(line)
    return EXIT_OK


def cmd_eval(args) -> int:
    report = evaluate_corpus(args.checkpoint, args.corpus, tolerance=args.tolerance)
    print(render_report(report), end="")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        args.corpus,
        checkpoint_path=args.checkpoint,
        labels_path=args.labels,
        static_dir=args.static,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


_HANDLERS = {
    "synth": cmd_synth,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, commands = build_parser()
    try:
        _apply_config(parser, commands, argv)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        return _HANDLERS[args.command](args)
    except TabextError as exc:
        print(f"tabext: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, json.JSONDecodeError) as exc:
        print(f"tabext: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"tabext: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit:
        raise
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
