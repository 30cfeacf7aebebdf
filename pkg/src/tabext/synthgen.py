"""Synthetic invoice TSVs with ground-truth table labels.

Layout rules are construction guarantees, not tendencies: the product table
is horizontally centered, its columns share per-column left or right
alignment, address tokens stay in the first vertical quarter, footer tokens
in the last quarter with a smaller text height, and the largest alignment
group on each axis is always a table column.

The purity of alignment groups is enforced with a coordinate grid: all
widths and gaps are multiples of ``GRID_PX`` and every block anchors its
x-edges in a block-specific residue class mod ``GRID_PX``. Residues are at
least 20 px apart, so no sub-tolerance chain can form between blocks even
with jitter enabled.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .dataset import LabelRecord, label_record_line
from .errors import InfeasibleSpec

CORPUS_SCHEMA_VERSION = "tabext-corpus-v1"

GRID_PX = 100
CHAR_PX = 25
RESIDUES = {"table": 0, "address": 20, "upper_info": 40, "total": 60, "footer": 80}

BODY_HEIGHT = 40
FOOTER_HEIGHT = 28
LINE_PITCH = 55
JITTER_PX = 2
DROPOUT_RATE = 0.02

# Non-table blocks are capped below this many aligned lines, so a table with
# at least MIN_TABLE_ROWS rows always owns the largest alignment group.
MIN_TABLE_ROWS = 6
MAX_NON_TABLE_ALIGNED = 5

WORDS = (
    "Rechnung", "Kunde", "Datum", "Oktober", "Dezember", "Januar", "Firma",
    "Muster", "GmbH", "Bau", "Handel", "Technik", "Hauptweg", "Ringweg",
    "Berlin", "Hamburg", "Bremen", "Kassel", "Herr", "Frau", "Schraube",
    "Mutter", "Kabel", "Papier", "Ordner", "Drucker", "Toner", "Platte",
    "Wartung", "Service", "Montage", "Stunden", "Halter", "Rahmen", "Filter",
    "Leitung", "Rohr", "Winkel", "Band", "Folie",
)
UNITS = ("ST", "Stk", "kg", "Std", "Pkt")
INFO_KEYS = (
    "Rechnungsnummer", "Rechnungsdatum", "Kundennummer", "Lieferdatum",
    "Auftragsnummer",
)
TOTAL_LABELS = ("Netto", "Steuer", "Summe")
FOOTER_WORDS = (
    "Vielen", "Dank", "für", "Ihren", "Auftrag", "Zahlbar", "innerhalb",
    "von", "Tagen", "ohne", "Abzug", "Bankverbindung", "siehe", "unten",
)

# Column palette in display order; a table keeps the first `columns` kinds.
COLUMN_KINDS = ("description", "quantity", "unit", "unit_price", "total_price")
COLUMN_PICK_ORDER = ("description", "quantity", "unit_price", "total_price", "unit")


@dataclass(frozen=True)
class LayoutSpec:
    """Knobs for one synthetic invoice (or a whole corpus of them)."""

    page_width: int = 2480
    page_height: int = 3508
    table_rows: tuple[int, int] = (6, 12)
    table_columns: tuple[int, int] = (3, 5)
    address: bool = True
    upper_info: bool = True
    total: bool = True
    footer: bool = True
    jitter: bool = False
    dropout: bool = False
    seed: int = 0


@dataclass(frozen=True)
class _PlacedToken:
    text: str
    left: int
    top: int
    width: int
    height: int
    is_table: bool


def _grid_width(text: str) -> int:
    return max(GRID_PX, int(round(len(text) * CHAR_PX / GRID_PX)) * GRID_PX)


def _snap(x: float, residue: int) -> int:
    return int(round(x / GRID_PX)) * GRID_PX + residue


def validate_spec(spec: LayoutSpec):
    w, h = spec.page_width, spec.page_height
    rows_lo, rows_hi = spec.table_rows
    cols_lo, cols_hi = spec.table_columns
    if rows_lo < MIN_TABLE_ROWS:
        raise InfeasibleSpec(
            f"table_rows minimum must be >= {MIN_TABLE_ROWS} so the table "
            f"always owns the largest alignment group, got {rows_lo}"
        )
    if rows_lo > rows_hi or cols_lo > cols_hi:
        raise InfeasibleSpec("ranges must satisfy lo <= hi")
    if not 3 <= cols_lo <= cols_hi <= len(COLUMN_KINDS):
        raise InfeasibleSpec(
            f"table_columns must lie within 3..{len(COLUMN_KINDS)}, "
            f"got {spec.table_columns}"
        )
    # Widest possible table: two-word description column plus uniform columns.
    widest = 600 + (cols_hi - 1) * 300 + (cols_hi - 1) * GRID_PX
    if widest > 0.92 * w:
        raise InfeasibleSpec(f"page width {w} cannot hold a {cols_hi}-column table")
    table_bottom = 0.34 * h + rows_hi * LINE_PITCH + BODY_HEIGHT
    total_bottom = table_bottom + 160 + 3 * LINE_PITCH
    if total_bottom > 0.78 * h:
        raise InfeasibleSpec(f"page height {h} cannot hold {rows_hi} table rows")
    if 0.05 * h + 4 * LINE_PITCH + BODY_HEIGHT > 0.25 * h:
        raise InfeasibleSpec(f"page height {h} leaves no first-quarter room for an address")


def _table_columns(rng: np.random.Generator, spec: LayoutSpec) -> list[dict]:
    count = int(rng.integers(spec.table_columns[0], spec.table_columns[1] + 1))
    kinds = [k for k in COLUMN_KINDS if k in COLUMN_PICK_ORDER[:count]]
    desc_words = int(rng.integers(1, 3))
    quantity_style = str(rng.choice(["integer", "fraction"]))
    columns = []
    for kind in kinds:
        if kind == "description":
            width = 300 * desc_words + (desc_words - 1) * GRID_PX
            columns.append({"kind": kind, "width": width, "align": "left",
                            "desc_words": desc_words})
        elif kind == "quantity":
            columns.append({"kind": kind, "width": 300, "align": "right",
                            "style": quantity_style})
        elif kind == "unit":
            columns.append({"kind": kind, "width": 300, "align": "left"})
        else:
            columns.append({"kind": kind, "width": 300, "align": "right"})
    return columns


def _cell_text(rng: np.random.Generator, column: dict) -> list[str]:
    if column["kind"] == "description":
        return [str(rng.choice(WORDS)) for _ in range(column["desc_words"])]
    if column["kind"] == "quantity":
        if column["style"] == "integer":
            return [str(int(rng.integers(1, 999)))]
        return [f"{int(rng.integers(1, 9))},{int(rng.integers(0, 1000)):03d}"]
    if column["kind"] == "unit":
        return [str(rng.choice(UNITS))]
    return [f"{int(rng.integers(1, 9000))},{int(rng.integers(0, 100)):02d}"]


def _jitter(rng: np.random.Generator, enabled: bool) -> int:
    return int(rng.integers(-JITTER_PX, JITTER_PX + 1)) if enabled else 0


def _build_table(rng: np.random.Generator, spec: LayoutSpec) -> list[list[_PlacedToken]]:
    w, h = spec.page_width, spec.page_height
    columns = _table_columns(rng, spec)
    gap = GRID_PX if len(columns) >= 5 else 200
    table_width = sum(c["width"] for c in columns) + (len(columns) - 1) * gap
    x0 = _snap((w - table_width) / 2, RESIDUES["table"])

    x = x0
    for column in columns:
        column["x0"] = x
        column["anchor"] = x if column["align"] == "left" else x + column["width"]
        x += column["width"] + gap

    rows = int(rng.integers(spec.table_rows[0], spec.table_rows[1] + 1))
    y0 = int(rng.integers(int(0.30 * h), int(0.34 * h)))
    lines = []
    for r in range(rows):
        top = y0 + r * LINE_PITCH
        line = []
        for column in columns:
            texts = _cell_text(rng, column)
            if column["align"] == "left":
                left = column["anchor"]
                for text in texts:
                    width = _grid_width(text)
                    line.append(_PlacedToken(
                        text, left + _jitter(rng, spec.jitter),
                        top + _jitter(rng, spec.jitter), width, BODY_HEIGHT, True,
                    ))
                    left += width + GRID_PX
            else:
                text = texts[0]
                width = _grid_width(text)
                line.append(_PlacedToken(
                    text, column["anchor"] - width + _jitter(rng, spec.jitter),
                    top + _jitter(rng, spec.jitter), width, BODY_HEIGHT, True,
                ))
        lines.append(line)
    return lines


def _flow_line(
    rng: np.random.Generator,
    spec: LayoutSpec,
    texts: list[str],
    anchor_x: int,
    top: int,
    height: int,
) -> list[_PlacedToken]:
    line = []
    left = anchor_x
    for text in texts:
        width = _grid_width(text)
        if left + width > spec.page_width - GRID_PX:
            break
        line.append(_PlacedToken(
            text, left + _jitter(rng, spec.jitter),
            top + _jitter(rng, spec.jitter), width, height, False,
        ))
        left += width + GRID_PX
    return line


def _build_address(rng: np.random.Generator, spec: LayoutSpec) -> list[list[_PlacedToken]]:
    w, h = spec.page_width, spec.page_height
    anchor = _snap(w * float(rng.choice([0.08, 0.55])), RESIDUES["address"])
    n_lines = int(rng.integers(3, 5))
    y0 = int(rng.integers(int(0.04 * h), int(0.07 * h)))
    street = f"{rng.choice(['Hauptweg', 'Ringweg'])}"
    lines_text = [
        [str(rng.choice(("Firma", "Herr", "Frau"))), str(rng.choice(WORDS)), "GmbH"],
        [street, str(int(rng.integers(1, 99)))],
        [f"{int(rng.integers(10000, 99999))}", str(rng.choice(("Berlin", "Hamburg", "Bremen", "Kassel")))],
        [str(rng.choice(WORDS))],
    ][:n_lines]
    lines = []
    for i, texts in enumerate(lines_text):
        top = y0 + i * LINE_PITCH
        lines.append(_flow_line(rng, spec, texts, anchor, top, BODY_HEIGHT))
    return lines


def _build_upper_info(rng: np.random.Generator, spec: LayoutSpec) -> list[list[_PlacedToken]]:
    w, h = spec.page_width, spec.page_height
    anchor = _snap(w * float(rng.choice([0.10, 0.35, 0.58])), RESIDUES["upper_info"])
    n_lines = int(rng.integers(3, MAX_NON_TABLE_ALIGNED + 1))
    y0 = int(rng.integers(int(0.17 * h), int(0.21 * h)))
    keys = list(rng.permutation(np.array(INFO_KEYS)))[:n_lines]
    lines = []
    for i, key in enumerate(keys):
        if rng.random() < 0.5:
            value = f"{int(rng.integers(1, 29)):02d}.{int(rng.integers(1, 13)):02d}.{int(rng.integers(2018, 2024))}"
        else:
            value = str(int(rng.integers(10000, 999999)))
        lines.append(_flow_line(
            rng, spec, [str(key), value], anchor, y0 + i * LINE_PITCH, BODY_HEIGHT,
        ))
    return lines


def _build_total(
    rng: np.random.Generator, spec: LayoutSpec, y0: int
) -> list[list[_PlacedToken]]:
    w = spec.page_width
    label_anchor = _snap(w * 0.52, RESIDUES["total"])
    amount_anchor = _snap(w * 0.76, RESIDUES["total"])
    n_lines = int(rng.integers(1, 4))
    lines = []
    for i, label in enumerate(TOTAL_LABELS[-n_lines:]):
        amount = f"{int(rng.integers(10, 9000))},{int(rng.integers(0, 100)):02d}"
        width = _grid_width(amount)
        top = y0 + i * LINE_PITCH
        lines.append([
            _PlacedToken(label, label_anchor + _jitter(rng, spec.jitter),
                         top + _jitter(rng, spec.jitter), _grid_width(label),
                         BODY_HEIGHT, False),
            _PlacedToken(amount, amount_anchor - width + _jitter(rng, spec.jitter),
                         top + _jitter(rng, spec.jitter), width, BODY_HEIGHT, False),
        ])
    return lines


def _build_footer(rng: np.random.Generator, spec: LayoutSpec) -> list[list[_PlacedToken]]:
    w, h = spec.page_width, spec.page_height
    anchor = _snap(w * 0.18, RESIDUES["footer"])
    n_lines = int(rng.integers(1, 3))
    y0 = int(rng.integers(int(0.82 * h), int(0.88 * h)))
    lines = []
    for i in range(n_lines):
        count = int(rng.integers(3, 7))
        start = int(rng.integers(0, len(FOOTER_WORDS) - count))
        texts = list(FOOTER_WORDS[start:start + count])
        lines.append(_flow_line(
            rng, spec, texts, anchor, y0 + i * LINE_PITCH, FOOTER_HEIGHT,
        ))
    return lines


def _structural_bbox(tokens: list[_PlacedToken]) -> tuple[int, int, int, int]:
    left = min(t.left for t in tokens)
    top = min(t.top for t in tokens)
    right = max(t.left + t.width for t in tokens)
    bottom = max(t.top + t.height for t in tokens)
    return left, top, right - left, bottom - top


def generate_invoice(spec: LayoutSpec) -> tuple[str, dict[int, int]]:
    """One parseable invoice TSV plus its token_index -> label map."""
    validate_spec(spec)
    rng = np.random.default_rng(spec.seed)
    w, h = spec.page_width, spec.page_height

    blocks: list[list[list[_PlacedToken]]] = []
    if spec.address:
        blocks.append(_build_address(rng, spec))
    if spec.upper_info:
        blocks.append(_build_upper_info(rng, spec))
    table_lines = _build_table(rng, spec)
    blocks.append(table_lines)
    if spec.total:
        table_bottom = max(t.top + t.height for line in table_lines for t in line)
        blocks.append(_build_total(rng, spec, table_bottom + int(rng.integers(100, 180))))
    if spec.footer:
        blocks.append(_build_footer(rng, spec))

    if spec.dropout:
        # Dropout only thins non-table tokens: the layout priors (alignment
        # dominance, exactly one table block) stay construction guarantees.
        blocks = [
            [
                [t for t in line if t.is_table or rng.random() >= DROPOUT_RATE]
                for line in block
            ]
            for block in blocks
        ]
    blocks = [[line for line in block if line] for block in blocks]
    blocks = [block for block in blocks if block]

    for block in blocks:
        for line in block:
            for t in line:
                if t.left < 0 or t.top < 0 or t.left + t.width > w or t.top + t.height > h:
                    raise InfeasibleSpec(
                        f"token {t.text!r} at ({t.left},{t.top}) does not fit "
                        f"the {w}x{h} page"
                    )

    blocks.sort(key=lambda block: min(t.top for line in block for t in line))

    rows = [f"1\t1\t0\t0\t0\t0\t0\t0\t{w}\t{h}\t-1\t"]
    labels: dict[int, int] = {}
    token_index = 0
    for block_num, block in enumerate(blocks, start=1):
        bx, by, bw, bh = _structural_bbox([t for line in block for t in line])
        rows.append(f"2\t1\t{block_num}\t0\t0\t0\t{bx}\t{by}\t{bw}\t{bh}\t-1\t")
        rows.append(f"3\t1\t{block_num}\t1\t0\t0\t{bx}\t{by}\t{bw}\t{bh}\t-1\t")
        for line_num, line in enumerate(block, start=1):
            lx, ly, lw, lh = _structural_bbox(line)
            rows.append(
                f"4\t1\t{block_num}\t1\t{line_num}\t0\t{lx}\t{ly}\t{lw}\t{lh}\t-1\t"
            )
            for word_num, t in enumerate(sorted(line, key=lambda t: t.left), start=1):
                conf = int(rng.integers(850, 990)) / 10
                rows.append(
                    f"5\t1\t{block_num}\t1\t{line_num}\t{word_num}\t"
                    f"{t.left}\t{t.top}\t{t.width}\t{t.height}\t{conf!r}\t{t.text}"
                )
                labels[token_index] = 1 if t.is_table else 0
                token_index += 1

    header = (
        "level\tpage_num\tblock_num\tpar_num\tline_num\tword_num\t"
        "left\ttop\twidth\theight\tconf\ttext"
    )
    return header + "\n" + "\n".join(rows) + "\n", labels


def generate_corpus(
    n: int, spec: LayoutSpec, seed: int, out_dir: str | Path
) -> dict:
    """Write n invoices, a labels.jsonl, and a manifest.json to out_dir.

    Deterministic given (n, spec, seed): per-document seeds derive from the
    master seed, and seed labels carry timestamp 0.0 so the corpus bytes
    never depend on wall-clock time.
    """
    if n < 1:
        raise ValueError(f"corpus size must be >= 1, got {n}")
    validate_spec(spec)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    documents = []
    with (out_dir / "labels.jsonl").open("w", encoding="utf-8", newline="\n") as labels_fh:
        for i in range(n):
            doc_id = f"invoice_{i:04d}"
            doc_seed = seed * 1_000_003 + i
            tsv, labels = generate_invoice(replace(spec, seed=doc_seed))
            (out_dir / f"{doc_id}.tsv").write_text(tsv, encoding="utf-8", newline="\n")
            for token_index in sorted(labels):
                record = LabelRecord(
                    doc_id=doc_id, token_index=token_index,
                    label=labels[token_index], source="seed",
                    revision=1, timestamp=0.0,
                )
                labels_fh.write(label_record_line(record) + "\n")
            documents.append({
                "doc_id": doc_id,
                "seed": doc_seed,
                "token_count": len(labels),
                "table_token_count": sum(labels.values()),
            })

    manifest = {
        "schema_version": CORPUS_SCHEMA_VERSION,
        "count": n,
        "master_seed": seed,
        "spec": asdict(spec),
        "documents": documents,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest
