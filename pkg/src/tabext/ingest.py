"""Tesseract-style TSV ingestion into an immutable document model.

The input is the 12-column TSV a word-level OCR run emits: level-1 rows
carry page geometry, levels 2-4 carry block/paragraph/line structure, and
level-5 rows carry the actual words. Only word rows become :class:`Token`
objects; structural indices ride along on each token.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, replace
from typing import TextIO

from .errors import BadGeometry, BadRow, MalformedHeader, MissingPageRow

HEADER_FIELDS = (
    "level", "page_num", "block_num", "par_num", "line_num", "word_num",
    "left", "top", "width", "height", "conf", "text",
)
HEADER_LINE = "\t".join(HEADER_FIELDS)

# OCR boxes routinely overshoot the page edge by a pixel or two; anything
# beyond this is treated as a corrupt row rather than silently fixed.
CLAMP_LIMIT_PX = 5

DOC_SCHEMA_VERSION = "tabext-doc-v1"


@dataclass(frozen=True)
class Token:
    """One recognized word with its box and structural indices."""

    level: int
    page_num: int
    block_num: int
    par_num: int
    line_num: int
    word_num: int
    left: int
    top: int
    width: int
    height: int
    conf: float
    text: str

    def __post_init__(self):
        if not 1 <= self.level <= 5:
            raise ValueError(f"level must be in 1..5, got {self.level}")
        if self.page_num < 1:
            raise ValueError(f"page_num must be >= 1, got {self.page_num}")
        for name in ("block_num", "par_num", "line_num", "word_num", "left", "top"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"width/height must be >= 1, got {self.width}x{self.height}")
        if not 0.0 <= self.conf <= 100.0:
            raise ValueError(f"conf must be in [0, 100], got {self.conf}")
        if not self.text:
            raise ValueError("text must be non-empty")
        if "\t" in self.text or "\n" in self.text or "\r" in self.text:
            raise ValueError("text must not contain tab or newline characters")

    @property
    def right(self) -> int:
        return self.left + self.width

    @property
    def bottom(self) -> int:
        return self.top + self.height


@dataclass(frozen=True)
class Page:
    """One page: its pixel dimensions and its tokens in reading order."""

    page_num: int
    page_width: int
    page_height: int
    tokens: tuple[Token, ...]

    def __post_init__(self):
        if self.page_num < 1:
            raise ValueError(f"page_num must be >= 1, got {self.page_num}")
        if self.page_width < 1 or self.page_height < 1:
            raise ValueError("page dimensions must be positive")


@dataclass(frozen=True)
class DocumentModel:
    """A parsed document: pages in input order, tokens in row order."""

    doc_id: str
    pages: tuple[Page, ...]

    @property
    def token_count(self) -> int:
        return sum(len(p.tokens) for p in self.pages)

    def iter_tokens(self):
        """Yield (global_token_index, page, token) in reading order."""
        index = 0
        for page in self.pages:
            for token in page.tokens:
                yield index, page, token
                index += 1


def clamp_or_reject(token: Token, page: Page) -> Token:
    """Clamp a token overshooting page bounds by <= CLAMP_LIMIT_PX, else reject.

    Raises BadGeometry when the overshoot exceeds the limit or the clamp
    would leave a degenerate (sub-pixel) box.
    """
    over_x = token.left + token.width - page.page_width
    over_y = token.top + token.height - page.page_height
    if over_x > CLAMP_LIMIT_PX or over_y > CLAMP_LIMIT_PX:
        raise BadGeometry(
            f"token {token.text!r} at ({token.left},{token.top}) overshoots "
            f"page {page.page_num} ({page.page_width}x{page.page_height}) "
            f"by ({max(over_x, 0)},{max(over_y, 0)}) px"
        )
    if over_x <= 0 and over_y <= 0:
        return token
    new_width = token.width - over_x if over_x > 0 else token.width
    new_height = token.height - over_y if over_y > 0 else token.height
    if new_width < 1 or new_height < 1:
        raise BadGeometry(
            f"token {token.text!r} cannot be clamped inside page {page.page_num} "
            f"without collapsing its box"
        )
    return replace(token, width=new_width, height=new_height)


def _parse_int(value: str, line_no: int, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise BadRow(line_no, f"non-integer {name}: {value!r}") from None


def _parse_conf(value: str, line_no: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise BadRow(line_no, f"non-numeric conf: {value!r}") from None


def parse_tsv(raw: str | TextIO, doc_id: str = "") -> DocumentModel:
    """Parse OCR TSV (string or text stream) into a DocumentModel.

    Level-1 rows define page dimensions, levels 2-4 are consumed for their
    structural indices only, and level-5 rows with non-empty text become
    tokens. Structural rows carry conf -1 in real OCR output, so -1 is
    accepted there; word rows must have conf in [0, 100].
    """
    stream = io.StringIO(raw) if isinstance(raw, str) else raw

    header = stream.readline()
    if header == "":
        raise MalformedHeader("empty input, expected TSV header")
    header = header.rstrip("\n").rstrip("\r")
    if header != HEADER_LINE:
        raise MalformedHeader(f"expected {HEADER_LINE!r}, got {header!r}")

    page_order: list[int] = []
    page_dims: dict[int, tuple[int, int]] = {}
    page_tokens: dict[int, list[Token]] = {}

    for line_no, line in enumerate(stream, start=2):
        line = line.rstrip("\n").rstrip("\r")
        if line == "":
            continue  # tolerate trailing blank lines
        cols = line.split("\t")
        if len(cols) != 12:
            raise BadRow(line_no, f"expected 12 columns, got {len(cols)}")

        level = _parse_int(cols[0], line_no, "level")
        if not 1 <= level <= 5:
            raise BadRow(line_no, f"level must be in 1..5, got {level}")
        page_num = _parse_int(cols[1], line_no, "page_num")
        block_num = _parse_int(cols[2], line_no, "block_num")
        par_num = _parse_int(cols[3], line_no, "par_num")
        line_num = _parse_int(cols[4], line_no, "line_num")
        word_num = _parse_int(cols[5], line_no, "word_num")
        left = _parse_int(cols[6], line_no, "left")
        top = _parse_int(cols[7], line_no, "top")
        width = _parse_int(cols[8], line_no, "width")
        height = _parse_int(cols[9], line_no, "height")
        conf = _parse_conf(cols[10], line_no)
        text = cols[11]

        if page_num < 1:
            raise BadRow(line_no, f"page_num must be >= 1, got {page_num}")

        if level == 1:
            if conf != -1.0 and not 0.0 <= conf <= 100.0:
                raise BadRow(line_no, f"structural conf must be -1 or in [0, 100], got {conf}")
            if width < 1 or height < 1:
                raise BadRow(line_no, f"page dimensions must be positive, got {width}x{height}")
            if page_num in page_dims:
                raise BadRow(line_no, f"duplicate page row for page {page_num}")
            page_order.append(page_num)
            page_dims[page_num] = (width, height)
            page_tokens[page_num] = []
        elif level < 5:
            if conf != -1.0 and not 0.0 <= conf <= 100.0:
                raise BadRow(line_no, f"structural conf must be -1 or in [0, 100], got {conf}")
            # block/paragraph/line rows: indices already ride on the word rows
        else:
            if not text.strip():
                continue  # word rows with empty text carry no signal
            if page_num not in page_dims:
                raise MissingPageRow(
                    f"line {line_no}: word row for page {page_num} before its page row"
                )
            if not 0.0 <= conf <= 100.0:
                raise BadRow(line_no, f"word conf must be in [0, 100], got {conf}")
            if width < 1 or height < 1:
                raise BadRow(line_no, f"word box must be at least 1x1, got {width}x{height}")
            if left < 0 or top < 0:
                raise BadRow(line_no, f"word box origin must be >= 0, got ({left},{top})")
            token = Token(
                level=5, page_num=page_num, block_num=block_num, par_num=par_num,
                line_num=line_num, word_num=word_num, left=left, top=top,
                width=width, height=height, conf=conf, text=text,
            )
            page_w, page_h = page_dims[page_num]
            probe = Page(page_num=page_num, page_width=page_w, page_height=page_h, tokens=())
            page_tokens[page_num].append(clamp_or_reject(token, probe))

    pages = tuple(
        Page(
            page_num=num,
            page_width=page_dims[num][0],
            page_height=page_dims[num][1],
            tokens=tuple(page_tokens[num]),
        )
        for num in page_order
    )
    return DocumentModel(doc_id=doc_id, pages=pages)


def to_tsv(doc: DocumentModel) -> str:
    """Serialize a DocumentModel back to TSV (retained rows only).

    Emits one level-1 row per page and one level-5 row per token; the
    structural levels 2-4 are not retained by the model. Re-parsing the
    output yields an identical model.
    """
    lines = [HEADER_LINE]
    for page in doc.pages:
        lines.append(
            f"1\t{page.page_num}\t0\t0\t0\t0\t0\t0\t"
            f"{page.page_width}\t{page.page_height}\t-1\t"
        )
        for t in page.tokens:
            lines.append(
                f"5\t{t.page_num}\t{t.block_num}\t{t.par_num}\t{t.line_num}\t"
                f"{t.word_num}\t{t.left}\t{t.top}\t{t.width}\t{t.height}\t"
                f"{t.conf!r}\t{t.text}"
            )
    return "\n".join(lines) + "\n"


def document_to_dict(doc: DocumentModel) -> dict:
    return {
        "schema_version": DOC_SCHEMA_VERSION,
        "doc_id": doc.doc_id,
        "pages": [
            {
                "page_num": p.page_num,
                "page_width": p.page_width,
                "page_height": p.page_height,
                "tokens": [
                    {
                        "level": t.level, "page_num": t.page_num,
                        "block_num": t.block_num, "par_num": t.par_num,
                        "line_num": t.line_num, "word_num": t.word_num,
                        "left": t.left, "top": t.top,
                        "width": t.width, "height": t.height,
                        "conf": t.conf, "text": t.text,
                    }
                    for t in p.tokens
                ],
            }
            for p in doc.pages
        ],
    }


def document_to_json(doc: DocumentModel) -> str:
    return json.dumps(document_to_dict(doc), indent=2, sort_keys=True)


def document_from_dict(data: dict) -> DocumentModel:
    pages = []
    for p in data["pages"]:
        tokens = tuple(Token(**t) for t in p["tokens"])
        page = Page(
            page_num=p["page_num"],
            page_width=p["page_width"],
            page_height=p["page_height"],
            tokens=tokens,
        )
        for token in tokens:
            if token.right > page.page_width or token.bottom > page.page_height:
                raise BadGeometry(
                    f"token {token.text!r} exceeds page {page.page_num} bounds"
                )
        pages.append(page)
    return DocumentModel(doc_id=data["doc_id"], pages=tuple(pages))


def document_from_json(text: str) -> DocumentModel:
    return document_from_dict(json.loads(text))
