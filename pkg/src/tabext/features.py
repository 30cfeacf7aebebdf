"""Per-token layout and text features computed from a document model.

One :class:`FeatureRow` is produced per token. Field names double as the
serialization schema, so they follow the feature vocabulary (CamelCase)
rather than Python convention.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Literal

from .ingest import DocumentModel, Page, Token
from .textpattern import classify_text_pattern, line_block_regex

FEATURE_SCHEMA_VERSION = "tabext-features-v1"

# Canonical column order for every serialized feature file.
FEATURE_COLUMNS = (
    "RawText", "TextPattern", "BlockNo", "BlockCharCount", "LineWordCount",
    "BlockWidth", "LineCharCount", "IsFirstInt", "BlockWordCount",
    "PageWidth", "PageHeight", "LeftAlignmentGroup", "LeftAlignmentCount",
    "RightAlignmentGroup", "RightAlignmentCount", "LineBlockRegex",
    "Width", "Height", "CharCount", "Left", "Top", "LeftMargin", "TopMargin",
    "FirstQuarter", "SecondQuarter", "ThirdQuarter", "FourthQuarter",
    "LineNo", "PageNo",
)


def default_tolerance(page_width: int) -> int:
    """Alignment tolerance in px; pixel jitter scales with scan resolution."""
    return max(2, int(round(0.004 * page_width)))


@dataclass
class FeatureRow:
    """The full attribute vector for one token, plus its binary label."""

    doc_id: str
    token_index: int
    RawText: str
    TextPattern: str
    BlockNo: int
    BlockCharCount: int
    LineWordCount: int
    BlockWidth: int
    LineCharCount: int
    IsFirstInt: int
    BlockWordCount: int
    PageWidth: int
    PageHeight: int
    LeftAlignmentGroup: int
    LeftAlignmentCount: int
    RightAlignmentGroup: int
    RightAlignmentCount: int
    LineBlockRegex: str
    Width: int
    Height: int
    CharCount: int
    Left: int
    Top: int
    LeftMargin: float
    TopMargin: float
    FirstQuarter: int
    SecondQuarter: int
    ThirdQuarter: int
    FourthQuarter: int
    LineNo: int
    PageNo: int
    label: int = 0


FEATURE_ROW_FIELDS = tuple(f.name for f in fields(FeatureRow))


@dataclass(frozen=True)
class BlockAggregate:
    char_count: int
    word_count: int
    width: int


@dataclass(frozen=True)
class LineAggregate:
    word_count: int
    char_count: int
    pattern: str
    line_no: int


@dataclass(frozen=True)
class GroupAssignment:
    group_id: int
    group_count: int


def block_aggregates(page_tokens: list[Token]) -> dict[int, BlockAggregate]:
    """Character/word counts and pixel width per block of one page."""
    groups: dict[int, list[Token]] = {}
    for token in page_tokens:
        groups.setdefault(token.block_num, []).append(token)
    out = {}
    for block_num, members in groups.items():
        out[block_num] = BlockAggregate(
            char_count=sum(len(t.text) for t in members),
            word_count=len(members),
            width=max(t.right for t in members) - min(t.left for t in members),
        )
    return out


def line_aggregates(line_tokens: list[Token], line_no: int = 0) -> LineAggregate:
    """Counts and pattern string for one line (tokens in reading order)."""
    return LineAggregate(
        word_count=len(line_tokens),
        char_count=sum(len(t.text) for t in line_tokens),
        pattern=line_block_regex(line_tokens),
        line_no=line_no,
    )


def alignment_groups(
    page_tokens: list[Token],
    axis: Literal["left", "right"],
    tolerance: int,
) -> list[GroupAssignment]:
    """Single-linkage grouping of edge coordinates on one page.

    Coordinates (left edge, or right edge for axis="right") are sorted and
    consecutive values within `tolerance` join one group. Group ids count
    0..k-1 in ascending coordinate order. Returns one assignment per input
    token, in input order.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    if not page_tokens:
        return []
    coord = (lambda t: t.left) if axis == "left" else (lambda t: t.right)
    order = sorted(range(len(page_tokens)), key=lambda i: coord(page_tokens[i]))

    group_ids = [0] * len(page_tokens)
    counts: list[int] = []
    current_group = 0
    current_size = 0
    prev = None
    for i in order:
        c = coord(page_tokens[i])
        if prev is not None and c - prev > tolerance:
            counts.append(current_size)
            current_group += 1
            current_size = 0
        group_ids[i] = current_group
        current_size += 1
        prev = c
    counts.append(current_size)

    return [GroupAssignment(group_ids[i], counts[group_ids[i]]) for i in range(len(page_tokens))]


def quarter_flags(token: Token, page: Page) -> tuple[int, int, int, int]:
    """Which vertical quarter band holds the token's top edge.

    Bands are half-open [0,H/4), [H/4,H/2), [H/2,3H/4), [3H/4,H]; exactly
    one flag is set.
    """
    quarter = min(3, (4 * token.top) // page.page_height)
    flags = [0, 0, 0, 0]
    flags[quarter] = 1
    return tuple(flags)


def featurize_page(
    page: Page,
    doc_id: str,
    index_offset: int,
    tolerance: int | None = None,
    labels: dict[int, int] | None = None,
) -> list[FeatureRow]:
    """Compute one FeatureRow per token of a page.

    `index_offset` is the document-global index of the page's first token;
    `labels` maps document-global token indices to 0/1 (default 0).
    """
    tokens = list(page.tokens)
    if not tokens:
        return []
    tol = default_tolerance(page.page_width) if tolerance is None else tolerance
    labels = labels or {}

    blocks = block_aggregates(tokens)

    line_members: dict[tuple[int, int, int], list[Token]] = {}
    for t in tokens:
        line_members.setdefault((t.block_num, t.par_num, t.line_num), []).append(t)
    lines = {
        key: line_aggregates(members, line_no)
        for line_no, (key, members) in enumerate(sorted(line_members.items()))
    }

    left_groups = alignment_groups(tokens, "left", tol)
    right_groups = alignment_groups(tokens, "right", tol)

    rows = []
    for i, t in enumerate(tokens):
        token_index = index_offset + i
        block = blocks[t.block_num]
        line = lines[(t.block_num, t.par_num, t.line_num)]
        first, second, third, fourth = quarter_flags(t, page)
        rows.append(FeatureRow(
            doc_id=doc_id,
            token_index=token_index,
            RawText=t.text,
            TextPattern=classify_text_pattern(t.text),
            BlockNo=t.block_num,
            BlockCharCount=block.char_count,
            LineWordCount=line.word_count,
            BlockWidth=block.width,
            LineCharCount=line.char_count,
            IsFirstInt=1 if t.text[0].isdecimal() else 0,
            BlockWordCount=block.word_count,
            PageWidth=page.page_width,
            PageHeight=page.page_height,
            LeftAlignmentGroup=left_groups[i].group_id,
            LeftAlignmentCount=left_groups[i].group_count,
            RightAlignmentGroup=right_groups[i].group_id,
            RightAlignmentCount=right_groups[i].group_count,
            LineBlockRegex=line.pattern,
            Width=t.width,
            Height=t.height,
            CharCount=len(t.text),
            Left=t.left,
            Top=t.top,
            LeftMargin=t.left / page.page_width,
            TopMargin=t.top / page.page_height,
            FirstQuarter=first,
            SecondQuarter=second,
            ThirdQuarter=third,
            FourthQuarter=fourth,
            LineNo=line.line_no,
            PageNo=t.page_num,
            label=labels.get(token_index, 0),
        ))
    return rows


def featurize_document(
    doc: DocumentModel,
    tolerance: int | None = None,
    labels: dict[int, int] | None = None,
) -> list[FeatureRow]:
    """One FeatureRow per token of the document, all fields populated.

    Features are computed per page; `labels` maps document-global token
    indices to 0/1 and defaults every token to 0.
    """
    rows: list[FeatureRow] = []
    offset = 0
    for page in doc.pages:
        rows.extend(featurize_page(page, doc.doc_id, offset, tolerance, labels))
        offset += len(page.tokens)
    return rows
