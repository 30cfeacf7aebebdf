"""Five-symbol text-type alphabet and per-line pattern strings.

Every token text maps to exactly one symbol:

  '?'  only special (non-alphanumeric) characters, e.g. "-" or "***"
  'W'  only letters (Unicode, so umlauts count), e.g. "Oktober"
  'N'  only decimal digits, e.g. "2019"
  'F'  digit groups joined by ',' or '.' separators, e.g. "1,000" or "70,63"
  'A'  anything mixing the above, e.g. "A4-Nr7" or "70,63€"

A line's pattern string is the space-joined sequence of its tokens' symbols.
"""

from __future__ import annotations

import re
from typing import Iterable

from .errors import EmptyText
from .ingest import Token

PATTERN_SYMBOLS = ("?", "W", "N", "F", "A")

# Digits with at least one ',' or '.' group and nothing else. Covers both
# thousands grouping ("1,000") and decimal commas ("70,63") without any
# locale parsing; disjoint from the pure-digit class by construction.
_FRACTION_RE = re.compile(r"\d+(?:[.,]\d+)+")


def classify_text_pattern(text: str) -> str:
    """Return the pattern symbol for a non-empty, whitespace-free string."""
    if not text:
        raise EmptyText("cannot classify an empty string")
    if all(not ch.isalnum() for ch in text):
        return "?"
    if all(ch.isalpha() for ch in text):
        return "W"
    if all(ch.isdecimal() for ch in text):
        return "N"
    if _FRACTION_RE.fullmatch(text):
        return "F"
    return "A"


def line_block_regex(line_tokens: Iterable[Token | str]) -> str:
    """Space-joined pattern symbols of one line's tokens, in reading order.

    Accepts Token objects or bare strings; an empty line yields "".
    """
    return " ".join(
        classify_text_pattern(t.text if isinstance(t, Token) else t)
        for t in line_tokens
    )
