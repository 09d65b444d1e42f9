"""1D text serialization and tolerant parsing of model responses.

Canonical form: entries of a row separated by one space, rows separated by
a newline, no brackets. The parsers additionally accept bracketed rows,
comma delimiters and ragged whitespace, and never raise.
"""

import math
import re
from typing import List, Optional, Union

from ..domain.models import (
    FailureCategory, Grid, LUPair, Matrix, Number, ParsedAnswer, ParseFailure
)

THINK_CLOSE = "</think>"
THINK_OPEN = "<think>"

_INT_TOKEN = re.compile(r"^[+-]?\d+$")
_FLOAT_TOKEN = re.compile(r"^[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?$")
_INNER_BRACKETS = re.compile(r"\[([^\[\]]*)\]")
_TOKEN_SPLIT = re.compile(r"[,;\s]+")
_FENCE = re.compile(r"^\s*```")
# Standalone L or U, optionally followed by '=' or ':'.
_LU_LABEL = re.compile(r"(?<![A-Za-z0-9_])([LlUu])(?![A-Za-z0-9_])\s*[=:]?")


def format_number(value: Number) -> str:
    if isinstance(value, int):
        return str(value)
    if math.isfinite(value) and value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _serialize_rows(rows: List[List[Number]]) -> str:
    return "\n".join(" ".join(format_number(value) for value in row) for row in rows)


def serialize_matrix(m: Matrix) -> str:
    return _serialize_rows(m.to_rows())


def serialize_grid(g: Grid) -> str:
    return _serialize_rows(g.to_rows())


def serialize_lu_pair(pair: LUPair) -> str:
    """Labeled blocks, the shape requested from models for LU answers."""
    return f"L =\n{serialize_matrix(pair.l)}\nU =\n{serialize_matrix(pair.u)}"


def _parse_token(token: str) -> Optional[Number]:
    try:
        if _INT_TOKEN.match(token):
            return int(token)
        if _FLOAT_TOKEN.match(token):
            return float(token)
    except ValueError:
        # int() refuses digit strings past the interpreter limit
        return None
    return None


def _split_rows(text: str) -> List[str]:
    """Row strings, taken from innermost brackets when present, else from lines."""
    lines = [line for line in text.splitlines() if not _FENCE.match(line)]
    body = "\n".join(lines)
    if "[" in body:
        bracketed = [group for group in _INNER_BRACKETS.findall(body) if group.strip()]
        if bracketed:
            return bracketed
    return [line for line in lines if line.strip()]


def _parse_rows(text: str) -> Union[List[List[Number]], ParseFailure]:
    row_strings = _split_rows(text)
    if not row_strings:
        return ParseFailure(FailureCategory.NO_STRUCTURE, "no rows found")

    rows: List[List[Number]] = []
    for row_string in row_strings:
        tokens = [token for token in _TOKEN_SPLIT.split(row_string.strip().strip("[]")) if token]
        if not tokens:
            continue
        row: List[Number] = []
        for token in tokens:
            value = _parse_token(token)
            if value is None:
                return ParseFailure(FailureCategory.NON_NUMERIC, f"token {token!r}")
            row.append(value)
        rows.append(row)

    if not rows:
        return ParseFailure(FailureCategory.NO_STRUCTURE, "no numeric rows found")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        return ParseFailure(FailureCategory.RAGGED_ROWS, f"row lengths {[len(r) for r in rows]}")
    return rows


def parse_matrix(text: str) -> Union[Matrix, ParseFailure]:
    rows = _parse_rows(text)
    if isinstance(rows, ParseFailure):
        return rows
    return Matrix.from_rows(rows)


def parse_grid(text: str) -> Union[Grid, ParseFailure]:
    rows = _parse_rows(text)
    if isinstance(rows, ParseFailure):
        return rows
    for row in rows:
        for value in row:
            if value not in (0, 1) or isinstance(value, float):
                return ParseFailure(FailureCategory.NON_NUMERIC, f"non-binary cell {value!r}")
    return Grid.from_rows(rows)


def _as_decimal(m: Matrix) -> Matrix:
    return Matrix(rows=m.rows, cols=m.cols, entries=tuple(float(v) for v in m.entries))


def parse_lu_pair(text: str) -> Union[LUPair, ParseFailure]:
    """Locate the labeled L and U blocks and parse each as a decimal matrix."""
    last_l = last_u = None
    for match in _LU_LABEL.finditer(text):
        if match.group(1) in "Ll":
            last_l = match
        else:
            last_u = match
    if last_l is None or last_u is None:
        return ParseFailure(FailureCategory.MISSING_L_OR_U, "labeled L and U blocks not found")

    first, second = sorted((last_l, last_u), key=lambda m: m.start())
    blocks = {
        first.group(1).upper(): text[first.end():second.start()],
        second.group(1).upper(): text[second.end():],
    }
    l = parse_matrix(blocks["L"])
    if isinstance(l, ParseFailure):
        return l
    u = parse_matrix(blocks["U"])
    if isinstance(u, ParseFailure):
        return u
    return LUPair(l=_as_decimal(l), u=_as_decimal(u))


def strip_reasoning(text: str) -> ParsedAnswer:
    """Split off reasoning; the answer is everything after the last closing tag."""
    cut = text.rfind(THINK_CLOSE)
    if cut < 0:
        return ParsedAnswer(reasoning=None, answer_region=text)
    reasoning = text[:cut]
    opened = reasoning.find(THINK_OPEN)
    if opened >= 0:
        reasoning = reasoning[opened + len(THINK_OPEN):]
    return ParsedAnswer(reasoning=reasoning, answer_region=text[cut + len(THINK_CLOSE):])
