"""Embedded fixed-advance bitmap font.

Each glyph is a 5x7 bitmap inside a 6x8 cell (one blank column, one blank
row). Font sizes map to integer scale factors of that cell, so metrics are
platform independent.
"""

from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from ..domain.errors import UnsupportedGlyphError

BASE_ADVANCE = 6
BASE_HEIGHT = 8
INK_COLS = 5
INK_ROWS = 7

_GLYPH_ROWS: Dict[str, Tuple[str, ...]] = {
    "0": (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."),
    "1": ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "2": (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    "3": ("#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."),
    "4": ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    "5": ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    "6": ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
    "7": ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."),
    "8": (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    "9": (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
    "-": (".....", ".....", ".....", "#####", ".....", ".....", "....."),
    ".": (".....", ".....", ".....", ".....", ".....", ".##..", ".##.."),
    " ": (".....", ".....", ".....", ".....", ".....", ".....", "....."),
}

GLYPHS: Dict[str, np.ndarray] = {
    char: np.array([[cell == "#" for cell in row] for row in rows], dtype=bool)
    for char, rows in _GLYPH_ROWS.items()
}


def font_scale(font_size: int) -> int:
    return max(1, font_size // BASE_HEIGHT)


def glyph_advance(font_size: int) -> int:
    return BASE_ADVANCE * font_scale(font_size)


def glyph_height(font_size: int) -> int:
    return BASE_HEIGHT * font_scale(font_size)


def ink_size(font_size: int) -> Tuple[int, int]:
    """(width, height) of the inked part of one glyph."""
    scale = font_scale(font_size)
    return INK_COLS * scale, INK_ROWS * scale


@dataclass(frozen=True)
class TextMetrics:
    widths: Tuple[int, ...]
    glyph_height: int


def check_supported(token: str) -> None:
    for char in token:
        if char not in GLYPHS:
            raise UnsupportedGlyphError(f"no glyph for {char!r} in token {token!r}")


def measure_text(tokens: Sequence[str], font_size: int) -> TextMetrics:
    """Pixel widths per token (advance times length) plus the line height."""
    advance = glyph_advance(font_size)
    for token in tokens:
        check_supported(token)
    return TextMetrics(widths=tuple(advance * len(token) for token in tokens),
                       glyph_height=glyph_height(font_size))


def scaled_glyph(char: str, font_size: int) -> np.ndarray:
    """Boolean ink mask of one glyph at the given size."""
    check_supported(char)
    scale = font_scale(font_size)
    return np.kron(GLYPHS[char], np.ones((scale, scale), dtype=bool)).astype(bool)
