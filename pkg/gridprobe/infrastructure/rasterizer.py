"""Deterministic rasterization of matrices, grids and plain token flows."""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..domain.errors import LayoutError
from ..domain.models import (
    RGB, CellAlign, FlowRenderSpec, Grid, GridRenderSpec, Matrix, MatrixRenderSpec, RasterImage
)
from .bitmap_font import glyph_advance, ink_size, measure_text, scaled_glyph
from .text_codec import format_number

log = logging.getLogger(__name__)


class Canvas:
    """RGB pixel buffer with the few drawing primitives the renderers need."""

    def __init__(self, width: int, height: int, background: RGB):
        self.width = width
        self.height = height
        self._pixels = np.empty((height, width, 3), dtype=np.uint8)
        self._pixels[:, :] = background

    def fill_rect(self, x: int, y: int, w: int, h: int, color: RGB) -> None:
        if w <= 0 or h <= 0:
            return
        self._pixels[y:y + h, x:x + w] = color

    def draw_text(self, text: str, x: int, y: int, font_size: int, color: RGB) -> None:
        advance = glyph_advance(font_size)
        for offset, char in enumerate(text):
            mask = scaled_glyph(char, font_size)
            left = x + offset * advance
            region = self._pixels[y:y + mask.shape[0], left:left + mask.shape[1]]
            region[mask[:region.shape[0], :region.shape[1]]] = color

    def to_image(self) -> RasterImage:
        return RasterImage(width=self.width, height=self.height, pixels=self._pixels.tobytes())


@dataclass(frozen=True)
class MatrixLayout:
    tokens: Tuple[Tuple[str, ...], ...]
    token_widths: Tuple[Tuple[int, ...], ...]
    column_widths: Tuple[int, ...]
    glyph_height: int
    content_width: int
    content_height: int
    width: int
    height: int


def layout_matrix(m: Matrix, spec: MatrixRenderSpec) -> MatrixLayout:
    """Column width is the widest measured entry in that column."""
    tokens = tuple(tuple(format_number(value) for value in row) for row in m.to_rows())
    widths = tuple(measure_text(row, spec.font_size).widths for row in tokens)
    glyph_h = measure_text([], spec.font_size).glyph_height
    column_widths = tuple(max(widths[r][c] for r in range(m.rows)) for c in range(m.cols))
    content_width = sum(column_widths) + (m.cols - 1) * spec.cell_padding_x
    content_height = m.rows * glyph_h + (m.rows - 1) * spec.cell_padding_y
    width = 2 * spec.margin + 2 * (spec.bracket_width + spec.bracket_gap) + content_width
    height = 2 * spec.margin + content_height
    return MatrixLayout(tokens, widths, column_widths, glyph_h, content_width, content_height, width, height)


def _draw_bracket(canvas: Canvas, outer_x: int, top: int, height: int,
                  spec: MatrixRenderSpec, opens_right: bool) -> None:
    """Square bracket: vertical stroke plus top and bottom bars."""
    t = spec.bracket_thickness
    stroke_x = outer_x if opens_right else outer_x - t
    bar_x = outer_x if opens_right else outer_x - spec.bracket_width
    color = spec.foreground_color
    canvas.fill_rect(stroke_x, top, t, height, color)
    canvas.fill_rect(bar_x, top, spec.bracket_width, t, color)
    canvas.fill_rect(bar_x, top + height - t, spec.bracket_width, t, color)


def render_matrix(m: Matrix, spec: MatrixRenderSpec = MatrixRenderSpec()) -> RasterImage:
    layout = layout_matrix(m, spec)
    canvas = Canvas(layout.width, layout.height, spec.background_color)

    top = spec.margin
    _draw_bracket(canvas, spec.margin, top, layout.content_height, spec, opens_right=True)
    _draw_bracket(canvas, layout.width - spec.margin, top, layout.content_height, spec, opens_right=False)

    content_left = spec.margin + spec.bracket_width + spec.bracket_gap
    y = top
    for r in range(m.rows):
        x = content_left
        for c in range(m.cols):
            slack = layout.column_widths[c] - layout.token_widths[r][c]
            if spec.cell_align is CellAlign.RIGHT:
                offset = slack
            elif spec.cell_align is CellAlign.CENTER:
                offset = slack // 2
            else:
                offset = 0
            canvas.draw_text(layout.tokens[r][c], x + offset, y, spec.font_size, spec.foreground_color)
            x += layout.column_widths[c] + spec.cell_padding_x
        y += layout.glyph_height + spec.cell_padding_y
    return canvas.to_image()


def grid_cell_side(spec: GridRenderSpec) -> int:
    return measure_text([], spec.font_size).glyph_height + 2 * spec.cell_padding


def render_grid(g: Grid, spec: GridRenderSpec = GridRenderSpec()) -> RasterImage:
    """Uniform square cells separated and framed by grid lines."""
    side = grid_cell_side(spec)
    t = spec.grid_thickness
    width = 2 * spec.margin + (g.cols + 1) * t + g.cols * side
    height = 2 * spec.margin + (g.rows + 1) * t + g.rows * side
    canvas = Canvas(width, height, spec.background_color)
    color = spec.foreground_color

    inner_w = width - 2 * spec.margin
    inner_h = height - 2 * spec.margin
    for r in range(g.rows + 1):
        canvas.fill_rect(spec.margin, spec.margin + r * (side + t), inner_w, t, color)
    for c in range(g.cols + 1):
        canvas.fill_rect(spec.margin + c * (side + t), spec.margin, t, inner_h, color)

    ink_w, ink_h = ink_size(spec.font_size)
    for r in range(g.rows):
        for c in range(g.cols):
            x = spec.margin + t + c * (side + t) + (side - ink_w) // 2
            y = spec.margin + t + r * (side + t) + (side - ink_h) // 2
            canvas.draw_text(str(g[r, c]), x, y, spec.font_size, color)
    return canvas.to_image()


def derive_flow_canvas_width(m: Matrix, matrix_spec: MatrixRenderSpec = MatrixRenderSpec()) -> int:
    """Width the native matrix rendering of ``m`` would occupy."""
    return layout_matrix(m, matrix_spec).width


def wrap_tokens(widths: List[int], gap: int, usable_width: int) -> List[List[int]]:
    """Greedy line filling; returns token indices per line, never splitting a token."""
    lines: List[List[int]] = []
    current: List[int] = []
    cursor = 0
    for index, width in enumerate(widths):
        if width > usable_width:
            raise LayoutError(f"token {index} is {width}px wide but only {usable_width}px are usable")
        if current and cursor + gap + width > usable_width:
            lines.append(current)
            current, cursor = [], 0
        cursor = width if not current else cursor + gap + width
        current.append(index)
    if current:
        lines.append(current)
    return lines


def render_flow(serialized_text: str, canvas_width: int,
                spec: FlowRenderSpec = FlowRenderSpec()) -> RasterImage:
    """Lay row-major tokens left to right, wrapping at the canvas geometry."""
    tokens = serialized_text.split()
    metrics = measure_text(tokens, spec.font_size)
    gap = spec.word_gap_spaces * glyph_advance(spec.font_size)
    usable = canvas_width - 2 * spec.margin
    lines = wrap_tokens(list(metrics.widths), gap, usable) or [[]]

    line_count = len(lines)
    height = 2 * spec.margin + line_count * metrics.glyph_height + (line_count - 1) * spec.line_gap
    canvas = Canvas(canvas_width, height, spec.background_color)
    y = spec.margin
    for line in lines:
        x = spec.margin
        for index in line:
            canvas.draw_text(tokens[index], x, y, spec.font_size, spec.foreground_color)
            x += metrics.widths[index] + gap
        y += metrics.glyph_height + spec.line_gap
    log.debug("flow layout: %d tokens on %d lines in %dpx", len(tokens), line_count, canvas_width)
    return canvas.to_image()
