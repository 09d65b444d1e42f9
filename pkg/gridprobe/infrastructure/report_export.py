"""Writes accuracy tables, accuracy-by-size charts and heatmaps (PNG plus raw numeric tables)."""

import csv
import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import matplotlib
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.colors import Normalize, TwoSlopeNorm
from matplotlib.figure import Figure
from PIL import Image

from ..domain.errors import DatasetIOError
from ..domain.models import AccuracyRow, ErrorHeatmap, TaskKind

log = logging.getLogger(__name__)

RATE_COLORMAP = "Greys"
DIFFERENCE_COLORMAP = "RdBu_r"
ACCURACY_COLUMNS = ("task", "size", "condition", "correct", "total", "accuracy")


def heatmap_rgb(heatmap: ErrorHeatmap, cell_px: int = 24) -> np.ndarray:
    """Colour each position as a ``cell_px`` square; no axes or legend.

    Rates use a monochrome ramp on [0, 1]; differences a diverging map
    centred at 0 on the fixed scale [-1, 1].
    """
    if cell_px < 1:
        raise ValueError("cell_px must be positive")
    if heatmap.is_difference:
        cmap = matplotlib.colormaps[DIFFERENCE_COLORMAP]
        norm = TwoSlopeNorm(vmin=-1.0, vcenter=0.0, vmax=1.0)
    else:
        cmap = matplotlib.colormaps[RATE_COLORMAP]
        norm = Normalize(vmin=0.0, vmax=1.0)
    rgba = cmap(norm(heatmap.rates_array()), bytes=True)
    rgb = np.ascontiguousarray(rgba[..., :3], dtype=np.uint8)
    return np.repeat(np.repeat(rgb, cell_px, axis=0), cell_px, axis=1)


def _write_matrix_csv(path: Path, values: np.ndarray, fmt: str) -> None:
    np.savetxt(path, values, fmt=fmt, delimiter=",")


def read_rates_csv(path: Union[str, Path]) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)


def write_accuracy_csv(rows: Iterable[AccuracyRow], path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(ACCURACY_COLUMNS)
        for row in rows:
            writer.writerow([
                row.task.value if row.task else "",
                "" if row.size is None else row.size,
                row.condition.value if row.condition else "",
                row.correct,
                row.total,
                repr(row.accuracy),
            ])


def write_accuracy_chart(rows: Sequence[AccuracyRow], task: TaskKind, path: Union[str, Path]) -> None:
    """Accuracy against size for one task, one line per condition."""
    points = [row for row in rows if row.task is task and row.size is not None and row.condition is not None]
    fig = Figure(figsize=(5, 3.5), dpi=100)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot()
    for condition in sorted({row.condition for row in points}, key=lambda c: c.value):
        series = sorted((row.size, row.accuracy) for row in points if row.condition is condition)
        ax.plot([size for size, _ in series], [acc for _, acc in series], marker="o", label=condition.value)
    ax.set_xticks(sorted({row.size for row in points}))
    ax.set_ylim(0, 1.05)
    ax.set_xlabel("size")
    ax.set_ylabel("accuracy")
    ax.set_title(task.value)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})


def _charted_tasks(rows: Sequence[AccuracyRow]) -> List[TaskKind]:
    tasks = {row.task for row in rows if row.task is not None and row.size is not None
             and row.condition is not None}
    return sorted(tasks, key=lambda t: t.value)


def export_report(heatmaps: Sequence[ErrorHeatmap], accuracy_table: Sequence[AccuracyRow],
                  out_dir: Union[str, Path], cell_px: int = 24) -> List[Path]:
    """Write every artefact into ``out_dir`` and return the paths written."""
    out = Path(out_dir)
    written: List[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)

        accuracy_path = out / "accuracy.csv"
        write_accuracy_csv(accuracy_table, accuracy_path)
        written.append(accuracy_path)

        for task in _charted_tasks(accuracy_table):
            chart_path = out / f"accuracy_{task.value}.png"
            write_accuracy_chart(accuracy_table, task, chart_path)
            written.append(chart_path)

        for heatmap in heatmaps:
            stem = heatmap.label
            png_path = out / f"{stem}.png"
            Image.fromarray(heatmap_rgb(heatmap, cell_px)).save(png_path, format="PNG")
            rates_path = out / f"{stem}.csv"
            _write_matrix_csv(rates_path, heatmap.rates_array(), "%.17g")
            counts_path = out / f"{stem}_counts.csv"
            _write_matrix_csv(counts_path, np.array(heatmap.sample_counts, dtype=np.int64), "%d")
            written.extend([png_path, rates_path, counts_path])
    except OSError as e:
        raise DatasetIOError(f"cannot write report to {out}: {e}") from e

    log.info("wrote %d report files to %s", len(written), out)
    return written
