"""Spatial error analysis over scored records."""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..domain.errors import EmptyGroupError, HeatmapShapeError
from ..domain.models import AccuracyRow, Condition, ErrorHeatmap, EvalRecord, TaskKind
from .scoring_usecase import aggregate_accuracy

log = logging.getLogger(__name__)

# (minuend, subtrahend) pairs reported whenever both runs are present
DIFFERENCE_PAIRS: Tuple[Tuple[Condition, Condition], ...] = (
    (Condition.TEXT, Condition.VISUAL),
    (Condition.VISUAL_FLOW, Condition.VISUAL),
)


def cell_error_heatmap(records: Sequence[EvalRecord]) -> ErrorHeatmap:
    """Mean error mask over records of one task, size and condition.

    Malformed records carry no mask and are left out of the mean.
    """
    masked = [r for r in records if r.cell_errors is not None]
    if not masked:
        raise EmptyGroupError("no records with a cell-error mask")

    first = masked[0]
    for record in masked[1:]:
        if (record.task, record.size, record.condition) != (first.task, first.size, first.condition):
            raise HeatmapShapeError(
                f"records mix {first.task.value}/{first.size}/{first.condition.value} "
                f"with {record.task.value}/{record.size}/{record.condition.value}"
            )
        if record.cell_errors.shape != first.cell_errors.shape:
            raise HeatmapShapeError(
                f"mask shape {record.cell_errors.shape} differs from {first.cell_errors.shape}"
            )

    stack = np.stack([r.cell_errors.to_array().astype(np.float64) for r in masked])
    rates = stack.mean(axis=0)
    counts = np.full(rates.shape, len(masked), dtype=np.int64)
    return ErrorHeatmap(
        task=first.task,
        size=first.size,
        conditions=(first.condition,),
        rates=tuple(tuple(float(v) for v in row) for row in rates),
        sample_counts=tuple(tuple(int(v) for v in row) for row in counts),
    )


def heatmap_difference(a: ErrorHeatmap, b: ErrorHeatmap) -> ErrorHeatmap:
    """Signed ``a - b``; positive where ``a`` errs more often."""
    if (a.task, a.size) != (b.task, b.size):
        raise HeatmapShapeError(
            f"cannot subtract {b.task.value}/{b.size} from {a.task.value}/{a.size}"
        )
    if a.shape != b.shape:
        raise HeatmapShapeError(f"heatmap shapes differ: {a.shape} vs {b.shape}")

    diff = a.rates_array() - b.rates_array()
    counts = np.minimum(np.array(a.sample_counts), np.array(b.sample_counts))
    return ErrorHeatmap(
        task=a.task,
        size=a.size,
        conditions=a.conditions + b.conditions,
        rates=tuple(tuple(float(v) for v in row) for row in diff),
        sample_counts=tuple(tuple(int(v) for v in row) for row in counts),
        is_difference=True,
    )


@dataclass(frozen=True)
class AnalysisReport:
    accuracy: Tuple[AccuracyRow, ...]
    heatmaps: Tuple[ErrorHeatmap, ...]
    differences: Tuple[ErrorHeatmap, ...]


class AnalyzeUseCase:
    """Builds the accuracy table, per-group heatmaps and condition differences."""

    def execute(self, records: Iterable[EvalRecord]) -> AnalysisReport:
        records = list(records)
        accuracy = aggregate_accuracy(records)

        groups: Dict[Tuple[TaskKind, int, Condition], List[EvalRecord]] = OrderedDict()
        for record in records:
            groups.setdefault((record.task, record.size, record.condition), []).append(record)

        heatmaps: Dict[Tuple[TaskKind, int, Condition], ErrorHeatmap] = OrderedDict()
        for key in sorted(groups, key=lambda k: (k[0].value, k[1], k[2].value)):
            try:
                heatmaps[key] = cell_error_heatmap(groups[key])
            except EmptyGroupError:
                log.info("%s/%d/%s: every record is malformed; no heatmap",
                         key[0].value, key[1], key[2].value)

        differences = []
        for task, size in sorted({(k[0], k[1]) for k in heatmaps}, key=lambda k: (k[0].value, k[1])):
            for minuend, subtrahend in DIFFERENCE_PAIRS:
                a = heatmaps.get((task, size, minuend))
                b = heatmaps.get((task, size, subtrahend))
                if a is not None and b is not None:
                    differences.append(heatmap_difference(a, b))

        return AnalysisReport(
            accuracy=tuple(accuracy),
            heatmaps=tuple(heatmaps.values()),
            differences=tuple(differences),
        )
