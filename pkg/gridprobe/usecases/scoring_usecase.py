"""Scoring of parsed answers with the task-specific criteria."""

import logging
from collections import OrderedDict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..domain.errors import EmptyGroupError
from ..domain.models import (
    AccuracyRow, Condition, EvalRecord, FailureCategory, Grid, GroupKey, InferenceRecord,
    InferenceStatus, LUPair, LURejectReason, Matrix, ParseFailure, TaskInstance, TaskKind,
    Tolerances, Verdict
)
from ..domain.tasks import lu_residual, lu_verify, strict_lower_part, strict_upper_part
from ..infrastructure.text_codec import parse_grid, parse_lu_pair, parse_matrix, strip_reasoning

log = logging.getLogger(__name__)


def _malformed(task: TaskKind, size: int, category: FailureCategory,
               instance_id: str, condition: Condition) -> EvalRecord:
    return EvalRecord(instance_id=instance_id, task=task, size=size, condition=condition,
                      verdict=Verdict.MALFORMED, cell_errors=None, failure_category=category)


def _from_mask(task: TaskKind, size: int, mask: np.ndarray,
               instance_id: str, condition: Condition, accepted: Optional[bool] = None) -> EvalRecord:
    if accepted is None:
        accepted = not mask.any()
    verdict = Verdict.CORRECT if accepted else Verdict.INCORRECT
    return EvalRecord(instance_id=instance_id, task=task, size=size, condition=condition,
                      verdict=verdict, cell_errors=Grid.from_array(mask.astype(np.int8)))


def _values(value: Union[Matrix, Grid]) -> Tuple:
    return value.entries if isinstance(value, Matrix) else value.cells


def _score_exact(task: TaskKind, pred: Union[Matrix, Grid, ParseFailure], target: Union[Matrix, Grid],
                 instance_id: str, condition: Condition) -> EvalRecord:
    size = target.rows
    if isinstance(pred, ParseFailure):
        return _malformed(task, size, pred.category, instance_id, condition)
    if pred.shape != target.shape:
        return _malformed(task, size, FailureCategory.SHAPE, instance_id, condition)
    # Entries may exceed int64; compare them as Python numbers.
    pairs = zip(_values(pred), _values(target))
    mask = np.fromiter((p != t for p, t in pairs), dtype=bool, count=len(_values(target)))
    mask = mask.reshape(target.shape)
    return _from_mask(task, size, mask, instance_id, condition)


def score_transpose(pred: Union[Matrix, ParseFailure], target: Matrix,
                    instance_id: str = "", condition: Condition = Condition.TEXT) -> EvalRecord:
    """Exact match at every entry; shape mismatch or parse failure is malformed."""
    return _score_exact(TaskKind.TRANSPOSE, pred, target, instance_id, condition)


def score_life(pred: Union[Grid, ParseFailure], target: Grid,
               instance_id: str = "", condition: Condition = Condition.TEXT) -> EvalRecord:
    return _score_exact(TaskKind.LIFE, pred, target, instance_id, condition)


def score_lu(pred: Union[LUPair, ParseFailure], target_input: Matrix, tol: Tolerances = Tolerances(),
             instance_id: str = "", condition: Condition = Condition.TEXT) -> EvalRecord:
    """Verdict from the functional verifier; the mask marks out-of-tolerance positions.

    Residual positions above the reconstruction tolerance are marked, and so
    are the positions of any triangularity violation in L or U.
    """
    size = target_input.rows
    if isinstance(pred, ParseFailure):
        return _malformed(TaskKind.LU, size, pred.category, instance_id, condition)

    verdict = lu_verify(target_input, pred, tol)
    if verdict.reason is LURejectReason.SHAPE:
        return _malformed(TaskKind.LU, size, FailureCategory.SHAPE, instance_id, condition)

    residual = np.abs(lu_residual(target_input, pred))
    mask = ~(residual <= tol.reconstruction_abs)
    mask |= ~(np.abs(strict_upper_part(pred.l.to_array(np.float64))) <= tol.triangular_abs) & np.triu(np.ones_like(mask), 1)
    mask |= ~(np.abs(strict_lower_part(pred.u.to_array(np.float64))) <= tol.triangular_abs) & np.tril(np.ones_like(mask), -1)

    return _from_mask(TaskKind.LU, size, mask, instance_id, condition, accepted=verdict.accepted)


def parse_prediction(task: TaskKind, raw_response: str) -> Union[Matrix, Grid, LUPair, ParseFailure]:
    """Parse only the answer region after the last closing reasoning tag."""
    answer = strip_reasoning(raw_response).answer_region
    if task is TaskKind.TRANSPOSE:
        return parse_matrix(answer)
    if task is TaskKind.LIFE:
        return parse_grid(answer)
    return parse_lu_pair(answer)


def score_instance(instance: TaskInstance, record: InferenceRecord,
                   tol: Tolerances = Tolerances()) -> EvalRecord:
    if record.status is InferenceStatus.FAILED:
        return _malformed(instance.task, instance.size, FailureCategory.INFERENCE_FAILED,
                          instance.id, record.condition)
    pred = parse_prediction(instance.task, record.raw_response)
    if instance.task is TaskKind.TRANSPOSE:
        return score_transpose(pred, instance.target, instance.id, record.condition)
    if instance.task is TaskKind.LIFE:
        return score_life(pred, instance.target, instance.id, record.condition)
    return score_lu(pred, instance.input, tol, instance.id, record.condition)


def _group_value(record: EvalRecord, key: GroupKey):
    if key is GroupKey.TASK:
        return record.task
    if key is GroupKey.SIZE:
        return record.size
    return record.condition


def aggregate_accuracy(records: Iterable[EvalRecord],
                       group_by: Sequence[GroupKey] = (GroupKey.TASK, GroupKey.SIZE, GroupKey.CONDITION)
                       ) -> List[AccuracyRow]:
    """Correct over total per group; malformed records count in the denominator."""
    groups: Dict[Tuple, List[int]] = OrderedDict()
    for record in records:
        key = tuple(_group_value(record, k) for k in group_by)
        tally = groups.setdefault(key, [0, 0])
        tally[0] += int(record.is_correct)
        tally[1] += 1
    if not groups:
        raise EmptyGroupError("no records to aggregate")

    rows = []
    for key, (correct, total) in groups.items():
        values = dict(zip(group_by, key))
        rows.append(AccuracyRow(
            task=values.get(GroupKey.TASK),
            size=values.get(GroupKey.SIZE),
            condition=values.get(GroupKey.CONDITION),
            correct=correct,
            total=total,
        ))
    return sorted(rows, key=_row_sort_key)


def _row_sort_key(row: AccuracyRow) -> Tuple:
    return (
        row.task.value if row.task else "",
        row.size if row.size is not None else -1,
        row.condition.value if row.condition else "",
    )


class ScoreUseCase:
    """Scores an inference log against the dataset it was produced from."""

    def __init__(self, tolerances: Tolerances = Tolerances()):
        self._tolerances = tolerances

    def execute(self, instances: Iterable[TaskInstance],
                inference_records: Iterable[InferenceRecord],
                condition: Condition) -> List[EvalRecord]:
        """Score in dataset order; instances without a record for ``condition`` are skipped."""
        by_key = {record.key: record for record in inference_records if record.condition is condition}
        scored: List[EvalRecord] = []
        missing = 0
        for instance in instances:
            record = by_key.pop((instance.id, condition.value), None)
            if record is None:
                missing += 1
                continue
            scored.append(score_instance(instance, record, self._tolerances))
        if missing:
            log.warning("%d instance(s) have no %s inference record", missing, condition.value)
        if by_key:
            log.warning("%d %s inference record(s) match no instance; ignored", len(by_key), condition.value)
        return scored
