"""Tests for answer scoring and accuracy aggregation."""

import numpy as np
import pytest

from gridprobe.domain.errors import EmptyGroupError
from gridprobe.domain.models import (
    Condition, EvalRecord, FailureCategory, Grid, GroupKey, InferenceRecord,
    InferenceStatus, LUPair, Matrix, ParseFailure, TaskKind, Verdict
)
from gridprobe.domain.tasks import life_step, lu_generate, lu_verify
from gridprobe.usecases.analysis_usecase import cell_error_heatmap
from gridprobe.usecases.datagen_usecase import generate_instance
from gridprobe.usecases.scoring_usecase import (
    ScoreUseCase, aggregate_accuracy, parse_prediction, score_instance, score_life, score_lu,
    score_transpose
)


def ok_record(instance_id, response, condition=Condition.TEXT):
    return InferenceRecord(instance_id=instance_id, condition=condition, raw_response=response,
                           latency_ms=1.0, attempt_count=1, status=InferenceStatus.OK)


def eval_record(verdict, size=4, condition=Condition.TEXT, task=TaskKind.TRANSPOSE):
    mask = None if verdict is Verdict.MALFORMED else Grid.zeros(size, size)
    return EvalRecord("x", task, size, condition, verdict, mask)


class TestScoreTranspose:

    def setup_method(self):
        self.target = Matrix.from_rows([[1, 2], [3, 4]])

    def test_exact_match(self):
        record = score_transpose(Matrix.from_rows([[1, 2], [3, 4]]), self.target)
        assert record.verdict is Verdict.CORRECT
        assert record.cell_errors == Grid.zeros(2, 2)

    def test_one_wrong_entry(self):
        record = score_transpose(Matrix.from_rows([[1, 2], [3, 5]]), self.target)
        assert record.verdict is Verdict.INCORRECT
        assert record.cell_errors == Grid.from_rows([[0, 0], [0, 1]])

    def test_shape_mismatch_is_malformed(self):
        record = score_transpose(Matrix.from_rows([[1, 2, 3], [3, 4, 5]]), self.target)
        assert record.verdict is Verdict.MALFORMED
        assert record.failure_category is FailureCategory.SHAPE
        assert record.cell_errors is None

    def test_decimal_equal_to_integer_is_correct(self):
        record = score_transpose(Matrix.from_rows([[1.0, 2], [3, 4]]), self.target)
        assert record.is_correct

    def test_parse_failure_keeps_category(self):
        record = score_transpose(ParseFailure(FailureCategory.RAGGED_ROWS), self.target)
        assert record.failure_category is FailureCategory.RAGGED_ROWS

    def test_integer_beyond_int64_is_incorrect(self):
        pred = parse_prediction(TaskKind.TRANSPOSE, "1 2\n3 99999999999999999999")
        record = score_transpose(pred, self.target)
        assert record.verdict is Verdict.INCORRECT
        assert record.cell_errors == Grid.from_rows([[0, 0], [0, 1]])

    def test_matching_integer_beyond_int64_is_correct(self):
        big = 2 ** 70
        record = score_transpose(Matrix.from_rows([[big, 2], [3, 4]]), Matrix.from_rows([[big, 2], [3, 4]]))
        assert record.is_correct


class TestScoreLife:

    def test_complement_marks_every_cell(self):
        rng = np.random.default_rng(4)
        target = Grid.from_array((rng.random((5, 5)) < 0.5).astype(np.int8))
        complement = Grid.from_array(1 - target.to_array())
        record = score_life(complement, target)
        assert record.verdict is Verdict.INCORRECT
        assert record.cell_errors.live_count == 25

    def test_correct_next_generation(self):
        board = Grid.from_rows([[0, 1, 0], [0, 1, 0], [0, 1, 0]])
        assert score_life(life_step(board), life_step(board)).is_correct


class TestScoreLU:
    """Test functional LU scoring."""

    def setup_method(self):
        self.a = Matrix.from_rows([[3, 4], [6, 13]])
        self.l = Matrix.from_rows([[1.0, 0.0], [2.0, 1.0]])
        self.u = Matrix.from_rows([[3.0, 4.0], [0.0, 5.0]])

    def test_generated_pairs_are_correct(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            a, pair = lu_generate(int(rng.integers(3, 7)), rng)
            assert score_lu(pair, a).is_correct

    def test_perturbed_u_marks_affected_column(self):
        u = Matrix.from_rows([[3.01, 4.0], [0.0, 5.0]])
        record = score_lu(LUPair(self.l, u), self.a)
        assert record.verdict is Verdict.INCORRECT
        assert record.cell_errors == Grid.from_rows([[1, 0], [1, 0]])

    def test_triangularity_violation_marks_its_position(self):
        l = Matrix.from_rows([[1.0, 0.5], [2.0, 1.0]])
        record = score_lu(LUPair(l, self.u), self.a)
        assert record.verdict is Verdict.INCORRECT
        assert record.cell_errors[0, 1] == 1

    def test_wrong_block_shape_is_malformed(self):
        pair = LUPair(Matrix.from_rows([[1.0]]), Matrix.from_rows([[3.0]]))
        record = score_lu(pair, self.a)
        assert record.verdict is Verdict.MALFORMED
        assert record.failure_category is FailureCategory.SHAPE

    def test_missing_u_is_malformed(self):
        record = score_lu(parse_prediction(TaskKind.LU, "L =\n1 0\n2 1"), self.a)
        assert record.failure_category is FailureCategory.MISSING_L_OR_U

    def test_verdict_agrees_with_verifier(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            a, pair = lu_generate(3, rng)
            u = pair.u.to_array(np.float64)
            u[rng.integers(0, 3), rng.integers(0, 3)] += rng.choice([0.0, 1e-12, 0.5])
            candidate = LUPair(pair.l, Matrix.from_array(u))
            record = score_lu(candidate, a)
            assert record.is_correct == lu_verify(a, candidate).accepted
            assert record.is_correct == (record.cell_errors.live_count == 0)

    def test_entry_beyond_float_range_is_incorrect(self):
        u = Matrix.from_rows([[3, 4], [0, 10 ** 400]])
        record = score_lu(LUPair(Matrix.from_rows([[1, 0], [2, 1]]), u), self.a)
        assert record.verdict is Verdict.INCORRECT
        assert record.cell_errors[1, 1] == 1


class TestScoreInstance:

    def test_answer_after_reasoning_is_scored(self):
        instance = generate_instance(TaskKind.TRANSPOSE, 4, seed=3)
        text = "\n".join(" ".join(str(v) for v in row) for row in instance.target.to_rows())
        record = score_instance(instance, ok_record(instance.id, "<think>0 0\n0</think>\n" + text))
        assert record.is_correct
        assert record.instance_id == instance.id

    def test_failed_inference_is_malformed(self):
        instance = generate_instance(TaskKind.LIFE, 4, seed=3)
        failed = InferenceRecord(instance.id, Condition.VISUAL, "", 1.0, 3, InferenceStatus.FAILED, "transport: x")
        record = score_instance(instance, failed)
        assert record.failure_category is FailureCategory.INFERENCE_FAILED
        assert record.condition is Condition.VISUAL

    def test_usecase_matches_records_by_condition(self):
        instances = [generate_instance(TaskKind.TRANSPOSE, 4, seed=s, index=s) for s in range(3)]
        records = [ok_record(instances[0].id, "1"), ok_record(instances[1].id, "1", Condition.VISUAL)]
        scored = ScoreUseCase().execute(instances, records, Condition.TEXT)
        assert [r.instance_id for r in scored] == [instances[0].id]
        assert scored[0].verdict is Verdict.MALFORMED


class TestAggregateAccuracy:

    def test_nine_of_ten(self):
        records = [eval_record(Verdict.CORRECT)] * 9 + [eval_record(Verdict.INCORRECT)]
        rows = aggregate_accuracy(records)
        assert len(rows) == 1
        assert rows[0].accuracy == pytest.approx(0.9)

    def test_malformed_count_in_denominator(self):
        rows = aggregate_accuracy([eval_record(Verdict.MALFORMED)] * 4)
        assert rows[0].accuracy == 0.0
        assert rows[0].total == 4

    def test_empty_input(self):
        with pytest.raises(EmptyGroupError):
            aggregate_accuracy([])

    def test_grouping_by_condition_only(self):
        records = [eval_record(Verdict.CORRECT, size=4), eval_record(Verdict.INCORRECT, size=6),
                   eval_record(Verdict.CORRECT, condition=Condition.VISUAL)]
        rows = aggregate_accuracy(records, group_by=(GroupKey.CONDITION,))
        assert [(r.condition, r.size, r.correct, r.total) for r in rows] == [
            (Condition.TEXT, None, 1, 2), (Condition.VISUAL, None, 1, 1)]

    def test_heatmap_mean_matches_cell_accuracy(self):
        rng = np.random.default_rng(30)
        targets = (rng.random((10000, 4, 4)) < 0.5).astype(np.int8)
        flips = (rng.random((10000, 4, 4)) < 0.05).astype(np.int8)
        records = [score_life(Grid.from_array(t ^ f), Grid.from_array(t)) for t, f in zip(targets, flips)]
        for record, planted in zip(records, flips):
            assert record.is_correct == (record.cell_errors.live_count == 0) == (not planted.any())
        heatmap = cell_error_heatmap(records)
        cell_accuracy = (flips == 0).mean(axis=0)
        np.testing.assert_allclose(heatmap.rates_array(), 1.0 - cell_accuracy, rtol=0, atol=1e-12)
