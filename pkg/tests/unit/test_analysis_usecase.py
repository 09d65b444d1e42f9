"""Tests for error heatmaps, differences and report export."""

import csv
import shutil
import tempfile
from pathlib import Path

import matplotlib
import numpy as np
import pytest
from PIL import Image

from gridprobe.domain.errors import EmptyGroupError, HeatmapShapeError
from gridprobe.domain.models import (
    AccuracyRow, Condition, ErrorHeatmap, EvalRecord, FailureCategory, Grid, TaskKind, Verdict
)
from gridprobe.infrastructure.report_export import (
    DIFFERENCE_COLORMAP, export_report, heatmap_rgb, read_rates_csv
)
from gridprobe.usecases.analysis_usecase import AnalyzeUseCase, cell_error_heatmap, heatmap_difference


def scored(mask_rows, condition=Condition.TEXT, task=TaskKind.TRANSPOSE):
    mask = Grid.from_rows(mask_rows)
    verdict = Verdict.INCORRECT if mask.live_count else Verdict.CORRECT
    return EvalRecord("x", task, mask.rows, condition, verdict, mask)


def malformed(size=2, condition=Condition.TEXT):
    return EvalRecord("x", TaskKind.TRANSPOSE, size, condition, Verdict.MALFORMED,
                      None, FailureCategory.SHAPE)


def heatmap(rates, condition=Condition.TEXT, is_difference=False):
    counts = tuple(tuple(1 for _ in row) for row in rates)
    return ErrorHeatmap(TaskKind.TRANSPOSE, len(rates), (condition,),
                        tuple(tuple(row) for row in rates), counts, is_difference)


class TestCellErrorHeatmap:

    def test_mean_of_masks(self):
        result = cell_error_heatmap([scored([[1, 0], [0, 0]]), scored([[1, 1], [0, 0]])])
        assert result.rates == ((1.0, 0.5), (0.0, 0.0))
        assert result.sample_counts == ((2, 2), (2, 2))
        assert result.label == "transpose_2_text"

    def test_malformed_records_are_left_out(self):
        result = cell_error_heatmap([scored([[1, 0], [0, 0]]), malformed()])
        assert result.rates[0][0] == 1.0
        assert result.sample_counts[0][0] == 1

    def test_only_malformed(self):
        with pytest.raises(EmptyGroupError):
            cell_error_heatmap([malformed(), malformed()])

    def test_mixed_conditions(self):
        with pytest.raises(HeatmapShapeError):
            cell_error_heatmap([scored([[0]]), scored([[0]], Condition.VISUAL)])


class TestHeatmapDifference:
    """Test signed differences between conditions."""

    def test_antisymmetric_and_bounded(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a = heatmap(rng.random((3, 3)).tolist())
            b = heatmap(rng.random((3, 3)).tolist(), Condition.VISUAL)
            ab = heatmap_difference(a, b).rates_array()
            ba = heatmap_difference(b, a).rates_array()
            np.testing.assert_allclose(ab, -ba)
            assert np.all(np.abs(ab) <= 1.0)

    def test_label_and_flag(self):
        diff = heatmap_difference(heatmap([[0.5]]), heatmap([[0.25]], Condition.VISUAL))
        assert diff.is_difference
        assert diff.rates == ((0.25,),)
        assert diff.label == "transpose_1_text_minus_visual"

    def test_shape_mismatch(self):
        with pytest.raises(HeatmapShapeError):
            heatmap_difference(heatmap([[0.0]]), heatmap([[0.0, 0.0], [0.0, 0.0]]))


class TestAnalyzeUseCase:

    def test_accuracy_heatmaps_and_differences(self):
        records = [scored([[0, 0], [0, 0]]), scored([[0, 1], [0, 0]]),
                   scored([[1, 1], [1, 1]], Condition.VISUAL), scored([[0, 0], [0, 0]], Condition.VISUAL)]
        report = AnalyzeUseCase().execute(records)
        assert [(r.condition, r.correct, r.total) for r in report.accuracy] == [
            (Condition.TEXT, 1, 2), (Condition.VISUAL, 1, 2)]
        assert [h.label for h in report.heatmaps] == ["transpose_2_text", "transpose_2_visual"]
        (diff,) = report.differences
        assert diff.rates == ((-0.5, 0.0), (-0.5, -0.5))

    def test_all_malformed_group_has_no_heatmap(self):
        report = AnalyzeUseCase().execute([scored([[0]]), malformed(1, Condition.VISUAL)])
        assert [h.label for h in report.heatmaps] == ["transpose_1_text"]
        assert report.differences == ()
        assert len(report.accuracy) == 2


class TestExportReport:
    """Test the files written for a report."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()
        self.out = Path(self.temp_dir) / "report"

    def teardown_method(self):
        shutil.rmtree(self.temp_dir)

    def test_zero_heatmap_renders_uniform_image(self):
        export_report([heatmap([[0.0, 0.0], [0.0, 0.0]])], [], self.out, cell_px=4)
        with Image.open(self.out / "transpose_2_text.png") as image:
            pixels = np.asarray(image.convert("RGB"))
        assert pixels.shape == (8, 8, 3)
        assert len(np.unique(pixels.reshape(-1, 3), axis=0)) == 1

    def test_rates_csv_parses_back_exactly(self):
        rates = [[1 / 3, 2 / 7], [0.1, 1.0]]
        export_report([heatmap(rates)], [], self.out)
        np.testing.assert_array_equal(read_rates_csv(self.out / "transpose_2_text.csv"), np.array(rates))
        counts = np.loadtxt(self.out / "transpose_2_text_counts.csv", delimiter=",", dtype=int)
        assert counts.tolist() == [[1, 1], [1, 1]]

    def test_difference_extremes_hit_colormap_ends(self):
        diff = heatmap([[-1.0, 0.0, 1.0]], is_difference=True)
        rgb = heatmap_rgb(diff, cell_px=1)
        cmap = matplotlib.colormaps[DIFFERENCE_COLORMAP]
        assert tuple(rgb[0, 0]) == tuple(cmap(0.0, bytes=True)[:3])
        assert tuple(rgb[0, 2]) == tuple(cmap(1.0, bytes=True)[:3])
        assert tuple(rgb[0, 1]) == tuple(cmap(0.5, bytes=True)[:3])

    def test_accuracy_table(self):
        rows = [AccuracyRow(TaskKind.LIFE, 4, Condition.VISUAL, 9, 10)]
        paths = export_report([], rows, self.out)
        assert paths == [self.out / "accuracy.csv", self.out / "accuracy_life.png"]
        with open(paths[0], newline="", encoding="utf-8") as handle:
            table = list(csv.reader(handle))
        assert table[0] == ["task", "size", "condition", "correct", "total", "accuracy"]
        assert table[1] == ["life", "4", "visual", "9", "10", "0.9"]

    def test_accuracy_chart_per_task(self):
        rows = [AccuracyRow(TaskKind.TRANSPOSE, n, c, k, 10)
                for n, k in ((4, 9), (8, 6), (12, 2)) for c in (Condition.TEXT, Condition.VISUAL)]
        rows.append(AccuracyRow(TaskKind.LU, 3, Condition.TEXT, 5, 10))
        paths = export_report([], rows, self.out)
        assert paths == [self.out / "accuracy.csv", self.out / "accuracy_lu.png",
                         self.out / "accuracy_transpose.png"]
        with Image.open(paths[2]) as image:
            assert image.format == "PNG"
            assert image.size == (500, 350)

    def test_rows_without_size_are_not_charted(self):
        rows = [AccuracyRow(None, None, Condition.TEXT, 1, 2)]
        assert export_report([], rows, self.out) == [self.out / "accuracy.csv"]

    def test_invalid_cell_size(self):
        with pytest.raises(ValueError):
            heatmap_rgb(heatmap([[0.0]]), cell_px=0)
