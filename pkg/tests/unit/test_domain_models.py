"""Tests for domain models."""

import numpy as np
import pytest

from gridprobe.domain.models import (
    Condition, DatasetSpec, ErrorHeatmap, Grid, InferenceRecord, InferenceRequest,
    InferenceStatus, Matrix, PromptBundle, RasterImage, SizeCount, TaskKind, Tolerances
)


class TestMatrix:
    """Test Matrix behavior."""

    def test_from_rows_keeps_row_major_order(self):
        m = Matrix.from_rows([[1, 2, 3], [4, 5, 6]])
        assert m.shape == (2, 3)
        assert m.entries == (1, 2, 3, 4, 5, 6)
        assert m[1, 0] == 4

    def test_entry_count_must_match_shape(self):
        with pytest.raises(ValueError):
            Matrix(rows=2, cols=2, entries=(1, 2, 3))

    def test_ragged_rows_rejected(self):
        with pytest.raises(ValueError):
            Matrix.from_rows([[1, 2], [3]])

    def test_numpy_scalars_become_python_numbers(self):
        m = Matrix.from_array(np.array([[1, 2], [3, 4]], dtype=np.int64))
        assert all(type(v) is int for v in m.entries)
        assert m.is_integer

    def test_decimal_entries_give_float_array(self):
        m = Matrix.from_rows([[1.5, 2.0], [0.0, -1.0]])
        assert not m.is_integer
        assert m.to_array().dtype == np.float64

    def test_integer_entries_give_int_array(self):
        assert Matrix.from_rows([[1, 2]]).to_array().dtype == np.int64


class TestGrid:
    """Test Grid behavior."""

    def test_cells_must_be_binary(self):
        with pytest.raises(ValueError):
            Grid.from_rows([[0, 2], [1, 0]])

    def test_live_count(self):
        g = Grid.from_rows([[0, 1, 1], [1, 0, 0]])
        assert g.live_count == 3

    def test_zeros(self):
        g = Grid.zeros(3, 4)
        assert g.shape == (3, 4)
        assert g.live_count == 0


class TestTolerances:

    def test_defaults(self):
        tol = Tolerances()
        assert tol.reconstruction_abs == 1e-6
        assert tol.triangular_abs == 1e-6

    @pytest.mark.parametrize("value", [0.0, -1e-6])
    def test_must_be_strictly_positive(self, value):
        with pytest.raises(ValueError):
            Tolerances(reconstruction_abs=value)


class TestDatasetSpec:
    """Test dataset spec naming and apportionment."""

    def test_single_dataset_name(self):
        spec = DatasetSpec.single(TaskKind.TRANSPOSE, 12, 600)
        assert spec.dataset_name == "transpose_n12"
        assert not spec.is_mixed
        assert spec.total_count == 600

    def test_mixed_equal_weights_split_evenly(self):
        spec = DatasetSpec.mixed(TaskKind.LIFE, [4, 5, 6], 1800, [1, 1, 1])
        assert [sc.count for sc in spec.sizes] == [600, 600, 600]
        assert spec.dataset_name == "life_mix4-5-6"
        assert spec.mix_ratio == (1, 1, 1)

    def test_mixed_remainder_goes_to_earlier_sizes(self):
        spec = DatasetSpec.mixed(TaskKind.LU, [3, 4, 5], 10, [1, 1, 1])
        assert [sc.count for sc in spec.sizes] == [4, 3, 3]
        assert spec.total_count == 10

    def test_mixed_uneven_weights(self):
        spec = DatasetSpec.mixed(TaskKind.TRANSPOSE, [12, 14], 90, [2, 1])
        assert spec.sizes == (SizeCount(12, 60), SizeCount(14, 30))

    def test_mixed_needs_one_weight_per_size(self):
        with pytest.raises(ValueError):
            DatasetSpec.mixed(TaskKind.TRANSPOSE, [12, 14], 90, [1])

    def test_explicit_name_wins(self):
        spec = DatasetSpec.single(TaskKind.LU, 3, 6, name="lu_small")
        assert spec.dataset_name == "lu_small"


class TestInferenceTypes:
    """Test request/record invariants."""

    def test_visual_request_requires_image(self):
        with pytest.raises(ValueError):
            InferenceRequest(instance_id="a", condition=Condition.VISUAL, prompt_text="p")

    def test_text_request_rejects_image(self):
        with pytest.raises(ValueError):
            InferenceRequest(instance_id="a", condition=Condition.TEXT, prompt_text="p", image_png=b"png")

    def test_ok_record_requires_response(self):
        with pytest.raises(ValueError):
            InferenceRecord(instance_id="a", condition=Condition.TEXT, raw_response="",
                            latency_ms=1.0, attempt_count=1, status=InferenceStatus.OK)

    def test_failed_record_may_be_empty(self):
        record = InferenceRecord(instance_id="a", condition=Condition.VISUAL, raw_response="",
                                 latency_ms=1.0, attempt_count=3, status=InferenceStatus.FAILED,
                                 error="transport: HTTP 500")
        assert record.key == ("a", "visual")


class TestPromptBundle:

    def test_text_prompt_includes_payload(self):
        bundle = PromptBundle("Do it.", "1 2\n3 4", "Answer plainly.", Condition.TEXT)
        assert bundle.as_text() == "Do it.\n\n1 2\n3 4\n\nAnswer plainly."

    def test_visual_prompt_omits_payload(self):
        bundle = PromptBundle("Do it.", "img.png", "Answer plainly.", Condition.VISUAL, image_path="img.png")
        assert "img.png" not in bundle.as_text()


class TestErrorHeatmapAndImage:

    def test_heatmap_label(self):
        heatmap = ErrorHeatmap(TaskKind.TRANSPOSE, 2, (Condition.TEXT, Condition.VISUAL),
                               rates=((0.0, 0.5), (1.0, 0.0)), sample_counts=((2, 2), (2, 2)),
                               is_difference=True)
        assert heatmap.label == "transpose_2_text_minus_visual"
        assert heatmap.shape == (2, 2)

    def test_raster_image_buffer_must_match(self):
        with pytest.raises(ValueError):
            RasterImage(width=2, height=2, pixels=b"\x00" * 11)

    def test_raster_pixel_lookup(self):
        image = RasterImage(width=2, height=1, pixels=bytes([1, 2, 3, 4, 5, 6]))
        assert image.pixel(1, 0) == (4, 5, 6)
