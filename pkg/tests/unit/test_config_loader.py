"""Tests for YAML configuration, presets and flag overrides."""

import shutil
import tempfile
from pathlib import Path

import pytest

from gridprobe.domain.errors import ConfigError, GridProbeError
from gridprobe.domain.models import CellAlign, SizeCount, TaskKind
from gridprobe.infrastructure.config_loader import (
    PRESETS, apply_overrides, default_run_config, load_run_config, parse_dataset_entry,
    parse_run_config
)

EXAMPLE_CONFIG = Path(__file__).resolve().parents[2] / "configs" / "example.yaml"


class TestDatasetEntries:

    def test_single_size_preset_gives_dataset_per_size(self):
        specs = parse_dataset_entry({"preset": "lu"}, 0, "d")
        assert [s.sizes for s in specs] == [(SizeCount(n, 600),) for n in (3, 4, 5, 6)]

    def test_mixed_preset_total(self):
        (spec,) = parse_dataset_entry({"preset": "transpose-mix", "total": 360}, 0, "d")
        assert spec.is_mixed
        assert spec.sizes == (SizeCount(12, 120), SizeCount(14, 120), SizeCount(16, 120))

    def test_mixed_entry_defaults_total_to_count_per_size(self):
        (spec,) = parse_dataset_entry(
            {"task": "life", "sizes": [4, 5], "mix_ratio": [1, 1], "count": 10}, 0, "d")
        assert spec.total_count == 20

    def test_entry_seed_overrides_run_seed(self):
        (spec,) = parse_dataset_entry({"task": "transpose", "sizes": 12, "master_seed": 9}, 1, "d")
        assert spec.master_seed == 9

    def test_split_ratio_is_kept(self):
        (spec,) = parse_dataset_entry({"task": "lu", "sizes": [3], "split_ratio": [3, 1]}, 0, "d")
        assert spec.split_ratio == (3, 1)

    @pytest.mark.parametrize("entry", [
        {"preset": "nope"},
        {"task": "transpose"},
        {"task": "transpose", "sizes": ["12"]},
        {"task": "sudoku", "sizes": [4]},
        {"task": "life", "sizes": [4, 5], "mix_ratio": [1]},
        {"task": "life", "sizes": [4], "colour": "red"},
        {"task": "life", "sizes": [4, 5, 4]},
    ])
    def test_invalid_entries(self, entry):
        with pytest.raises(GridProbeError) as info:
            parse_dataset_entry(entry, 0, "d")
        assert info.value.category in ("config", "unsupported-task")


class TestParseRunConfig:
    """Test mapping YAML documents onto RunConfig."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        shutil.rmtree(self.temp_dir)

    def test_example_config_loads(self):
        config = load_run_config(EXAMPLE_CONFIG)
        assert [spec.task for spec in config.datasets] == [TaskKind.TRANSPOSE, TaskKind.LIFE, TaskKind.LU]
        assert config.datasets[1].total_count == 1800
        assert config.endpoint.model == "my-vlm"
        assert config.matrix_render.cell_align is CellAlign.RIGHT

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="colour"):
            parse_run_config({"colour": "red"})

    def test_unknown_render_field(self):
        with pytest.raises(ConfigError):
            parse_run_config({"render": {"matrix": {"font": 3}}})

    def test_render_colors_and_alignment(self):
        config = parse_run_config({"render": {"matrix": {"cell_align": "left", "background_color": [20, 20, 20]}}})
        assert config.matrix_render.cell_align is CellAlign.LEFT
        assert config.matrix_render.background_color == (20, 20, 20)

    def test_bad_alignment(self):
        with pytest.raises(ConfigError):
            parse_run_config({"render": {"matrix": {"cell_align": "justify"}}})

    def test_nested_decoding(self):
        config = parse_run_config({"endpoint": {"kind": "oracle", "decoding": {"max_tokens": 64}}})
        assert config.endpoint.decoding.max_tokens == 64
        assert config.endpoint.decoding.temperature == 0.0

    def test_non_positive_tolerance(self):
        with pytest.raises(ConfigError):
            parse_run_config({"tolerances": {"reconstruction_abs": 0}})

    def test_parallelism_must_be_positive(self):
        with pytest.raises(ConfigError):
            parse_run_config({"parallelism": 0})

    def test_missing_template_path(self):
        with pytest.raises(ConfigError):
            parse_run_config({"prompt_template_path": "absent.yaml"}, base_dir=Path(self.temp_dir))

    def test_relative_template_path_resolves_against_config_dir(self):
        (Path(self.temp_dir) / "prompts.yaml").write_text("tasks: {}\n")
        config = parse_run_config({"prompt_template_path": "prompts.yaml"}, base_dir=Path(self.temp_dir))
        assert config.prompt_template_path == str(Path(self.temp_dir) / "prompts.yaml")

    def test_invalid_yaml(self):
        path = Path(self.temp_dir) / "bad.yaml"
        path.write_text("datasets: [\n")
        with pytest.raises(ConfigError):
            load_run_config(path)


class TestDefaultsAndOverrides:

    def test_default_config_covers_every_task(self):
        config = default_run_config()
        assert {spec.task for spec in config.datasets} == set(TaskKind)

    def test_default_config_for_one_task(self):
        config = default_run_config(TaskKind.LIFE)
        assert [spec.sizes[0].size for spec in config.datasets] == list(PRESETS["life"].sizes)

    def test_named_preset(self):
        config = default_run_config(preset="lu-mix")
        assert len(config.datasets) == 1
        assert config.datasets[0].total_count == 1800

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            default_run_config(preset="chess")

    def test_task_size_and_count(self):
        config = apply_overrides(default_run_config(), task=TaskKind.TRANSPOSE, sizes=[4], count=12)
        assert len(config.datasets) == 1
        assert config.datasets[0].sizes == (SizeCount(4, 12),)

    def test_repeated_size_flags_collapse(self):
        config = apply_overrides(default_run_config(), task=TaskKind.TRANSPOSE, sizes=[4, 6, 4], count=12)
        assert config.datasets[0].sizes == (SizeCount(4, 12), SizeCount(6, 12))

    def test_count_is_total_for_mixed_datasets(self):
        config = apply_overrides(default_run_config(preset="life-mix"), count=30)
        assert [sc.count for sc in config.datasets[0].sizes] == [10, 10, 10]
        assert config.datasets[0].is_mixed

    def test_seed_output_and_endpoint(self):
        config = apply_overrides(default_run_config(TaskKind.LU), seed=5, out="runs/x",
                                 endpoint_kind="oracle", parallelism=2)
        assert {spec.master_seed for spec in config.datasets} == {5}
        assert config.output_dir == "runs/x"
        assert config.endpoint.kind == "oracle"
        assert config.parallelism == 2

    def test_task_missing_from_config_falls_back_to_defaults(self):
        config = apply_overrides(default_run_config(TaskKind.LU), task=TaskKind.LIFE)
        assert {spec.task for spec in config.datasets} == {TaskKind.LIFE}

    @pytest.mark.parametrize("kwargs", [{"count": 0}, {"parallelism": 0}])
    def test_invalid_overrides(self, kwargs):
        with pytest.raises(ConfigError):
            apply_overrides(default_run_config(), **kwargs)
