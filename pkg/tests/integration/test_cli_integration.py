"""Integration tests for the gridprobe pipeline through the CLI."""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from gridprobe.cli.application import GridProbeApplication
from gridprobe.infrastructure.jsonl_records import read_jsonl
from gridprobe.infrastructure.report_export import read_rates_csv


class TestPipeline:
    """Run generate, infer, score and analyze with offline endpoints."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()
        self.out = Path(self.temp_dir) / "run"

    def teardown_method(self):
        shutil.rmtree(self.temp_dir)

    def _run(self, command, task, size, *extra):
        app = GridProbeApplication()
        return app.run([command, "--task", task, "--size", str(size), "--count", "12",
                        "--out", str(self.out), "-q", *extra])

    def _full_pipeline(self, task, size, endpoint="oracle"):
        assert self._run("generate", task, size) == 0
        assert self._run("infer", task, size, "--endpoint", endpoint, "-j", "2") == 0
        assert self._run("score", task, size) == 0
        assert self._run("analyze", task, size) == 0

    @pytest.mark.parametrize("task,size", [("transpose", 4), ("life", 4), ("lu", 3)])
    def test_oracle_run_is_perfect(self, task, size):
        self._full_pipeline(task, size)
        name = f"{task}_n{size}"
        for condition in ("text", "visual"):
            scores = read_jsonl(self.out / "scores" / f"{name}.{condition}.jsonl")
            assert len(scores) == 2
            assert all(s["verdict"] == "correct" for s in scores)

        report = self.out / "report" / name
        accuracy = (report / "accuracy.csv").read_text().splitlines()
        assert accuracy[1:] == [f"{task},{size},text,2,2,1.0", f"{task},{size},visual,2,2,1.0"]
        rates = read_rates_csv(report / f"{task}_{size}_text.csv")
        assert rates.shape == (size, size)
        assert not rates.any()
        assert (report / f"{task}_{size}_text_minus_visual.png").is_file()

    def test_images_are_rendered_for_visual_requests(self):
        self._full_pipeline("transpose", 4)
        images = sorted((self.out / "images" / "transpose_n4" / "matrix").glob("*.png"))
        assert len(images) == 2

    def test_echo_input_fails_transpose(self):
        self._full_pipeline("transpose", 4, endpoint="echo-input")
        scores = read_jsonl(self.out / "scores" / "transpose_n4.text.jsonl")
        assert all(s["verdict"] == "incorrect" for s in scores)
        diagonal = np.array(scores[0]["cell_errors"]).diagonal()
        assert not diagonal.any()

    def test_rerun_reuses_checkpoint(self, capsys):
        self._run("generate", "lu", 3)
        self._run("infer", "lu", 3, "--endpoint", "oracle", "--condition", "text")
        lines_before = (self.out / "inference" / "lu_n3.text.jsonl").read_text().splitlines()
        self._run("infer", "lu", 3, "--endpoint", "oracle", "--condition", "text")
        lines_after = (self.out / "inference" / "lu_n3.text.jsonl").read_text().splitlines()
        assert lines_before == lines_after
        assert "2 ok, 0 failed" in capsys.readouterr().out

    def test_flow_condition_for_matrix_task(self):
        self._run("generate", "transpose", 4)
        assert self._run("infer", "transpose", 4, "--endpoint", "oracle", "--condition", "visual_flow") == 0
        assert (self.out / "images" / "transpose_n4" / "flow").is_dir()
        assert self._run("score", "transpose", 4) == 0
        assert (self.out / "scores" / "transpose_n4.visual_flow.jsonl").is_file()

    def test_text_only_endpoint_fails_visual_requests(self):
        self._run("generate", "transpose", 4)
        assert self._run("infer", "transpose", 4, "--endpoint", "text-only") == 0
        assert self._run("score", "transpose", 4) == 0
        visual = read_jsonl(self.out / "scores" / "transpose_n4.visual.jsonl")
        assert all(s["failure_category"] == "inference-failed" for s in visual)


class TestCLIErrors:
    """Test categorized failures and exit codes."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()
        self.out = str(Path(self.temp_dir) / "run")

    def teardown_method(self):
        shutil.rmtree(self.temp_dir)

    def test_flow_mode_for_life_is_config_error(self, capsys):
        app = GridProbeApplication()
        app.run(["generate", "--task", "life", "--size", "4", "--count", "6", "--out", self.out, "-q"])
        exit_code = app.run(["infer", "--task", "life", "--size", "4", "--count", "6", "--out", self.out,
                             "--endpoint", "oracle", "--condition", "visual_flow", "-q"])
        assert exit_code == 2
        assert "[config]" in capsys.readouterr().err

    def test_missing_dataset_is_io_error(self, capsys):
        exit_code = GridProbeApplication().run(["score", "--task", "lu", "--size", "3", "--out", self.out])
        assert exit_code == 2
        assert "gridprobe: error [io]" in capsys.readouterr().err

    def test_missing_config_file(self, capsys):
        exit_code = GridProbeApplication().run(["generate", "--config", str(Path(self.temp_dir) / "none.yaml")])
        assert exit_code == 2
        assert "[config]" in capsys.readouterr().err

    def test_no_command(self):
        with pytest.raises(SystemExit) as info:
            GridProbeApplication().run([])
        assert info.value.code == 2

    def test_generation_is_byte_identical(self):
        first = Path(self.temp_dir) / "a"
        second = Path(self.temp_dir) / "b"
        for out in (first, second):
            GridProbeApplication().run(["generate", "--task", "life", "--size", "5", "--count", "30",
                                        "--seed", "3", "--out", str(out), "-q"])
        name = "datasets/life_n5.jsonl"
        assert (first / name).read_bytes() == (second / name).read_bytes()
