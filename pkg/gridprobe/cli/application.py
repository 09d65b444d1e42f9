"""Main CLI application for gridprobe."""

import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from .argument_parser import CommandOptions, GridProbeArgumentParser
from ..domain.errors import DatasetIOError, GridProbeError
from ..domain.models import (
    Condition, Dataset, DatasetSpec, EvalRecord, InferenceStatus, RenderMode, RunConfig, Split, TaskInstance
)
from ..infrastructure.checkpoint_log import JsonlInferenceLog
from ..infrastructure.config_loader import apply_overrides, default_run_config, load_run_config
from ..infrastructure.dataset_store import export_dataset, import_dataset
from ..infrastructure.image_store import PngImageStore
from ..infrastructure.jsonl_records import eval_record_from_json, eval_record_to_json, read_jsonl, write_jsonl
from ..infrastructure.offline_endpoints import create_endpoint
from ..infrastructure.parallel_execution import executor_for
from ..infrastructure.prompt_templates import PromptTemplates
from ..infrastructure.report_export import export_report
from ..usecases.analysis_usecase import AnalyzeUseCase
from ..usecases.datagen_usecase import DatasetBuilder
from ..usecases.inference_usecase import InferenceUseCase, build_request
from ..usecases.render_usecase import RenderUseCase, mode_for
from ..usecases.scoring_usecase import ScoreUseCase, aggregate_accuracy

log = logging.getLogger(__name__)

DEFAULT_CONDITIONS = (Condition.TEXT, Condition.VISUAL)


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", force=True)


class RunLayout:
    """Where each stage reads and writes under the output directory."""

    def __init__(self, root: str):
        self.root = Path(root)

    def dataset(self, spec: DatasetSpec) -> Path:
        return self.root / "datasets" / f"{spec.dataset_name}.jsonl"

    def images(self, spec: DatasetSpec, mode: RenderMode) -> Path:
        return self.root / "images" / spec.dataset_name / mode.value

    def inference(self, spec: DatasetSpec, condition: Condition) -> Path:
        return self.root / "inference" / f"{spec.dataset_name}.{condition.value}.jsonl"

    def scores(self, spec: DatasetSpec, condition: Condition) -> Path:
        return self.root / "scores" / f"{spec.dataset_name}.{condition.value}.jsonl"

    def report(self, spec: DatasetSpec) -> Path:
        return self.root / "report" / spec.dataset_name


class GridProbeApplication:
    """Main application class for the gridprobe CLI."""

    def __init__(self):
        self.arg_parser = GridProbeArgumentParser()
        self.image_store = PngImageStore()
        self.analyze_usecase = AnalyzeUseCase()
        self._commands: Dict[str, Callable[[RunConfig, CommandOptions], int]] = {
            "generate": self._generate,
            "render": self._render,
            "infer": self._infer,
            "score": self._score,
            "analyze": self._analyze,
        }

    def run(self, args: Optional[List[str]] = None) -> int:
        """Run the gridprobe application and return exit code."""
        try:
            options = self.arg_parser.parse_args(args)
            configure_logging(options.verbose, options.quiet)
            config = self._load_config(options)
            return self._commands[options.command](config, options)
        except KeyboardInterrupt:
            return 130  # Standard exit code for Ctrl+C
        except GridProbeError as e:
            print(f"gridprobe: error [{e.category}]: {e}", file=sys.stderr)
            return 2
        except Exception as e:
            log.debug("unexpected failure", exc_info=True)
            print(f"gridprobe: error [error]: {e}", file=sys.stderr)
            return 2

    @staticmethod
    def _load_config(options: CommandOptions) -> RunConfig:
        if options.config_path:
            config = load_run_config(options.config_path)
        else:
            config = default_run_config(options.task, options.preset, options.seed or 0)
        return apply_overrides(
            config,
            task=options.task,
            sizes=options.sizes,
            count=options.count,
            seed=options.seed,
            out=options.out,
            endpoint_kind=options.endpoint_kind,
            parallelism=options.parallelism,
        )

    def _render_usecase(self, config: RunConfig) -> RenderUseCase:
        return RenderUseCase(
            self.image_store,
            matrix_spec=config.matrix_render,
            grid_spec=config.grid_render,
            flow_spec=config.flow_render,
            parallel_executor=executor_for(config.parallelism),
            max_workers=config.parallelism,
        )

    @staticmethod
    def _load_dataset(layout: RunLayout, spec: DatasetSpec) -> Dataset:
        path = layout.dataset(spec)
        if not path.is_file():
            raise DatasetIOError(f"{path} not found; run 'gridprobe generate' with the same config first")
        return import_dataset(path)

    @staticmethod
    def _select(dataset: Dataset, splits: Sequence[Split]) -> List[TaskInstance]:
        return [inst for inst in dataset.instances if inst.split in splits]

    def _generate(self, config: RunConfig, options: CommandOptions) -> int:
        layout = RunLayout(config.output_dir)
        builder = DatasetBuilder(executor_for(config.parallelism), config.parallelism)
        for spec in config.datasets:
            dataset = builder.build(spec)
            manifest = export_dataset(dataset, layout.dataset(spec))
            print(f"{manifest.name}: {manifest.instance_count} instances "
                  f"(train {manifest.split_counts.get('train', 0)} / test {manifest.split_counts.get('test', 0)}) "
                  f"-> {layout.dataset(spec)}")
        return 0

    def _render(self, config: RunConfig, options: CommandOptions) -> int:
        layout = RunLayout(config.output_dir)
        render_usecase = self._render_usecase(config)
        for spec in config.datasets:
            dataset = self._load_dataset(layout, spec)
            if options.mode is not None:
                modes = [options.mode]
            else:
                conditions = [c for c in options.conditions if c.is_visual] or [Condition.VISUAL]
                modes = list(dict.fromkeys(mode_for(spec.task, c) for c in conditions))
            instances = self._select(dataset, options.splits)
            for mode in modes:
                out_dir = layout.images(spec, mode)
                paths = render_usecase.execute(instances, mode, out_dir)
                print(f"{spec.dataset_name}: {len(paths)} {mode.value} images -> {out_dir}")
        return 0

    def _infer(self, config: RunConfig, options: CommandOptions) -> int:
        layout = RunLayout(config.output_dir)
        templates = PromptTemplates.from_file(config.prompt_template_path)
        render_usecase = self._render_usecase(config)
        conditions = options.conditions or DEFAULT_CONDITIONS
        show_progress = not options.quiet and sys.stderr.isatty()
        failed_total = 0

        for spec in config.datasets:
            dataset = self._load_dataset(layout, spec)
            instances = self._select(dataset, options.splits)
            endpoint = create_endpoint(config.endpoint, dataset.instances)
            usecase = InferenceUseCase(endpoint, executor_for(config.parallelism))

            for condition in conditions:
                requests = []
                if condition.is_visual:
                    mode = mode_for(spec.task, condition)
                    image_dir = layout.images(spec, mode)
                    render_usecase.execute(instances, mode, image_dir, overwrite=False)
                for instance in instances:
                    image_png = None
                    image_ref = None
                    if condition.is_visual:
                        image_path = RenderUseCase.image_path(image_dir, instance)
                        image_png = self.image_store.load_png(str(image_path))
                        image_ref = image_path.relative_to(layout.root).as_posix()
                    bundle = templates.build_prompt(instance, condition, image_ref)
                    requests.append(build_request(instance, bundle, image_png, config.endpoint.decoding))

                record_log = JsonlInferenceLog(layout.inference(spec, condition))
                records = usecase.run_batch(
                    requests, config.endpoint, config.parallelism, record_log,
                    retry_failed=options.retry_failed, show_progress=show_progress,
                )
                failed = sum(1 for r in records if r.status is InferenceStatus.FAILED)
                failed_total += failed
                print(f"{spec.dataset_name} [{condition.value}]: {len(records) - failed} ok, "
                      f"{failed} failed -> {record_log.path}")

        if failed_total:
            log.warning("%d request(s) failed; rerun with --retry-failed to resubmit them", failed_total)
        return 0

    def _score(self, config: RunConfig, options: CommandOptions) -> int:
        layout = RunLayout(config.output_dir)
        usecase = ScoreUseCase(config.tolerances)
        scored_any = False

        for spec in config.datasets:
            dataset = self._load_dataset(layout, spec)
            instances = self._select(dataset, options.splits)
            for condition in options.conditions or tuple(Condition):
                log_path = layout.inference(spec, condition)
                if not log_path.is_file():
                    if options.conditions:
                        raise DatasetIOError(f"{log_path} not found; run 'gridprobe infer' first")
                    continue
                inference_records = JsonlInferenceLog(log_path).load().values()
                records = usecase.execute(instances, inference_records, condition)
                write_jsonl(layout.scores(spec, condition), (eval_record_to_json(r) for r in records))
                scored_any = True
                self._print_accuracy(spec, records)

        if not scored_any:
            raise DatasetIOError(f"no inference logs under {layout.root / 'inference'}")
        return 0

    def _analyze(self, config: RunConfig, options: CommandOptions) -> int:
        layout = RunLayout(config.output_dir)
        analyzed_any = False

        for spec in config.datasets:
            records: List[EvalRecord] = []
            for condition in options.conditions or tuple(Condition):
                path = layout.scores(spec, condition)
                if path.is_file():
                    records.extend(eval_record_from_json(obj) for obj in read_jsonl(path))
            if not records:
                log.info("%s: no scores yet; skipped", spec.dataset_name)
                continue

            report = self.analyze_usecase.execute(records)
            written = export_report(report.heatmaps + report.differences, report.accuracy,
                                    layout.report(spec), cell_px=config.heatmap_cell_px)
            analyzed_any = True
            print(f"{spec.dataset_name}: {len(report.heatmaps)} heatmaps, "
                  f"{len(report.differences)} differences, {len(written)} files -> {layout.report(spec)}")

        if not analyzed_any:
            raise DatasetIOError(f"no scores under {layout.root / 'scores'}; run 'gridprobe score' first")
        return 0

    @staticmethod
    def _print_accuracy(spec: DatasetSpec, records: Sequence[EvalRecord]) -> None:
        if not records:
            return
        for row in aggregate_accuracy(records):
            print(f"{spec.dataset_name} {row.task.value} n={row.size} [{row.condition.value}]: "
                  f"{row.correct}/{row.total} = {row.accuracy:.3f}")


def main() -> int:
    """Main entry point for gridprobe command."""
    app = GridProbeApplication()
    return app.run()


if __name__ == '__main__':
    sys.exit(main())
