"""YAML run configuration and the built-in dataset presets."""

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import yaml

from ..domain.errors import ConfigError
from ..domain.models import (
    CellAlign, Decoding, DatasetSpec, EndpointConfig, FlowRenderSpec, GridRenderSpec,
    MatrixRenderSpec, RunConfig, SizeCount, TaskKind, Tolerances
)
from ..usecases.datagen_usecase import coerce_task

log = logging.getLogger(__name__)

DEFAULT_COUNT = 600


@dataclass(frozen=True)
class Preset:
    task: TaskKind
    sizes: Tuple[int, ...]
    mix_ratio: Optional[Tuple[int, ...]] = None

    def expand(self, count: int, master_seed: int) -> List[DatasetSpec]:
        """Mixed presets give one dataset of ``count`` in total; single ones a dataset per size."""
        if self.mix_ratio:
            return [DatasetSpec.mixed(self.task, self.sizes, count, self.mix_ratio, master_seed)]
        return [DatasetSpec.single(self.task, size, count, master_seed) for size in self.sizes]


PRESETS: Dict[str, Preset] = {
    "transpose": Preset(TaskKind.TRANSPOSE, tuple(range(12, 21))),
    "life": Preset(TaskKind.LIFE, tuple(range(4, 9))),
    "lu": Preset(TaskKind.LU, tuple(range(3, 7))),
    "transpose-mix": Preset(TaskKind.TRANSPOSE, (12, 14, 16), (1, 1, 1)),
    "life-mix": Preset(TaskKind.LIFE, (4, 5, 6), (1, 1, 1)),
    "lu-mix": Preset(TaskKind.LU, (3, 4, 5), (1, 1, 1)),
    "transpose-small-mix": Preset(TaskKind.TRANSPOSE, (4, 6, 8), (1, 1, 1)),
}

_TOP_LEVEL_KEYS = {
    "datasets", "render", "prompt_template_path", "endpoint", "tolerances",
    "output_dir", "master_seed", "parallelism", "heatmap_cell_px",
}
_DATASET_KEYS = {"preset", "task", "sizes", "count", "total", "mix_ratio", "split_ratio", "master_seed", "name"}
_RENDER_KEYS = {"matrix", "grid", "flow"}


def _check_keys(data: Mapping[str, Any], allowed, where: str) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")


def _mapping(value: Any, where: str) -> Dict[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected a mapping")
    return value


def _build_dataclass(cls, data: Mapping[str, Any], where: str, **converters):
    """Instantiate a frozen dataclass from a mapping, rejecting unknown fields."""
    allowed = {f.name for f in dataclasses.fields(cls)}
    _check_keys(data, allowed, where)
    kwargs = {}
    for key, value in data.items():
        convert = converters.get(key)
        kwargs[key] = convert(value) if convert else value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from e


def _rgb(value: Any) -> Tuple[int, int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"colors are [r, g, b] triples, got {value!r}")
    return tuple(int(v) for v in value)


def _align(value: Any) -> CellAlign:
    try:
        return CellAlign(value)
    except ValueError:
        raise ConfigError(f"cell_align must be left, center or right, got {value!r}") from None


def _sizes(value: Any, where: str) -> Tuple[int, ...]:
    sizes = value if isinstance(value, (list, tuple)) else [value]
    if not sizes or not all(isinstance(s, int) and not isinstance(s, bool) for s in sizes):
        raise ConfigError(f"{where}: sizes must be an integer or a list of integers")
    if len(set(sizes)) != len(sizes):
        raise ConfigError(f"{where}: sizes must be distinct, got {list(sizes)}")
    return tuple(sizes)


def parse_dataset_entry(entry: Mapping[str, Any], master_seed: int, where: str) -> List[DatasetSpec]:
    _check_keys(entry, _DATASET_KEYS, where)
    seed = int(entry.get("master_seed", master_seed))

    if "preset" in entry:
        preset = PRESETS.get(entry["preset"])
        if preset is None:
            raise ConfigError(f"{where}: unknown preset {entry['preset']!r}; "
                              f"expected one of {', '.join(sorted(PRESETS))}")
        count = int(entry.get("total", entry.get("count", _preset_default_count(preset))))
        return preset.expand(count, seed)

    if "task" not in entry or "sizes" not in entry:
        raise ConfigError(f"{where}: a dataset needs either preset, or task and sizes")
    task = coerce_task(entry["task"])
    sizes = _sizes(entry["sizes"], where)
    split_ratio = tuple(entry.get("split_ratio", (5, 1)))
    try:
        if entry.get("mix_ratio"):
            total = int(entry.get("total", entry.get("count", DEFAULT_COUNT) * len(sizes)))
            spec = DatasetSpec.mixed(task, sizes, total, tuple(entry["mix_ratio"]), seed, entry.get("name"))
        else:
            count = int(entry.get("count", DEFAULT_COUNT))
            spec = DatasetSpec(task=task, sizes=tuple(SizeCount(s, count) for s in sizes),
                               master_seed=seed, name=entry.get("name"))
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from e
    return [dataclasses.replace(spec, split_ratio=split_ratio)]


def _preset_default_count(preset: Preset) -> int:
    return DEFAULT_COUNT * len(preset.sizes) if preset.mix_ratio else DEFAULT_COUNT


def parse_run_config(data: Mapping[str, Any], base_dir: Optional[Path] = None) -> RunConfig:
    """Map a parsed YAML document onto RunConfig; relative paths resolve against ``base_dir``."""
    data = _mapping(data, "config")
    _check_keys(data, _TOP_LEVEL_KEYS, "config")
    master_seed = int(data.get("master_seed", 0))

    raw_datasets = data.get("datasets") or []
    if not isinstance(raw_datasets, list):
        raise ConfigError("config: datasets must be a list")
    datasets: List[DatasetSpec] = []
    for i, entry in enumerate(raw_datasets):
        datasets.extend(parse_dataset_entry(_mapping(entry, f"datasets[{i}]"), master_seed, f"datasets[{i}]"))

    render = _mapping(data.get("render"), "render")
    _check_keys(render, _RENDER_KEYS, "render")
    colors = {"background_color": _rgb, "foreground_color": _rgb}
    matrix_render = _build_dataclass(MatrixRenderSpec, _mapping(render.get("matrix"), "render.matrix"),
                                     "render.matrix", cell_align=_align, **colors)
    grid_render = _build_dataclass(GridRenderSpec, _mapping(render.get("grid"), "render.grid"),
                                   "render.grid", **colors)
    flow_render = _build_dataclass(FlowRenderSpec, _mapping(render.get("flow"), "render.flow"),
                                   "render.flow", **colors)

    endpoint = _build_dataclass(
        EndpointConfig, _mapping(data.get("endpoint"), "endpoint"), "endpoint",
        decoding=lambda d: _build_dataclass(Decoding, _mapping(d, "endpoint.decoding"), "endpoint.decoding"),
    )
    tolerances = _build_dataclass(Tolerances, _mapping(data.get("tolerances"), "tolerances"), "tolerances")

    template_path = data.get("prompt_template_path")
    if template_path:
        resolved = Path(template_path)
        if not resolved.is_absolute() and base_dir is not None:
            resolved = base_dir / resolved
        if not resolved.is_file():
            raise ConfigError(f"prompt_template_path {template_path!r} does not exist")
        template_path = str(resolved)

    config = RunConfig(
        datasets=tuple(datasets),
        matrix_render=matrix_render,
        grid_render=grid_render,
        flow_render=flow_render,
        prompt_template_path=template_path,
        endpoint=endpoint,
        tolerances=tolerances,
        output_dir=str(data.get("output_dir", "runs/default")),
        master_seed=master_seed,
        parallelism=int(data.get("parallelism", 4)),
        heatmap_cell_px=int(data.get("heatmap_cell_px", 24)),
    )
    if config.parallelism < 1:
        raise ConfigError("parallelism must be at least 1")
    return config


def load_run_config(path: Union[str, Path]) -> RunConfig:
    config_path = Path(path)
    try:
        with open(config_path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as e:
        raise ConfigError(f"cannot read config {config_path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {config_path}: {e}") from e
    config = parse_run_config(data or {}, base_dir=config_path.parent)
    log.debug("loaded %s: %d dataset(s)", config_path, len(config.datasets))
    return config


def default_run_config(task: Optional[TaskKind] = None, preset: Optional[str] = None,
                       master_seed: int = 0) -> RunConfig:
    """Config built from the single-size presets (or one named preset) when no file is given."""
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; expected one of {', '.join(sorted(PRESETS))}")
        names = [preset]
    else:
        names = [t.value for t in TaskKind if task is None or t is task]
    datasets: List[DatasetSpec] = []
    for name in names:
        chosen = PRESETS[name]
        datasets.extend(chosen.expand(_preset_default_count(chosen), master_seed))
    return RunConfig(datasets=tuple(datasets), master_seed=master_seed)


def apply_overrides(config: RunConfig, task: Optional[TaskKind] = None,
                    sizes: Optional[Sequence[int]] = None, count: Optional[int] = None,
                    seed: Optional[int] = None, out: Optional[str] = None,
                    endpoint_kind: Optional[str] = None,
                    parallelism: Optional[int] = None) -> RunConfig:
    """Flag overrides on top of a loaded config."""
    datasets = list(config.datasets)
    if task is not None:
        datasets = [spec for spec in datasets if spec.task is task]
        if not datasets:
            datasets = default_run_config(task).datasets
    if sizes:
        datasets = [_with_sizes(spec, sizes) for spec in _distinct_tasks(datasets)]
    if count is not None:
        if count <= 0:
            raise ConfigError("--count must be positive")
        datasets = [_with_count(spec, count) for spec in datasets]
    if seed is not None:
        datasets = [dataclasses.replace(spec, master_seed=seed) for spec in datasets]

    endpoint = config.endpoint
    if endpoint_kind is not None:
        endpoint = dataclasses.replace(endpoint, kind=endpoint_kind)
    if parallelism is not None and parallelism < 1:
        raise ConfigError("--parallelism must be at least 1")

    return dataclasses.replace(
        config,
        datasets=tuple(datasets),
        endpoint=endpoint,
        master_seed=config.master_seed if seed is None else seed,
        output_dir=out or config.output_dir,
        parallelism=parallelism or config.parallelism,
    )


def _distinct_tasks(datasets: Sequence[DatasetSpec]) -> List[DatasetSpec]:
    seen, kept = set(), []
    for spec in datasets:
        if spec.task not in seen:
            seen.add(spec.task)
            kept.append(spec)
    return kept


def _with_sizes(spec: DatasetSpec, sizes: Sequence[int]) -> DatasetSpec:
    """One dataset of the given sizes, keeping the per-size count of ``spec``."""
    per_size = spec.sizes[0].count if not spec.is_mixed else max(1, spec.total_count // len(spec.sizes))
    sizes = list(dict.fromkeys(sizes))
    return DatasetSpec(task=spec.task, sizes=tuple(SizeCount(s, per_size) for s in sizes),
                       split_ratio=spec.split_ratio, master_seed=spec.master_seed)


def _with_count(spec: DatasetSpec, count: int) -> DatasetSpec:
    """For mixed datasets ``count`` is the total; otherwise it is per size."""
    if spec.is_mixed:
        mixed = DatasetSpec.mixed(spec.task, [sc.size for sc in spec.sizes], count,
                                  spec.mix_ratio, spec.master_seed, spec.name)
        return dataclasses.replace(mixed, split_ratio=spec.split_ratio)
    return dataclasses.replace(spec, sizes=tuple(SizeCount(sc.size, count) for sc in spec.sizes))
