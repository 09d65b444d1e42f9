"""Use cases for rendering task inputs to images."""

import logging
from pathlib import Path
from typing import List, Optional, Sequence

from ..domain.errors import ConfigError
from ..domain.interfaces import ImageStore, ParallelExecutor
from ..domain.models import (
    Condition, FlowRenderSpec, Grid, GridRenderSpec, Matrix, MatrixRenderSpec, RasterImage,
    RenderMode, TaskInstance, TaskKind
)
from ..infrastructure.prompt_templates import serialize_input
from ..infrastructure.rasterizer import derive_flow_canvas_width, render_flow, render_grid, render_matrix

log = logging.getLogger(__name__)


def mode_for(task: TaskKind, condition: Condition) -> RenderMode:
    """The rendering a visual condition is evaluated with."""
    if condition is Condition.TEXT:
        raise ConfigError("the text condition has no rendering")
    if condition is Condition.VISUAL_FLOW:
        if task is TaskKind.LIFE:
            raise ConfigError("visual_flow is only defined for matrix-input tasks (transpose, lu)")
        return RenderMode.FLOW
    return RenderMode.GRID if task is TaskKind.LIFE else RenderMode.MATRIX


class RenderUseCase:
    """Renders instance inputs in one of the three modes and stores them as PNG."""

    def __init__(self, image_store: ImageStore,
                 matrix_spec: MatrixRenderSpec = MatrixRenderSpec(),
                 grid_spec: GridRenderSpec = GridRenderSpec(),
                 flow_spec: FlowRenderSpec = FlowRenderSpec(),
                 parallel_executor: Optional[ParallelExecutor] = None,
                 max_workers: int = 1):
        self._image_store = image_store
        self._matrix_spec = matrix_spec
        self._grid_spec = grid_spec
        self._flow_spec = flow_spec
        self._parallel_executor = parallel_executor
        self._max_workers = max_workers

    def render_instance(self, instance: TaskInstance, mode: RenderMode) -> RasterImage:
        source = instance.input
        if mode is RenderMode.GRID:
            if not isinstance(source, Grid):
                raise ConfigError(f"grid mode needs a binary grid input; {instance.task.value} has a matrix")
            return render_grid(source, self._grid_spec)

        if isinstance(source, Grid):
            if mode is RenderMode.FLOW:
                raise ConfigError("flow mode is only defined for matrix-input tasks (transpose, lu)")
            source = Matrix.from_rows(source.to_rows())

        if mode is RenderMode.MATRIX:
            return render_matrix(source, self._matrix_spec)
        # flow: the serialized string laid out in the native matrix canvas width
        width = derive_flow_canvas_width(source, self._matrix_spec)
        return render_flow(serialize_input(instance), width, self._flow_spec)

    @staticmethod
    def image_path(out_dir: Path, instance: TaskInstance) -> Path:
        return Path(out_dir) / f"{instance.id}.png"

    def execute(self, instances: Sequence[TaskInstance], mode: RenderMode, out_dir: Path,
                overwrite: bool = True) -> List[Path]:
        """Render and save every instance; existing files are kept when ``overwrite`` is off."""

        def task_for(instance: TaskInstance):
            def run() -> Path:
                path = self.image_path(out_dir, instance)
                if overwrite or not path.is_file():
                    self._image_store.save(self.render_instance(instance, mode), str(path))
                return path
            return run

        tasks = [task_for(instance) for instance in instances]
        if self._parallel_executor is None:
            paths = [task() for task in tasks]
        else:
            paths = self._parallel_executor.execute_parallel(tasks, self._max_workers)
        log.info("rendered %d %s images into %s", len(paths), mode.value, out_dir)
        return paths
