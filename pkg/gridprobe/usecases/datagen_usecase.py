"""Seeded, reproducible dataset construction."""

import hashlib
import logging
from collections import deque
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple, TypeVar, Union

import numpy as np

from ..domain.errors import DatasetSpecError, UnsupportedTaskError
from ..domain.interfaces import ParallelExecutor
from ..domain.models import (
    Dataset, DatasetSpec, Grid, Matrix, SizeCount, Split, TaskInstance, TaskKind
)
from ..domain.tasks import (
    LIFE_LIVE_PROBABILITY, TRANSPOSE_ENTRY_HIGH, TRANSPOSE_ENTRY_LOW,
    life_step, lu_generate, transpose
)

log = logging.getLogger(__name__)

# Size ranges of the single-size experiments; larger or smaller sizes are allowed.
STANDARD_SIZE_RANGES: Dict[TaskKind, range] = {
    TaskKind.TRANSPOSE: range(12, 21),
    TaskKind.LIFE: range(4, 9),
    TaskKind.LU: range(3, 7),
}
MIN_SIZES: Dict[TaskKind, int] = {
    TaskKind.TRANSPOSE: 1,
    TaskKind.LIFE: 1,
    TaskKind.LU: 2,
}
MAX_REJECTION_ATTEMPTS = 256

T = TypeVar("T")


def coerce_task(task: Union[TaskKind, str]) -> TaskKind:
    if isinstance(task, TaskKind):
        return task
    try:
        return TaskKind(task)
    except ValueError:
        raise UnsupportedTaskError(f"unsupported task: {task!r}") from None


def derive_seed(master_seed: int, task: TaskKind, size: int, split: Split,
                index: int, attempt: int = 0) -> int:
    """64-bit per-instance seed; train and test draw from disjoint streams."""
    material = f"{master_seed}|{task.value}|{size}|{split.value}|{index}|{attempt}"
    digest = hashlib.sha256(material.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def make_instance_id(task: TaskKind, size: int, split: Split, index: int, seed: int) -> str:
    return f"{task.value}-{size}-{split.value}-{index:05d}-{seed:016x}"


def generate_instance(task: Union[TaskKind, str], size: int, seed: int,
                      index: int = 0, split: Split = Split.TRAIN) -> TaskInstance:
    """Generate one oracle-consistent instance; deterministic in (task, size, seed)."""
    task = coerce_task(task)
    if size < MIN_SIZES[task]:
        raise DatasetSpecError(f"{task.value} instances need size >= {MIN_SIZES[task]}, got {size}")

    rng = np.random.default_rng(seed)
    if task is TaskKind.TRANSPOSE:
        values = rng.integers(TRANSPOSE_ENTRY_LOW, TRANSPOSE_ENTRY_HIGH + 1, size=(size, size), dtype=np.int64)
        problem = Matrix.from_array(values)
        target = transpose(problem)
    elif task is TaskKind.LIFE:
        cells = (rng.random((size, size)) < LIFE_LIVE_PROBABILITY).astype(np.int8)
        problem = Grid.from_array(cells)
        target = life_step(problem)
    else:
        problem, target = lu_generate(size, rng)

    return TaskInstance(
        id=make_instance_id(task, size, split, index, seed),
        task=task,
        size=size,
        input=problem,
        target=target,
        seed=seed,
        split=split,
        index=index,
    )


def split_counts(count: int, split_ratio: Tuple[int, int]) -> Tuple[int, int]:
    """(train, test) with test rounded down and the remainder going to train."""
    train_weight, test_weight = split_ratio
    test = (count * test_weight) // (train_weight + test_weight)
    return count - test, test


def interleave(streams: Sequence[List[T]], weights: Sequence[int]) -> List[T]:
    """Smooth weighted round robin; an exhausted stream drops out."""
    queues = [deque(stream) for stream in streams]
    current = [0] * len(queues)
    merged: List[T] = []
    while True:
        active = [i for i, queue in enumerate(queues) if queue]
        if not active:
            return merged
        total = sum(weights[i] for i in active)
        for i in active:
            current[i] += weights[i]
        chosen = max(active, key=lambda i: (current[i], -i))
        current[chosen] -= total
        merged.append(queues[chosen].popleft())


def _input_key(instance: TaskInstance) -> Tuple:
    problem = instance.input
    return (problem.rows, problem.cols, problem.cells if isinstance(problem, Grid) else problem.entries)


class DatasetBuilder:
    """Builds datasets from a DatasetSpec, optionally generating in parallel."""

    def __init__(self, parallel_executor: Optional[ParallelExecutor] = None, max_workers: int = 1):
        self._parallel_executor = parallel_executor
        self._max_workers = max_workers

    def build(self, spec: DatasetSpec) -> Dataset:
        validate_spec(spec)
        for size_count in spec.sizes:
            if size_count.size not in STANDARD_SIZE_RANGES[spec.task]:
                log.info("%s size %d is outside the standard range %s",
                         spec.task.value, size_count.size, STANDARD_SIZE_RANGES[spec.task])

        train_streams: List[List[TaskInstance]] = []
        test_streams: List[List[TaskInstance]] = []
        for size_count in spec.sizes:
            train_count, test_count = split_counts(size_count.count, spec.split_ratio)
            train = self._generate_split(spec, size_count, Split.TRAIN, train_count, forbidden=None)
            forbidden = {_input_key(inst) for inst in train} if spec.task is TaskKind.LIFE else None
            test = self._generate_split(spec, size_count, Split.TEST, test_count, forbidden=forbidden)
            train_streams.append(train)
            test_streams.append(test)

        if spec.is_mixed:
            ordered = interleave(train_streams, spec.mix_ratio)
            for test in test_streams:
                ordered.extend(test)
        else:
            ordered = []
            for train, test in zip(train_streams, test_streams):
                ordered.extend(train)
                ordered.extend(test)

        log.debug("built %s: %d instances", spec.dataset_name, len(ordered))
        return Dataset(spec=spec, instances=tuple(ordered))

    def _generate_split(self, spec: DatasetSpec, size_count: SizeCount, split: Split,
                        count: int, forbidden: Optional[Set[Tuple]]) -> List[TaskInstance]:
        tasks: List[Callable[[], TaskInstance]] = [
            lambda index=index: self._generate_one(spec, size_count.size, split, index, forbidden)
            for index in range(count)
        ]
        if self._parallel_executor and self._max_workers > 1 and len(tasks) > 1:
            return self._parallel_executor.execute_parallel(tasks, self._max_workers)
        return [task() for task in tasks]

    @staticmethod
    def _generate_one(spec: DatasetSpec, size: int, split: Split, index: int,
                      forbidden: Optional[Set[Tuple]]) -> TaskInstance:
        instance = None
        for attempt in range(MAX_REJECTION_ATTEMPTS):
            seed = derive_seed(spec.master_seed, spec.task, size, split, index, attempt)
            instance = generate_instance(spec.task, size, seed, index=index, split=split)
            if not forbidden or _input_key(instance) not in forbidden:
                return instance
        log.warning("%s test instance %d at size %d still duplicates a train input after %d draws",
                    spec.task.value, index, size, MAX_REJECTION_ATTEMPTS)
        return instance


def validate_spec(spec: DatasetSpec) -> None:
    """Raise DatasetSpecError for zero counts, repeated sizes or invalid ratios."""
    if not spec.sizes:
        raise DatasetSpecError("dataset spec lists no sizes")
    if any(sc.count <= 0 for sc in spec.sizes):
        raise DatasetSpecError("every size needs a positive instance count")
    sizes = [sc.size for sc in spec.sizes]
    if len(set(sizes)) != len(sizes):
        raise DatasetSpecError(f"sizes must be distinct, got {sizes}")
    if len(spec.split_ratio) != 2 or any(part <= 0 for part in spec.split_ratio):
        raise DatasetSpecError(f"split ratio components must be positive, got {spec.split_ratio}")
    if spec.mix_ratio is not None and len(spec.mix_ratio) > 0:
        if len(spec.mix_ratio) != len(spec.sizes):
            raise DatasetSpecError("mix ratio needs exactly one weight per size")
        if any(weight <= 0 for weight in spec.mix_ratio):
            raise DatasetSpecError("mix weights must be positive")
    for sc in spec.sizes:
        if sc.size < MIN_SIZES[spec.task]:
            raise DatasetSpecError(f"{spec.task.value} needs size >= {MIN_SIZES[spec.task]}, got {sc.size}")


def build_dataset(spec: DatasetSpec) -> Dataset:
    """Convenience wrapper over a sequential DatasetBuilder."""
    return DatasetBuilder().build(spec)
