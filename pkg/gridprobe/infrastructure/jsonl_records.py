"""JSON shapes of domain values, shared by every line-delimited file."""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Union

from ..domain.errors import DatasetIOError
from ..domain.models import (
    Condition, DatasetSpec, EvalRecord, FailureCategory, Grid, InferenceRecord,
    InferenceStatus, LUPair, Matrix, SizeCount, Split, TaskInstance, TaskKind, Verdict
)


def dumps_line(obj: Dict[str, Any]) -> str:
    """Canonical one-line JSON so equal values give equal bytes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def structure_to_json(value: Union[Matrix, Grid, LUPair]) -> Dict[str, Any]:
    if isinstance(value, LUPair):
        return {"kind": "lu", "l": structure_to_json(value.l), "u": structure_to_json(value.u)}
    if isinstance(value, Grid):
        return {"kind": "grid", "rows": value.rows, "cols": value.cols, "values": list(value.cells)}
    return {"kind": "matrix", "rows": value.rows, "cols": value.cols, "values": list(value.entries)}


def structure_from_json(obj: Dict[str, Any]) -> Union[Matrix, Grid, LUPair]:
    kind = obj["kind"]
    if kind == "lu":
        return LUPair(l=structure_from_json(obj["l"]), u=structure_from_json(obj["u"]))
    if kind == "grid":
        return Grid(rows=obj["rows"], cols=obj["cols"], cells=tuple(obj["values"]))
    if kind == "matrix":
        return Matrix(rows=obj["rows"], cols=obj["cols"], entries=tuple(obj["values"]))
    raise ValueError(f"unknown structure kind {kind!r}")


def instance_to_json(instance: TaskInstance) -> Dict[str, Any]:
    return {
        "id": instance.id,
        "task": instance.task.value,
        "size": instance.size,
        "split": instance.split.value,
        "index": instance.index,
        "seed": instance.seed,
        "input": structure_to_json(instance.input),
        "target": structure_to_json(instance.target),
    }


def instance_from_json(obj: Dict[str, Any]) -> TaskInstance:
    return TaskInstance(
        id=obj["id"],
        task=TaskKind(obj["task"]),
        size=obj["size"],
        input=structure_from_json(obj["input"]),
        target=structure_from_json(obj["target"]),
        seed=obj["seed"],
        split=Split(obj["split"]),
        index=obj["index"],
    )


def spec_to_json(spec: DatasetSpec) -> Dict[str, Any]:
    return {
        "task": spec.task.value,
        "sizes": [[sc.size, sc.count] for sc in spec.sizes],
        "mix_ratio": list(spec.mix_ratio) if spec.mix_ratio else None,
        "split_ratio": list(spec.split_ratio),
        "master_seed": spec.master_seed,
        "name": spec.name,
    }


def spec_from_json(obj: Dict[str, Any]) -> DatasetSpec:
    return DatasetSpec(
        task=TaskKind(obj["task"]),
        sizes=tuple(SizeCount(size, count) for size, count in obj["sizes"]),
        mix_ratio=tuple(obj["mix_ratio"]) if obj.get("mix_ratio") else None,
        split_ratio=tuple(obj.get("split_ratio", (5, 1))),
        master_seed=obj.get("master_seed", 0),
        name=obj.get("name"),
    )


def inference_record_to_json(record: InferenceRecord) -> Dict[str, Any]:
    return {
        "instance_id": record.instance_id,
        "condition": record.condition.value,
        "raw_response": record.raw_response,
        "latency_ms": record.latency_ms,
        "attempt_count": record.attempt_count,
        "status": record.status.value,
        "error": record.error,
    }


def inference_record_from_json(obj: Dict[str, Any]) -> InferenceRecord:
    return InferenceRecord(
        instance_id=obj["instance_id"],
        condition=Condition(obj["condition"]),
        raw_response=obj["raw_response"],
        latency_ms=obj["latency_ms"],
        attempt_count=obj["attempt_count"],
        status=InferenceStatus(obj["status"]),
        error=obj.get("error"),
    )


def eval_record_to_json(record: EvalRecord) -> Dict[str, Any]:
    return {
        "instance_id": record.instance_id,
        "task": record.task.value,
        "size": record.size,
        "condition": record.condition.value,
        "verdict": record.verdict.value,
        "cell_errors": record.cell_errors.to_rows() if record.cell_errors is not None else None,
        "failure_category": record.failure_category.value if record.failure_category else None,
    }


def eval_record_from_json(obj: Dict[str, Any]) -> EvalRecord:
    mask = obj.get("cell_errors")
    category = obj.get("failure_category")
    return EvalRecord(
        instance_id=obj["instance_id"],
        task=TaskKind(obj["task"]),
        size=obj["size"],
        condition=Condition(obj["condition"]),
        verdict=Verdict(obj["verdict"]),
        cell_errors=Grid.from_rows(mask) if mask is not None else None,
        failure_category=FailureCategory(category) if category else None,
    )


def write_jsonl(path: Union[str, Path], objects: Iterable[Dict[str, Any]]) -> bytes:
    """Write objects one per line and return the exact bytes written."""
    content = "".join(dumps_line(obj) + "\n" for obj in objects).encode("utf-8")
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(content)
    except OSError as e:
        raise DatasetIOError(f"cannot write {path}: {e}") from e
    return content


def iter_jsonl(path: Union[str, Path]) -> Iterator[Dict[str, Any]]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, 1):
                if not line.strip():
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as e:
                    raise DatasetIOError(f"{path}:{line_number}: invalid JSON: {e}") from e
    except OSError as e:
        raise DatasetIOError(f"cannot read {path}: {e}") from e


def read_jsonl(path: Union[str, Path]) -> List[Dict[str, Any]]:
    return list(iter_jsonl(path))
