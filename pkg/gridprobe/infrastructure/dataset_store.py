"""Dataset export/import as JSONL plus a manifest."""

import hashlib
import json
import logging
from collections import Counter, defaultdict
from pathlib import Path
from typing import Dict, Union

from ..domain.errors import DatasetIOError
from ..domain.models import Dataset, DatasetManifest
from .jsonl_records import (
    instance_from_json, instance_to_json, read_jsonl, spec_from_json, spec_to_json, write_jsonl
)

log = logging.getLogger(__name__)


def manifest_path_for(path: Union[str, Path]) -> Path:
    return Path(path).with_suffix(".manifest.json")


def export_dataset(ds: Dataset, path: Union[str, Path]) -> DatasetManifest:
    """Write one instance per line and a manifest with counts, seed and digest."""
    content = write_jsonl(path, (instance_to_json(inst) for inst in ds.instances))
    digest = hashlib.sha256(content).hexdigest()

    split_counts = Counter(inst.split.value for inst in ds.instances)
    size_counts: Dict[str, Counter] = defaultdict(Counter)
    for inst in ds.instances:
        size_counts[str(inst.size)][inst.split.value] += 1

    manifest = DatasetManifest(
        name=ds.spec.dataset_name,
        task=ds.spec.task.value,
        master_seed=ds.spec.master_seed,
        digest=digest,
        instance_count=len(ds.instances),
        split_counts=dict(sorted(split_counts.items())),
        size_counts={size: dict(sorted(counts.items())) for size, counts in sorted(size_counts.items())},
        dataset_path=Path(path).name,
    )
    document = {
        "name": manifest.name,
        "task": manifest.task,
        "master_seed": manifest.master_seed,
        "digest": manifest.digest,
        "instance_count": manifest.instance_count,
        "split_counts": manifest.split_counts,
        "size_counts": manifest.size_counts,
        "dataset_path": manifest.dataset_path,
        "spec": spec_to_json(ds.spec),
    }
    try:
        manifest_path_for(path).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise DatasetIOError(f"cannot write manifest for {path}: {e}") from e
    log.info("exported %s: %d instances, sha256 %s", manifest.name, manifest.instance_count, digest[:12])
    return manifest


def import_dataset(path: Union[str, Path]) -> Dataset:
    """Read a dataset written by export_dataset, verifying the manifest digest."""
    manifest_file = manifest_path_for(path)
    try:
        document = json.loads(manifest_file.read_text(encoding="utf-8"))
        content = Path(path).read_bytes()
    except (OSError, json.JSONDecodeError) as e:
        raise DatasetIOError(f"cannot read dataset {path}: {e}") from e

    digest = hashlib.sha256(content).hexdigest()
    if digest != document.get("digest"):
        raise DatasetIOError(f"{path}: content digest does not match its manifest")

    instances = tuple(instance_from_json(obj) for obj in read_jsonl(path))
    return Dataset(spec=spec_from_json(document["spec"]), instances=instances)
