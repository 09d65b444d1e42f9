"""JSONL inference log that doubles as the batch checkpoint."""

import json
import logging
import threading
from pathlib import Path
from typing import Dict, Tuple, Union

from ..domain.errors import CheckpointError
from ..domain.interfaces import InferenceLog
from ..domain.models import InferenceRecord
from .jsonl_records import dumps_line, inference_record_from_json, inference_record_to_json

log = logging.getLogger(__name__)


class JsonlInferenceLog(InferenceLog):
    """Appends records through one lock; the last record per key wins on load."""

    def __init__(self, path: Union[str, Path]):
        self._path = Path(path)
        self._lock = threading.Lock()
        try:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._path.touch(exist_ok=True)
            self._terminate_torn_line()
        except OSError as e:
            raise CheckpointError(f"checkpoint {self._path} is not writable: {e}") from e

    def _terminate_torn_line(self) -> None:
        """Close an unterminated final line so the next append starts a fresh one."""
        with open(self._path, "rb+") as handle:
            if handle.seek(0, 2) == 0:
                return
            handle.seek(-1, 2)
            if handle.read(1) != b"\n":
                log.warning("%s: terminating a torn final line", self._path)
                handle.seek(0, 2)
                handle.write(b"\n")

    @property
    def path(self) -> Path:
        return self._path

    def load(self) -> Dict[Tuple[str, str], InferenceRecord]:
        records: Dict[Tuple[str, str], InferenceRecord] = {}
        with self._lock:
            try:
                lines = self._path.read_text(encoding="utf-8").splitlines()
            except OSError as e:
                raise CheckpointError(f"cannot read checkpoint {self._path}: {e}") from e
        for line_number, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                record = inference_record_from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError, ValueError):
                # a torn final line from an interrupted run
                log.warning("%s:%d: skipping unreadable checkpoint line", self._path, line_number)
                continue
            records[record.key] = record
        return records

    def append(self, record: InferenceRecord) -> None:
        line = dumps_line(inference_record_to_json(record)) + "\n"
        with self._lock:
            try:
                with open(self._path, "a", encoding="utf-8") as handle:
                    handle.write(line)
                    handle.flush()
            except OSError as e:
                raise CheckpointError(f"cannot append to checkpoint {self._path}: {e}") from e
