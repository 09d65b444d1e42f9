"""Use cases for submitting prompts to a model endpoint."""

import logging
import time
from typing import Dict, List, Optional, Sequence, Tuple

import backoff
from tqdm import tqdm

from ..domain.errors import ProtocolError, TransportError
from ..domain.interfaces import ChatEndpoint, InferenceLog, ParallelExecutor
from ..domain.models import (
    Decoding, EndpointConfig, InferenceRecord, InferenceRequest,
    InferenceStatus, PromptBundle, TaskInstance
)

log = logging.getLogger(__name__)


def build_request(instance: TaskInstance, bundle: PromptBundle,
                  image_png: Optional[bytes] = None,
                  decoding: Decoding = Decoding()) -> InferenceRequest:
    return InferenceRequest(
        instance_id=instance.id,
        condition=bundle.condition,
        prompt_text=bundle.as_text(),
        image_png=image_png if bundle.condition.is_visual else None,
        decoding=decoding,
    )


def _log_backoff(details) -> None:
    log.warning("attempt %d failed (%s); retrying in %.1fs",
                details["tries"], details.get("exception"), details.get("wait", 0.0))


class InferenceUseCase:
    """Submits requests with retries and runs resumable, bounded batches."""

    def __init__(self, endpoint: ChatEndpoint, parallel_executor: ParallelExecutor):
        self._endpoint = endpoint
        self._parallel_executor = parallel_executor

    def submit(self, request: InferenceRequest, config: EndpointConfig,
               record_log: Optional[InferenceLog] = None) -> InferenceRecord:
        """One request with exponential backoff on transport errors.

        The record is persisted whatever the outcome when a log is given.
        """
        attempts = 0

        def attempt() -> str:
            nonlocal attempts
            if request.image_png is not None and not self._endpoint.supports_images:
                raise ProtocolError("endpoint does not accept image content")
            attempts += 1
            return self._endpoint.complete(request)

        retrying = backoff.on_exception(
            backoff.expo,
            TransportError,
            max_tries=max(1, config.max_attempts),
            on_backoff=_log_backoff,
            logger=None,
            factor=config.backoff_factor,
            max_value=config.backoff_max_s,
        )(attempt)

        started = time.perf_counter()
        try:
            response = retrying()
            record = InferenceRecord(
                instance_id=request.instance_id,
                condition=request.condition,
                raw_response=response,
                latency_ms=(time.perf_counter() - started) * 1000.0,
                attempt_count=attempts,
                status=InferenceStatus.OK,
            )
        except (TransportError, ProtocolError) as e:
            log.error("request %s (%s) failed after %d attempt(s): %s",
                      request.instance_id, request.condition.value, attempts, e)
            record = InferenceRecord(
                instance_id=request.instance_id,
                condition=request.condition,
                raw_response="",
                latency_ms=(time.perf_counter() - started) * 1000.0,
                attempt_count=attempts,
                status=InferenceStatus.FAILED,
                error=f"{e.category}: {e}",
            )

        if record_log is not None:
            record_log.append(record)
        return record

    def run_batch(self, requests: Sequence[InferenceRequest], config: EndpointConfig,
                  parallelism: int, record_log: InferenceLog,
                  retry_failed: bool = False, show_progress: bool = False) -> List[InferenceRecord]:
        """Submit every request not already in the checkpoint; output keeps input order."""
        if parallelism < 1:
            raise ValueError("parallelism must be at least 1")

        done: Dict[Tuple[str, str], InferenceRecord] = record_log.load()
        pending = [
            request for request in requests
            if request.key not in done
            or (retry_failed and done[request.key].status is InferenceStatus.FAILED)
        ]
        log.info("%d of %d requests already checkpointed; submitting %d",
                 len(requests) - len(pending), len(requests), len(pending))

        with tqdm(total=len(pending), desc="inference", disable=not show_progress) as progress:
            def task_for(request: InferenceRequest):
                def run() -> InferenceRecord:
                    record = self.submit(request, config, record_log)
                    progress.update(1)
                    return record
                return run

            fresh = self._parallel_executor.execute_parallel(
                [task_for(request) for request in pending], parallelism
            )

        for record in fresh:
            done[record.key] = record
        return [done[request.key] for request in requests]
