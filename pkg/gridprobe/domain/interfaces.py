"""Domain interfaces (ports) for gridprobe."""

from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List, Optional, Tuple

from .models import InferenceRecord, InferenceRequest, RasterImage


class ChatEndpoint(ABC):
    """A chat-completions style model endpoint."""

    @abstractmethod
    def complete(self, request: InferenceRequest) -> str:
        """Return the raw response text.

        Raises TransportError for retryable failures and ProtocolError for
        requests the endpoint will never accept.
        """
        pass

    @property
    def supports_images(self) -> bool:
        return True


class ParallelExecutor(ABC):
    """Interface for bounded parallel execution."""

    @abstractmethod
    def execute_parallel(self, tasks: List[Callable[[], Any]], max_workers: Optional[int] = None) -> List[Any]:
        """Execute tasks with at most ``max_workers`` in flight; results keep input order."""
        pass


class InferenceLog(ABC):
    """Append-only record log doubling as the batch checkpoint."""

    @abstractmethod
    def load(self) -> Dict[Tuple[str, str], InferenceRecord]:
        """Records already persisted, keyed by (instance_id, condition)."""
        pass

    @abstractmethod
    def append(self, record: InferenceRecord) -> None:
        """Persist one record; must be safe to call from several threads."""
        pass


class ImageStore(ABC):
    """Interface for persisting rendered images."""

    @abstractmethod
    def save(self, image: RasterImage, path: str) -> None:
        pass

    @abstractmethod
    def load_png(self, path: str) -> Optional[bytes]:
        """Encoded PNG bytes, or None if nothing is stored at ``path``."""
        pass
