"""In-process endpoints for wiring checks without a model server."""

from typing import Dict, Iterable

from ..domain.errors import ConfigError, ProtocolError
from ..domain.interfaces import ChatEndpoint
from ..domain.models import EndpointConfig, InferenceRequest, LUPair, TaskInstance, TaskKind
from .chat_endpoint import OpenAIChatEndpoint
from .prompt_templates import serialize_input
from .text_codec import serialize_grid, serialize_lu_pair, serialize_matrix

ENDPOINT_KINDS = ("openai", "oracle", "echo-input", "text-only")


def serialize_target(instance: TaskInstance) -> str:
    if isinstance(instance.target, LUPair):
        return serialize_lu_pair(instance.target)
    if instance.task is TaskKind.LIFE:
        return serialize_grid(instance.target)
    return serialize_matrix(instance.target)


class _LookupEndpoint(ChatEndpoint):
    def __init__(self, instances: Iterable[TaskInstance], supports_images: bool = True):
        self._instances: Dict[str, TaskInstance] = {inst.id: inst for inst in instances}
        self._supports_images = supports_images

    @property
    def supports_images(self) -> bool:
        return self._supports_images

    def _instance(self, request: InferenceRequest) -> TaskInstance:
        if request.image_png is not None and not self._supports_images:
            raise ProtocolError("endpoint does not accept image content")
        try:
            return self._instances[request.instance_id]
        except KeyError:
            raise ProtocolError(f"unknown instance {request.instance_id}") from None


class OracleEndpoint(_LookupEndpoint):
    """Answers every request with an empty reasoning block and the gold target."""

    def complete(self, request: InferenceRequest) -> str:
        return "<think></think>\n" + serialize_target(self._instance(request))


class EchoInputEndpoint(_LookupEndpoint):
    """Answers with the serialized input unchanged."""

    def complete(self, request: InferenceRequest) -> str:
        return "<think></think>\n" + serialize_input(self._instance(request))


class TextOnlyEndpoint(OracleEndpoint):
    """Oracle answers for text requests; any image is a protocol error."""

    def __init__(self, instances: Iterable[TaskInstance]):
        super().__init__(instances, supports_images=False)


def create_endpoint(config: EndpointConfig, instances: Iterable[TaskInstance]) -> ChatEndpoint:
    if config.kind == "openai":
        return OpenAIChatEndpoint(config)
    if config.kind == "oracle":
        return OracleEndpoint(instances, supports_images=config.supports_images)
    if config.kind == "echo-input":
        return EchoInputEndpoint(instances, supports_images=config.supports_images)
    if config.kind == "text-only":
        return TextOnlyEndpoint(instances)
    raise ConfigError(f"unknown endpoint kind {config.kind!r}; expected one of {', '.join(ENDPOINT_KINDS)}")
