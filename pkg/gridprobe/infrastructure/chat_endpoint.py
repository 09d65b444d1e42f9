"""Chat-completions endpoint adapter (OpenAI-compatible servers)."""

import base64
import logging
import os
from typing import Any, Dict, List, Optional

import openai

from ..domain.errors import ConfigError, ProtocolError, TransportError
from ..domain.interfaces import ChatEndpoint
from ..domain.models import EndpointConfig, InferenceRequest

log = logging.getLogger(__name__)


def build_messages(request: InferenceRequest) -> List[Dict[str, Any]]:
    """One user turn: the prompt text, plus the PNG inline as base64 for visual requests."""
    if request.image_png is None:
        return [{"role": "user", "content": request.prompt_text}]
    encoded = base64.b64encode(request.image_png).decode("ascii")
    return [{
        "role": "user",
        "content": [
            {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{encoded}"}},
            {"type": "text", "text": request.prompt_text},
        ],
    }]


class OpenAIChatEndpoint(ChatEndpoint):
    """Calls ``/chat/completions``; retries are left to the caller."""

    def __init__(self, config: EndpointConfig, client: Optional[openai.OpenAI] = None):
        if not config.model:
            raise ConfigError("endpoint.model must be set for the openai endpoint")
        self._config = config
        self._client = client or openai.OpenAI(
            api_key=os.environ.get(config.api_key_env) or "EMPTY",
            base_url=config.base_url,
            timeout=config.timeout_s,
            max_retries=0,
        )

    @property
    def supports_images(self) -> bool:
        return self._config.supports_images

    def complete(self, request: InferenceRequest) -> str:
        try:
            response = self._client.chat.completions.create(
                model=self._config.model,
                messages=build_messages(request),
                temperature=request.decoding.temperature,
                max_tokens=request.decoding.max_tokens,
                stream=False,
            )
        except openai.APIConnectionError as e:
            raise TransportError(f"connection failed: {e}") from e
        except openai.APIStatusError as e:
            if e.status_code >= 500 or e.status_code == 429:
                raise TransportError(f"HTTP {e.status_code}: {e.message}") from e
            raise ProtocolError(f"HTTP {e.status_code}: {e.message}") from e

        if not response.choices:
            raise TransportError("response carried no choices")
        text = response.choices[0].message.content or ""
        if not text:
            raise TransportError("empty completion")
        return text
