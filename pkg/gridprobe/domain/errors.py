"""Error hierarchy for gridprobe.

Every error carries a short ``category`` string; the CLI prints it so that
failures can be grepped and told apart without reading the message.
"""


class GridProbeError(Exception):
    """Base class for all categorized gridprobe errors."""

    category = "error"


class ConfigError(GridProbeError):
    category = "config"


class UnsupportedTaskError(GridProbeError):
    category = "unsupported-task"


class DatasetSpecError(GridProbeError):
    category = "dataset-spec"


class DatasetIOError(GridProbeError):
    category = "io"


class UnsupportedGlyphError(GridProbeError):
    category = "unsupported-glyph"


class LayoutError(GridProbeError):
    category = "layout"


class TransportError(GridProbeError):
    """Retryable failure talking to the inference endpoint (network, 5xx)."""

    category = "transport"


class ProtocolError(GridProbeError):
    """Non-retryable rejection by the endpoint (4xx, unsupported content)."""

    category = "protocol"


class CheckpointError(GridProbeError):
    category = "checkpoint"


class EmptyGroupError(GridProbeError):
    category = "empty-group"


class HeatmapShapeError(GridProbeError):
    category = "shape"
