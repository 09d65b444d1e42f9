"""Domain models for gridprobe."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np


Number = Union[int, float]
RGB = Tuple[int, int, int]

_INT64 = np.iinfo(np.int64)


def _to_float(value: Number) -> float:
    try:
        return float(value)
    except OverflowError:
        return math.inf if value > 0 else -math.inf


class TaskKind(Enum):
    """The three layout-defined task families."""
    TRANSPOSE = "transpose"
    LIFE = "life"
    LU = "lu"


class Split(Enum):
    TRAIN = "train"
    TEST = "test"


class Condition(Enum):
    """Presentation pathway an instance is evaluated under."""
    TEXT = "text"
    VISUAL = "visual"
    VISUAL_FLOW = "visual_flow"

    @property
    def is_visual(self) -> bool:
        return self is not Condition.TEXT


class RenderMode(Enum):
    MATRIX = "matrix"
    GRID = "grid"
    FLOW = "flow"


class CellAlign(Enum):
    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"


def _python_number(value) -> Number:
    """Coerce numpy scalars to plain ints/floats, keeping integral types integral."""
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    return float(value)


@dataclass(frozen=True)
class Matrix:
    """Dense row-major numeric matrix."""
    rows: int
    cols: int
    entries: Tuple[Number, ...]

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError(f"matrix dimensions must be positive, got {self.rows}x{self.cols}")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"matrix of shape {self.rows}x{self.cols} needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Number]]) -> 'Matrix':
        """Build a matrix from nested rows; raises ValueError on ragged input."""
        if not rows or not rows[0]:
            raise ValueError("matrix needs at least one row and one column")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise ValueError("ragged rows")
        entries = tuple(_python_number(value) for row in rows for value in row)
        return cls(rows=len(rows), cols=width, entries=entries)

    @classmethod
    def from_array(cls, array: np.ndarray) -> 'Matrix':
        if array.ndim != 2:
            raise ValueError(f"expected a 2D array, got {array.ndim}D")
        return cls.from_rows(array.tolist())

    def to_array(self, dtype=None) -> np.ndarray:
        if dtype is None:
            dtype = np.int64 if self.is_integer and self.fits_int64 else np.float64
        values = self.entries
        if np.dtype(dtype).kind == "f":
            values = [_to_float(value) for value in values]
        return np.array(values, dtype=dtype).reshape(self.rows, self.cols)

    @property
    def fits_int64(self) -> bool:
        return all(_INT64.min <= value <= _INT64.max for value in self.entries)

    def to_rows(self) -> List[List[Number]]:
        return [list(self.entries[r * self.cols:(r + 1) * self.cols]) for r in range(self.rows)]

    def __getitem__(self, index: Tuple[int, int]) -> Number:
        row, col = index
        return self.entries[row * self.cols + col]

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @property
    def is_integer(self) -> bool:
        return all(isinstance(value, int) for value in self.entries)


@dataclass(frozen=True)
class Grid:
    """Binary cell lattice; 1 is a live cell."""
    rows: int
    cols: int
    cells: Tuple[int, ...]

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError(f"grid dimensions must be positive, got {self.rows}x{self.cols}")
        if len(self.cells) != self.rows * self.cols:
            raise ValueError(
                f"grid of shape {self.rows}x{self.cols} needs {self.rows * self.cols} cells, "
                f"got {len(self.cells)}"
            )
        if any(cell not in (0, 1) for cell in self.cells):
            raise ValueError("grid cells must be 0 or 1")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> 'Grid':
        if not rows or not rows[0]:
            raise ValueError("grid needs at least one row and one column")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise ValueError("ragged rows")
        return cls(rows=len(rows), cols=width, cells=tuple(int(cell) for row in rows for cell in row))

    @classmethod
    def from_array(cls, array: np.ndarray) -> 'Grid':
        if array.ndim != 2:
            raise ValueError(f"expected a 2D array, got {array.ndim}D")
        return cls.from_rows(array.astype(np.int64).tolist())

    @classmethod
    def zeros(cls, rows: int, cols: int) -> 'Grid':
        return cls(rows=rows, cols=cols, cells=(0,) * (rows * cols))

    def to_array(self) -> np.ndarray:
        return np.array(self.cells, dtype=np.int8).reshape(self.rows, self.cols)

    def to_rows(self) -> List[List[int]]:
        return [list(self.cells[r * self.cols:(r + 1) * self.cols]) for r in range(self.rows)]

    def __getitem__(self, index: Tuple[int, int]) -> int:
        row, col = index
        return self.cells[row * self.cols + col]

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def live_count(self) -> int:
        return sum(self.cells)


@dataclass(frozen=True)
class LUPair:
    """Candidate factorization; shape checks belong to the verifier."""
    l: Matrix
    u: Matrix

    @property
    def dimension(self) -> int:
        return self.l.rows


@dataclass(frozen=True)
class Tolerances:
    reconstruction_abs: float = 1e-6
    triangular_abs: float = 1e-6

    def __post_init__(self):
        if not self.reconstruction_abs > 0 or not self.triangular_abs > 0:
            raise ValueError("tolerances must be strictly positive")


class LURejectReason(Enum):
    SHAPE = "shape"
    L_NOT_LOWER = "l-not-lower-triangular"
    U_NOT_UPPER = "u-not-upper-triangular"
    RECONSTRUCTION = "reconstruction"


@dataclass(frozen=True)
class LUVerdict:
    accepted: bool
    reason: Optional[LURejectReason] = None
    max_residual: float = math.nan

    @classmethod
    def accept(cls, max_residual: float) -> 'LUVerdict':
        return cls(accepted=True, reason=None, max_residual=max_residual)

    @classmethod
    def reject(cls, reason: LURejectReason, max_residual: float = math.nan) -> 'LUVerdict':
        return cls(accepted=False, reason=reason, max_residual=max_residual)


TaskInput = Union[Matrix, Grid]
TaskTarget = Union[Matrix, Grid, LUPair]


@dataclass(frozen=True)
class TaskInstance:
    """One generated problem with its gold target."""
    id: str
    task: TaskKind
    size: int
    input: TaskInput
    target: TaskTarget
    seed: int
    split: Split
    index: int = 0


@dataclass(frozen=True)
class SizeCount:
    size: int
    count: int


@dataclass(frozen=True)
class DatasetSpec:
    """What to generate: sizes with counts, optional mixture, split ratio."""
    task: TaskKind
    sizes: Tuple[SizeCount, ...]
    mix_ratio: Optional[Tuple[int, ...]] = None
    split_ratio: Tuple[int, int] = (5, 1)
    master_seed: int = 0
    name: Optional[str] = None

    @property
    def dataset_name(self) -> str:
        if self.name:
            return self.name
        sizes = "-".join(str(sc.size) for sc in self.sizes)
        prefix = "mix" if self.is_mixed else "n"
        return f"{self.task.value}_{prefix}{sizes}"

    @property
    def is_mixed(self) -> bool:
        return bool(self.mix_ratio)

    @property
    def total_count(self) -> int:
        return sum(sc.count for sc in self.sizes)

    @classmethod
    def single(cls, task: TaskKind, size: int, count: int, master_seed: int = 0,
               name: Optional[str] = None) -> 'DatasetSpec':
        return cls(task=task, sizes=(SizeCount(size, count),), master_seed=master_seed, name=name)

    @classmethod
    def mixed(cls, task: TaskKind, sizes: Sequence[int], total: int,
              weights: Sequence[int], master_seed: int = 0,
              name: Optional[str] = None) -> 'DatasetSpec':
        """Apportion ``total`` instances across sizes by weight (largest remainder)."""
        if len(weights) != len(sizes) or any(w <= 0 for w in weights):
            raise ValueError("mixed datasets need one positive weight per size")
        weight_sum = sum(weights)
        quotas = [total * w / weight_sum for w in weights]
        counts = [int(math.floor(q)) for q in quotas]
        leftover = total - sum(counts)
        by_remainder = sorted(range(len(sizes)), key=lambda i: (-(quotas[i] - counts[i]), i))
        for i in by_remainder[:leftover]:
            counts[i] += 1
        return cls(
            task=task,
            sizes=tuple(SizeCount(size, count) for size, count in zip(sizes, counts)),
            mix_ratio=tuple(weights),
            master_seed=master_seed,
            name=name,
        )


@dataclass(frozen=True)
class Dataset:
    spec: DatasetSpec
    instances: Tuple[TaskInstance, ...]

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[TaskInstance]:
        return iter(self.instances)

    def by_split(self, split: Split) -> List[TaskInstance]:
        return [inst for inst in self.instances if inst.split is split]

    @property
    def train(self) -> List[TaskInstance]:
        return self.by_split(Split.TRAIN)

    @property
    def test(self) -> List[TaskInstance]:
        return self.by_split(Split.TEST)


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    task: str
    master_seed: int
    digest: str
    instance_count: int
    split_counts: Dict[str, int]
    size_counts: Dict[str, Dict[str, int]]
    dataset_path: str


class FailureCategory(Enum):
    NO_STRUCTURE = "no-structure-found"
    RAGGED_ROWS = "ragged-rows"
    NON_NUMERIC = "non-numeric-token"
    MISSING_L_OR_U = "missing-L-or-U"
    SHAPE = "shape"
    INFERENCE_FAILED = "inference-failed"


@dataclass(frozen=True)
class ParseFailure:
    category: FailureCategory
    detail: str = ""


ParsedValue = Union[Matrix, Grid, LUPair, ParseFailure]


@dataclass(frozen=True)
class ParsedAnswer:
    """Model output split at the last closing reasoning tag."""
    reasoning: Optional[str]
    answer_region: str
    value: Optional[ParsedValue] = None


@dataclass(frozen=True)
class PromptBundle:
    """Instruction plus either serialized text or an image reference."""
    instruction: str
    payload: str
    answer_format_note: str
    condition: Condition
    image_path: Optional[str] = None

    def as_text(self) -> str:
        """Text part of the message; visual prompts carry no serialized input."""
        parts = [self.instruction]
        if not self.condition.is_visual:
            parts.append(self.payload)
        parts.append(self.answer_format_note)
        return "\n\n".join(part for part in parts if part)


@dataclass(frozen=True)
class Decoding:
    temperature: float = 0.0
    max_tokens: int = 8192


@dataclass(frozen=True)
class InferenceRequest:
    instance_id: str
    condition: Condition
    prompt_text: str
    image_png: Optional[bytes] = None
    decoding: Decoding = field(default_factory=Decoding)

    def __post_init__(self):
        if self.condition.is_visual and self.image_png is None:
            raise ValueError(f"visual request {self.instance_id} carries no image")
        if not self.condition.is_visual and self.image_png is not None:
            raise ValueError(f"text request {self.instance_id} must not carry an image")

    @property
    def key(self) -> Tuple[str, str]:
        return (self.instance_id, self.condition.value)


class InferenceStatus(Enum):
    OK = "ok"
    FAILED = "failed"


@dataclass(frozen=True)
class InferenceRecord:
    instance_id: str
    condition: Condition
    raw_response: str
    latency_ms: float
    attempt_count: int
    status: InferenceStatus
    error: Optional[str] = None

    def __post_init__(self):
        if self.status is InferenceStatus.OK and not self.raw_response:
            raise ValueError("an ok inference record needs a non-empty response")

    @property
    def key(self) -> Tuple[str, str]:
        return (self.instance_id, self.condition.value)


@dataclass(frozen=True)
class EndpointConfig:
    """Where and how to call the model; ``kind`` selects the adapter."""
    kind: str = "openai"
    base_url: Optional[str] = None
    model: str = ""
    api_key_env: str = "GRIDPROBE_API_KEY"
    timeout_s: float = 120.0
    max_attempts: int = 3
    backoff_factor: float = 1.0
    backoff_max_s: float = 30.0
    supports_images: bool = True
    decoding: Decoding = field(default_factory=Decoding)


class Verdict(Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    MALFORMED = "malformed"


@dataclass(frozen=True)
class EvalRecord:
    instance_id: str
    task: TaskKind
    size: int
    condition: Condition
    verdict: Verdict
    cell_errors: Optional[Grid] = None
    failure_category: Optional[FailureCategory] = None

    @property
    def is_correct(self) -> bool:
        return self.verdict is Verdict.CORRECT


class GroupKey(Enum):
    TASK = "task"
    SIZE = "size"
    CONDITION = "condition"


@dataclass(frozen=True)
class AccuracyRow:
    """One group of an accuracy table; ungrouped keys stay None."""
    task: Optional[TaskKind]
    size: Optional[int]
    condition: Optional[Condition]
    correct: int
    total: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.total


@dataclass(frozen=True)
class ErrorHeatmap:
    """Per-position error rates, or signed differences when ``is_difference``."""
    task: TaskKind
    size: int
    conditions: Tuple[Condition, ...]
    rates: Tuple[Tuple[float, ...], ...]
    sample_counts: Tuple[Tuple[int, ...], ...]
    is_difference: bool = False

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.rates), len(self.rates[0]) if self.rates else 0)

    def rates_array(self) -> np.ndarray:
        return np.array(self.rates, dtype=np.float64)

    @property
    def label(self) -> str:
        names = "_minus_".join(c.value for c in self.conditions)
        return f"{self.task.value}_{self.size}_{names}"


@dataclass(frozen=True)
class MatrixRenderSpec:
    font_size: int = 16
    cell_padding_x: int = 6
    cell_padding_y: int = 4
    margin: int = 12
    bracket_gap: int = 4
    bracket_width: int = 6
    bracket_thickness: int = 2
    cell_align: CellAlign = CellAlign.RIGHT
    background_color: RGB = (255, 255, 255)
    foreground_color: RGB = (0, 0, 0)

    def __post_init__(self):
        pixel_fields = (self.font_size, self.cell_padding_x, self.cell_padding_y, self.margin,
                        self.bracket_gap, self.bracket_width, self.bracket_thickness)
        if any(value < 0 for value in pixel_fields):
            raise ValueError("matrix render pixel fields must be nonnegative")
        if self.bracket_thickness > self.bracket_width:
            raise ValueError("bracket_thickness must not exceed bracket_width")


@dataclass(frozen=True)
class GridRenderSpec:
    font_size: int = 16
    cell_padding: int = 6
    grid_thickness: int = 2
    margin: int = 12
    background_color: RGB = (255, 255, 255)
    foreground_color: RGB = (0, 0, 0)

    def __post_init__(self):
        if any(value < 0 for value in (self.font_size, self.cell_padding, self.grid_thickness, self.margin)):
            raise ValueError("grid render pixel fields must be nonnegative")


@dataclass(frozen=True)
class FlowRenderSpec:
    font_size: int = 16
    margin: int = 12
    line_gap: int = 6
    word_gap_spaces: int = 1
    background_color: RGB = (255, 255, 255)
    foreground_color: RGB = (0, 0, 0)

    def __post_init__(self):
        if any(value < 0 for value in (self.font_size, self.margin, self.line_gap)):
            raise ValueError("flow render pixel fields must be nonnegative")
        if self.word_gap_spaces < 1:
            raise ValueError("word_gap_spaces must be at least 1")


@dataclass(frozen=True)
class RasterImage:
    """Row-major 8-bit RGB pixels."""
    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")
        if len(self.pixels) != self.width * self.height * 3:
            raise ValueError("pixel buffer does not match image dimensions")

    def pixel(self, x: int, y: int) -> RGB:
        offset = (y * self.width + x) * 3
        r, g, b = self.pixels[offset:offset + 3]
        return (r, g, b)

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width, 3)


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline run needs."""
    datasets: Tuple[DatasetSpec, ...]
    matrix_render: MatrixRenderSpec = field(default_factory=MatrixRenderSpec)
    grid_render: GridRenderSpec = field(default_factory=GridRenderSpec)
    flow_render: FlowRenderSpec = field(default_factory=FlowRenderSpec)
    prompt_template_path: Optional[str] = None
    endpoint: EndpointConfig = field(default_factory=EndpointConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_dir: str = "runs/default"
    master_seed: int = 0
    parallelism: int = 4
    heatmap_cell_px: int = 24
