"""PNG persistence for rendered images."""

from io import BytesIO
from pathlib import Path
from typing import Optional

from PIL import Image

from ..domain.errors import DatasetIOError
from ..domain.interfaces import ImageStore
from ..domain.models import RasterImage


def to_pil(image: RasterImage) -> Image.Image:
    return Image.frombytes("RGB", (image.width, image.height), image.pixels)


def encode_png(image: RasterImage) -> bytes:
    """8-bit RGB PNG; no metadata, so identical pixels give identical bytes."""
    buffer = BytesIO()
    to_pil(image).save(buffer, format="PNG", optimize=False)
    return buffer.getvalue()


def decode_png(data: bytes) -> RasterImage:
    with Image.open(BytesIO(data)) as pil_image:
        rgb = pil_image.convert("RGB")
        return RasterImage(width=rgb.width, height=rgb.height, pixels=rgb.tobytes())


class PngImageStore(ImageStore):
    """Writes images as PNG files, creating parent directories on demand."""

    def save(self, image: RasterImage, path: str) -> None:
        target = Path(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(encode_png(image))
        except OSError as e:
            raise DatasetIOError(f"cannot write image {path}: {e}") from e

    def load_png(self, path: str) -> Optional[bytes]:
        target = Path(path)
        if not target.is_file():
            return None
        try:
            return target.read_bytes()
        except OSError as e:
            raise DatasetIOError(f"cannot read image {path}: {e}") from e
