"""RGBA8 textures and lossless PNG I/O."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError


class DecodeError(Exception):
    """PNG bytes that cannot be decoded."""


@dataclass
class Texture:
    """W x H RGBA8 image, pixels row-major from the top row."""

    width: int
    height: int
    pixels: np.ndarray  # (H, W, 4) uint8

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("texture dimensions must be >= 1")
        self.pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if not self.pixels.flags.writeable:
            self.pixels = self.pixels.copy()
        if self.pixels.shape != (self.height, self.width, 4):
            raise ValueError(
                f"pixel buffer shape {self.pixels.shape} != {(self.height, self.width, 4)}"
            )

    @classmethod
    def filled(cls, width: int, height: int, rgba=(0, 0, 0, 255)) -> "Texture":
        pixels = np.empty((height, width, 4), dtype=np.uint8)
        pixels[:] = np.asarray(rgba, dtype=np.uint8)
        return cls(width, height, pixels)

    def copy(self) -> "Texture":
        return Texture(self.width, self.height, self.pixels.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Texture):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.pixels, other.pixels)
        )


def load_png(data: bytes) -> Texture:
    """Decode PNG bytes; grayscale/RGB/palette inputs are promoted to RGBA
    with alpha 255."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            rgba = img.convert("RGBA")
            pixels = np.asarray(rgba, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode PNG: {exc}") from exc
    return Texture(pixels.shape[1], pixels.shape[0], pixels)


def save_png(texture: Texture) -> bytes:
    """Encode as 8-bit RGBA PNG; load_png(save_png(t)) == t bit-exactly."""
    img = Image.fromarray(texture.pixels, mode="RGBA")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()
