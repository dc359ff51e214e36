"""Grayscale image value type and PNG/PGM IO."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable row-major 8-bit grayscale image."""

    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"image must be non-empty 2-D, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            arr = arr.astype(np.uint8)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GrayImage)
            and self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )

    def is_binary(self) -> bool:
        return bool(np.isin(self.pixels, (0, 255)).all())


def write_pgm(img: GrayImage, path: str | Path) -> None:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.data)


def read_pgm(path: str | Path) -> GrayImage:
    raw = Path(path).read_bytes()
    m = re.match(rb"(P[25])\s+(?:#[^\n]*\n\s*)*(\d+)\s+(\d+)\s+(\d+)\s", raw)
    if not m:
        raise ValueError(f"{path}: not a PGM file")
    magic, width, height, maxval = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4))
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 supported")
    if magic == b"P5":
        data = np.frombuffer(raw[m.end():], dtype=np.uint8, count=width * height)
    else:
        data = np.array(raw[m.end():].split()[: width * height], dtype=np.uint8)
    return GrayImage(data.reshape(height, width))


def load_image(path: str | Path) -> np.ndarray:
    """RGB array from a PNG, or grayscale replicated to RGB from a PGM."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        gray = read_pgm(path).pixels
        return np.stack([gray] * 3, axis=-1)
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))
