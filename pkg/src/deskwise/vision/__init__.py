"""Screenshot preprocessing for OCR, post-correction, and error routing."""

from .image import GrayImage, load_image, read_pgm, write_pgm
from .ops import (
    dilate,
    dog_sharpen,
    otsu_binarize,
    preprocess,
    to_grayscale,
    upscale_bicubic,
)
from .ocr import (
    ErrorQuery,
    FakeOcrEngine,
    OcrLine,
    OcrResult,
    SubprocessOcrEngine,
    VisionError,
    correct_tokens,
    route_screenshot,
)

__all__ = [
    "GrayImage",
    "load_image",
    "read_pgm",
    "write_pgm",
    "to_grayscale",
    "dog_sharpen",
    "upscale_bicubic",
    "otsu_binarize",
    "dilate",
    "preprocess",
    "OcrLine",
    "OcrResult",
    "FakeOcrEngine",
    "SubprocessOcrEngine",
    "ErrorQuery",
    "VisionError",
    "correct_tokens",
    "route_screenshot",
]
