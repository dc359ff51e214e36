"""Pixel operations for the screenshot enhancement pipeline.

The pipeline order is grayscale, DoG sharpening applied twice, 2x bicubic
upscale, Otsu binarization, one dilation. Everything is pure and
deterministic: float64 intermediates, half-up rounding, clamp-to-edge
borders, and exact integer arithmetic for the Otsu maximizer.
"""

from __future__ import annotations

import math

import numpy as np

from .image import GrayImage

DEFAULT_SIGMA1 = 1.0
DEFAULT_SIGMA2 = 2.0
DEFAULT_GAIN = 1.5
DEFAULT_UPSCALE = 2


def _round_clamp(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(arr + 0.5), 0, 255).astype(np.uint8)


def to_grayscale(rgb: np.ndarray) -> GrayImage:
    """Luma conversion: Y = round(0.299 R + 0.587 G + 0.114 B)."""
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] < 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"expected non-empty RGB array, got shape {arr.shape}")
    arr = arr.astype(np.float64)
    y = 0.299 * arr[..., 0] + 0.587 * arr[..., 1] + 0.114 * arr[..., 2]
    return GrayImage(_round_clamp(y))


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(math.ceil(3.0 * sigma))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def _convolve_separable(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    radius = len(kernel) // 2
    padded = np.pad(arr, ((0, 0), (radius, radius)), mode="edge")
    out = np.zeros_like(arr)
    for i, w in enumerate(kernel):
        out += w * padded[:, i : i + arr.shape[1]]
    padded = np.pad(out, ((radius, radius), (0, 0)), mode="edge")
    out = np.zeros_like(arr)
    for i, w in enumerate(kernel):
        out += w * padded[i : i + arr.shape[0], :]
    return out


def gaussian_blur(img: GrayImage, sigma: float) -> GrayImage:
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    blurred = _convolve_separable(img.pixels.astype(np.float64), _gaussian_kernel(sigma))
    return GrayImage(_round_clamp(blurred))


def dog_sharpen(
    img: GrayImage,
    sigma1: float = DEFAULT_SIGMA1,
    sigma2: float = DEFAULT_SIGMA2,
    gain: float = DEFAULT_GAIN,
) -> GrayImage:
    """One application of difference-of-Gaussians sharpening:
    out = clamp(img + gain * (G(sigma1)*img - G(sigma2)*img))."""
    if sigma1 <= 0 or sigma2 <= 0:
        raise ValueError("sigmas must be positive")
    if sigma1 >= sigma2:
        raise ValueError(f"need sigma1 < sigma2, got {sigma1} >= {sigma2}")
    f = img.pixels.astype(np.float64)
    band = _convolve_separable(f, _gaussian_kernel(sigma1)) - _convolve_separable(
        f, _gaussian_kernel(sigma2)
    )
    return GrayImage(_round_clamp(f + gain * band))


def _cubic_weight(t: np.ndarray) -> np.ndarray:
    # Catmull-Rom (a = -0.5)
    at = np.abs(t)
    w = np.where(
        at <= 1.0,
        1.5 * at**3 - 2.5 * at**2 + 1.0,
        np.where(at < 2.0, -0.5 * at**3 + 2.5 * at**2 - 4.0 * at + 2.0, 0.0),
    )
    return w


def _upscale_axis(arr: np.ndarray, factor: int) -> np.ndarray:
    """Bicubic interpolation along the last axis with clamp-to-edge."""
    n = arr.shape[-1]
    src = (np.arange(n * factor, dtype=np.float64) + 0.5) / factor - 0.5
    base = np.floor(src).astype(int)
    out = np.zeros(arr.shape[:-1] + (n * factor,), dtype=np.float64)
    for off in (-1, 0, 1, 2):
        idx = np.clip(base + off, 0, n - 1)
        out += _cubic_weight(src - (base + off)) * arr[..., idx]
    return out


def upscale_bicubic(img: GrayImage, factor: int = DEFAULT_UPSCALE) -> GrayImage:
    if factor not in (2, 3, 4):
        raise ValueError(f"factor must be 2, 3, or 4, got {factor}")
    f = img.pixels.astype(np.float64)
    f = _upscale_axis(f, factor)
    f = _upscale_axis(f.T, factor).T
    return GrayImage(_round_clamp(f))


def otsu_threshold(img: GrayImage) -> int:
    """Threshold maximizing between-class variance, computed with exact
    integer arithmetic; ties resolve to the smallest threshold."""
    hist = np.bincount(img.pixels.ravel(), minlength=256)
    counts = [int(c) for c in hist]
    total = sum(counts)
    total_sum = sum(v * c for v, c in enumerate(counts))

    best_t = 0
    best_num, best_den = 0, 1  # between-class variance as exact fraction
    w0 = 0
    s0 = 0
    for t in range(256):
        w0 += counts[t]
        s0 += t * counts[t]
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            continue
        s1 = total_sum - s0
        num = (s0 * w1 - s1 * w0) ** 2
        den = w0 * w1
        if num * best_den > best_num * den:  # strictly greater keeps first maximizer
            best_num, best_den, best_t = num, den, t
    return best_t


def otsu_binarize(img: GrayImage) -> tuple[GrayImage, int]:
    t = otsu_threshold(img)
    return GrayImage(np.where(img.pixels > t, 255, 0).astype(np.uint8)), t


def dilate(img: GrayImage) -> GrayImage:
    """3x3 square dilation with clamp-to-edge borders; binary input only."""
    if not img.is_binary():
        raise ValueError("dilate expects a binary image (values 0 and 255)")
    padded = np.pad(img.pixels, 1, mode="edge")
    out = np.zeros_like(img.pixels)
    h, w = img.pixels.shape
    for dy in range(3):
        for dx in range(3):
            out = np.maximum(out, padded[dy : dy + h, dx : dx + w])
    return GrayImage(out)


def preprocess(
    rgb: np.ndarray,
    sigma1: float = DEFAULT_SIGMA1,
    sigma2: float = DEFAULT_SIGMA2,
    gain: float = DEFAULT_GAIN,
    upscale_factor: int = DEFAULT_UPSCALE,
    debug_stages: dict | None = None,
) -> GrayImage:
    """Full enhancement pipeline producing the binary image handed to OCR.

    Pass a dict as ``debug_stages`` to capture every intermediate image.
    """
    gray = to_grayscale(rgb)
    sharp = dog_sharpen(gray, sigma1, sigma2, gain)
    sharp = dog_sharpen(sharp, sigma1, sigma2, gain)
    scaled = upscale_bicubic(sharp, upscale_factor)
    binary, threshold = otsu_binarize(scaled)
    dilated = dilate(binary)
    if debug_stages is not None:
        debug_stages.update(
            {
                "grayscale": gray,
                "dog": sharp,
                "upscaled": scaled,
                "binary": binary,
                "threshold": threshold,
                "dilated": dilated,
            }
        )
    return dilated
