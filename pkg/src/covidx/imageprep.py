"""Deterministic normalization of raw chest X-ray images.

Pipeline: decode -> resize -> median de-noise -> percentile contrast
stretch. Every stage is a pure function on float64 pixel grids in
[0, 255], so identical bytes and config always produce bit-identical
output.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image as PILImage, UnidentifiedImageError

__all__ = [
    "DecodeError",
    "Image",
    "PrepConfig",
    "decode_image",
    "resize",
    "median_denoise",
    "contrast_stretch",
    "preprocess",
]

# ITU-R 601 luma weights used when collapsing color inputs.
_LUMA = np.array([0.299, 0.587, 0.114])


class DecodeError(ValueError):
    """Raised when an input byte stream is not a decodable PNG/JPEG."""


@dataclass(frozen=True)
class Image:
    """A grayscale image: float64 pixels in [0, 255], shape (height, width).

    Instances are immutable; the pixel buffer is copied on construction
    and marked read-only, so they are safe to share across tasks.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a 2-D pixel grid, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pixel values must be finite")
        if arr.min() < 0.0 or arr.max() > 255.0:
            raise ValueError("pixel values must lie in [0, 255]")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1


@dataclass(frozen=True)
class PrepConfig:
    """Preprocessing knobs. Defaults give 313x313, 3x3 median, 2-98% stretch."""

    target_size: int = 313
    median_kernel: int = 3
    stretch_low_pct: float = 2.0
    stretch_high_pct: float = 98.0

    def __post_init__(self):
        if self.target_size < 1:
            raise ValueError("target_size must be positive")
        if self.median_kernel < 1 or self.median_kernel % 2 == 0:
            raise ValueError("median_kernel must be an odd integer >= 1")
        if not (0.0 <= self.stretch_low_pct < self.stretch_high_pct <= 100.0):
            raise ValueError("need 0 <= stretch_low_pct < stretch_high_pct <= 100")

    def to_dict(self) -> dict:
        return {
            "target_size": self.target_size,
            "median_kernel": self.median_kernel,
            "stretch_low_pct": self.stretch_low_pct,
            "stretch_high_pct": self.stretch_high_pct,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PrepConfig":
        return cls(**d)


def decode_image(data: bytes) -> Image:
    """Decode PNG or JPEG bytes into a grayscale Image.

    Color inputs are collapsed to luminance (0.299 R + 0.587 G + 0.114 B);
    single-channel inputs pass through untouched.
    """
    try:
        with PILImage.open(io.BytesIO(data)) as pil:
            if pil.format not in ("PNG", "JPEG"):
                raise DecodeError(f"unsupported image format: {pil.format}")
            if pil.mode == "L":
                arr = np.asarray(pil, dtype=np.float64)
            else:
                rgb = np.asarray(pil.convert("RGB"), dtype=np.float64)
                arr = rgb @ _LUMA
    except DecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode image: {exc}") from exc
    return Image(np.clip(arr, 0.0, 255.0))


def resize(img: Image, w: int, h: int) -> Image:
    """Bilinear resize to (w, h) using the half-pixel-center convention.

    Source coordinate of output pixel j is (j + 0.5) * in/out - 0.5, clamped
    into the source grid. Interpolation is done in lerp form so constant
    images are preserved exactly.
    """
    if w < 1 or h < 1:
        raise ValueError("target dimensions must be positive")
    src = img.pixels
    in_h, in_w = src.shape
    if (in_w, in_h) == (w, h):
        return img

    sx = np.clip((np.arange(w) + 0.5) * (in_w / w) - 0.5, 0.0, in_w - 1.0)
    sy = np.clip((np.arange(h) + 0.5) * (in_h / h) - 0.5, 0.0, in_h - 1.0)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x1 = np.minimum(x0 + 1, in_w - 1)
    y1 = np.minimum(y0 + 1, in_h - 1)
    fx = sx - x0
    fy = (sy - y0)[:, None]

    p00 = src[np.ix_(y0, x0)]
    p01 = src[np.ix_(y0, x1)]
    p10 = src[np.ix_(y1, x0)]
    p11 = src[np.ix_(y1, x1)]
    top = p00 + fx * (p01 - p00)
    bot = p10 + fx * (p11 - p10)
    out = top + fy * (bot - top)
    return Image(np.clip(out, 0.0, 255.0))


def median_denoise(img: Image, k: int) -> Image:
    """Replace each pixel by the median of its k x k neighborhood.

    Edges are handled by clamp-to-border replication. k must be odd and no
    larger than either image dimension.
    """
    if k % 2 == 0 or k < 1:
        raise ValueError("kernel size must be odd and >= 1")
    if k > min(img.height, img.width):
        raise ValueError("kernel larger than image")
    if k == 1:
        return img
    pad = k // 2
    padded = np.pad(img.pixels, pad, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, (k, k))
    return Image(np.median(windows, axis=(2, 3)))


def contrast_stretch(img: Image, low_pct: float, high_pct: float) -> Image:
    """Linear percentile stretch onto [0, 255].

    Pixels are mapped by clamp(255 * (p - a) / (b - a), 0, 255) where a and b
    are the low/high percentile values. If the percentiles coincide (e.g. a
    constant image) the input is returned unchanged.
    """
    if not (0.0 <= low_pct < high_pct <= 100.0):
        raise ValueError("need 0 <= low_pct < high_pct <= 100")
    pixels = img.pixels
    a = np.percentile(pixels, low_pct)
    b = np.percentile(pixels, high_pct)
    if b == a:
        return img
    out = np.clip(255.0 * (pixels - a) / (b - a), 0.0, 255.0)
    return Image(out)


def preprocess(data: bytes, cfg: PrepConfig | None = None) -> Image:
    """Full pipeline: decode, resize to target, de-noise, contrast-stretch."""
    cfg = cfg or PrepConfig()
    img = decode_image(data)
    img = resize(img, cfg.target_size, cfg.target_size)
    img = median_denoise(img, cfg.median_kernel)
    return contrast_stretch(img, cfg.stretch_low_pct, cfg.stretch_high_pct)
