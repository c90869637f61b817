"""Synthetic chest-X-ray-like texture datasets for tests and demos.

Four generators with visually distinct statistics: dark smooth gradients
("healthy"), bright round blobs ("pneumonia"), and oriented stripes
("covid") whose amplitude encodes severity (low/high). Images are PNG
grayscale, laid out in the directory-per-class format the ingestion layer
expects, with a severity.csv covering every covid file.
"""
from __future__ import annotations

import argparse
import io
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

__all__ = ["TEXTURES", "render_texture", "texture_png_bytes", "generate_dataset"]

TEXTURES = ("healthy", "pneumonia", "covid-low", "covid-high")


def _healthy(rng: np.random.Generator, size: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) / size
    ramp = 40.0 + 30.0 * yy
    wobble = 8.0 * np.cos(2.0 * np.pi * (xx * rng.uniform(0.5, 1.5) + rng.uniform(0, 1)))
    return ramp + wobble + rng.normal(0.0, 2.0, (size, size))


def _pneumonia(rng: np.random.Generator, size: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    img = 110.0 + rng.normal(0.0, 3.0, (size, size))
    for _ in range(rng.integers(4, 9)):
        cy, cx = rng.uniform(0, size, 2)
        sigma = rng.uniform(size * 0.05, size * 0.11)
        amp = rng.uniform(60.0, 100.0)
        img += amp * np.exp(-(((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * sigma**2)))
    return img


def _stripes(rng: np.random.Generator, size: int, amp_range: tuple[float, float]) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    theta = np.deg2rad(rng.uniform(25.0, 65.0))
    period = rng.uniform(size * 0.06, size * 0.11)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    amp = rng.uniform(*amp_range)
    wave = amp * np.sin(2.0 * np.pi * (xx * np.cos(theta) + yy * np.sin(theta)) / period + phase)
    return 110.0 + wave + rng.normal(0.0, 3.0, (size, size))


def render_texture(kind: str, rng: np.random.Generator, size: int = 128) -> np.ndarray:
    """A (size, size) uint8 image of the requested texture family."""
    if kind == "healthy":
        img = _healthy(rng, size)
    elif kind == "pneumonia":
        img = _pneumonia(rng, size)
    elif kind == "covid-low":
        img = _stripes(rng, size, (20.0, 30.0))
    elif kind == "covid-high":
        img = _stripes(rng, size, (55.0, 75.0))
    else:
        raise ValueError(f"unknown texture {kind!r}, expected one of {TEXTURES}")
    return np.clip(img, 0.0, 255.0).astype(np.uint8)


def texture_png_bytes(kind: str, seed: int = 0, size: int = 128) -> bytes:
    """PNG-encoded single texture image, deterministic per seed."""
    pixels = render_texture(kind, np.random.default_rng(seed), size)
    buf = io.BytesIO()
    PILImage.fromarray(pixels, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def generate_dataset(
    root,
    per_class: int = 60,
    severity_high: int = 30,
    size: int = 128,
    seed: int = 7,
) -> Path:
    """Write a complete dataset under root and return its path.

    The covid class holds per_class images of which severity_high are the
    high-amplitude variant; severity.csv covers all of them.
    """
    if not 0 <= severity_high <= per_class:
        raise ValueError("severity_high must be within [0, per_class]")
    root = Path(root)
    rng = np.random.default_rng(seed)
    severity_rows = []
    for class_name in ("healthy", "pneumonia", "covid"):
        class_dir = root / class_name
        class_dir.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            if class_name == "covid":
                kind = "covid-high" if i < severity_high else "covid-low"
                severity_rows.append((f"{class_name}_{i:03d}.png", kind.split("-")[1]))
            else:
                kind = class_name
            pixels = render_texture(kind, rng, size)
            PILImage.fromarray(pixels, mode="L").save(class_dir / f"{class_name}_{i:03d}.png")
    lines = ["filename,severity"] + [f"{name},{label}" for name, label in severity_rows]
    (root / "severity.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return root


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Generate a synthetic texture dataset.")
    parser.add_argument("root", help="output directory")
    parser.add_argument("--per-class", type=int, default=60)
    parser.add_argument("--severity-high", type=int, default=30)
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)
    path = generate_dataset(
        args.root,
        per_class=args.per_class,
        severity_high=args.severity_high,
        size=args.size,
        seed=args.seed,
    )
    print(f"wrote {3 * args.per_class} images under {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
