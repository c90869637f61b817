"""Fixed-length feature vectors from preprocessed images.

Two extractor families share one interface: a deterministic baseline that
needs no model assets (patch statistics plus intensity and gradient
histograms, 1024 values), and a neural extractor that runs a single-input
single-output network graph from disk and global-average-pools its output.
"""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imageprep import Image, resize

__all__ = [
    "GraphLoadError",
    "ShapeError",
    "InferenceError",
    "FeatureVector",
    "ExtractorSpec",
    "BaselineExtractor",
    "NeuralExtractor",
    "load_extractor",
    "baseline_extract",
    "neural_extract",
    "BASELINE_DIM",
    "BASELINE_ID",
]

BASELINE_DIM = 1024
BASELINE_ID = "baseline-v1"
_GRID = 16


class GraphLoadError(RuntimeError):
    """Network graph file missing, unreadable, or unparseable."""


class ShapeError(RuntimeError):
    """Graph output is neither a feature vector nor a pooled feature map."""


class InferenceError(RuntimeError):
    """Backend failed while executing the graph."""


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    extractor_id: str

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if values.ndim != 1:
            raise ValueError("feature values must be a 1-D vector")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ExtractorSpec:
    """Names an extractor. Neural graphs are external assets referenced by
    path; their preprocessing constants are declared here, never hardcoded."""

    kind: str = "baseline"
    graph_path: str | None = None
    input_size: int = 313
    mean: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scale: tuple[float, float, float] = (1.0, 1.0, 1.0)
    pool: str = "global-average"

    def __post_init__(self):
        if self.kind not in ("baseline", "neural"):
            raise ValueError(f"kind must be 'baseline' or 'neural', got {self.kind!r}")
        if self.kind == "neural" and not self.graph_path:
            raise ValueError("neural extractor requires graph_path")
        if self.input_size <= 0:
            raise ValueError("input_size must be positive")
        if self.pool != "global-average":
            raise ValueError(f"unsupported pool {self.pool!r}")
        if len(self.mean) != 3 or len(self.scale) != 3:
            raise ValueError("mean and scale must have 3 channel entries")
        if any(s == 0 for s in self.scale):
            raise ValueError("scale entries must be nonzero")
        object.__setattr__(self, "mean", tuple(float(v) for v in self.mean))
        object.__setattr__(self, "scale", tuple(float(v) for v in self.scale))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractorSpec":
        d = dict(d)
        for key in ("mean", "scale"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


class BaselineExtractor:
    """Asset-free extractor: 16x16 grid of patch means and patch standard
    deviations, a 256-bin intensity histogram, and a 256-bin histogram of
    horizontal absolute gradients. Fully deterministic."""

    def __init__(self, spec: ExtractorSpec | None = None):
        self.spec = spec or ExtractorSpec(kind="baseline")
        self.extractor_id = BASELINE_ID
        self.dim = BASELINE_DIM

    def extract(self, img: Image) -> FeatureVector:
        return baseline_extract(img)


def _patch_bounds(n: int) -> np.ndarray:
    return (np.arange(_GRID + 1) * n) // _GRID


def baseline_extract(img: Image) -> FeatureVector:
    if img.height < _GRID or img.width < _GRID:
        raise ValueError(f"image must be at least {_GRID}x{_GRID} pixels")
    px = img.pixels
    rows = _patch_bounds(img.height)
    cols = _patch_bounds(img.width)
    means = np.empty((_GRID, _GRID))
    stds = np.empty((_GRID, _GRID))
    for i in range(_GRID):
        for j in range(_GRID):
            patch = px[rows[i] : rows[i + 1], cols[j] : cols[j + 1]]
            means[i, j] = patch.mean()
            stds[i, j] = patch.std()

    bins = np.clip(np.floor(px), 0, 255).astype(np.int64)
    hist = np.bincount(bins.ravel(), minlength=256).astype(np.float64)
    hist /= px.size

    grad = np.abs(px[:, 1:] - px[:, :-1])
    gbins = np.clip(np.floor(grad), 0, 255).astype(np.int64)
    ghist = np.bincount(gbins.ravel(), minlength=256).astype(np.float64)
    ghist /= grad.size

    values = np.concatenate([means.ravel(), stds.ravel(), hist, ghist])
    return FeatureVector(values=values, extractor_id=BASELINE_ID)


class NeuralExtractor:
    """Runs a single-input network graph over a 3-channel copy of the image
    and reports the pooled feature length discovered by a probe inference."""

    def __init__(self, spec: ExtractorSpec):
        if spec.kind != "neural":
            raise ValueError("NeuralExtractor requires a neural spec")
        self.spec = spec
        path = Path(spec.graph_path)
        if not path.is_file():
            raise GraphLoadError(f"graph file not found: {path}")
        graph_bytes = path.read_bytes()
        try:
            import cv2
        except ImportError as exc:
            raise GraphLoadError(
                "neural extraction needs the optional opencv dependency (pip install covidx[neural])"
            ) from exc
        self._cv2 = cv2
        try:
            self._net = cv2.dnn.readNetFromONNX(str(path))
        except cv2.error as exc:
            raise GraphLoadError(f"could not parse graph {path}: {exc}") from exc
        digest = hashlib.sha256(graph_bytes).hexdigest()
        self.extractor_id = f"neural-{digest[:16]}"
        probe = np.zeros((spec.input_size, spec.input_size), dtype=np.float64)
        self.dim = self._forward(probe).shape[0]

    def _forward(self, pixels: np.ndarray) -> np.ndarray:
        spec = self.spec
        chan = np.stack([pixels, pixels, pixels]).astype(np.float32)
        for c in range(3):
            chan[c] = (chan[c] - spec.mean[c]) / spec.scale[c]
        blob = chan[np.newaxis, ...]
        try:
            self._net.setInput(blob)
            out = np.asarray(self._net.forward(), dtype=np.float64)
        except self._cv2.error as exc:
            raise InferenceError(f"graph execution failed: {exc}") from exc
        if out.ndim == 4:
            out = out.mean(axis=(2, 3))
        if out.ndim != 2 or out.shape[0] != 1:
            raise ShapeError(f"graph output has unusable shape {out.shape}")
        return out[0]

    def extract(self, img: Image) -> FeatureVector:
        sized = resize(img, self.spec.input_size, self.spec.input_size)
        values = self._forward(sized.pixels)
        if values.shape[0] != self.dim:
            raise ShapeError(f"output length {values.shape[0]} != probed {self.dim}")
        return FeatureVector(values=values, extractor_id=self.extractor_id)


def load_extractor(spec: ExtractorSpec):
    if spec.kind == "baseline":
        return BaselineExtractor(spec)
    return NeuralExtractor(spec)


def neural_extract(extractor: NeuralExtractor, img: Image) -> FeatureVector:
    return extractor.extract(img)
