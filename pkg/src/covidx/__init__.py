"""Staged chest-X-ray classification: preprocess, extract, classify, serve."""
from .cascade import (
    FINAL_LABELS,
    CascadeModel,
    CascadeResult,
    ExtractorMismatch,
    FeatureSet,
    TrainSpec,
    cascade_predict,
    cascade_train,
    evaluate_cascade,
)
from .features import (
    BaselineExtractor,
    ExtractorSpec,
    FeatureVector,
    baseline_extract,
    load_extractor,
)
from .imageprep import DecodeError, Image, PrepConfig, decode_image, preprocess
from .learners import LabeledDataset

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "FINAL_LABELS",
    "CascadeModel",
    "CascadeResult",
    "ExtractorMismatch",
    "FeatureSet",
    "TrainSpec",
    "cascade_predict",
    "cascade_train",
    "evaluate_cascade",
    "BaselineExtractor",
    "ExtractorSpec",
    "FeatureVector",
    "baseline_extract",
    "load_extractor",
    "DecodeError",
    "Image",
    "PrepConfig",
    "decode_image",
    "preprocess",
    "LabeledDataset",
]
