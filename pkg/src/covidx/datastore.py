"""Dataset ingestion from class directories and model bundle persistence.

Datasets live as one directory per class (healthy/, pneumonia/, covid/)
holding PNG or JPEG files, with an optional severity.csv sidecar mapping
covid filenames to {high, low}.

Bundles are single files: an 8-byte magic, a little-endian format version,
a UTF-8 JSON manifest, raw little-endian numeric payloads, and a trailing
SHA-256 digest over everything before it. No timestamps are stored, so
retraining with the same seed reproduces the digest bit for bit.
"""
from __future__ import annotations

import csv
import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .cascade import CascadeModel, FeatureSet, PhaseModel, prep_config_digest
from .features import ExtractorSpec, load_extractor
from .imageprep import DecodeError, PrepConfig, preprocess
from .learners.base import Scaler
from .learners.boost import BoostModel, BoostParams
from .learners.forest import ForestModel, ForestParams
from .learners.svm import SvmModel, SvmParams
from .learners.tree import ClassificationTree, RegressionTree

__all__ = [
    "MissingClassDir",
    "UnreadableFile",
    "SeverityGap",
    "IntegrityError",
    "VersionError",
    "DatasetManifest",
    "DEFAULT_CLASSES",
    "load_dataset",
    "featurize",
    "save_bundle",
    "load_bundle",
    "bundle_digest",
    "FORMAT_VERSION",
]

DEFAULT_CLASSES = ("healthy", "pneumonia", "covid")
_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

_MAGIC = b"COVIDXBN"
FORMAT_VERSION = 1
_DIGEST_BYTES = 32


class MissingClassDir(FileNotFoundError):
    """Dataset root lacks a required class subdirectory."""


class UnreadableFile(OSError):
    """A listed dataset file is missing, corrupt, or not PNG/JPEG."""


class SeverityGap(ValueError):
    """A covid image has no severity entry but severity is required."""


class IntegrityError(ValueError):
    """Bundle digest does not validate its content."""


class VersionError(ValueError):
    """Bundle format version is not understood by this loader."""


@dataclass(frozen=True)
class DatasetManifest:
    """Sorted per-class file listing plus the severity sidecar contents."""

    root: str
    files: dict
    severity: dict

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(self.files)

    def counts(self) -> dict:
        return {c: len(paths) for c, paths in self.files.items()}

    @staticmethod
    def id_for(class_name: str, path: Path) -> str:
        return f"{class_name}/{Path(path).name}"

    def severity_by_id(self, covid_class: str = "covid") -> dict:
        return {f"{covid_class}/{name}": label for name, label in self.severity.items()}


def _verify_image(path: Path) -> None:
    try:
        with PILImage.open(path) as im:
            fmt = im.format
            im.verify()
    except Exception as exc:
        raise UnreadableFile(f"cannot read image {path}: {exc}") from exc
    if fmt not in ("PNG", "JPEG"):
        raise UnreadableFile(f"{path} is {fmt or 'unknown format'}, expected PNG or JPEG")


def _read_severity(path: Path) -> dict:
    severity = {}
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["filename", "severity"]:
                raise UnreadableFile(f"{path}: header must be 'filename,severity'")
            for row in reader:
                name = (row["filename"] or "").strip()
                label = (row["severity"] or "").strip().lower()
                if label not in ("high", "low"):
                    raise UnreadableFile(f"{path}: severity for {name!r} must be high or low, got {row['severity']!r}")
                severity[name] = label
    except OSError as exc:
        raise UnreadableFile(f"cannot read {path}: {exc}") from exc
    return severity


def load_dataset(
    root,
    classes: tuple[str, ...] = DEFAULT_CLASSES,
    require_severity: bool = True,
    severity_class: str = "covid",
) -> DatasetManifest:
    """Scan a dataset directory into a manifest.

    Every listed file is checked to decode as PNG or JPEG. Listing order is
    lexicographic, so downstream splits depend only on seeds. When
    require_severity is set and the severity class is present, every one of
    its files must have a severity.csv entry.
    """
    root = Path(root)
    if not root.is_dir():
        raise MissingClassDir(f"dataset root {root} is not a directory")
    files: dict[str, tuple[Path, ...]] = {}
    for class_name in classes:
        class_dir = root / class_name
        if not class_dir.is_dir():
            raise MissingClassDir(f"missing class directory {class_dir}")
        listed = sorted(
            p for p in class_dir.iterdir() if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES
        )
        for p in listed:
            _verify_image(p)
        files[class_name] = tuple(listed)

    severity_path = root / "severity.csv"
    severity = _read_severity(severity_path) if severity_path.is_file() else {}

    if require_severity and severity_class in files:
        missing = [p.name for p in files[severity_class] if p.name not in severity]
        if missing:
            shown = ", ".join(missing[:5])
            raise SeverityGap(
                f"{len(missing)} {severity_class} file(s) lack severity entries (e.g. {shown})"
            )
    return DatasetManifest(root=str(root), files=files, severity=severity)


def featurize(
    manifest: DatasetManifest,
    extractor=None,
    prep_config: PrepConfig | None = None,
    extractor_spec: ExtractorSpec | None = None,
) -> dict:
    """Decode, preprocess, and extract features for every manifest file.

    Returns class name -> FeatureSet with ids "<class>/<filename>".
    """
    prep_config = prep_config or PrepConfig()
    if extractor is None:
        extractor = load_extractor(extractor_spec or ExtractorSpec(kind="baseline"))
    sets = {}
    for class_name, paths in manifest.files.items():
        ids, vectors = [], []
        for path in paths:
            try:
                img = preprocess(Path(path).read_bytes(), prep_config)
            except (OSError, DecodeError) as exc:
                raise UnreadableFile(f"cannot decode {path}: {exc}") from exc
            vectors.append(extractor.extract(img))
            ids.append(DatasetManifest.id_for(class_name, path))
        sets[class_name] = FeatureSet.from_vectors(ids, vectors)
    return sets


# ---------------------------------------------------------------------------
# Bundle container


class _ArrayWriter:
    """Accumulates named arrays as raw little-endian bytes."""

    def __init__(self):
        self.entries = []
        self.chunks = []
        self.offset = 0

    def add(self, name: str, array: np.ndarray) -> None:
        array = np.ascontiguousarray(array)
        if array.dtype == np.float64:
            dtype = "float64"
            blob = array.astype("<f8", copy=False).tobytes()
        elif array.dtype == np.int64:
            dtype = "int64"
            blob = array.astype("<i8", copy=False).tobytes()
        else:
            raise TypeError(f"unsupported payload dtype {array.dtype} for {name}")
        self.entries.append(
            {
                "name": name,
                "dtype": dtype,
                "shape": list(array.shape),
                "offset": self.offset,
                "nbytes": len(blob),
            }
        )
        self.chunks.append(blob)
        self.offset += len(blob)


class _ArrayReader:
    def __init__(self, entries, payload: bytes):
        self.by_name = {e["name"]: e for e in entries}
        self.payload = payload

    def get(self, name: str) -> np.ndarray:
        e = self.by_name[name]
        raw = self.payload[e["offset"] : e["offset"] + e["nbytes"]]
        dtype = "<f8" if e["dtype"] == "float64" else "<i8"
        arr = np.frombuffer(raw, dtype=dtype).reshape(e["shape"])
        return arr.astype(np.float64 if e["dtype"] == "float64" else np.int64)


def _write_trees(writer: _ArrayWriter, prefix: str, trees) -> None:
    parts = [t.to_arrays() for t in trees]
    offsets = np.cumsum([0] + [p["feature"].shape[0] for p in parts]).astype(np.int64)
    writer.add(f"{prefix}/tree_offsets", offsets)
    for field in ("feature", "threshold", "left", "right"):
        writer.add(f"{prefix}/{field}", np.concatenate([p[field] for p in parts]))
    values = np.concatenate([p["value"] for p in parts], axis=0)
    writer.add(f"{prefix}/value", values)


def _read_trees(reader: _ArrayReader, prefix: str, tree_cls):
    offsets = reader.get(f"{prefix}/tree_offsets")
    fields = {f: reader.get(f"{prefix}/{f}") for f in ("feature", "threshold", "left", "right", "value")}
    trees = []
    for t in range(offsets.shape[0] - 1):
        lo, hi = int(offsets[t]), int(offsets[t + 1])
        arrays = {f: fields[f][lo:hi] for f in fields}
        trees.append(tree_cls.from_arrays(arrays))
    return tuple(trees)


def _add_phase(writer: _ArrayWriter, prefix: str, phase: PhaseModel) -> dict:
    model = phase.model
    meta: dict = {"kind": phase.kind, "params": model.params.to_dict()}
    writer.add(f"{prefix}/scaler_mean", model.scaler.mean)
    writer.add(f"{prefix}/scaler_std", model.scaler.std)
    if phase.kind == "svm":
        meta["converged"] = bool(model.converged)
        meta["n_sweeps"] = int(model.n_sweeps)
        writer.add(f"{prefix}/alphas", model.alphas)
        writer.add(f"{prefix}/support_vectors", model.support_vectors)
        writer.add(f"{prefix}/support_labels", model.support_labels)
        writer.add(f"{prefix}/bias", np.array([model.bias], dtype=np.float64))
    elif phase.kind == "forest":
        _write_trees(writer, prefix, model.trees)
    elif phase.kind == "boost":
        writer.add(f"{prefix}/base_score", np.array([model.base_score], dtype=np.float64))
        writer.add(f"{prefix}/train_losses", np.asarray(model.train_losses, dtype=np.float64))
        _write_trees(writer, prefix, model.trees)
    else:
        raise TypeError(f"unknown phase kind {phase.kind!r}")
    return meta


def _load_phase(reader: _ArrayReader, prefix: str, meta: dict) -> PhaseModel:
    kind = meta["kind"]
    scaler = Scaler(reader.get(f"{prefix}/scaler_mean"), reader.get(f"{prefix}/scaler_std"))
    if kind == "svm":
        model = SvmModel(
            alphas=reader.get(f"{prefix}/alphas"),
            support_vectors=reader.get(f"{prefix}/support_vectors"),
            support_labels=reader.get(f"{prefix}/support_labels"),
            bias=float(reader.get(f"{prefix}/bias")[0]),
            params=SvmParams(**meta["params"]),
            scaler=scaler,
            converged=bool(meta["converged"]),
            n_sweeps=int(meta["n_sweeps"]),
        )
    elif kind == "forest":
        params = dict(meta["params"])
        if isinstance(params.get("max_features"), float):
            params["max_features"] = int(params["max_features"])
        model = ForestModel(
            trees=_read_trees(reader, prefix, ClassificationTree),
            params=ForestParams(**params),
            scaler=scaler,
        )
    elif kind == "boost":
        model = BoostModel(
            trees=_read_trees(reader, prefix, RegressionTree),
            base_score=float(reader.get(f"{prefix}/base_score")[0]),
            params=BoostParams(**meta["params"]),
            scaler=scaler,
            train_losses=tuple(reader.get(f"{prefix}/train_losses").tolist()),
        )
    else:
        raise VersionError(f"unknown phase kind {kind!r}")
    return PhaseModel(kind=kind, model=model)


def save_bundle(model: CascadeModel, path) -> str:
    """Write the bundle and return its hex content digest."""
    writer = _ArrayWriter()
    phase_meta = [
        _add_phase(writer, f"phase{i}", phase)
        for i, phase in enumerate((model.phase1, model.phase2, model.phase3), start=1)
    ]
    manifest = {
        "format_version": FORMAT_VERSION,
        "extractor_id": model.extractor_id,
        "extractor_spec": model.extractor_spec.to_dict(),
        "prep_config": model.prep_config.to_dict(),
        "prep_digest": model.prep_digest,
        "phase_summaries": [dict(s) for s in model.phase_summaries],
        "phases": phase_meta,
        "arrays": writer.entries,
    }
    manifest_blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = b"".join(
        [
            _MAGIC,
            struct.pack("<I", FORMAT_VERSION),
            struct.pack("<Q", len(manifest_blob)),
            manifest_blob,
            *writer.chunks,
        ]
    )
    digest = hashlib.sha256(body).digest()
    Path(path).write_bytes(body + digest)
    return digest.hex()


def _parse_bundle(blob: bytes):
    if len(blob) < len(_MAGIC) + 12 + _DIGEST_BYTES:
        raise IntegrityError("bundle file is truncated")
    if blob[: len(_MAGIC)] != _MAGIC:
        raise IntegrityError("not a model bundle (bad magic)")
    (version,) = struct.unpack_from("<I", blob, len(_MAGIC))
    if version != FORMAT_VERSION:
        raise VersionError(f"bundle format version {version} not supported (expected {FORMAT_VERSION})")
    body, digest = blob[:-_DIGEST_BYTES], blob[-_DIGEST_BYTES:]
    if hashlib.sha256(body).digest() != digest:
        raise IntegrityError("bundle digest mismatch (corrupt file)")
    (manifest_len,) = struct.unpack_from("<Q", blob, len(_MAGIC) + 4)
    header_end = len(_MAGIC) + 12
    manifest_blob = body[header_end : header_end + manifest_len]
    if len(manifest_blob) != manifest_len:
        raise IntegrityError("bundle manifest is truncated")
    try:
        manifest = json.loads(manifest_blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IntegrityError(f"bundle manifest unreadable: {exc}") from exc
    payload = body[header_end + manifest_len :]
    return manifest, payload, digest.hex()


def load_bundle(path) -> CascadeModel:
    blob = Path(path).read_bytes()
    manifest, payload, _ = _parse_bundle(blob)
    reader = _ArrayReader(manifest["arrays"], payload)
    phases = [
        _load_phase(reader, f"phase{i}", meta)
        for i, meta in enumerate(manifest["phases"], start=1)
    ]
    prep_config = PrepConfig.from_dict(manifest["prep_config"])
    model = CascadeModel(
        phase1=phases[0],
        phase2=phases[1],
        phase3=phases[2],
        extractor_spec=ExtractorSpec.from_dict(manifest["extractor_spec"]),
        extractor_id=manifest["extractor_id"],
        prep_config=prep_config,
        phase_summaries=tuple(manifest["phase_summaries"]),
    )
    if manifest.get("prep_digest") != prep_config_digest(prep_config):
        raise IntegrityError("preprocessing digest disagrees with stored config")
    return model


def bundle_digest(path) -> str:
    """The verified content digest of a bundle on disk."""
    _, _, digest = _parse_bundle(Path(path).read_bytes())
    return digest
