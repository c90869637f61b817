"""Command-line entry points: train, evaluate, predict, serve.

Runs are declared in a JSON config file; a handful of flags override config
fields (flags win). Reports are plain JSON with no timestamps, so a fixed
seed reproduces them byte for byte.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime error.
"""
from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from .cascade import (
    CascadeModel,
    FeatureSet,
    TrainSpec,
    cascade_predict,
    cascade_train,
    evaluate_cascade,
)
from .datastore import (
    IntegrityError,
    MissingClassDir,
    SeverityGap,
    UnreadableFile,
    VersionError,
    bundle_digest,
    featurize,
    load_bundle,
    load_dataset,
    save_bundle,
)
from .features import ExtractorSpec, GraphLoadError, load_extractor
from .imageprep import DecodeError, PrepConfig
from .metrics_eval import ClassTooSmall, stratified_split

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4

_DATA_ERRORS = (
    MissingClassDir,
    UnreadableFile,
    SeverityGap,
    IntegrityError,
    VersionError,
    ClassTooSmall,
    DecodeError,
    FileNotFoundError,
)
_CONFIG_ERRORS = (GraphLoadError,)


@dataclass
class RunConfig:
    """Everything a training run needs, loadable from one JSON file."""

    data_root: str
    extractor: dict = field(default_factory=lambda: {"kind": "baseline"})
    prep: dict = field(default_factory=dict)
    learner: str = "svm"
    grid: list | None = None
    k: int = 10
    test_fraction: float = 0.2
    metric: str = "f1"
    seed: int = 0
    out_bundle: str = "model.covidx"
    out_report: str = "report.json"

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config {path}: {exc}") from exc
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "data_root" not in raw:
            raise ValueError("config requires data_root")
        return cls(**raw)

    def extractor_spec(self) -> ExtractorSpec:
        return ExtractorSpec.from_dict(self.extractor)

    def prep_config(self) -> PrepConfig:
        return PrepConfig.from_dict(self.prep) if self.prep else PrepConfig()

    def train_spec(self) -> TrainSpec:
        grid = tuple(self.grid) if self.grid is not None else None
        return TrainSpec(kind=self.learner, grid=grid, k=self.k, metric=self.metric, seed=self.seed)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn, *args, **kwargs):
    """Run a command body, mapping exception families to exit codes."""
    try:
        return fn(*args, **kwargs)
    except _CONFIG_ERRORS as exc:
        _fail(EXIT_CONFIG, str(exc))
    except ValueError as exc:
        if isinstance(exc, _DATA_ERRORS):
            _fail(EXIT_DATA, str(exc))
        _fail(EXIT_CONFIG, str(exc))
    except _DATA_ERRORS as exc:
        _fail(EXIT_DATA, str(exc))
    except Exception as exc:  # pragma: no cover - last-resort mapping
        _fail(EXIT_RUNTIME, f"{type(exc).__name__}: {exc}")


def _split_feature_sets(sets: dict, severity: dict, test_fraction: float, seed: int):
    """Stratified image-level 80/20 split over the four final classes."""
    strata, keys = [], []
    for class_name in ("healthy", "pneumonia", "covid"):
        part = sets[class_name]
        for i, fid in enumerate(part.ids):
            if class_name == "covid":
                stratum = f"covid-{severity.get(fid, 'unlabeled')}"
            else:
                stratum = class_name
            strata.append(stratum)
            keys.append((class_name, i))
    train_idx, test_idx = stratified_split(np.array(strata), test_fraction, seed)

    def take(indices) -> dict:
        rows: dict[str, list[int]] = {c: [] for c in sets}
        for j in indices:
            class_name, i = keys[j]
            rows[class_name].append(i)
        return {
            c: FeatureSet(
                ids=tuple(sets[c].ids[i] for i in rows[c]),
                X=sets[c].X[rows[c]] if rows[c] else np.zeros((0, sets[c].X.shape[1])),
            )
            for c in sets
        }

    return take(train_idx), take(test_idx)


def _cmd_train(config: RunConfig) -> dict:
    extractor_spec = config.extractor_spec()
    prep_config = config.prep_config()
    extractor = load_extractor(extractor_spec)
    manifest = load_dataset(config.data_root)
    sets = featurize(manifest, extractor=extractor, prep_config=prep_config)
    severity = manifest.severity_by_id()

    train_sets, heldout_sets = _split_feature_sets(sets, severity, config.test_fraction, config.seed)
    model = cascade_train(
        train_sets["healthy"],
        train_sets["pneumonia"],
        train_sets["covid"],
        severity,
        config.train_spec(),
        extractor_spec=extractor_spec,
        extractor_id=extractor.extractor_id,
        prep_config=prep_config,
    )
    heldout = evaluate_cascade(
        model,
        heldout_sets["healthy"],
        heldout_sets["pneumonia"],
        heldout_sets["covid"],
        severity,
    )
    digest = save_bundle(model, config.out_bundle)
    report = {
        "config": config.to_dict(),
        "dataset": {
            "root": str(manifest.root),
            "counts": manifest.counts(),
            "n_train": sum(s.n for s in train_sets.values()),
            "n_heldout": sum(s.n for s in heldout_sets.values()),
        },
        "cv": {"phases": [dict(s) for s in model.phase_summaries]},
        "heldout": heldout,
        "bundle": {"path": str(config.out_bundle), "digest": digest},
    }
    Path(config.out_report).write_text(json.dumps(report, indent=2, sort_keys=True), encoding="utf-8")
    click.echo(f"bundle written to {config.out_bundle} (digest {digest[:12]})")
    click.echo(f"report written to {config.out_report}")
    return report


def _cmd_evaluate(bundle: str, data_root: str) -> dict:
    model = load_bundle(bundle)
    extractor = load_extractor(model.extractor_spec)
    manifest = load_dataset(data_root)
    sets = featurize(manifest, extractor=extractor, prep_config=model.prep_config)
    report = evaluate_cascade(
        model,
        sets["healthy"],
        sets["pneumonia"],
        sets["covid"],
        manifest.severity_by_id(),
    )
    report["bundle"] = {"path": str(bundle), "digest": bundle_digest(bundle)}
    report["dataset"] = {"root": str(manifest.root), "counts": manifest.counts()}
    click.echo(json.dumps(report, indent=2, sort_keys=True))
    return report


def _format_result(result) -> str:
    scores = [f"p1={result.phase1_score:+.6f}"]
    scores.append(f"p2={result.phase2_score:+.6f}" if result.phase2_score is not None else "p2=-")
    scores.append(f"p3={result.phase3_score:+.6f}" if result.phase3_score is not None else "p3=-")
    return f"{result.final_label}\t{' '.join(scores)}"


@click.group(name="covidx")
def main() -> None:
    """Chest X-ray staged classification toolkit."""


@main.command("train")
@click.option("--config", "config_path", required=True, type=click.Path(), help="JSON run config")
@click.option("--seed", type=int, default=None, help="override config seed")
@click.option(
    "--extractor",
    "extractor_flag",
    default=None,
    help="'baseline' or a path to a neural graph file (overrides config)",
)
def train_cmd(config_path, seed, extractor_flag):
    """Train a cascade from a dataset directory and write bundle + report."""

    def body():
        config = RunConfig.from_file(config_path)
        if seed is not None:
            config.seed = seed
        if extractor_flag is not None:
            if extractor_flag == "baseline":
                config.extractor = {"kind": "baseline"}
            else:
                base = dict(config.extractor)
                base.update({"kind": "neural", "graph_path": extractor_flag})
                config.extractor = base
        return _cmd_train(config)

    _guard(body)


@main.command("evaluate")
@click.option("--bundle", required=True, type=click.Path(), help="trained .covidx bundle")
@click.option("--data", "data_root", required=True, type=click.Path(), help="dataset directory")
def evaluate_cmd(bundle, data_root):
    """Evaluate a bundle against a labeled dataset directory."""
    _guard(_cmd_evaluate, bundle, data_root)


@main.command("predict")
@click.option("--bundle", required=True, type=click.Path(), help="trained .covidx bundle")
@click.argument("images", nargs=-1, required=True, type=click.Path())
def predict_cmd(bundle, images):
    """Predict one line per image: path, final label, phase scores."""

    def body():
        model = load_bundle(bundle)
        extractor = load_extractor(model.extractor_spec)
        failures = 0
        for image_path in images:
            try:
                result = cascade_predict(model, Path(image_path).read_bytes(), extractor=extractor)
                click.echo(f"{image_path}\t{_format_result(result)}")
            except (OSError, DecodeError) as exc:
                failures += 1
                click.echo(f"{image_path}\tERROR\t{exc}")
        if failures:
            sys.exit(EXIT_DATA)

    _guard(body)


@main.command("serve")
@click.option("--bundle", required=True, type=click.Path(), help="trained .covidx bundle")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve_cmd(bundle, host, port):
    """Serve the prediction API over HTTP."""

    def body():
        import uvicorn

        from .service.app import create_app

        model = load_bundle(bundle)
        app = create_app(model=model, digest=bundle_digest(bundle))
        uvicorn.run(app, host=host, port=port)

    _guard(body)


if __name__ == "__main__":
    main()
