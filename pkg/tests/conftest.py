import numpy as np
import pytest

from covidx.cascade import TrainSpec, cascade_train
from covidx.datastore import featurize, load_dataset, save_bundle
from covidx.synthetic import generate_dataset


@pytest.fixture(scope="session")
def texture_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("textures") / "data"
    generate_dataset(root, per_class=12, severity_high=6, size=96, seed=3)
    return root


@pytest.fixture(scope="session")
def texture_manifest(texture_root):
    return load_dataset(texture_root)


@pytest.fixture(scope="session")
def texture_features(texture_manifest):
    return featurize(texture_manifest)


@pytest.fixture(scope="session")
def mini_model(texture_manifest, texture_features):
    """A small but fully real trained cascade shared across suites."""
    spec = TrainSpec(
        kind="svm",
        grid=({"kernel": "linear", "C": 1.0}, {"kernel": "linear", "C": 10.0}),
        k=3,
        seed=0,
    )
    sets = texture_features
    return cascade_train(
        sets["healthy"],
        sets["pneumonia"],
        sets["covid"],
        texture_manifest.severity_by_id(),
        spec,
    )


@pytest.fixture(scope="session")
def mini_bundle(mini_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("bundles") / "mini.covidx"
    digest = save_bundle(mini_model, path)
    return path, digest


def random_split_dataset(rng: np.random.Generator, n: int, d: int):
    """Random labeled data guaranteed to contain both classes."""
    X = rng.normal(0.0, 1.0, (n, d))
    y = np.where(rng.random(n) < 0.5, 1, -1)
    y[0], y[1] = 1, -1
    return X, y
