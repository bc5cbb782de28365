import subprocess
import sys

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import dmc
from dmc import (
    PCA, AgglomerativeClustering, DiffusionMap, DiffusionSpectralClustering, GaussianKernelPCA, KMeans,
    SignedLogTransformer,
)

ESTIMATORS = [
    DiffusionMap(epsilon=2.0, n_components=2),
    DiffusionSpectralClustering(n_clusters=3, seed=4),
    KMeans(n_clusters=3, restarts=2),
    AgglomerativeClustering(linkage="single", mode="correlation"),
    PCA(n_components=3),
    GaussianKernelPCA(epsilon=0.5, n_components=1),
    SignedLogTransformer(),
]


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_clone_round_trips_params(est):
    copy = clone(est)
    assert copy.get_params() == est.get_params() and copy is not est


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
def test_fit_is_deterministic(est):
    X = np.random.default_rng(0).normal(size=(12, 6))
    a = clone(est).fit(X)
    b = clone(est).fit(X)
    for name in ("labels_", "embedding_"):
        if hasattr(a, name):
            va, vb = getattr(a, name), getattr(b, name)
            va = getattr(va, "coords", va)
            vb = getattr(vb, "coords", vb)
            assert np.asarray(va).tobytes() == np.asarray(vb).tobytes()


def test_unfitted_errors():
    with pytest.raises(NotFittedError):
        KMeans().predict(np.eye(2))
    with pytest.raises(NotFittedError):
        PCA().transform(np.eye(2))


def test_feature_count_checked():
    est = KMeans(n_clusters=2).fit(np.random.default_rng(1).normal(size=(6, 3)))
    with pytest.raises(dmc.ValidationError):
        est.predict(np.zeros((2, 4)))


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "dmc", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and dmc.__version__ in out.stdout
