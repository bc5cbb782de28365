"""Linear PCA and Gaussian kernel PCA, the comparison embeddings for the diffusion map."""
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .diffusion import gaussian_affinity
from .exceptions import ValidationError
from .linalg import pairwise_sq_dists, sym_eig
from .validation import check_count, check_data_matrix, check_positive


@dataclass(frozen=True, eq=False)
class LinearEmbedding:
    coords: np.ndarray
    explained: np.ndarray

    @property
    def d(self):
        return self.coords.shape[1]


def _gram(A):
    G = A @ A.T
    upper = np.triu(G)
    return upper + np.triu(upper, 1).T


def pca_embed(X, d):
    """Principal component scores of the rows of ``X``.

    Works on the ``n x n`` Gram matrix of centered rows, which is cheap when
    ``p`` is much larger than ``n``. Score columns use the same sign rule as
    :func:`dmc.linalg.sym_eig`.
    """
    X = check_data_matrix(X)
    n, p = X.shape
    d = check_count(d, "d", low=1, high=min(n, p))
    centered = X - X.mean(axis=0)
    lam, U = sym_eig(_gram(centered))
    lam = np.maximum(lam, 0.0)
    total = lam.sum()
    explained = lam[:d] / total if total > 0 else np.zeros(d)
    coords = U[:, :d] * np.sqrt(lam[:d])
    coords -= coords.mean(axis=0)
    return LinearEmbedding(coords, explained)


def double_center(K):
    K = np.asarray(K, dtype=np.float64)
    row = K.mean(axis=1, keepdims=True)
    col = K.mean(axis=0, keepdims=True)
    Kc = K - row - col + K.mean()
    upper = np.triu(Kc)
    return upper + np.triu(upper, 1).T


def kernel_pca_embed(X, epsilon, d, dists=None):
    """Gaussian kernel PCA.

    The kernel matrix is double-centered. Column ``k`` of the result is
    ``sqrt(max(lambda_k, 0)) * u_k``. Small negative eigenvalues from rounding
    are clamped to zero.
    """
    X = check_data_matrix(X)
    n = X.shape[0]
    epsilon = check_positive(epsilon, "epsilon")
    d = check_count(d, "d", low=1, high=n - 1)
    if dists is None:
        dists = pairwise_sq_dists(X)
    K = gaussian_affinity(dists, epsilon).W
    lam, U = sym_eig(double_center(K))
    lam = np.maximum(lam, 0.0)
    total = lam.sum()
    explained = lam[:d] / total if total > 0 else np.zeros(d)
    return LinearEmbedding(U[:, :d] * np.sqrt(lam[:d]), explained)


class PCA(TransformerMixin, BaseEstimator):
    """Small-n PCA. ``components_`` are unit feature-space directions, one per row."""

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_data_matrix(X)
        emb = pca_embed(X, self.n_components)
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        norms = np.linalg.norm(emb.coords, axis=0)
        comps = np.zeros((emb.d, X.shape[1]))
        live = norms > 0
        comps[live] = (emb.coords[:, live] / norms[live]).T @ centered / norms[live][:, None]
        self.components_ = comps
        self.explained_variance_ratio_ = emb.explained
        self.embedding_ = emb
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_data_matrix(X, min_samples=1)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return (X - self.mean_) @ self.components_.T

    def fit_transform(self, X, y=None):
        return np.array(self.fit(X).embedding_.coords)


class GaussianKernelPCA(TransformerMixin, BaseEstimator):
    def __init__(self, epsilon=1.0, n_components=2):
        self.epsilon = epsilon
        self.n_components = n_components

    def fit(self, X, y=None, dists=None):
        X = check_data_matrix(X)
        self.embedding_ = kernel_pca_embed(X, self.epsilon, self.n_components, dists=dists)
        self.explained_variance_ratio_ = self.embedding_.explained
        self.n_features_in_ = X.shape[1]
        return self

    def fit_transform(self, X, y=None, dists=None):
        return np.array(self.fit(X, dists=dists).embedding_.coords)

