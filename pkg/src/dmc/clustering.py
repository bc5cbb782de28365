"""Partitions of samples and the clusterers that produce them.

``spectral_threshold`` splits a diffusion embedding at zero along its first
coordinate. ``kmeans`` and ``agglomerative`` are the comparison methods run on
the original rows.
"""
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .diffusion import DEFAULT_DECADES, DEFAULT_POINTS_PER_DECADE, DiffusionMap
from .exceptions import DegenerateSplitWarning, ValidationError
from .linalg import pairwise_sq_dists
from .preprocess import correlation_matrix
from .validation import check_count, check_data_matrix, check_symmetric

LINKAGES = ("single", "complete", "average")
HIERARCHY_MODES = ("raw", "correlation")


@dataclass(frozen=True, eq=False)
class Partition:
    """Cluster id per sample. Ids run over ``0 .. k-1`` and each one is used."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise ValidationError("labels must be a non-empty 1-D sequence")
        if not np.array_equal(np.unique(labels), np.arange(self.k)):
            raise ValidationError(f"labels must use every id in 0..{self.k - 1}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, labels):
        """Build a partition from arbitrary hashable labels, numbering clusters by first appearance."""
        ids = {}
        out = [ids.setdefault(lab, len(ids)) for lab in np.asarray(labels).tolist()]
        return cls(np.array(out, dtype=np.int64), len(ids))

    @property
    def n(self):
        return self.labels.size

    def members(self, cluster):
        return np.flatnonzero(self.labels == cluster)

    def sizes(self):
        return np.bincount(self.labels, minlength=self.k)


def partitions_equal(a, b):
    """True when ``a`` and ``b`` group the samples identically, whatever the label names."""
    la, lb = np.asarray(a.labels), np.asarray(b.labels)
    if la.shape != lb.shape:
        raise ValidationError(f"partitions cover different sample counts ({la.size} vs {lb.size})")
    forward, backward = {}, {}
    for x, y in zip(la.tolist(), lb.tolist()):
        if forward.setdefault(x, y) != y or backward.setdefault(y, x) != x:
            return False
    return True


def spectral_threshold(embedding):
    """Two-way split at zero along the first diffusion coordinate.

    Positive side (zero included) gets label 1. If every sample lands on one
    side the result is a single cluster and a :class:`DegenerateSplitWarning`
    is issued.
    """
    coords = np.asarray(embedding.coords if hasattr(embedding, "coords") else embedding)
    if coords.ndim == 1:
        coords = coords[:, None]
    if coords.ndim != 2 or coords.shape[1] < 1:
        raise ValidationError("embedding needs at least one coordinate")
    side = (coords[:, 0] >= 0).astype(np.int64)
    if side.min() == side.max():
        warnings.warn("all samples fall on one side of the threshold", DegenerateSplitWarning,
                      stacklevel=2)
        return Partition(np.zeros(side.size, dtype=np.int64), 1)
    return Partition(side, 2)


# --- k-means ---------------------------------------------------------------

class LloydResult(NamedTuple):
    labels: np.ndarray
    centers: np.ndarray
    wcss: float
    history: list
    n_iter: int


def wcss(X, labels):
    """Within-cluster sum of squared distances to each cluster mean."""
    X = np.asarray(X, dtype=np.float64)
    total = 0.0
    for c in np.unique(labels):
        block = X[labels == c]
        total += float(np.sum((block - block.mean(axis=0)) ** 2))
    return total


def _sq_to_centers(X, centers):
    diff = X[:, None, :] - centers[None, :, :]
    return np.einsum("ikp,ikp->ik", diff, diff)


def _weighted_init(X, k, rng):
    """Distance-weighted seeding: a uniform first center, then each next center
    drawn with probability proportional to its squared distance to the nearest
    chosen one."""
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    nearest = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = nearest.sum()
        if total > 0:
            nxt = int(np.searchsorted(np.cumsum(nearest), rng.random() * total, side="right"))
            nxt = min(nxt, n - 1)
        else:
            nxt = int(rng.integers(n))
        chosen.append(nxt)
        nearest = np.minimum(nearest, np.sum((X - X[nxt]) ** 2, axis=1))
    return X[chosen].copy()


def lloyd(X, centers, max_iter=300):
    """Lloyd iterations from the given centers until the assignment stops changing.

    An emptied cluster is re-seeded at the sample farthest from its own
    centroid (lowest index on ties). ``history`` records the objective after
    every assignment step.
    """
    X = np.asarray(X, dtype=np.float64)
    centers = np.array(centers, dtype=np.float64)
    k = centers.shape[0]
    d2 = _sq_to_centers(X, centers)
    labels = np.argmin(d2, axis=1)
    history = [float(d2[np.arange(len(X)), labels].sum())]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        for c in range(k):
            members = labels == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
            else:
                own = d2[np.arange(len(X)), labels]
                far = int(np.argmax(own))
                centers[c] = X[far]
                labels[far] = c
                d2[far] = 0.0
        d2 = _sq_to_centers(X, centers)
        new = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(len(X)), new].sum()))
        if np.array_equal(new, labels):
            break
        labels = new
    return LloydResult(labels, centers, wcss(X, labels), history, n_iter)


def _restart(X, k, seed, max_iter):
    return lloyd(X, _weighted_init(X, k, np.random.default_rng(seed)), max_iter)


def kmeans_fit(X, k, seed=0, restarts=10, max_iter=300, n_jobs=None):
    """Best-of-``restarts`` Lloyd run; restart ``r`` draws its seeding from ``seed + r``."""
    X = check_data_matrix(X, min_samples=1)
    k = check_count(k, "k", low=1, high=X.shape[0])
    restarts = check_count(restarts, "restarts")
    seeds = [seed + r for r in range(restarts)]
    if n_jobs is not None and n_jobs > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            runs = list(pool.map(lambda s: _restart(X, k, s, max_iter), seeds))
    else:
        runs = [_restart(X, k, s, max_iter) for s in seeds]
    return min(runs, key=lambda r: r.wcss)


def kmeans(X, k, seed=0, restarts=10, max_iter=300, n_jobs=None):
    best = kmeans_fit(X, k, seed, restarts, max_iter, n_jobs)
    return Partition.from_labels(best.labels)


# --- agglomerative ---------------------------------------------------------

class Merge(NamedTuple):
    left: int
    right: int
    height: float
    node: int


@dataclass(frozen=True, eq=False)
class Dendrogram:
    merges: tuple
    n: int

    def to_linkage(self):
        """Merges as a ``(n-1) x 4`` array of ``[left, right, height, size]``."""
        sizes = {i: 1 for i in range(self.n)}
        rows = []
        for m in self.merges:
            sizes[m.node] = sizes[m.left] + sizes[m.right]
            rows.append([m.left, m.right, m.height, sizes[m.node]])
        return np.array(rows, dtype=np.float64).reshape(-1, 4)

    def leaf_order(self):
        """Left-to-right leaf order for drawing."""
        if self.n == 1:
            return [0]
        children = {m.node: (m.left, m.right) for m in self.merges}
        order, stack = [], [self.merges[-1].node]
        while stack:
            node = stack.pop()
            if node < self.n:
                order.append(node)
            else:
                left, right = children[node]
                stack.extend((right, left))
        return order


def agglomerative(dists, linkage="average"):
    """Agglomerative clustering on a distance matrix.

    Cluster distances are updated with the Lance-Williams formulas. Among
    pairs at the minimum distance, the pair with the lowest node ids merges
    first. New nodes are numbered ``n, n+1, ...`` in merge order.
    """
    if linkage not in LINKAGES:
        raise ValidationError(f"linkage must be one of {LINKAGES}, got {linkage!r}")
    dists = check_symmetric(dists, "dists")
    if np.any(np.diag(dists) != 0):
        raise ValidationError("distance matrix must have a zero diagonal")
    n = dists.shape[0]
    work = np.array(dists, dtype=np.float64)
    np.fill_diagonal(work, np.inf)
    node_of = np.arange(n)
    size = np.ones(n)
    alive = np.ones(n, dtype=bool)
    merges = []
    for step in range(n - 1):
        sub = np.where(alive[:, None] & alive[None, :], work, np.inf)
        best = sub.min()
        ii, jj = np.nonzero(np.triu(sub == best, 1))
        pairs = sorted(
            (min(node_of[i], node_of[j]), max(node_of[i], node_of[j]), i, j)
            for i, j in zip(ii.tolist(), jj.tolist())
        )
        left, right, i, j = pairs[0]
        merges.append(Merge(int(left), int(right), float(best), n + step))

        di, dj = work[i], work[j]
        if linkage == "single":
            merged = np.minimum(di, dj)
        elif linkage == "complete":
            merged = np.maximum(di, dj)
        else:
            merged = (size[i] * di + size[j] * dj) / (size[i] + size[j])
        work[i, :] = merged
        work[:, i] = merged
        work[i, i] = np.inf
        alive[j] = False
        size[i] += size[j]
        node_of[i] = n + step
    return Dendrogram(tuple(merges), n)


def cut_dendrogram(tree, k):
    """Partition obtained by undoing the ``k - 1`` last (highest) merges."""
    k = check_count(k, "k", low=1, high=tree.n)
    parent = list(range(2 * tree.n - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for m in tree.merges[:tree.n - k]:
        parent[find(m.left)] = m.node
        parent[find(m.right)] = m.node
    return Partition.from_labels([find(i) for i in range(tree.n)])


def hierarchy_distances(X, mode="raw", n_jobs=None):
    """Distances fed to agglomerative clustering.

    ``"raw"`` is Euclidean distance between rows, ``"correlation"`` is
    ``1 - |corr|`` between rows.
    """
    if mode == "raw":
        D = np.sqrt(pairwise_sq_dists(X, n_jobs=n_jobs))
    elif mode == "correlation":
        D = 1.0 - correlation_matrix(X)
        np.fill_diagonal(D, 0.0)
    else:
        raise ValidationError(f"mode must be one of {HIERARCHY_MODES}, got {mode!r}")
    D.setflags(write=False)
    return D


# --- estimators ------------------------------------------------------------

class DiffusionSpectralClustering(ClusterMixin, BaseEstimator):
    """Diffusion map followed by a zero threshold on the first coordinate.

    With ``n_clusters > 2`` k-means runs on the embedding coordinates instead.
    """

    def __init__(self, n_clusters=2, epsilon="auto", n_components="auto",
                 grid_decades=DEFAULT_DECADES, points_per_decade=DEFAULT_POINTS_PER_DECADE,
                 seed=0, n_jobs=None):
        self.n_clusters = n_clusters
        self.epsilon = epsilon
        self.n_components = n_components
        self.grid_decades = grid_decades
        self.points_per_decade = points_per_decade
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, X, y=None, dists=None):
        self.diffusion_ = DiffusionMap(
            epsilon=self.epsilon, n_components=self.n_components,
            grid_decades=self.grid_decades, points_per_decade=self.points_per_decade,
            n_jobs=self.n_jobs,
        ).fit(X, dists=dists)
        emb = self.diffusion_.embedding_
        if self.n_clusters == 2:
            self.partition_ = spectral_threshold(emb)
        else:
            self.partition_ = kmeans(emb.coords, self.n_clusters, seed=self.seed, n_jobs=self.n_jobs)
        self.labels_ = np.array(self.partition_.labels)
        self.n_features_in_ = self.diffusion_.n_features_in_
        return self


class KMeans(ClusterMixin, BaseEstimator):
    def __init__(self, n_clusters=2, seed=0, restarts=10, max_iter=300, n_jobs=None):
        self.n_clusters = n_clusters
        self.seed = seed
        self.restarts = restarts
        self.max_iter = max_iter
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_data_matrix(X, min_samples=1)
        best = kmeans_fit(X, self.n_clusters, self.seed, self.restarts, self.max_iter, self.n_jobs)
        self.partition_ = Partition.from_labels(best.labels)
        self.labels_ = np.array(self.partition_.labels)
        # reorder centers so that predict() agrees with the canonical labels
        _, first = np.unique(best.labels, return_index=True)
        order = best.labels[np.sort(first)]
        self.cluster_centers_ = best.centers[order]
        self.inertia_ = best.wcss
        self.n_iter_ = best.n_iter
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_data_matrix(X, min_samples=1)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return np.argmin(_sq_to_centers(X, self.cluster_centers_), axis=1)


class AgglomerativeClustering(ClusterMixin, BaseEstimator):
    def __init__(self, n_clusters=2, linkage="average", mode="raw", n_jobs=None):
        self.n_clusters = n_clusters
        self.linkage = linkage
        self.mode = mode
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_data_matrix(X)
        self.distances_ = hierarchy_distances(X, self.mode, self.n_jobs)
        self.dendrogram_ = agglomerative(self.distances_, self.linkage)
        self.partition_ = cut_dendrogram(self.dendrogram_, self.n_clusters)
        self.labels_ = np.array(self.partition_.labels)
        self.n_features_in_ = X.shape[1]
        return self
