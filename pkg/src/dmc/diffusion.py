"""Diffusion maps: Gaussian affinity, bandwidth scan, Markov normalization, embedding.

The embedding follows the usual construction. The affinity ``W`` is
row-normalized into the Markov matrix ``P = D^-1 W``. Its spectrum comes
from the symmetric conjugate ``D^-1/2 W D^-1/2``. Eigenvectors are mapped
back with ``V = D^-1/2 U`` and scaled by their eigenvalues. The diffusion
time is fixed at one step.
"""
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DegenerateInputError, NoLinearRegionError, ValidationError
from .linalg import pairwise_sq_dists, sym_eig
from .validation import check_count, check_data_matrix, check_positive, check_symmetric

DEFAULT_DECADES = (-3.5, 3.5)
DEFAULT_POINTS_PER_DECADE = 10
LINEAR_REGION_FRACTION = 0.9
MIN_PEAK_SLOPE = 0.01
EIGEN_GAP_RATIO = 0.05


@dataclass(frozen=True, eq=False)
class AffinityGraph:
    W: np.ndarray
    epsilon: float
    row_sums: np.ndarray

    @property
    def n(self):
        return self.W.shape[0]

    @property
    def markov(self):
        """Row-stochastic transition matrix ``D^-1 W``."""
        return self.W / self.row_sums[:, None]

    @property
    def conjugate(self):
        """Symmetric conjugate ``D^-1/2 W D^-1/2``, mirrored from its upper triangle."""
        s = 1.0 / np.sqrt(self.row_sums)
        upper = np.triu(s[:, None] * self.W * s[None, :])
        return upper + np.triu(upper, 1).T

    @property
    def stationary(self):
        return self.row_sums / self.row_sums.sum()


def gaussian_affinity(dists, epsilon):
    """Gaussian kernel ``exp(-dist2 / epsilon)`` on a matrix of squared distances."""
    epsilon = check_positive(epsilon, "epsilon")
    dists = check_symmetric(dists, "dists")
    if np.any(dists < 0):
        raise ValidationError("squared distances must be nonnegative")
    W = np.exp(-dists / epsilon)
    np.fill_diagonal(W, 1.0)
    row_sums = W.sum(axis=1)
    W.setflags(write=False)
    row_sums.setflags(write=False)
    return AffinityGraph(W, epsilon, row_sums)


@dataclass(eq=False)
class EpsilonScan:
    grid: np.ndarray
    weight_sums: np.ndarray
    slope_curve: np.ndarray
    selected: float | None = field(default=None)

    @property
    def log_grid(self):
        return np.log(self.grid)


def _weight_sum(dists, epsilon):
    return float(np.exp(-dists / epsilon).sum())


def epsilon_scan(dists, grid_decades=DEFAULT_DECADES, points_per_decade=DEFAULT_POINTS_PER_DECADE):
    """Evaluate the total affinity weight over a geometric grid of bandwidths.

    The grid spans ``10**a .. 10**b`` times the median nonzero squared
    distance, ``points_per_decade`` points per decade. ``slope_curve`` holds
    the central-difference slope of ``log L`` against ``log epsilon`` at the
    interior grid points.
    """
    dists = check_symmetric(dists, "dists")
    lo, hi = (float(v) for v in grid_decades)
    if not hi > lo:
        raise ValidationError(f"grid_decades must be increasing, got {grid_decades}")
    points_per_decade = check_count(points_per_decade, "points_per_decade")
    upper = dists[np.triu_indices(dists.shape[0], 1)]
    nonzero = upper[upper > 0]
    if nonzero.size == 0:
        raise DegenerateInputError("all pairwise distances are zero; there is no scale to scan")
    center = float(np.median(nonzero))
    steps = int(round((hi - lo) * points_per_decade))
    exponents = lo + np.arange(steps + 1) / points_per_decade
    grid = center * 10.0 ** exponents
    sums = np.array([_weight_sum(dists, eps) for eps in grid])
    logL, logE = np.log(sums), np.log(grid)
    slope = (logL[2:] - logL[:-2]) / (logE[2:] - logE[:-2])
    return EpsilonScan(grid, sums, slope)


def select_epsilon(scan):
    """Pick the bandwidth in the middle of the steepest linear stretch of the scan.

    The linear region is the contiguous run of interior grid points, around
    the peak slope, whose slope is at least 90% of the peak. The grid point at
    the run's midpoint (lower one for even-length runs) is returned and also
    stored on ``scan.selected``.
    """
    if scan.grid.size < 5:
        raise ValidationError("epsilon scan needs at least 5 grid points")
    slope = scan.slope_curve
    peak_at = int(np.argmax(slope))
    peak = float(slope[peak_at])
    if not peak >= MIN_PEAK_SLOPE:
        raise NoLinearRegionError(
            f"weight-sum curve is flat (peak log-log slope {peak:.3g}); pass epsilon explicitly"
        )
    ok = slope >= LINEAR_REGION_FRACTION * peak
    start = peak_at
    while start > 0 and ok[start - 1]:
        start -= 1
    stop = peak_at
    while stop + 1 < ok.size and ok[stop + 1]:
        stop += 1
    chosen = float(scan.grid[(start + stop) // 2 + 1])
    scan.selected = chosen
    return chosen


@dataclass(frozen=True, eq=False)
class DiffusionEmbedding:
    coords: np.ndarray
    eigenvalues: np.ndarray
    vectors: np.ndarray
    full_spectrum: np.ndarray
    stationary: np.ndarray

    @property
    def d(self):
        return self.coords.shape[1]


def choose_dim(full_spectrum):
    """Smallest ``d`` with ``|lambda_{d+2}| / |lambda_2| < 0.05``, capped at ``n - 1``."""
    lam = np.asarray(full_spectrum, dtype=np.float64)
    n = lam.size
    if n < 2:
        raise ValidationError("spectrum needs at least two eigenvalues")
    second = abs(lam[1])
    if second < 1e-12:
        return 1
    for d in range(1, n - 1):
        if abs(lam[d + 1]) / second < EIGEN_GAP_RATIO:
            return d
    return n - 1


def diffusion_embed(graph, d="auto"):
    """Diffusion-map coordinates ``lambda_k v_k(x_i)`` for ``k = 2 .. d+1``.

    Right eigenvectors of the Markov matrix are scaled to unit norm under the
    stationary measure, which makes Euclidean distance in the full embedding
    equal to the one-step diffusion distance.
    """
    n = graph.n
    if n < 2:
        raise ValidationError("diffusion_embed needs at least two samples")
    if d != "auto":
        d = check_count(d, "d", low=1, high=n - 1)
    lam, U = sym_eig(graph.conjugate)
    phi = graph.stationary
    V = U / np.sqrt(graph.row_sums)[:, None]
    V = V / np.sqrt(np.einsum("i,ik->k", phi, V * V))
    if d == "auto":
        d = choose_dim(lam)
    kept = V[:, 1:d + 1].copy()
    coords = kept * lam[1:d + 1]
    for arr in (coords, kept):
        arr.setflags(write=False)
    return DiffusionEmbedding(coords, lam[1:d + 1].copy(), kept, lam, phi)


def diffusion_distance(graph, i, j):
    """One-step diffusion distance computed directly from transition rows of ``P``."""
    n = graph.n
    for name, idx in (("i", i), ("j", j)):
        if not 0 <= idx < n:
            raise ValidationError(f"index {name}={idx} out of range for n={n}")
    P = graph.markov
    diff = P[i] - P[j]
    return float(np.sqrt(np.sum(diff * diff / graph.stationary)))


class DiffusionMap(TransformerMixin, BaseEstimator):
    """Diffusion-map embedding of the rows of ``X``.

    Parameters
    ----------
    epsilon : float or "auto"
        Gaussian bandwidth in squared-distance units. ``"auto"`` scans the
        weight-sum curve and takes the middle of its linear region.
    n_components : int or "auto"
        Embedding dimension; ``"auto"`` uses the eigenvalue decay.
    grid_decades, points_per_decade
        Bandwidth grid used when ``epsilon="auto"``.
    n_jobs : int or None
        Threads for the distance computation. Results do not depend on it.

    Attributes
    ----------
    embedding_ : DiffusionEmbedding
    affinity_ : AffinityGraph
    scan_ : EpsilonScan or None
    epsilon_ : float
    n_components_ : int
    """

    def __init__(self, epsilon="auto", n_components="auto", grid_decades=DEFAULT_DECADES,
                 points_per_decade=DEFAULT_POINTS_PER_DECADE, n_jobs=None):
        self.epsilon = epsilon
        self.n_components = n_components
        self.grid_decades = grid_decades
        self.points_per_decade = points_per_decade
        self.n_jobs = n_jobs

    def fit(self, X, y=None, dists=None):
        X = check_data_matrix(X)
        self.n_features_in_ = X.shape[1]
        if dists is None:
            dists = pairwise_sq_dists(X, n_jobs=self.n_jobs)
        if isinstance(self.epsilon, str):
            if self.epsilon != "auto":
                raise ValidationError(f"epsilon must be 'auto' or a positive real, got {self.epsilon!r}")
            self.scan_ = epsilon_scan(dists, self.grid_decades, self.points_per_decade)
            eps = select_epsilon(self.scan_)
        else:
            self.scan_ = None
            eps = check_positive(self.epsilon, "epsilon")
        self.affinity_ = gaussian_affinity(dists, eps)
        self.epsilon_ = eps
        self.embedding_ = diffusion_embed(self.affinity_, self.n_components)
        self.n_components_ = self.embedding_.d
        return self

    def fit_transform(self, X, y=None, dists=None):
        return np.array(self.fit(X, dists=dists).embedding_.coords)

    @property
    def eigenvalues_(self):
        check_is_fitted(self, "embedding_")
        return self.embedding_.full_spectrum
