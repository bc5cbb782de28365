"""Seeded synthetic data with a dense and a sparse cluster.

Random numbers come from a fully specified counter-based stream, so the
same seed gives the same matrix on any platform:

* uniform word ``i`` (``i = 0, 1, ...``) is SplitMix64's output function
  applied to ``seed + (i + 1) * 0x9E3779B97F4A7C15 (mod 2**64)``, with
  mixing constants ``0xBF58476D1CE4E5B9`` and ``0x94D049BB133111EB`` and
  shifts 30, 27, 31;
* a word maps to ``u = ((w >> 11) + 0.5) / 2**53``, strictly inside (0, 1);
* normals ``2j`` and ``2j + 1`` are the Box-Muller pair
  ``r cos(2 pi u_{2j+1})``, ``r sin(2 pi u_{2j+1})`` with
  ``r = sqrt(-2 log u_{2j})``.
"""
from dataclasses import dataclass

import numpy as np

from .clustering import Partition
from .exceptions import ValidationError

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def splitmix64(seed, counters):
    """SplitMix64 output for each counter value (vectorized, wrapping uint64 arithmetic)."""
    z = np.uint64(seed & _MASK64) + (np.asarray(counters, dtype=np.uint64) + np.uint64(1)) * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class NormalStream:
    """Deterministic stream of standard normal values; see the module docstring."""

    def __init__(self, seed):
        self.seed = int(seed)
        self.position = 0

    def _pairs(self, first_pair, count):
        idx = np.arange(first_pair, first_pair + count, dtype=np.uint64) * np.uint64(2)
        words = splitmix64(self.seed, np.stack([idx, idx + np.uint64(1)], axis=1))
        u = ((words >> np.uint64(11)).astype(np.float64) + 0.5) / 2.0**53
        r = np.sqrt(-2.0 * np.log(u[:, 0]))
        angle = 2.0 * np.pi * u[:, 1]
        return np.stack([r * np.cos(angle), r * np.sin(angle)], axis=1).ravel()

    def draw(self, size):
        size = int(size)
        start = self.position
        first_pair = start // 2
        n_pairs = (start + size + 1) // 2 - first_pair
        values = self._pairs(first_pair, n_pairs)
        offset = start - 2 * first_pair
        self.position += size
        return values[offset:offset + size]

    def __iter__(self):
        return self

    def __next__(self):
        return float(self.draw(1)[0])


def rng_stream(seed):
    return NormalStream(seed)


@dataclass(frozen=True)
class SynthSpec:
    n_dense: int = 12
    n_sparse: int = 11
    p: int = 5000
    dense_spread: float = 1.0
    sparse_spread: float = 1.5
    separation: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.n_dense < 1 or self.n_sparse < 1 or self.n_dense + self.n_sparse < 4:
            raise ValidationError("need at least one sample per cluster and four in total")
        if self.p < 2:
            raise ValidationError("p must be at least 2")
        if not (self.dense_spread > 0 and self.sparse_spread > 0):
            raise ValidationError("spreads must be positive")
        if self.dense_spread > self.sparse_spread:
            raise ValidationError("dense_spread must not exceed sparse_spread")
        if self.separation < 0:
            raise ValidationError("separation must be nonnegative")

    @property
    def n(self):
        return self.n_dense + self.n_sparse


PRESETS = {
    # 23 samples with p kept small enough for fast runs. Within- and
    # cross-cluster distances share one scale, so the weight-sum curve has a
    # single linear region and the selected bandwidth keeps the graph connected.
    "paper": dict(n_dense=12, n_sparse=11, p=5000, dense_spread=1.0, sparse_spread=1.5,
                  separation=2.0),
}


def preset(name, seed=0):
    try:
        return SynthSpec(**PRESETS[name], seed=seed)
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def _unit_patterns(stream, p):
    g = stream.draw(2 * p).reshape(2, p)
    g -= g.mean(axis=1, keepdims=True)
    g[0] /= np.linalg.norm(g[0])
    g[1] -= (g[1] @ g[0]) * g[0]
    g[1] /= np.linalg.norm(g[1])
    return g


def make_dense_sparse(spec):
    """Generate ``(X, truth)`` for a :class:`SynthSpec`.

    Each cluster center is a zero-mean feature pattern. The two patterns are
    orthogonal and the centers lie ``separation`` apart. A sample is its
    cluster's center plus isotropic Gaussian noise whose expected norm is the
    cluster spread (per-feature std ``spread / sqrt(p)``). Rows are shuffled.
    Truth labels are 0 for dense and 1 for sparse.
    """
    stream = rng_stream(spec.seed)
    patterns = _unit_patterns(stream, spec.p)
    centers = patterns * (spec.separation / np.sqrt(2.0))
    noise = stream.draw(spec.n * spec.p).reshape(spec.n, spec.p)
    truth = np.repeat([0, 1], [spec.n_dense, spec.n_sparse])
    spreads = np.where(truth == 0, spec.dense_spread, spec.sparse_spread) / np.sqrt(spec.p)
    X = centers[truth] + noise * spreads[:, None]
    order = np.argsort(stream.draw(spec.n), kind="stable")
    X = np.ascontiguousarray(X[order])
    X.setflags(write=False)
    return X, Partition(truth[order], 2)
