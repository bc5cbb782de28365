"""Signed-log normalization, absolute correlation between samples, salient-feature masks."""
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DegenerateInputError, ValidationError, ZeroVarianceWarning
from .validation import check_data_matrix


def signed_log_normalize(X):
    """Elementwise ``sign(x) * log(1 + |x|)``.

    Odd, strictly monotone and defined on every real, so negative component
    weights are compressed symmetrically with positive ones.
    """
    X = check_data_matrix(X, min_samples=1)
    Y = np.sign(X) * np.log1p(np.abs(X))
    Y.setflags(write=False)
    return Y


def signed_log_inverse(Y):
    Y = np.asarray(Y, dtype=np.float64)
    return np.sign(Y) * np.expm1(np.abs(Y))


def correlation_matrix(X):
    """Absolute Pearson correlation between every pair of rows.

    Moments use the population (1/p) convention. The diagonal is exactly 1
    and the result is exactly symmetric.
    """
    X = check_data_matrix(X, min_samples=1)
    centered = X - X.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", centered, centered))
    flat = np.flatnonzero(norms == 0.0)
    if flat.size:
        raise DegenerateInputError(
            f"row {int(flat[0])} has zero variance; correlation is undefined"
        )
    unit = centered / norms[:, None]
    C = np.abs(unit @ unit.T)
    C = np.minimum(np.triu(C, 1), 1.0)
    C = C + C.T
    np.fill_diagonal(C, 1.0)
    C.setflags(write=False)
    return C


@dataclass(frozen=True)
class SalientMask:
    mask: np.ndarray
    threshold: float
    degenerate: bool = False

    @property
    def count(self):
        return int(self.mask.sum())


def salient_mask(x, k_sigma=3.0):
    """Flag features lying strictly more than ``k_sigma`` population std from the mean.

    A constant vector yields an empty mask with ``degenerate=True`` and a
    :class:`ZeroVarianceWarning`.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValidationError("salient_mask needs a 1-D vector of length >= 2")
    if not np.all(np.isfinite(x)):
        raise ValidationError("salient_mask input contains NaN or infinite values")
    if not np.isfinite(k_sigma) or k_sigma < 0:
        raise ValidationError(f"k_sigma must be a nonnegative real, got {k_sigma}")
    dev = np.abs(x - x.mean())
    sd = x.std()
    if sd == 0.0:
        warnings.warn("zero standard deviation; mask is empty", ZeroVarianceWarning, stacklevel=2)
        mask = np.zeros(x.size, dtype=bool)
        degenerate = True
    else:
        mask = dev > k_sigma * sd
        degenerate = False
    mask.setflags(write=False)
    return SalientMask(mask, float(k_sigma), degenerate)


class SignedLogTransformer(TransformerMixin, BaseEstimator):
    """Stateless transformer wrapping :func:`signed_log_normalize`."""

    def fit(self, X, y=None):
        X = check_data_matrix(X, min_samples=1)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        return signed_log_normalize(X)

    def inverse_transform(self, X):
        return signed_log_inverse(X)
