"""Input validation helpers shared by the functional API and the estimators.

Arrays returned here are float64, C-contiguous and read-only, which is how
the package represents its immutable matrix types.
"""
import numpy as np

from .exceptions import ValidationError


def _frozen(a):
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    a.setflags(write=False)
    return a


def check_data_matrix(X, min_samples=2, name="X"):
    """Validate an ``n x p`` sample matrix and return a read-only float64 copy.

    Rows are samples, columns are features. Requires ``n >= min_samples``,
    ``p >= 1`` and finite entries.
    """
    frozen = (isinstance(X, np.ndarray) and X.dtype == np.float64 and not X.flags.writeable
              and X.flags.c_contiguous)
    if frozen:
        arr = X
    else:
        try:
            arr = np.asarray(X, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{name} is not numeric: {exc}") from None
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {arr.shape}")
    n, p = arr.shape
    if n < min_samples:
        raise ValidationError(f"{name} needs at least {min_samples} rows, got {n}")
    if p < 1:
        raise ValidationError(f"{name} needs at least one column")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or infinite values")
    return arr if frozen else _frozen(arr)


def check_symmetric(A, name="A"):
    """Validate a square symmetric finite matrix and return a read-only copy.

    Symmetry must be exact; callers that build a matrix from a formula are
    expected to mirror one triangle.
    """
    try:
        arr = np.asarray(A, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is not numeric: {exc}") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValidationError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains NaN or infinite values")
    if not np.array_equal(arr, arr.T):
        raise ValidationError(f"{name} is not exactly symmetric")
    if arr is A and not arr.flags.writeable:
        return arr
    return _frozen(arr)


def check_positive(value, name):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a real number, got {value!r}") from None
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be positive and finite, got {value}")
    return value


def check_count(value, name, low=1, high=None):
    if isinstance(value, (bool, np.bool_)) or not isinstance(value, (int, np.integer)):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < low or (high is not None and value > high):
        bounds = f"[{low}, {high}]" if high is not None else f">= {low}"
        raise ValidationError(f"{name} must be in {bounds}, got {value}")
    return value
