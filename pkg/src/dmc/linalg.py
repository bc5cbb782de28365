"""Dense symmetric eigendecomposition and pairwise squared distances.

``sym_eig`` is a cyclic Jacobi solver. Each sweep visits every off-diagonal
pair once, grouped into round-robin rounds of disjoint pairs so a whole round
is applied as one vectorized rotation. Output is deterministic: eigenvalues
descending, and each eigenvector is signed so that its largest-magnitude
entry is positive.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

from .exceptions import NumericalFailureError
from .validation import check_data_matrix, check_symmetric

MAX_SWEEPS = 100
OFF_TOL = 1e-12
DIST_BLOCK = 4096
# Entries whose magnitude is within this relative distance of the maximum count
# as tied when fixing eigenvector signs.
_SIGN_TIE_RTOL = 1e-10


class EigenSystem(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _round_robin(n):
    """Partition all pairs of ``range(n)`` into ``n - 1`` (or ``n``) rounds of disjoint pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        if ps:
            rounds.append((np.array(ps), np.array(qs)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(A):
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def fix_signs(U):
    """Flip columns of ``U`` in place so the largest-magnitude entry of each is positive.

    Ties (within a relative 1e-10) go to the lowest row index.
    """
    mags = np.abs(U)
    peak = mags.max(axis=0)
    tied = mags >= peak * (1.0 - _SIGN_TIE_RTOL)
    lead = np.argmax(tied, axis=0)
    signs = np.where(U[lead, np.arange(U.shape[1])] < 0, -1.0, 1.0)
    U *= signs
    return U


def sym_eig(A, max_sweeps=MAX_SWEEPS, tol=OFF_TOL):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm drops to
    ``tol * ||A||_F``. Raises :class:`NumericalFailureError` carrying the
    achieved off-diagonal norm if ``max_sweeps`` sweeps are not enough.
    """
    A = np.array(check_symmetric(A), dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    scale = float(np.linalg.norm(A))
    target = tol * scale
    if n > 1 and scale > 0.0:
        rounds = _round_robin(n)
        off = _off_norm(A)
        sweeps = 0
        while off > target:
            if sweeps == max_sweeps:
                raise NumericalFailureError(
                    f"Jacobi did not converge in {max_sweeps} sweeps "
                    f"(off-diagonal norm {off:.3e}, target {target:.3e})",
                    off_norm=off,
                )
            for p, q in rounds:
                apq = A[p, q]
                active = apq != 0.0
                if not active.any():
                    continue
                app, aqq = A[p, p], A[q, q]
                safe = np.where(active, apq, 1.0)
                # a huge theta means a negligible rotation; t -> 0 is the correct limit
                with np.errstate(over="ignore"):
                    theta = (aqq - app) / (2.0 * safe)
                    t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
                t[theta == 0.0] = 1.0
                t[~active] = 0.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c[:, None] * Ap - s[:, None] * Aq
                A[q, :] = s[:, None] * Ap + c[:, None] * Aq
                A[p, q] = 0.0
                A[q, p] = 0.0

                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
            A = 0.5 * (A + A.T)
            off = _off_norm(A)
            sweeps += 1

    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    V = fix_signs(np.ascontiguousarray(V[:, order]))
    w.setflags(write=False)
    V.setflags(write=False)
    return EigenSystem(w, V)


def _row_sq_dists(X, i, block):
    rest = X[i + 1:]
    acc = np.zeros(rest.shape[0])
    for start in range(0, X.shape[1], block):
        diff = rest[:, start:start + block] - X[i, start:start + block]
        acc += np.sum(diff * diff, axis=1)
    return acc


def pairwise_sq_dists(X, n_jobs=None, block=DIST_BLOCK):
    """Squared Euclidean distances between the rows of ``X``.

    Each entry is accumulated block by block over features in ascending
    order, so the result is bit-identical for any ``n_jobs``. The diagonal is
    exactly zero and the matrix is exactly symmetric.
    """
    X = check_data_matrix(X, min_samples=1)
    n = X.shape[0]
    D = np.zeros((n, n))
    rows = range(n - 1)
    if n_jobs is not None and n_jobs > 1 and n > 2:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(lambda i: _row_sq_dists(X, i, block), rows))
    else:
        results = [_row_sq_dists(X, i, block) for i in rows]
    for i, acc in enumerate(results):
        D[i, i + 1:] = acc
        D[i + 1:, i] = acc
    D.setflags(write=False)
    return D
