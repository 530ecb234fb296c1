"""Dense linear-algebra substrate.

Least squares, orthogonal-complement projection and extreme eigenvalues of
small symmetric matrices.  All index sets handled here are 1-based, matching
the serialized formats used by the CLI.
"""

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateIndex,
    IndexOutOfRange,
    NotSquare,
    NotSymmetric,
    RankDeficient,
)

#: Relative magnitude below which an R-factor diagonal entry marks rank deficiency.
RANK_TOLERANCE = 1e-12

#: Absolute asymmetry tolerated before a matrix is rejected as non-symmetric.
SYMMETRY_TOLERANCE = 1e-12


def as_matrix(a):
    """Validate and return a 2-D float array with finite entries."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got array of ndim {a.ndim}")
    if a.size and not np.all(np.isfinite(a)):
        raise DimensionMismatch("matrix contains non-finite entries")
    return a


def as_vector(u):
    """Validate and return a 1-D float array with finite entries."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got array of ndim {u.ndim}")
    if u.size and not np.all(np.isfinite(u)):
        raise DimensionMismatch("vector contains non-finite entries")
    return u


def columns_submatrix(A, subset):
    """Columns of ``A`` indexed by the 1-based index set ``subset``, ascending.

    Raises IndexOutOfRange or DuplicateIndex on a malformed subset.
    """
    A = as_matrix(A)
    indices = list(subset)
    n = A.shape[1]
    for i in indices:
        if not (isinstance(i, (int, np.integer)) and 1 <= i <= n):
            raise IndexOutOfRange(f"column index {i} outside [1, {n}]")
    if len(set(indices)) != len(indices):
        raise DuplicateIndex(f"duplicate column indices in {indices}")
    return A[:, [i - 1 for i in sorted(indices)]]


def least_squares(A_S, y):
    """Solve min_x ||y - A_S x||_2 for a full-column-rank ``A_S``.

    Uses a Householder QR factorization rather than the normal equations,
    which stays accurate when the column set is poorly conditioned.
    Raises RankDeficient when the smallest R diagonal is below
    RANK_TOLERANCE times the largest.
    """
    A_S = as_matrix(A_S)
    y = as_vector(y)
    if A_S.shape[0] != y.shape[0]:
        raise DimensionMismatch(
            f"matrix has {A_S.shape[0]} rows but vector has length {y.shape[0]}"
        )
    if A_S.shape[1] == 0:
        return np.zeros(0)
    if A_S.shape[0] < A_S.shape[1]:
        raise RankDeficient(
            f"{A_S.shape[0]}x{A_S.shape[1]} system has more columns than rows"
        )
    Q, R = np.linalg.qr(A_S)
    diag = np.abs(np.diag(R))
    if diag.min() <= RANK_TOLERANCE * diag.max():
        raise RankDeficient(
            f"column set numerically rank deficient (diagonal ratio "
            f"{diag.min():.3e} / {diag.max():.3e})"
        )
    return np.linalg.solve(R, Q.T @ y)


def project_complement(A_S, u):
    """Project ``u`` onto the orthogonal complement of the span of ``A_S``.

    An empty column set leaves ``u`` unchanged.
    """
    A_S = as_matrix(A_S)
    u = as_vector(u)
    if A_S.shape[1] == 0:
        return u.copy()
    return u - A_S @ least_squares(A_S, u)


def sym_eigen_extremes(M):
    """Smallest and largest eigenvalue of a symmetric matrix.

    ``M`` must be square and symmetric within SYMMETRY_TOLERANCE; it is
    symmetrized before the solve to stabilize the eigensolver.
    """
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise NotSquare(f"matrix is {M.shape[0]}x{M.shape[1]}")
    if M.size and np.max(np.abs(M - M.T)) > SYMMETRY_TOLERANCE:
        raise NotSymmetric(
            f"asymmetry {np.max(np.abs(M - M.T)):.3e} exceeds {SYMMETRY_TOLERANCE}"
        )
    eigenvalues = np.linalg.eigvalsh((M + M.T) / 2.0)
    return float(eigenvalues[0]), float(eigenvalues[-1])


def norms(u):
    """(l1, l2, linf) norms of a vector."""
    u = as_vector(u)
    if u.size == 0:
        return 0.0, 0.0, 0.0
    return (
        float(np.sum(np.abs(u))),
        float(np.linalg.norm(u)),
        float(np.max(np.abs(u))),
    )
