"""Dense linear-algebra kernels: rank-safe least squares, orthonormal bases,
and top eigenpairs of symmetric matrices.

All routines operate on 2-D float64 arrays, are pure functions of their
inputs, and produce deterministic output (eigenvector signs are fixed by a
convention, rank decisions by an explicit tolerance).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InputError

#: Relative tolerance for rank decisions in pivoted orthogonal factorizations.
DEFAULT_RANK_TOL = 1e-10


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Validate and coerce to a 2-D float64 array with finite entries."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise InputError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.size and not np.all(np.isfinite(a)):
        raise InputError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class LeastSquaresFit:
    """Result of a rank-safe linear least-squares solve.

    ``fitted + residuals`` reproduces the response; residuals are orthogonal
    to every design column retained by the rank decision. Columns judged
    numerically dependent receive coefficient 0 and do not count toward
    ``effective_rank``.
    """

    coefficients: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    effective_rank: int


@dataclass(frozen=True)
class EigPair:
    """One eigenvalue with its unit-norm eigenvector."""

    value: float
    vector: np.ndarray


def least_squares(x, y, rank_tol: float = DEFAULT_RANK_TOL) -> LeastSquaresFit:
    """Minimize ||y - X b||^2 via column-pivoted QR with rank truncation.

    Pivoted-factorization diagonals below ``rank_tol`` times the largest
    diagonal mark dependent columns; those coefficients are set to 0 (the
    basic, not minimum-norm, solution).
    """
    x = as_matrix(x, "design")
    y = np.asarray(y, dtype=float).ravel()
    if rank_tol <= 0:
        raise InputError("rank_tol must be positive")
    if x.shape[0] == 0:
        raise InputError("design has zero rows")
    if x.shape[0] != y.shape[0]:
        raise InputError(
            f"design has {x.shape[0]} rows but response has {y.shape[0]}"
        )

    n, p = x.shape
    if p == 0:
        return LeastSquaresFit(np.zeros(0), np.zeros(n), y.copy(), 0)

    q, r, piv = scipy.linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(diag >= rank_tol * diag[0]))

    coef = np.zeros(p)
    if rank > 0:
        z = q[:, :rank].T @ y
        w = scipy.linalg.solve_triangular(r[:rank, :rank], z, lower=False)
        coef[piv[:rank]] = w
        fitted = q[:, :rank] @ z
    else:
        fitted = np.zeros(n)
    residuals = y - fitted
    return LeastSquaresFit(coef, fitted, residuals, rank)


def orthonormal_basis(x, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal columns spanning the column space of ``x``.

    The returned matrix has as many columns as the numerical rank of ``x``
    under ``rank_tol``; an all-zero input yields a basis with 0 columns.
    """
    x = as_matrix(x, "matrix")
    if x.shape[0] < 1:
        raise InputError("matrix must have at least one row")
    n, p = x.shape
    if p == 0:
        return np.zeros((n, 0))
    q, r, _ = scipy.linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros((n, 0))
    rank = int(np.count_nonzero(diag >= rank_tol * diag[0]))
    return q[:, :rank].copy()


def fix_eigvec_sign(v: np.ndarray) -> np.ndarray:
    """Flip sign so the largest-magnitude entry is positive.

    Ties resolve to the lowest index (argmax returns the first maximum),
    making downstream loadings and factors deterministic.
    """
    i = int(np.argmax(np.abs(v)))
    return -v if v[i] < 0 else v


def sym_eig_top(s, r: int, sym_tol: float = 1e-10) -> list[EigPair]:
    """The ``r`` largest eigenpairs of a symmetric matrix, descending.

    The input must be symmetric to within ``sym_tol`` relative to its largest
    entry; it is symmetrized exactly before decomposition so results do not
    depend on which triangle carried the rounding noise.
    """
    s = as_matrix(s, "matrix")
    if s.shape[0] != s.shape[1]:
        raise InputError(f"matrix is {s.shape[0]}x{s.shape[1]}, not square")
    scale = float(np.max(np.abs(s))) if s.size else 0.0
    if scale > 0 and float(np.max(np.abs(s - s.T))) > sym_tol * scale:
        raise InputError("matrix is not symmetric within tolerance")
    if not 1 <= r <= s.shape[1]:
        raise InputError(f"r={r} out of range for a {s.shape[0]}-column matrix")

    sym = (s + s.T) / 2.0
    values, vectors = np.linalg.eigh(sym)
    pairs = []
    for i in range(s.shape[0] - 1, s.shape[0] - 1 - r, -1):
        pairs.append(EigPair(float(values[i]), fix_eigvec_sign(vectors[:, i].copy())))
    return pairs


def extend_orthonormal_basis(
    basis: np.ndarray, new_cols: np.ndarray, tol: float = DEFAULT_RANK_TOL
) -> np.ndarray:
    """Orthonormal vectors extending ``basis`` with the span of ``new_cols``.

    ``new_cols`` is expected to have (near) unit columns; after projecting out
    ``basis`` twice (one reorthogonalization pass), remaining columns with
    pivoted-QR diagonal below ``tol`` (absolute, valid for unit inputs) are
    treated as already contained in the span. Returns only the added vectors,
    possibly zero columns.
    """
    w = np.array(new_cols, dtype=float, copy=True)
    if w.ndim == 1:
        w = w.reshape(-1, 1)
    if basis.shape[1] > 0:
        w -= basis @ (basis.T @ w)
        w -= basis @ (basis.T @ w)
    if w.shape[1] == 0:
        return w
    q, r, _ = scipy.linalg.qr(w, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diag >= tol))
    return q[:, :rank].copy()
