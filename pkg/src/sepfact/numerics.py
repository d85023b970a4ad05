"""Dense complex linear algebra shared by the rest of the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Tensor products
use the row-major convention: basis vector ``|i> (x) |k>`` of ``C^m (x) C^n``
sits at index ``i * n + k``, which is what :func:`numpy.kron` produces.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import ContractError, DegeneratePencil, DimensionError

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_matrix",
    "kron",
    "reshape_vec",
    "flatten",
    "rank_svd",
    "eig_hermitian",
    "pencil_eig",
    "range_basis",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds.

    ``eps_rank`` is relative to the largest singular value, ``eps_herm``
    bounds Hermiticity/positivity deviations and ``eps_match`` is the slack
    allowed when comparing reconstructions.
    """

    eps_rank: float = 1e-9
    eps_herm: float = 1e-9
    eps_match: float = 1e-7

    def __post_init__(self):
        for name in ("eps_rank", "eps_herm", "eps_match"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ContractError(f"Tolerance.{name} must lie in (0, 1), got {value!r}")

    @classmethod
    def from_env(cls, **overrides) -> "Tolerance":
        """Defaults, with ``SEPFACT_EPS_RANK`` and explicit overrides applied.

        An explicit ``eps_rank`` takes precedence; the variable is then not read.
        """
        tol = cls()
        env = os.environ.get("SEPFACT_EPS_RANK")
        if env and overrides.get("eps_rank") is None:
            try:
                tol = replace(tol, eps_rank=float(env))
            except ValueError:
                raise ContractError(f"SEPFACT_EPS_RANK={env!r} is not a usable tolerance") from None
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return replace(tol, **overrides) if overrides else tol


DEFAULT_TOL = Tolerance()


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} has non-finite entries")
    return arr


def kron(a, b) -> np.ndarray:
    """Kronecker product, entry ``(i*rb + k, j*cb + l) = a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def reshape_vec(v, m: int, n: int) -> np.ndarray:
    """View a vector of ``C^m (x) C^n`` as the ``m x n`` matrix ``M[i, j] = v[i*n + j]``.

    A product vector ``e (x) f`` maps to the rank-one matrix ``outer(e, f)``.
    """
    v = np.asarray(v, dtype=np.complex128).ravel()
    if v.size != m * n:
        raise DimensionError(f"vector of length {v.size} cannot be reshaped to {m}x{n}")
    return v.reshape(m, n).copy()


def flatten(a) -> np.ndarray:
    """Inverse of :func:`reshape_vec`."""
    return np.asarray(a, dtype=np.complex128).reshape(-1).copy()


def rank_svd(a, tol: Tolerance = DEFAULT_TOL) -> int:
    """Numerical rank: singular values above ``eps_rank * s_max``."""
    a = np.asarray(a, dtype=np.complex128)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.eps_rank * s[0]))


def range_basis(a, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the column space of ``a``."""
    a = np.asarray(a, dtype=np.complex128)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[0], 0), dtype=np.complex128)
    r = int(np.count_nonzero(s > tol.eps_rank * s[0]))
    return u[:, :r]


def _hermitian_defect(a: np.ndarray) -> float:
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(a - a.conj().T) / scale)


def eig_hermitian(a, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    w : ndarray
        Real eigenvalues in non-increasing order.
    V : ndarray
        Orthonormal eigenvectors as columns, ``a = V diag(w) V^*``.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ContractError(f"eig_hermitian needs a square matrix, got {a.shape}")
    defect = _hermitian_defect(a)
    if defect > tol.eps_herm:
        raise ContractError(f"matrix is not Hermitian (relative defect {defect:.3g})")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return w[::-1].copy(), v[:, ::-1].copy()


def _check_separated(theta: np.ndarray, tol: Tolerance) -> None:
    if theta.size < 2:
        return
    scale = max(1.0, float(np.max(np.abs(theta))))
    diffs = np.abs(theta[:, None] - theta[None, :])
    np.fill_diagonal(diffs, np.inf)
    gap = float(diffs.min())
    if gap <= tol.eps_rank * scale:
        raise DegeneratePencil(f"generalized eigenvalues collide (gap {gap:.3g})")


def pencil_eig(s1, s2, k: int, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Generalized eigenvectors of the pencil ``s1 w = theta s2 w``.

    When ``s2`` is rank deficient the pencil is solved on the range of ``s2``.
    Hermitian positive-definite ``s2`` takes the symmetric-definite path.

    Returns ``(theta, W)`` with ``k`` eigenvalues in ascending order of their
    real part and unit-norm eigenvectors as the columns of ``W``.

    Raises
    ------
    DegeneratePencil
        If fewer than ``k`` finite eigenvalues exist or two of them are closer
        than ``eps_rank`` (relative).
    """
    s1 = as_matrix(s1, "s1")
    s2 = as_matrix(s2, "s2")
    if s1.shape != s2.shape or s1.shape[0] != s1.shape[1]:
        raise DimensionError(f"pencil needs equal square matrices, got {s1.shape} and {s2.shape}")
    size = s1.shape[0]
    if not 1 <= k <= size:
        raise ContractError(f"k={k} outside 1..{size}")

    lift = None
    if rank_svd(s2, tol) < size:
        q = range_basis(s2, tol)
        if q.shape[1] < k:
            raise DegeneratePencil(f"only {q.shape[1]} finite eigenvalues, {k} requested")
        lift = q
        s1 = q.conj().T @ s1 @ q
        s2 = q.conj().T @ s2 @ q

    hermitian = _hermitian_defect(s1) <= tol.eps_herm and _hermitian_defect(s2) <= tol.eps_herm
    theta = vecs = None
    if hermitian:
        try:
            theta, vecs = scipy.linalg.eigh(s1, s2)
        except np.linalg.LinAlgError:
            theta = None  # s2 not positive definite
    if theta is None:
        theta, vecs = scipy.linalg.eig(s1, s2)
        finite = np.isfinite(theta)
        theta, vecs = theta[finite], vecs[:, finite]
        if hermitian:
            theta = theta.real
    if theta.size < k:
        raise DegeneratePencil(f"only {theta.size} finite eigenvalues, {k} requested")
    _check_separated(np.asarray(theta), tol)

    order = np.argsort(np.real(theta), kind="stable")[:k]
    theta, vecs = theta[order], vecs[:, order]
    if lift is not None:
        vecs = lift @ vecs
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    return theta, vecs
