"""Faces of the separable state set generated by pure-product ensembles.

When the right factors of an ensemble are independent, the face it generates
is a direct convex sum of blocks.  A block collects the components sharing a
left ray ``e``; it is the full state space of the subspace
``L = e (x) span{f_j}``, so it has affine dimension ``d^2 - 1`` for
``d = dim L``.  With all rays distinct every block is a point and the face is a
simplex.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .decomposition import ray_classes
from .numerics import DEFAULT_TOL, Tolerance, rank_svd
from .states import DensityMatrix, Dims, Ensemble, ProductVector, ray_gap

__all__ = [
    "FaceBlock",
    "BlockSimplexFace",
    "Relation",
    "face_of_ensemble",
    "face_relation",
    "is_simplex",
    "face_contains",
    "vector_state_rank",
]


@dataclass(frozen=True, eq=False)
class FaceBlock:
    ray: np.ndarray
    f_basis: np.ndarray
    L_basis: np.ndarray
    block_dim: int
    members: tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class BlockSimplexFace:
    dims: Dims
    blocks: tuple[FaceBlock, ...]

    @property
    def q(self) -> int:
        return len(self.blocks)

    @property
    def affine_dim(self) -> int:
        return sum(b.block_dim ** 2 for b in self.blocks) - 1

    @property
    def stacked_basis(self) -> np.ndarray:
        return np.column_stack([b.L_basis for b in self.blocks])

    def to_json(self) -> dict:
        from .io import vector_to_json

        return {
            "m": self.dims.m,
            "n": self.dims.n,
            "q": self.q,
            "block_dims": [b.block_dim for b in self.blocks],
            "affine_dim": self.affine_dim,
            "simplex": is_simplex(self),
            "blocks": [
                {"ray": vector_to_json(b.ray), "dim": b.block_dim, "members": list(b.members)}
                for b in self.blocks
            ],
        }


class Relation(str, Enum):
    EQUAL = "Equal"
    SEGMENT = "Segment"
    THREE_BALL = "ThreeBall"


def face_of_ensemble(ens: Ensemble, tol: Tolerance = DEFAULT_TOL) -> BlockSimplexFace:
    """Block description of the face generated by the states of ``ens``.

    Raises :class:`~sepfact.errors.DependentF` if the right factors are dependent.
    """
    blocks = [
        FaceBlock(ray, f_basis, L, L.shape[1], tuple(cls))
        for cls, ray, f_basis, L in ray_classes(ens, tol)
    ]
    return BlockSimplexFace(ens.dims, tuple(blocks))


def face_relation(pv1: ProductVector, pv2: ProductVector, tol: Tolerance = DEFAULT_TOL) -> Relation:
    """Shape of the face generated by two pure product states.

    Equal rays on both factors give a point, agreement on exactly one factor a
    3-ball (the state space of a qubit) and disagreement on both a segment.
    """
    same_e = ray_gap(pv1.e, pv2.e) <= tol.eps_rank
    same_f = ray_gap(pv1.f, pv2.f) <= tol.eps_rank
    if same_e and same_f:
        return Relation.EQUAL
    if same_e or same_f:
        return Relation.THREE_BALL
    return Relation.SEGMENT


def is_simplex(face: BlockSimplexFace) -> bool:
    return all(b.block_dim == 1 for b in face.blocks)


def face_contains(face: BlockSimplexFace, rho: DensityMatrix,
                  tol: Tolerance = DEFAULT_TOL) -> tuple[bool, list[float]]:
    """Membership of ``rho`` in ``face`` and its block weights.

    The block subspaces are independent but generally not orthogonal, so
    ``rho`` is expanded in the stacked (oblique) basis ``B`` as
    ``rho = B X B^*``.  It lies in the face iff its support sits in the span of
    ``B``, the off-diagonal blocks of ``X`` vanish and the diagonal blocks are
    positive.  The weight of block ``i`` is the trace of its diagonal block.
    Returns ``(False, [])`` when ``rho`` is not in the face.
    """
    mat = rho.mat
    basis = face.stacked_basis
    pinv = np.linalg.pinv(basis)
    coeffs = pinv @ mat @ pinv.conj().T
    scale = max(np.linalg.norm(mat), 1.0)
    if np.linalg.norm(basis @ coeffs @ basis.conj().T - mat) > tol.eps_match * scale:
        return False, []

    weights = []
    rebuilt = np.zeros_like(mat)
    start = 0
    for b in face.blocks:
        sl = slice(start, start + b.block_dim)
        block = coeffs[sl, sl]
        if np.linalg.eigvalsh(0.5 * (block + block.conj().T))[0] < -tol.eps_match:
            return False, []
        weights.append(float(np.trace(block).real))
        rebuilt += b.L_basis @ block @ b.L_basis.conj().T
        start += b.block_dim
    if np.linalg.norm(rebuilt - mat) > tol.eps_match * scale:
        return False, []
    return True, weights


def vector_state_rank(vectors, tol: Tolerance = DEFAULT_TOL) -> int:
    """Real-linear rank of the vector states of ``vectors`` (rows).

    Each projector ``|x><x|`` is flattened to its real and imaginary parts so
    the rank is taken over the reals, as for states.
    """
    rows = []
    for x in np.asarray(vectors, dtype=np.complex128):
        x = x / np.linalg.norm(x)
        p = np.outer(x, x.conj()).ravel()
        rows.append(np.concatenate([p.real, p.imag]))
    return rank_svd(np.array(rows), tol)
