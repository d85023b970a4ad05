"""PPT test and the Bell-diagonal two-qubit family.

Bell basis order is Phi+, Phi-, Psi+, Psi- with

    Phi+- = (|00> +- |11>) / sqrt(2),   Psi+- = (|01> +- |10>) / sqrt(2).

Bell-diagonal states with weights ``p`` form a tetrahedron; the separable ones
form the octahedron ``max(p) <= 1/2``, whose six vertices are the mixtures
with two weights equal to one half.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

from .errors import ContractError
from .numerics import DEFAULT_TOL, Tolerance
from .states import DensityMatrix, Dims, Side, partial_transpose

__all__ = [
    "PptReport",
    "Verdict",
    "BELL_VECTORS",
    "ppt_test",
    "bell_diagonal",
    "octahedron_check",
    "octahedron_vertices",
]

_s = 1 / np.sqrt(2)
BELL_VECTORS = np.array([
    [_s, 0, 0, _s],
    [_s, 0, 0, -_s],
    [0, _s, _s, 0],
    [0, _s, -_s, 0],
], dtype=np.complex128)
BELL_VECTORS.setflags(write=False)

QUBITS = Dims(2, 2)


@dataclass(frozen=True)
class PptReport:
    side: Side
    min_eig_pt: float
    passes: bool

    def to_json(self) -> dict:
        return {"side": self.side.value, "min_eig_pt": self.min_eig_pt, "passes": self.passes}


class Verdict(str, Enum):
    SEPARABLE = "Separable"
    ENTANGLED = "Entangled"


def ppt_test(rho: DensityMatrix, side: Side | str = Side.B, tol: Tolerance = DEFAULT_TOL) -> PptReport:
    """Smallest eigenvalue of the partial transpose.

    Passing is necessary for separability; for 2x2 and 2x3 systems it is also
    sufficient.
    """
    side = Side.parse(side)
    pt = partial_transpose(rho, side)
    lo = float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])
    return PptReport(side, lo, lo >= -tol.eps_herm)


def _check_weights(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if p.size != 4 or not np.all(np.isfinite(p)):
        raise ContractError("Bell-diagonal weights must be four finite numbers")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ContractError(f"Bell-diagonal weights must be non-negative and sum to 1, got {p.tolist()}")
    return p


def bell_diagonal(p) -> DensityMatrix:
    p = _check_weights(p)
    mat = (BELL_VECTORS.T * p) @ BELL_VECTORS.conj()
    return DensityMatrix(QUBITS, mat)


def octahedron_check(p, tol: Tolerance = DEFAULT_TOL) -> Verdict:
    """Separable iff no Bell weight exceeds one half (up to ``eps_herm``)."""
    p = _check_weights(p)
    return Verdict.SEPARABLE if p.max() <= 0.5 + tol.eps_herm else Verdict.ENTANGLED


def octahedron_vertices() -> list[np.ndarray]:
    out = []
    for i, j in combinations(range(4), 2):
        p = np.zeros(4)
        p[[i, j]] = 0.5
        out.append(p)
    return out
