"""Affine automorphisms of the separable state set.

Every such automorphism is a composition of local-unitary conjugations, the
two partial transposes and (for ``m == n``) the swap of tensor factors.  A
word of generators is applied right to left and canonicalises to

    Swap^s  o  PT_A^a PT_B^b  o  LU(U, V)

i.e. the local unitary acts first and the swap last.  The automorphism
extends to the full state space exactly when ``a == b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from .errors import ContractError, DimensionError, SchemaError
from .numerics import DEFAULT_TOL, Tolerance
from .states import (
    DensityMatrix,
    Dims,
    Ensemble,
    ProductVector,
    Side,
    partial_transpose,
    phase_normalize,
    pure_density,
)

__all__ = [
    "LocalUnitary",
    "PT",
    "Swap",
    "Generator",
    "PtPattern",
    "AutomorphismWord",
    "CanonicalAutomorphism",
    "apply",
    "canonicalize",
    "extends_to_full_state_space",
    "witness_nonpositivity",
    "word_witness",
    "apply_to_product_vector",
    "apply_to_ensemble",
    "inverse",
    "swap_operator",
    "random_word",
    "word_to_json",
    "word_from_json",
]

UNITARY_TOL = 1e-10


def _check_unitary(u: np.ndarray, name: str) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {u.shape}")
    if np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) > UNITARY_TOL:
        raise ContractError(f"{name} is not unitary")
    u = u.copy()
    u.setflags(write=False)
    return u


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "U", _check_unitary(self.U, "U"))
        object.__setattr__(self, "V", _check_unitary(self.V, "V"))

    @classmethod
    def identity(cls, dims: Dims) -> "LocalUnitary":
        return cls(np.eye(dims.m), np.eye(dims.n))

    @property
    def dims(self) -> Dims:
        return Dims(self.U.shape[0], self.V.shape[0])

    def normalized(self) -> "LocalUnitary":
        return LocalUnitary(_phase_fix(self.U), _phase_fix(self.V))

    def equivalent(self, other: "LocalUnitary", atol: float = 1e-9) -> bool:
        """Equality up to a separate global phase on each factor."""
        return _same_up_to_phase(self.U, other.U, atol) and _same_up_to_phase(self.V, other.V, atol)


def _same_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float) -> bool:
    if a.shape != b.shape:
        return False
    overlap = np.vdot(a, b)  # tr(a^* b)
    if abs(overlap) == 0:
        return False
    return bool(np.allclose(a * (overlap / abs(overlap)), b, atol=atol))


def _phase_fix(u: np.ndarray) -> np.ndarray:
    flat = phase_normalize(u.ravel())
    return flat.reshape(u.shape)


@dataclass(frozen=True)
class PT:
    side: Side

    def __post_init__(self):
        object.__setattr__(self, "side", Side.parse(self.side))


@dataclass(frozen=True)
class Swap:
    pass


Generator = Union[LocalUnitary, PT, Swap]


class PtPattern(str, Enum):
    NONE = "None"
    A = "A"
    B = "B"
    BOTH = "Both"

    @classmethod
    def from_flags(cls, a: bool, b: bool) -> "PtPattern":
        return {(False, False): cls.NONE, (True, False): cls.A,
                (False, True): cls.B, (True, True): cls.BOTH}[(bool(a), bool(b))]

    @property
    def flags(self) -> tuple[bool, bool]:
        return self in (PtPattern.A, PtPattern.BOTH), self in (PtPattern.B, PtPattern.BOTH)


@dataclass(frozen=True, eq=False)
class AutomorphismWord:
    dims: Dims
    gens: tuple

    def __post_init__(self):
        gens = tuple(self.gens)
        for g in gens:
            if isinstance(g, LocalUnitary):
                if g.dims != self.dims:
                    raise DimensionError(f"local unitary of dims {g.dims} in a word on {self.dims}")
            elif isinstance(g, Swap):
                if self.dims.m != self.dims.n:
                    raise DimensionError("swap needs equal factor dimensions")
            elif not isinstance(g, PT):
                raise ContractError(f"unknown generator {g!r}")
        object.__setattr__(self, "gens", gens)

    def __len__(self):
        return len(self.gens)

    def __add__(self, other: "AutomorphismWord") -> "AutomorphismWord":
        if other.dims != self.dims:
            raise DimensionError("cannot concatenate words on different dims")
        return AutomorphismWord(self.dims, self.gens + other.gens)


@dataclass(frozen=True, eq=False)
class CanonicalAutomorphism:
    swap_flag: bool
    pt_pattern: PtPattern
    local: LocalUnitary

    @property
    def dims(self) -> Dims:
        return self.local.dims

    def as_word(self) -> AutomorphismWord:
        gens: list = []
        if self.swap_flag:
            gens.append(Swap())
        a, b = self.pt_pattern.flags
        if a:
            gens.append(PT(Side.A))
        if b:
            gens.append(PT(Side.B))
        gens.append(self.local)
        return AutomorphismWord(self.dims, tuple(gens))

    def is_identity(self, atol: float = 1e-9) -> bool:
        return (not self.swap_flag and self.pt_pattern is PtPattern.NONE
                and self.local.equivalent(LocalUnitary.identity(self.dims), atol))

    def equivalent(self, other: "CanonicalAutomorphism", atol: float = 1e-9) -> bool:
        return (self.swap_flag == other.swap_flag and self.pt_pattern is other.pt_pattern
                and self.local.equivalent(other.local, atol))

    def to_json(self) -> dict:
        from .io import matrix_to_json

        loc = self.local.normalized()
        return {
            "swap": self.swap_flag,
            "pt_pattern": self.pt_pattern.value,
            "U": matrix_to_json(loc.U),
            "V": matrix_to_json(loc.V),
            "extends_to_full_state_space": extends_to_full_state_space(self),
        }


def swap_operator(d: int) -> np.ndarray:
    """Permutation matrix sending ``x (x) y`` to ``y (x) x`` on ``C^d (x) C^d``."""
    p = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            p[j * d + i, i * d + j] = 1.0
    return p


def _apply_gen(g, mat: np.ndarray, dims: Dims) -> np.ndarray:
    if isinstance(g, LocalUnitary):
        w = np.kron(g.U, g.V)
        return w @ mat @ w.conj().T
    if isinstance(g, PT):
        return partial_transpose(mat, g.side, dims)
    t = mat.reshape(dims.m, dims.n, dims.m, dims.n).transpose(1, 0, 3, 2)
    return t.reshape(dims.total, dims.total).copy()


def apply(word: AutomorphismWord, rho) -> DensityMatrix:
    """Image of ``rho`` under the word (rightmost generator first).

    Words containing a single partial transpose can map entangled states to
    non-positive matrices; the result is returned unchecked.
    """
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    if isinstance(rho, DensityMatrix) and rho.dims != word.dims:
        raise DimensionError(f"state dims {rho.dims} do not match word dims {word.dims}")
    for g in reversed(word.gens):
        mat = _apply_gen(g, mat, word.dims)
    return DensityMatrix(word.dims, mat)


def canonicalize(word: AutomorphismWord, tol: Tolerance = DEFAULT_TOL) -> CanonicalAutomorphism:
    """Normal form of a word.

    Generators are absorbed from the innermost outwards using

    * ``LU(X, Y) o Swap = Swap o LU(Y, X)``
    * ``LU(X, Y) o PT_A = PT_A o LU(conj X, Y)`` (and the B-side analogue)
    * ``PT_A o Swap = Swap o PT_B``
    * ``Swap^2 = PT^2 = id`` and ``PT_A PT_B = PT_B PT_A``
    """
    dims = word.dims
    swap = pa = pb = False
    U, V = np.eye(dims.m, dtype=complex), np.eye(dims.n, dtype=complex)
    for g in reversed(word.gens):
        if isinstance(g, LocalUnitary):
            X, Y = g.U, g.V
            if swap:
                X, Y = Y, X
            if pa:
                X = X.conj()
            if pb:
                Y = Y.conj()
            U, V = X @ U, Y @ V
        elif isinstance(g, PT):
            if (g.side is Side.A) != swap:
                pa = not pa
            else:
                pb = not pb
        else:
            swap = not swap
    # Re-orthonormalise to stop rounding drift in long words.
    U = _polar(U)
    V = _polar(V)
    return CanonicalAutomorphism(swap, PtPattern.from_flags(pa, pb), LocalUnitary(U, V))


def _polar(u: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def extends_to_full_state_space(canon: CanonicalAutomorphism) -> bool:
    """True iff the partial transposes come in a pair (or not at all)."""
    return canon.pt_pattern in (PtPattern.NONE, PtPattern.BOTH)


def _max_entangled(dims: Dims) -> np.ndarray:
    d = min(dims.m, dims.n)
    psi = np.zeros(dims.total, dtype=complex)
    for i in range(d):
        psi[i * dims.n + i] = 1.0
    return psi / np.sqrt(d)


def witness_nonpositivity(pattern, dims: Dims) -> tuple[DensityMatrix, float]:
    """A state whose chosen partial transpose is not positive, and its smallest eigenvalue.

    The maximally entangled state on the first ``d = min(m, n)`` levels of
    each factor is used; its eigenvalue is ``-1/d``.
    """
    side = Side.parse(pattern.value if isinstance(pattern, PtPattern) else pattern)
    if dims.m < 2 or dims.n < 2:
        raise DimensionError("a witness needs m >= 2 and n >= 2")
    rho = pure_density(_max_entangled(dims), dims)
    lo = float(np.linalg.eigvalsh(partial_transpose(rho, side))[0])
    return rho, lo


def inverse(word: AutomorphismWord) -> AutomorphismWord:
    gens = []
    for g in reversed(word.gens):
        if isinstance(g, LocalUnitary):
            gens.append(LocalUnitary(g.U.conj().T, g.V.conj().T))
        else:
            gens.append(g)
    return AutomorphismWord(word.dims, tuple(gens))


def word_witness(word: AutomorphismWord) -> tuple[DensityMatrix, float]:
    """A state whose image under a non-extendable word is not positive.

    Pulls the maximally entangled state back through the local unitary so the
    single partial transpose acts on it directly.  Returns the state and the
    smallest eigenvalue of its image.
    """
    canon = canonicalize(word)
    if extends_to_full_state_space(canon):
        raise ContractError("word extends to the full state space; no witness exists")
    rho = pure_density(_max_entangled(word.dims), word.dims)
    pre = apply(inverse(AutomorphismWord(word.dims, (canon.local,))), rho)
    image = apply(word, pre)
    return pre, float(np.linalg.eigvalsh(image.mat)[0])


def apply_to_product_vector(canon: CanonicalAutomorphism, pv: ProductVector) -> ProductVector:
    """Image of a pure product state, as a product vector (defined up to phase)."""
    e, f = canon.local.U @ pv.e, canon.local.V @ pv.f
    a, b = canon.pt_pattern.flags
    if a:
        e = e.conj()
    if b:
        f = f.conj()
    if canon.swap_flag:
        e, f = f, e
    return ProductVector.from_raw(e, f)


def apply_to_ensemble(canon: CanonicalAutomorphism, ens: Ensemble) -> Ensemble:
    comps = tuple((w, apply_to_product_vector(canon, pv)) for w, pv in ens.components)
    dims = ens.dims.swapped() if canon.swap_flag else ens.dims
    return Ensemble(dims, comps)


def random_word(rng: np.random.Generator, dims: Dims, length: int) -> AutomorphismWord:
    from .sampling import random_unitary

    kinds = ["lu", "pta", "ptb"] + (["swap"] if dims.m == dims.n else [])
    gens: list = []
    for _ in range(length):
        kind = kinds[rng.integers(len(kinds))]
        if kind == "lu":
            gens.append(LocalUnitary(random_unitary(rng, dims.m), random_unitary(rng, dims.n)))
        elif kind == "pta":
            gens.append(PT(Side.A))
        elif kind == "ptb":
            gens.append(PT(Side.B))
        else:
            gens.append(Swap())
    return AutomorphismWord(dims, tuple(gens))


def word_to_json(word: AutomorphismWord) -> list:
    from .io import matrix_to_json

    out = []
    for g in word.gens:
        if isinstance(g, LocalUnitary):
            out.append({"g": "lu", "U": matrix_to_json(g.U), "V": matrix_to_json(g.V)})
        elif isinstance(g, PT):
            out.append({"g": "pt", "side": g.side.value})
        else:
            out.append({"g": "swap"})
    return out


def word_from_json(items: Sequence, dims: Dims | None = None, where: str = "word") -> AutomorphismWord:
    """Parse a word; ``dims`` may be omitted when the word holds a local unitary."""
    from .io import matrix_from_json

    if not isinstance(items, list):
        raise SchemaError(where, "expected a list of generators")
    gens: list = []
    for i, item in enumerate(items):
        here = f"{where}[{i}]"
        if not isinstance(item, dict) or "g" not in item:
            raise SchemaError(f"{here}.g", "missing generator tag")
        tag = item["g"]
        if tag == "swap":
            gens.append(Swap())
        elif tag == "pt":
            side = item.get("side")
            if side not in ("A", "B"):
                raise SchemaError(f"{here}.side", "must be 'A' or 'B'")
            gens.append(PT(Side(side)))
        elif tag == "lu":
            if "U" not in item or "V" not in item:
                raise SchemaError(f"{here}.U", "local unitary needs U and V")
            U = matrix_from_json(item["U"], f"{here}.U")
            V = matrix_from_json(item["V"], f"{here}.V")
            try:
                gens.append(LocalUnitary(U, V))
            except ValueError as exc:
                raise SchemaError(here, str(exc)) from None
        else:
            raise SchemaError(f"{here}.g", f"unknown generator {tag!r}")
    if dims is None:
        lus = [g for g in gens if isinstance(g, LocalUnitary)]
        if not lus:
            raise SchemaError(where, "dims are required when the word has no local unitary")
        dims = lus[0].dims
    try:
        return AutomorphismWord(dims, tuple(gens))
    except ValueError as exc:
        raise SchemaError(where, str(exc)) from None
