"""Product vectors, ensembles and density matrices on ``C^m (x) C^n``.

States are stored as density matrices; a state acts on an operator ``A`` as
``Tr(rho A)``.  Product vectors are compared ray-wise, so a global phase on
either factor never matters.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, DimensionError, NotHermitian, NotPositive, TraceNotOne
from .numerics import DEFAULT_TOL, Tolerance, as_matrix

__all__ = [
    "Side",
    "Dims",
    "ProductVector",
    "Ensemble",
    "DensityMatrix",
    "phase_normalize",
    "ray_overlap",
    "ray_gap",
    "density_of",
    "marginal",
    "partial_transpose",
    "validate_state",
    "pure_density",
    "trace_distance",
]

UNIT_TOL = 1e-12


class Side(str, Enum):
    A = "A"
    B = "B"

    @classmethod
    def parse(cls, value) -> "Side":
        if isinstance(value, Side):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ContractError(f"side must be 'A' or 'B', got {value!r}") from None


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


def phase_normalize(v) -> np.ndarray:
    """Scale ``v`` by a unit phase so its largest-magnitude entry is real positive.

    Near-ties (within a relative 1e-9) go to the first such entry, so the
    choice does not flip under rounding.
    """
    v = np.asarray(v, dtype=np.complex128)
    mags = np.abs(v)
    top = mags.max(initial=0.0)
    if top == 0:
        return v.copy()
    idx = int(np.argmax(mags >= top * (1 - 1e-9)))
    return v * (abs(v[idx]) / v[idx])


def ray_overlap(x, y) -> float:
    """``|<x, y>|`` for unit vectors."""
    return float(abs(np.vdot(x, y)))


def ray_gap(x, y) -> float:
    """``sqrt(1 - |<x, y>|^2)`` for unit vectors.

    Evaluated as the norm of the component of ``y`` orthogonal to ``x``, which
    stays accurate (~1e-16) for coinciding rays where the closed form loses
    half the digits.
    """
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    return float(np.linalg.norm(y - np.vdot(x, y) * x))


@dataclass(frozen=True)
class Dims:
    m: int
    n: int

    def __post_init__(self):
        if int(self.m) != self.m or int(self.n) != self.n or self.m < 1 or self.n < 1:
            raise ContractError(f"dimensions must be positive integers, got {self.m}x{self.n}")

    @property
    def total(self) -> int:
        return self.m * self.n

    def swapped(self) -> "Dims":
        return Dims(self.n, self.m)

    @classmethod
    def parse(cls, text: str) -> "Dims":
        """Parse ``"MxN"``."""
        try:
            m, n = (int(t) for t in str(text).lower().split("x"))
        except ValueError:
            raise ContractError(f"dims must look like MxN, got {text!r}") from None
        return cls(m, n)

    def __str__(self):
        return f"{self.m}x{self.n}"


@dataclass(frozen=True, eq=False)
class ProductVector:
    """Unit vectors ``e`` in ``C^m`` and ``f`` in ``C^n``; the pure state of ``e (x) f``."""

    e: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.e, dtype=np.complex128).ravel()
        f = np.asarray(self.f, dtype=np.complex128).ravel()
        for name, v in (("e", e), ("f", f)):
            if v.size == 0 or not np.all(np.isfinite(v)):
                raise ContractError(f"{name} must be a finite non-empty vector")
            if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
                raise ContractError(f"{name} must be a unit vector (norm {np.linalg.norm(v)!r})")
        object.__setattr__(self, "e", _frozen(e))
        object.__setattr__(self, "f", _frozen(f))

    @classmethod
    def from_raw(cls, e, f) -> "ProductVector":
        """Normalise arbitrary non-zero vectors."""
        e = np.asarray(e, dtype=np.complex128).ravel()
        f = np.asarray(f, dtype=np.complex128).ravel()
        ne, nf = np.linalg.norm(e), np.linalg.norm(f)
        if ne == 0 or nf == 0:
            raise ContractError("product vector factors must be non-zero")
        return cls(e / ne, f / nf)

    @property
    def dims(self) -> Dims:
        return Dims(self.e.size, self.f.size)

    @property
    def vector(self) -> np.ndarray:
        return np.kron(self.e, self.f)

    def projector(self) -> np.ndarray:
        x = self.vector
        return np.outer(x, x.conj())

    def normalized(self) -> "ProductVector":
        """Canonical phase representative of the same ray."""
        return ProductVector(phase_normalize(self.e), phase_normalize(self.f))

    def fidelity(self, other: "ProductVector") -> tuple[float, float]:
        """Ray overlaps ``(|<e, e'>|, |<f, f'>|)``."""
        return ray_overlap(self.e, other.e), ray_overlap(self.f, other.f)

    def same_ray(self, other: "ProductVector", atol: float = 1e-9) -> bool:
        return ray_gap(self.e, other.e) <= atol and ray_gap(self.f, other.f) <= atol


def _sort_key(weight: float, pv: ProductVector):
    def first_entries(v):
        return tuple(x for c in np.round(v, 12) for x in (c.real, c.imag))

    return (-round(weight, 12), first_entries(pv.e), first_entries(pv.f))


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Convex combination ``sum_i w_i |e_i f_i><e_i f_i|`` of pure product states."""

    dims: Dims
    components: tuple[tuple[float, ProductVector], ...]

    def __post_init__(self):
        comps = tuple((float(w), pv) for w, pv in self.components)
        if not comps:
            raise ContractError("an ensemble needs at least one component")
        for w, pv in comps:
            if not w > 0:
                raise ContractError(f"ensemble weights must be positive, got {w!r}")
            if pv.dims != self.dims:
                raise DimensionError(f"component dims {pv.dims} do not match ensemble dims {self.dims}")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > UNIT_TOL:
            raise ContractError(f"ensemble weights must sum to 1 (sum {total!r})")
        object.__setattr__(self, "components", comps)

    @classmethod
    def build(cls, dims: Dims, weights: Sequence[float], es: Iterable, fs: Iterable,
              normalize: bool = True) -> "Ensemble":
        """Assemble from parallel sequences, optionally renormalising weights and vectors."""
        weights = np.asarray(weights, dtype=float)
        if normalize:
            if np.any(weights <= 0):
                raise ContractError("ensemble weights must be positive")
            weights = weights / weights.sum()
            pvs = [ProductVector.from_raw(e, f) for e, f in zip(es, fs)]
        else:
            pvs = [ProductVector(e, f) for e, f in zip(es, fs)]
        if len(pvs) != len(weights):
            raise ContractError("weights and vectors have different lengths")
        return cls(dims, tuple(zip(weights.tolist(), pvs)))

    def __len__(self):
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def vectors(self) -> list[ProductVector]:
        return [pv for _, pv in self.components]

    @property
    def e_matrix(self) -> np.ndarray:
        """``m x p`` matrix with the left factors as columns."""
        return np.column_stack([pv.e for pv in self.vectors])

    @property
    def f_matrix(self) -> np.ndarray:
        """``n x p`` matrix with the right factors as columns."""
        return np.column_stack([pv.f for pv in self.vectors])

    def canonical(self) -> "Ensemble":
        """Phase-normalised components sorted by descending weight, then entries."""
        comps = [(w, pv.normalized()) for w, pv in self.components]
        comps.sort(key=lambda c: _sort_key(*c))
        return Ensemble(self.dims, tuple(comps))

    def mix(self, other: "Ensemble", t: float) -> "Ensemble":
        """The ensemble of ``t * self + (1 - t) * other`` (components concatenated)."""
        if other.dims != self.dims:
            raise DimensionError("cannot mix ensembles of different dims")
        if not 0 < t < 1:
            raise ContractError("mixing parameter must lie in (0, 1)")
        comps = [(t * w, pv) for w, pv in self.components]
        comps += [((1 - t) * w, pv) for w, pv in other.components]
        return Ensemble(self.dims, tuple(comps))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    dims: Dims
    mat: np.ndarray

    def __post_init__(self):
        mat = as_matrix(self.mat, "density matrix")
        if mat.shape != (self.dims.total, self.dims.total):
            raise DimensionError(f"matrix shape {mat.shape} does not match dims {self.dims}")
        object.__setattr__(self, "mat", _frozen(mat))

    @property
    def tensor(self) -> np.ndarray:
        """The matrix as a 4-index array ``rho[a, b, a', b']``."""
        m, n = self.dims.m, self.dims.n
        return self.mat.reshape(m, n, m, n)

    def rank(self, tol: Tolerance = DEFAULT_TOL) -> int:
        from .numerics import rank_svd

        return rank_svd(self.mat, tol)


def density_of(ens: Ensemble) -> DensityMatrix:
    """Density matrix ``sum_i w_i |e_i (x) f_i><e_i (x) f_i|``."""
    x = np.column_stack([pv.vector for pv in ens.vectors])
    mat = (x * ens.weights) @ x.conj().T
    return DensityMatrix(ens.dims, 0.5 * (mat + mat.conj().T))


def pure_density(vector, dims: Dims) -> DensityMatrix:
    """Projector onto a (normalised) vector of ``C^m (x) C^n``."""
    v = np.asarray(vector, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return DensityMatrix(dims, np.outer(v, v.conj()))


def _as_tensor(rho, dims: Dims | None):
    if isinstance(rho, DensityMatrix):
        return rho.dims, rho.mat
    if dims is None:
        raise DimensionError("dims are required for a bare matrix")
    return dims, as_matrix(rho)


def marginal(rho, side: Side | str, dims: Dims | None = None) -> DensityMatrix:
    """Reduced state on ``side`` (the other factor is traced out)."""
    dims, mat = _as_tensor(rho, dims)
    t = mat.reshape(dims.m, dims.n, dims.m, dims.n)
    if Side.parse(side) is Side.A:
        red, d = np.einsum("ijkj->ik", t), dims.m
    else:
        red, d = np.einsum("ijil->jl", t), dims.n
    return DensityMatrix(Dims(d, 1), red)


def partial_transpose(rho, side: Side | str, dims: Dims | None = None) -> np.ndarray:
    """Transpose the chosen tensor factor; returns the raw matrix (it may not be positive)."""
    dims, mat = _as_tensor(rho, dims)
    m, n = dims.m, dims.n
    t = mat.reshape(m, n, m, n)
    if Side.parse(side) is Side.A:
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return t.reshape(m * n, m * n).copy()


def trace_distance(a, b) -> float:
    """``||a - b||_1 / 2`` for Hermitian matrices."""
    a = a.mat if isinstance(a, DensityMatrix) else np.asarray(a)
    b = b.mat if isinstance(b, DensityMatrix) else np.asarray(b)
    d = a - b
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))


def validate_state(mat, dims: Dims, tol: Tolerance = DEFAULT_TOL) -> DensityMatrix:
    """Check the density-matrix invariants in the order Hermitian, trace, positivity.

    Raises the first failing check (:class:`NotHermitian`, :class:`TraceNotOne`
    or :class:`NotPositive`) with the measured deviation attached.
    """
    mat = as_matrix(mat)
    if mat.shape != (dims.total, dims.total):
        raise DimensionError(f"matrix shape {mat.shape} does not match dims {dims}")
    scale = max(np.linalg.norm(mat), 1.0)
    herm = float(np.linalg.norm(mat - mat.conj().T) / scale)
    if herm > tol.eps_herm:
        raise NotHermitian(herm, f"not Hermitian: relative defect {herm:.3g}")
    hmat = 0.5 * (mat + mat.conj().T)
    tr = float(np.trace(hmat).real)
    if abs(tr - 1.0) > 1e-10:
        raise TraceNotOne(abs(tr - 1.0), f"trace is {tr!r}, expected 1")
    lo = float(np.linalg.eigvalsh(hmat)[0])
    if lo < -tol.eps_herm:
        raise NotPositive(-lo, f"not positive: smallest eigenvalue {lo:.3g}")
    return DensityMatrix(dims, hmat)
