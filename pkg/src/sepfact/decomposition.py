"""Unique pure-product decompositions of separable states.

An ensemble ``sum_i w_i |e_i f_i><e_i f_i|`` with pairwise distinct left rays
``[e_i]``, linearly independent right factors ``f_i`` and ``k <= max(m, n)``
components lies in the uniqueness regime: its state has exactly one
decomposition into pure product states, and that decomposition has ``k``
terms.  This module certifies membership, recovers the decomposition from the
density matrix alone, and describes every decomposition of a state whose
right factors are independent but whose left rays may repeat.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ContractError, DegeneratePencil, DependentF, NotInRegime, RankTooHigh, Unbounded
from .numerics import DEFAULT_TOL, Tolerance, eig_hermitian, pencil_eig, range_basis, rank_svd
from .sampling import random_unit_vector, rng_for
from .states import (
    DensityMatrix,
    Dims,
    Ensemble,
    ProductVector,
    Side,
    density_of,
    marginal,
    phase_normalize,
    ray_gap,
    trace_distance,
)

__all__ = [
    "VkCertificate",
    "Recovery",
    "CoarseBlock",
    "CoarseDecomposition",
    "LengthBounds",
    "certify_vk",
    "group_rays",
    "ray_classes",
    "recover",
    "recover_unique",
    "product_vectors_in_subspace",
    "coarse_decompose",
    "hjw_mixtures",
    "length_bounds",
    "perturb_ensemble",
    "perturb_to_vk",
    "match_ensembles",
    "MAX_PENCIL_RETRIES",
]

MAX_PENCIL_RETRIES = 8


@dataclass(frozen=True)
class VkCertificate:
    """Margins of the uniqueness hypotheses for one ensemble.

    ``reason`` names the first violated hypothesis when ``valid`` is false.
    """

    k: int
    ray_gap: float
    f_min_sv: float
    min_weight: float
    valid: bool
    reason: str | None = None

    def to_json(self) -> dict:
        out = {
            "k": self.k,
            "ray_gap": self.ray_gap,
            "f_min_sv": self.f_min_sv,
            "min_weight": self.min_weight,
            "valid": self.valid,
        }
        if self.reason is not None:
            out["reason"] = self.reason
        return out


def _min_ray_gap(vectors: Sequence[np.ndarray]) -> float:
    if len(vectors) < 2:
        return 1.0
    return min(ray_gap(vectors[i], vectors[j])
               for i in range(len(vectors)) for j in range(i + 1, len(vectors)))


def _min_singular_value(cols: np.ndarray) -> float:
    n, k = cols.shape
    if k > n:
        return 0.0
    return float(np.linalg.svd(cols, compute_uv=False)[-1])


def certify_vk(ens: Ensemble, tol: Tolerance = DEFAULT_TOL) -> VkCertificate:
    """Measure how far ``ens`` sits inside the uniqueness regime."""
    k = len(ens)
    gap = _min_ray_gap([pv.e for pv in ens.vectors])
    fsv = _min_singular_value(ens.f_matrix)
    wmin = float(ens.weights.min())
    dims = ens.dims

    reason = None
    if k > max(dims.m, dims.n):
        reason = f"too many components: k={k} > max(m, n)={max(dims.m, dims.n)}"
    elif wmin <= 0:
        reason = f"non-positive weight (min weight {wmin:.3g})"
    elif gap <= tol.eps_rank:
        reason = f"left rays not distinct (ray gap {gap:.3g} <= {tol.eps_rank:.3g})"
    elif fsv <= tol.eps_rank:
        reason = f"right factors dependent (smallest singular value {fsv:.3g} <= {tol.eps_rank:.3g})"
    return VkCertificate(k, gap, fsv, wmin, reason is None, reason)


def group_rays(vectors: Sequence[np.ndarray], tol: Tolerance = DEFAULT_TOL) -> list[list[int]]:
    """Partition indices into classes of equal rays (gap at most ``eps_rank``).

    Each vector joins the first class whose representative it matches.
    """
    classes: list[list[int]] = []
    for i, v in enumerate(vectors):
        for cls in classes:
            if ray_gap(vectors[cls[0]], v) <= tol.eps_rank:
                cls.append(i)
                break
        else:
            classes.append([i])
    return classes


# -- recovery ----------------------------------------------------------------


@dataclass(frozen=True)
class Recovery:
    ensemble: Ensemble
    residual: float
    retries: int
    certificate: VkCertificate


def _random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (g + g.conj().T)


def _random_positive(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return g @ g.conj().T / (2 * d) + np.eye(d)


def _conditional_combination(tensor: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """``sum_{a, a'} c[a, a'] (<a| (x) I) rho (|a'> (x) I)``."""
    return np.einsum("xy,xiyj->ij", coeffs, tensor)


def _attempt(rho: DensityMatrix, q: np.ndarray, rng: np.random.Generator, tol: Tolerance):
    m = rho.dims.m
    k = q.shape[1]
    t = rho.tensor
    s1 = _conditional_combination(t, _random_hermitian(rng, m))
    s2 = _conditional_combination(t, _random_positive(rng, m))
    s1r = q.conj().T @ s1 @ q
    s2r = q.conj().T @ s2 @ q
    _, w = pencil_eig(s1r, s2r, k, tol)

    # Dual frame h_i (<h_i, f_j> = 0 for i != j) and the frame itself.
    duals = q @ w
    frame = q @ np.linalg.inv(w.conj().T)
    es, fs = [], []
    for i in range(k):
        h = duals[:, i]
        block = np.einsum("aibj,i,j->ab", t, h.conj(), h)
        _, vecs = np.linalg.eigh(0.5 * (block + block.conj().T))
        es.append(phase_normalize(vecs[:, -1]))
        f = frame[:, i]
        fs.append(phase_normalize(f / np.linalg.norm(f)))

    projectors = np.column_stack([np.outer(x, x.conj()).ravel()
                                  for x in (np.kron(e, f) for e, f in zip(es, fs))])
    weights, *_ = np.linalg.lstsq(projectors, rho.mat.ravel(), rcond=None)
    weights = weights.real
    if np.any(weights <= 0):
        raise NotInRegime("recovered weights are not all positive")
    weights = weights / weights.sum()
    ens = Ensemble.build(rho.dims, weights, es, fs).canonical()
    residual = float(np.linalg.norm(density_of(ens).mat - rho.mat))
    return ens, residual


def recover(rho: DensityMatrix, tol: Tolerance = DEFAULT_TOL, seed: int = 0) -> Recovery:
    """Recover the unique pure-product decomposition of ``rho`` with diagnostics.

    The right-factor frame is read off a matrix pencil built from two seeded
    random combinations of the conditional blocks of ``rho`` restricted to the
    range of its B-marginal; the left factors and weights follow by contracting
    ``rho`` against the dual frame.

    Raises
    ------
    NotInRegime
        If ``rho`` has no certified unique decomposition (rank mismatch,
        invalid certificate or reconstruction residual above ``eps_match``).
    DegeneratePencil
        If every random pencil was degenerate.
    """
    dims = rho.dims
    rho_b = marginal(rho, Side.B).mat
    k = rank_svd(rho_b, tol)
    r = rank_svd(rho.mat, tol)
    if k != r:
        raise NotInRegime(f"rank of state ({r}) differs from rank of B-marginal ({k})")
    if k > max(dims.m, dims.n):
        raise NotInRegime(f"rank {k} exceeds max(m, n) = {max(dims.m, dims.n)}")
    q = range_basis(rho_b, tol)

    last_error: Exception | None = None
    for attempt in range(MAX_PENCIL_RETRIES + 1):
        rng = rng_for(seed, attempt)
        try:
            ens, residual = _attempt(rho, q, rng, tol)
        except (DegeneratePencil, NotInRegime, np.linalg.LinAlgError, ContractError) as exc:
            last_error = exc
            continue
        cert = certify_vk(ens, tol)
        if cert.valid and residual <= tol.eps_match:
            return Recovery(ens, residual, attempt, cert)
        last_error = NotInRegime(
            cert.reason if not cert.valid else f"reconstruction residual {residual:.3g} > {tol.eps_match:.3g}")
    if isinstance(last_error, DegeneratePencil):
        raise DegeneratePencil(f"pencil degenerate after {MAX_PENCIL_RETRIES} retries") from last_error
    raise NotInRegime(str(last_error)) from last_error


def recover_unique(rho: DensityMatrix, tol: Tolerance = DEFAULT_TOL, seed: int = 0) -> Ensemble:
    """The unique decomposition of ``rho``, canonically ordered; see :func:`recover`."""
    return recover(rho, tol, seed).ensemble


# -- brute-force oracle ------------------------------------------------------


def product_vectors_in_subspace(basis, dims: Dims, tol: Tolerance = DEFAULT_TOL, budget: int = 200,
                                seed: int = 0, dedup: float = 1e-6,
                                max_iter: int = 2000) -> list[ProductVector]:
    """Search a subspace for product vectors by randomly restarted alternating projection.

    Each of ``budget`` restarts begins at a random vector of the span and
    alternates between the best rank-one approximation (reshaped as ``m x n``)
    and the orthogonal projection onto the span; runs that have not converged
    are finished by a Gauss-Newton polish.  Converged rank-one points are
    de-duplicated ray-wise: two hits are the same when the product of their
    factor overlaps is at least ``1 - dedup``.

    This is an oracle: it is complete only when the span holds finitely many
    product rays, and may under-report otherwise.
    """
    vecs = np.asarray(basis, dtype=np.complex128)
    if vecs.ndim == 1:
        vecs = vecs[None, :]
    if vecs.shape[1] != dims.total:
        raise ContractError(f"basis vectors must have length {dims.total}")
    q = range_basis(vecs.T, tol)
    if q.shape[1] == 0:
        return []
    rng = rng_for(seed)
    d = q.shape[1]
    starts = rng.standard_normal((budget, d)) + 1j * rng.standard_normal((budget, d))
    es, fs, res, _ = kernels.rank1_search(np.ascontiguousarray(q), dims.m, dims.n,
                                          np.ascontiguousarray(starts), max_iter, 1e-13)
    slow = np.flatnonzero(res > 1e-13)
    if slow.size:
        es[slow], fs[slow], res[slow] = _polish_products(q, es[slow], fs[slow])

    found: list[ProductVector] = []
    for i in np.flatnonzero(res <= tol.eps_rank):
        pv = ProductVector.from_raw(es[i], fs[i])
        if not any(ray_overlap_product(pv, other) >= 1 - dedup for other in found):
            found.append(pv)
    found = [pv.normalized() for pv in found]
    found.sort(key=lambda pv: tuple(np.round(np.concatenate([pv.e, pv.f]), 9).view(float)))
    return found


def _polish_products(q: np.ndarray, es: np.ndarray, fs: np.ndarray, steps: int = 30):
    """Batched Gauss-Newton on ``P (e (x) f) = 0``, ``P`` the projector off ``span(q)``.

    Alternating projection converges only linearly, and slowly where the span
    meets the product vectors at a shallow angle; this finishes those runs
    quadratically.  The minimum-norm step ignores the scaling gauge
    ``(e, f) -> (a e, f / a)``.  Returns polished factors and residuals.
    """
    mn = q.shape[0]
    m, n = es.shape[1], fs.shape[1]
    perp = np.eye(mn) - q @ q.conj().T
    eye_m, eye_n = np.eye(m), np.eye(n)
    for _ in range(steps):
        r = np.einsum("ij,rj->ri", perp, np.einsum("ra,rb->rab", es, fs).reshape(-1, mn))
        jac = np.concatenate([
            np.einsum("ac,rb->rabc", eye_m, fs).reshape(-1, mn, m),
            np.einsum("ra,bc->rabc", es, eye_n).reshape(-1, mn, n),
        ], axis=2)
        step = np.einsum("rij,rj->ri", np.linalg.pinv(perp @ jac, rcond=1e-12), r)
        es = es - step[:, :m]
        fs = fs - step[:, m:]
        es /= np.linalg.norm(es, axis=1, keepdims=True)
        fs /= np.linalg.norm(fs, axis=1, keepdims=True)
    r = np.einsum("ij,rj->ri", perp, np.einsum("ra,rb->rab", es, fs).reshape(-1, mn))
    return es, fs, np.linalg.norm(r, axis=1)


def ray_overlap_product(a: ProductVector, b: ProductVector) -> float:
    """``|<e, e'>| * |<f, f'>|``, the overlap of the two product rays."""
    fe, ff = a.fidelity(b)
    return fe * ff


# -- coarse decomposition ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoarseBlock:
    weight: float
    sigma: DensityMatrix
    L_basis: np.ndarray
    ray: np.ndarray
    members: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.L_basis.shape[1]


@dataclass(frozen=True, eq=False)
class CoarseDecomposition:
    blocks: tuple[CoarseBlock, ...]
    dims: Dims = field(default=None)

    @property
    def q(self) -> int:
        return len(self.blocks)

    def density(self) -> np.ndarray:
        return sum(b.weight * b.sigma.mat for b in self.blocks)

    def to_json(self) -> dict:
        from .io import matrix_to_json, vector_to_json

        return {
            "m": self.dims.m,
            "n": self.dims.n,
            "q": self.q,
            "blocks": [
                {
                    "weight": b.weight,
                    "ray": vector_to_json(b.ray),
                    "dim": b.dim,
                    "members": list(b.members),
                    "sigma": matrix_to_json(b.sigma.mat),
                }
                for b in self.blocks
            ],
        }


def ray_classes(ens: Ensemble, tol: Tolerance):
    """Ray classes of ``ens`` with their block subspaces, after checking independence."""
    fsv = _min_singular_value(ens.f_matrix)
    if fsv <= tol.eps_rank:
        raise DependentF(f"right factors are dependent (smallest singular value {fsv:.3g})")
    vectors = ens.vectors
    out = []
    for cls in group_rays([pv.e for pv in vectors], tol):
        ray = phase_normalize(vectors[cls[0]].e)
        f_basis = np.column_stack([vectors[i].f for i in cls])
        qf, _ = np.linalg.qr(f_basis)
        L = np.column_stack([np.kron(ray, qf[:, j]) for j in range(qf.shape[1])])
        out.append((cls, ray, f_basis, L))
    return out


def _lex(v: np.ndarray) -> tuple:
    return tuple(np.round(v, 12).view(float))


def coarse_decompose(ens: Ensemble, tol: Tolerance = DEFAULT_TOL) -> CoarseDecomposition:
    """Group an ensemble by left ray into its unique block decomposition.

    Every pure-product decomposition of the state refines this one: block
    weights are fixed, and only the split of each block state into pure states
    is free (see :func:`hjw_mixtures`).
    """
    blocks = []
    weights = ens.weights
    for cls, ray, _, L in ray_classes(ens, tol):
        gamma = float(weights[cls].sum())
        sub = Ensemble(ens.dims, tuple((float(weights[i]) / gamma, ens.vectors[i]) for i in cls))
        blocks.append(CoarseBlock(gamma, density_of(sub), L, ray, tuple(cls)))
    blocks.sort(key=lambda b: (-round(b.weight, 12), _lex(b.ray)))
    return CoarseDecomposition(tuple(blocks), ens.dims)


def hjw_mixtures(sigma, r: int, mixing_seed: int = 0,
                 tol: Tolerance = DEFAULT_TOL) -> list[tuple[float, np.ndarray]]:
    """One ``r``-term pure-state decomposition of ``sigma``.

    The spectral decomposition is mixed through a seeded random ``r x rank``
    isometry; every pure decomposition of ``sigma`` arises from some isometry.
    """
    mat = sigma.mat if isinstance(sigma, DensityMatrix) else np.asarray(sigma, dtype=np.complex128)
    if r > 64:
        raise ContractError("r must be at most 64")
    w, v = eig_hermitian(mat, tol)
    rank = rank_svd(mat, tol)
    if r < rank:
        raise RankTooHigh(f"r={r} is below rank {rank}")
    w, v = np.clip(w[:rank], 0, None), v[:, :rank]
    rng = rng_for(mixing_seed)
    g = rng.standard_normal((r, rank)) + 1j * rng.standard_normal((r, rank))
    iso, _ = np.linalg.qr(g)  # r x rank, orthonormal columns
    raw = (iso * np.sqrt(w)) @ v.T  # row j: sum_l iso[j, l] sqrt(w_l) v_l
    out = []
    for row in raw:
        nrm = float(np.linalg.norm(row))
        out.append((nrm ** 2, row / nrm if nrm > 0 else row))
    return out


# -- length ------------------------------------------------------------------


@dataclass(frozen=True)
class LengthBounds:
    lower: int
    upper: int
    exact: int | None = None

    def __post_init__(self):
        if self.lower > self.upper:
            raise ContractError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        if self.exact is not None and not self.lower <= self.exact <= self.upper:
            raise ContractError("exact length outside bounds")


def length_bounds(rho: DensityMatrix, known: Ensemble | None = None,
                  tol: Tolerance = DEFAULT_TOL, seed: int = 0) -> LengthBounds:
    """Bounds on the minimal number of pure product states in a decomposition of ``rho``.

    The rank is always a lower bound; a known or recovered decomposition gives
    the upper bound.  A successful unique recovery pins the length exactly.
    """
    lower = rank_svd(rho.mat, tol)
    try:
        recovered = recover(rho, tol, seed).ensemble
    except (NotInRegime, DegeneratePencil):
        recovered = None
    sizes = [len(e) for e in (known, recovered) if e is not None]
    if not sizes:
        raise Unbounded("no decomposition known and recovery failed")
    upper = min(sizes)
    if recovered is not None:
        return LengthBounds(len(recovered), len(recovered), len(recovered))
    return LengthBounds(lower, upper, upper if lower == upper else None)


# -- perturbations -----------------------------------------------------------


def perturb_ensemble(ens: Ensemble, size: float, rng: np.random.Generator) -> Ensemble:
    """Move every factor by a vector of norm at most ``size`` and every weight by at most ``size``.

    Factors and weights are renormalised afterwards.
    """
    es, fs = [], []
    for pv in ens.vectors:
        es.append(pv.e + size * rng.random() * random_unit_vector(rng, ens.dims.m))
        fs.append(pv.f + size * rng.random() * random_unit_vector(rng, ens.dims.n))
    w = ens.weights + size * rng.uniform(-1, 1, len(ens))
    w = np.clip(w, 1e-15, None)
    return Ensemble.build(ens.dims, w, es, fs)


def perturb_to_vk(ens: Ensemble, delta: float, seed: int = 0, tol: Tolerance = DEFAULT_TOL,
                  max_tries: int = 50) -> Ensemble:
    """A nearby ensemble inside the uniqueness regime.

    Each factor is moved by a random vector of norm ``delta / 4`` so that the
    trace distance between the two states stays below ``delta / 2``; generic
    moves separate coinciding rays and make the right factors independent.
    Requires ``len(ens) <= n``.
    """
    if len(ens) > ens.dims.n:
        raise ContractError(f"{len(ens)} right factors cannot be independent in C^{ens.dims.n}")
    rho = density_of(ens)
    step = delta / 4
    for attempt in range(max_tries):
        rng = rng_for(seed, attempt)
        es = [pv.e + step * random_unit_vector(rng, ens.dims.m) for pv in ens.vectors]
        fs = [pv.f + step * random_unit_vector(rng, ens.dims.n) for pv in ens.vectors]
        cand = Ensemble.build(ens.dims, ens.weights, es, fs)
        if certify_vk(cand, tol).valid and trace_distance(density_of(cand), rho) <= delta:
            return cand
        step /= 2
    raise NotInRegime(f"could not reach the uniqueness regime within {delta}")


def match_ensembles(a: Ensemble, b: Ensemble) -> tuple[float, float, float]:
    """Compare two ensembles up to component order and phases.

    Components are paired by maximising the product-ray overlap.  Returns the
    worst left-factor overlap, the worst right-factor overlap and the largest
    weight difference; sizes that differ give ``(0, 0, inf)``.
    """
    from scipy.optimize import linear_sum_assignment

    if len(a) != len(b):
        return 0.0, 0.0, float("inf")
    cost = np.array([[-ray_overlap_product(x, y) for y in b.vectors] for x in a.vectors])
    rows, cols = linear_sum_assignment(cost)
    fe = ff = 1.0
    dw = 0.0
    wa, wb = a.weights, b.weights
    for i, j in zip(rows, cols):
        oe, of = a.vectors[i].fidelity(b.vectors[j])
        fe, ff = min(fe, oe), min(ff, of)
        dw = max(dw, abs(wa[i] - wb[j]))
    return fe, ff, dw
