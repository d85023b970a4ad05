"""Seeded random generators for vectors, unitaries, states and ensembles.

Unit vectors are drawn from the rotation-invariant measure on the sphere
(normalised complex Gaussians), weights from the uniform measure on the
simplex and unitaries from the Haar measure.
"""
from __future__ import annotations

import numpy as np

from .states import DensityMatrix, Dims, Ensemble, ProductVector

__all__ = [
    "rng_for",
    "random_unit_vector",
    "random_unitary",
    "random_simplex_weights",
    "random_density_matrix",
    "random_ensemble",
    "random_ensemble_with_margins",
    "planted_class_ensemble",
]


def rng_for(seed, *stream) -> np.random.Generator:
    """Generator for ``seed`` and an optional sub-stream index path."""
    return np.random.default_rng([int(seed), *map(int, stream)])


def random_unit_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_simplex_weights(rng: np.random.Generator, k: int) -> np.ndarray:
    return rng.dirichlet(np.ones(k))


def random_density_matrix(rng: np.random.Generator, dims: Dims, rank: int | None = None) -> DensityMatrix:
    """Random (generally entangled) density matrix from the induced measure."""
    d = dims.total
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    mat = g @ g.conj().T
    return DensityMatrix(dims, mat / np.trace(mat).real)


def random_ensemble(rng: np.random.Generator, dims: Dims, k: int) -> Ensemble:
    weights = random_simplex_weights(rng, k)
    es = [random_unit_vector(rng, dims.m) for _ in range(k)]
    fs = [random_unit_vector(rng, dims.n) for _ in range(k)]
    return Ensemble.build(dims, weights, es, fs)


def random_ensemble_with_margins(rng: np.random.Generator, dims: Dims, k: int,
                                 margin: float, max_tries: int = 10_000) -> Ensemble:
    """Rejection-sample an ensemble whose certificate margins all reach ``margin``."""
    from .decomposition import certify_vk

    for _ in range(max_tries):
        ens = random_ensemble(rng, dims, k)
        cert = certify_vk(ens)
        if cert.valid and min(cert.ray_gap, cert.f_min_sv, cert.min_weight) >= margin:
            return ens
    raise RuntimeError(f"no ensemble with margin {margin} found for {dims}, k={k}")


def planted_class_ensemble(rng: np.random.Generator, dims: Dims, class_sizes) -> Ensemble:
    """Ensemble whose left rays repeat according to ``class_sizes``.

    Members of a class share one ray (each with its own random phase); the
    right factors are random and hence independent when ``sum(class_sizes) <= n``.
    """
    es, fs = [], []
    for size in class_sizes:
        ray = random_unit_vector(rng, dims.m)
        for _ in range(size):
            es.append(ray * np.exp(2j * np.pi * rng.random()))
            fs.append(random_unit_vector(rng, dims.n))
    weights = random_simplex_weights(rng, len(es))
    return Ensemble.build(dims, weights, es, fs)


def as_product_vector(rng: np.random.Generator, dims: Dims) -> ProductVector:
    return ProductVector(random_unit_vector(rng, dims.m), random_unit_vector(rng, dims.n))
