"""Sampling experiment: how often random ensembles land in the uniqueness regime.

Left and right factors are drawn from the rotation-invariant sphere measure
and weights from the uniform simplex measure.  This is an engineering choice
of measure; the regime is open and dense, which is a topological statement,
so the sampled fractions illustrate it rather than test it.
"""
from __future__ import annotations

import numpy as np

from .decomposition import certify_vk, match_ensembles, recover
from .errors import ContractError, RegimeError
from .numerics import DEFAULT_TOL, Tolerance
from .sampling import random_ensemble, rng_for
from .states import Dims, density_of

__all__ = ["sample_experiment", "render_histogram_svg", "MATCH_TOL"]

MATCH_TOL = 1e-7
MEASURE_NOTE = ("factors: uniform on unit spheres of C^m and C^n; "
                "weights: uniform on the simplex; instance i uses seed stream (seed, i)")
_QUANTILES = (("min", 0.0), ("q25", 0.25), ("median", 0.5), ("q75", 0.75), ("max", 1.0))


def _quantiles(values) -> dict:
    values = np.asarray(values, dtype=float)
    return {name: float(np.quantile(values, q)) for name, q in _QUANTILES}


def sample_experiment(dims: Dims, k: int, count: int, seed: int = 0,
                      tol: Tolerance = DEFAULT_TOL) -> dict:
    """Draw ``count`` ensembles and report certificate and recovery statistics.

    Recovery counts as a success when the recovered ensemble matches the
    generating one (ray overlaps >= 1 - 1e-7, weights within 1e-7).  The
    record is a deterministic function of the arguments.
    """
    if k < 1 or k > max(dims.m, dims.n):
        raise ContractError(f"k must lie in 1..max(m, n) = {max(dims.m, dims.n)}, got {k}")
    if count < 1:
        raise ContractError("count must be at least 1")

    gaps, fsvs, wmins, smallest = [], [], [], []
    valid = successes = 0
    max_residual = 0.0
    for i in range(count):
        rng = rng_for(seed, i)
        ens = random_ensemble(rng, dims, k)
        cert = certify_vk(ens, tol)
        gaps.append(cert.ray_gap)
        fsvs.append(cert.f_min_sv)
        wmins.append(cert.min_weight)
        smallest.append(min(cert.ray_gap, cert.f_min_sv, cert.min_weight))
        if not cert.valid:
            continue
        valid += 1
        try:
            rec = recover(density_of(ens), tol, seed=int(rng.integers(2**31)))
        except RegimeError:
            continue
        max_residual = max(max_residual, rec.residual)
        fe, ff, dw = match_ensembles(ens, rec.ensemble)
        if fe >= 1 - MATCH_TOL and ff >= 1 - MATCH_TOL and dw <= MATCH_TOL:
            successes += 1

    return {
        "header": {
            "dims": str(dims),
            "k": k,
            "count": count,
            "seed": seed,
            "measure": MEASURE_NOTE,
        },
        "certificate_valid_fraction": valid / count,
        "margins": {
            "ray_gap": _quantiles(gaps),
            "f_min_sv": _quantiles(fsvs),
            "min_weight": _quantiles(wmins),
        },
        "recovery": {
            "attempted": valid,
            "success_rate": successes / valid if valid else 0.0,
            "max_residual": max_residual,
        },
        "smallest_margin": [float(x) for x in smallest],
    }


def render_histogram_svg(values, path, title: str = "smallest certificate margin") -> None:
    """Static SVG histogram of ``log10`` of the values."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "sepfact"
    logs = np.log10(np.clip(np.asarray(values, dtype=float), 1e-300, None))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(logs, bins=30, color="#4c72b0")
    ax.set_xlabel("log10 margin")
    ax.set_ylabel("instances")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
