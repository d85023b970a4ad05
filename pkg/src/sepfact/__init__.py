"""Unique decompositions, faces and automorphisms of separable bipartite states."""
from .automorphisms import (
    AutomorphismWord,
    CanonicalAutomorphism,
    LocalUnitary,
    PT,
    Swap,
    apply,
    canonicalize,
    extends_to_full_state_space,
    witness_nonpositivity,
)
from .decomposition import (
    certify_vk,
    coarse_decompose,
    hjw_mixtures,
    length_bounds,
    product_vectors_in_subspace,
    recover,
    recover_unique,
)
from .faces import face_contains, face_of_ensemble, face_relation, is_simplex
from .kernels import BACKEND
from .numerics import DEFAULT_TOL, Tolerance
from .septests import bell_diagonal, octahedron_check, ppt_test
from .states import (
    DensityMatrix,
    Dims,
    Ensemble,
    ProductVector,
    Side,
    density_of,
    marginal,
    partial_transpose,
    validate_state,
)

__version__ = "0.1.0"

__all__ = [
    "AutomorphismWord", "CanonicalAutomorphism", "LocalUnitary", "PT", "Swap",
    "apply", "canonicalize", "extends_to_full_state_space", "witness_nonpositivity",
    "certify_vk", "coarse_decompose", "hjw_mixtures", "length_bounds",
    "product_vectors_in_subspace", "recover", "recover_unique",
    "face_contains", "face_of_ensemble", "face_relation", "is_simplex",
    "BACKEND", "DEFAULT_TOL", "Tolerance",
    "bell_diagonal", "octahedron_check", "ppt_test",
    "DensityMatrix", "Dims", "Ensemble", "ProductVector", "Side",
    "density_of", "marginal", "partial_transpose", "validate_state",
]
