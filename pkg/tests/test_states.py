import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sepfact.errors import ContractError, DimensionError, NotHermitian, NotPositive, TraceNotOne
from sepfact.numerics import rank_svd
from sepfact.sampling import random_density_matrix, random_ensemble, random_unit_vector, rng_for
from sepfact.states import (
    DensityMatrix,
    Dims,
    Ensemble,
    ProductVector,
    Side,
    density_of,
    marginal,
    partial_transpose,
    phase_normalize,
    pure_density,
    ray_gap,
    trace_distance,
    validate_state,
)

from conftest import basis_vector, bell_projector

E0, E1 = basis_vector(2, 0), basis_vector(2, 1)
Q22 = Dims(2, 2)


def _brute_partial_trace_over_a(mat, m, n):
    out = np.zeros((n, n), dtype=complex)
    for a in range(m):
        for j in range(n):
            for k in range(n):
                out[j, k] += mat[a * n + j, a * n + k]
    return out


class TestDims:
    def test_parse(self):
        assert Dims.parse("3x4") == Dims(3, 4)
        assert Dims.parse("2X2").total == 4

    @pytest.mark.parametrize("text", ["3", "3x", "ax2", "0x2", "2x-1"])
    def test_parse_rejects(self, text):
        with pytest.raises(ContractError):
            Dims.parse(text)

    def test_swapped(self):
        assert Dims(2, 5).swapped() == Dims(5, 2)


class TestProductVector:
    def test_requires_unit_norm(self):
        with pytest.raises(ContractError):
            ProductVector(np.array([1.0, 1.0]), E0)

    def test_from_raw_normalises(self):
        pv = ProductVector.from_raw([3, 4], [0, 2j])
        assert np.linalg.norm(pv.e) == pytest.approx(1)
        assert np.allclose(pv.vector, np.kron([0.6, 0.8], [0, 1j]))

    def test_arrays_are_frozen(self):
        pv = ProductVector(E0, E1)
        with pytest.raises(ValueError):
            pv.e[0] = 2

    def test_same_ray_ignores_phase(self, rng):
        e, f = random_unit_vector(rng, 3), random_unit_vector(rng, 2)
        a = ProductVector(e, f)
        b = ProductVector(np.exp(0.7j) * e, np.exp(-2.1j) * f)
        assert a.same_ray(b)
        assert np.allclose(a.projector(), b.projector())

    def test_phase_normalize(self):
        v = np.array([0.1, -0.9j])
        w = phase_normalize(v)
        assert w[1].real == pytest.approx(0.9) and w[1].imag == 0
        assert abs(np.vdot(v, w)) == pytest.approx(np.linalg.norm(v) ** 2)


class TestEnsemble:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ContractError):
            Ensemble(Q22, ((0.5, ProductVector(E0, E0)),))

    def test_weights_positive(self):
        with pytest.raises(ContractError):
            Ensemble.build(Q22, [1.0, 0.0], [E0, E1], [E0, E1])

    def test_dims_checked(self):
        with pytest.raises(DimensionError):
            Ensemble(Dims(2, 3), ((1.0, ProductVector(E0, E0)),))

    def test_canonical_is_order_and_phase_invariant(self, rng):
        ens = random_ensemble(rng, Dims(3, 3), 3)
        shuffled = Ensemble(ens.dims, tuple(
            (w, ProductVector(np.exp(1j * i) * pv.e, -pv.f))
            for i, (w, pv) in enumerate(reversed(ens.components))
        ))
        a, b = ens.canonical(), shuffled.canonical()
        assert np.allclose(a.weights, b.weights)
        for x, y in zip(a.vectors, b.vectors):
            assert np.allclose(x.e, y.e) and np.allclose(x.f, y.f)


class TestDensityOf:
    def test_single_component(self):
        ens = Ensemble.build(Q22, [1], [E0], [E0])
        assert np.allclose(density_of(ens).mat, np.diag([1, 0, 0, 0]))

    def test_orthogonal_pair(self):
        ens = Ensemble.build(Q22, [0.5, 0.5], [E0, E1], [E0, E1])
        assert np.allclose(density_of(ens).mat, np.diag([0.5, 0, 0, 0.5]))

    def test_random_three_components(self, rng):
        rho = density_of(random_ensemble(rng, Dims(3, 3), 3))
        assert np.trace(rho.mat).real == pytest.approx(1, abs=1e-12)
        assert np.linalg.eigvalsh(rho.mat)[0] >= -1e-12
        assert rho.rank() <= 3

    def test_explicit_sum(self, rng):
        ens = random_ensemble(rng, Dims(2, 3), 4)
        expect = sum(w * np.outer(np.kron(pv.e, pv.f), np.kron(pv.e, pv.f).conj())
                     for w, pv in ens.components)
        assert np.allclose(density_of(ens).mat, expect, atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.99))
    def test_affine(self, seed, t):
        rng = rng_for(seed)
        a, b = random_ensemble(rng, Dims(2, 3), 2), random_ensemble(rng, Dims(2, 3), 3)
        mixed = density_of(a.mix(b, t)).mat
        assert np.allclose(mixed, t * density_of(a).mat + (1 - t) * density_of(b).mat, atol=1e-12)


class TestMarginal:
    def test_product_basis_state(self):
        rho = DensityMatrix(Q22, np.diag([1.0, 0, 0, 0]))
        assert np.allclose(marginal(rho, Side.B).mat, np.diag([1, 0]))

    @pytest.mark.parametrize("side", ["A", "B"])
    def test_bell(self, side):
        assert np.allclose(marginal(bell_projector(), side, Q22).mat, np.eye(2) / 2)

    def test_against_brute_force(self, rng):
        dims = Dims(3, 4)
        rho = random_density_matrix(rng, dims)
        assert np.allclose(marginal(rho, "B").mat, _brute_partial_trace_over_a(rho.mat, 3, 4), atol=1e-14)

    def test_rank_equals_size_with_independent_f(self, rng):
        ens = random_ensemble(rng, Dims(3, 4), 3)
        assert rank_svd(marginal(density_of(ens), "B").mat) == 3

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4), st.integers(1, 5))
    def test_marginals_of_ensembles(self, seed, m, n, k):
        ens = random_ensemble(rng_for(seed), Dims(m, n), k)
        rho = density_of(ens)
        w = ens.weights
        ea = (ens.e_matrix * w) @ ens.e_matrix.conj().T
        fb = (ens.f_matrix * w) @ ens.f_matrix.conj().T
        assert np.allclose(marginal(rho, "A").mat, ea, atol=1e-12)
        assert np.allclose(marginal(rho, "B").mat, fb, atol=1e-12)
        assert np.trace(marginal(rho, "A").mat).real == pytest.approx(1, abs=1e-12)


class TestPartialTranspose:
    def test_bell_spectrum(self):
        ev = np.linalg.eigvalsh(partial_transpose(bell_projector(), "A", Q22))
        assert np.allclose(ev, [-0.5, 0.5, 0.5, 0.5])

    def test_product_state_stays_positive(self, rng):
        pv = ProductVector(random_unit_vector(rng, 3), random_unit_vector(rng, 2))
        for side in "AB":
            pt = partial_transpose(pv.projector(), side, Dims(3, 2))
            assert np.linalg.eigvalsh(pt)[0] >= -1e-14

    def test_index_formula(self, rng):
        m, n = 2, 3
        rho = random_density_matrix(rng, Dims(m, n)).mat
        pt = partial_transpose(rho, "B", Dims(m, n))
        for a in range(m):
            for j in range(n):
                for b in range(m):
                    for k in range(n):
                        assert pt[a * n + j, b * n + k] == rho[a * n + k, b * n + j]

    def test_both_sides_is_full_transpose(self, rng):
        dims = Dims(3, 2)
        rho = random_density_matrix(rng, dims).mat
        both = partial_transpose(partial_transpose(rho, "A", dims), "B", dims)
        assert np.array_equal(both, rho.T)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from("AB"))
    def test_involution_trace_hermitian(self, seed, side):
        dims = Dims(2, 3)
        rho = random_density_matrix(rng_for(seed), dims).mat
        pt = partial_transpose(rho, side, dims)
        assert np.array_equal(partial_transpose(pt, side, dims), rho)
        assert np.allclose(pt, pt.conj().T)
        assert np.trace(pt) == pytest.approx(np.trace(rho))


class TestValidate:
    def test_maximally_mixed(self):
        rho = validate_state(np.eye(4) / 4, Q22)
        assert isinstance(rho, DensityMatrix)

    def test_not_positive(self):
        with pytest.raises(NotPositive) as exc:
            validate_state(np.diag([1, -0.001, 0.001, 0]), Q22)
        assert exc.value.deviation == pytest.approx(0.001)

    def test_order_positivity_on_unit_trace(self):
        with pytest.raises(NotPositive):
            validate_state(np.diag([0.6, 0.6, -0.1, -0.1]), Q22)

    def test_trace_checked_before_positivity(self):
        with pytest.raises(TraceNotOne):
            validate_state(np.diag([0.9, 0.9, -0.1, 0]), Q22)

    def test_hermitian_checked_first(self):
        m = np.diag([2.0, -1, 0, 0]).astype(complex)
        m[0, 1] = 1
        with pytest.raises(NotHermitian):
            validate_state(m, Q22)

    def test_shape(self):
        with pytest.raises(DimensionError):
            validate_state(np.eye(3) / 3, Q22)


def test_ray_gap_accuracy():
    e = np.array([1, 1j]) / np.sqrt(2)
    assert ray_gap(e, np.exp(0.3j) * e) < 1e-15
    assert ray_gap(E0, np.array([1, 1]) / np.sqrt(2)) == pytest.approx(np.sin(np.pi / 4))


def test_trace_distance():
    assert trace_distance(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(1)
    assert trace_distance(pure_density(E0, Dims(2, 1)), pure_density(E0, Dims(2, 1))) == 0
