import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sepfact.decomposition import (
    certify_vk,
    coarse_decompose,
    group_rays,
    hjw_mixtures,
    length_bounds,
    match_ensembles,
    perturb_to_vk,
    product_vectors_in_subspace,
    recover,
    recover_unique,
)
from sepfact.errors import ContractError, DependentF, NotInRegime, RankTooHigh, RegimeError, Unbounded
from sepfact.numerics import range_basis
from sepfact.sampling import (
    planted_class_ensemble,
    random_ensemble,
    random_ensemble_with_margins,
    random_unit_vector,
    rng_for,
)
from sepfact.septests import bell_diagonal
from sepfact.states import DensityMatrix, Dims, Ensemble, ProductVector, density_of, pure_density, trace_distance

from conftest import ROUND_TRIP_DIMS, basis_vector

Q22 = Dims(2, 2)
E0, E1 = basis_vector(2, 0), basis_vector(2, 1)
DIAG_HALF = DensityMatrix(Q22, np.diag([0.5, 0, 0, 0.5]))


def _rays_match(found, expected, atol=1e-8):
    """Every expected product ray appears exactly once in ``found`` and nothing else."""
    if len(found) != len(expected):
        return False
    used = set()
    for pv in expected:
        hits = [i for i, x in enumerate(found)
                if abs(np.vdot(x.vector, pv.vector)) >= 1 - atol and i not in used]
        if len(hits) != 1:
            return False
        used.add(hits[0])
    return True


class TestCertificate:
    def test_orthogonal_pair(self):
        cert = certify_vk(Ensemble.build(Q22, [0.5, 0.5], [E0, E1], [E0, E1]))
        assert cert.valid and cert.k == 2
        assert cert.ray_gap == pytest.approx(1) and cert.f_min_sv == pytest.approx(1)
        assert cert.min_weight == 0.5

    def test_repeated_ray(self):
        cert = certify_vk(Ensemble.build(Q22, [0.5, 0.5], [E0, 1j * E0], [E0, E1]))
        assert not cert.valid
        assert "not distinct" in cert.reason
        assert cert.ray_gap < 1e-15

    def test_three_angles(self):
        angles = np.deg2rad([0, 45, 90])
        es = [np.array([np.cos(a), np.sin(a)]) for a in angles]
        fs = [basis_vector(3, i) for i in range(3)]
        cert = certify_vk(Ensemble.build(Dims(2, 3), [1, 1, 1], es, fs))
        assert cert.valid and cert.k == 3
        assert cert.ray_gap == pytest.approx(np.sqrt(1 - np.cos(np.pi / 4) ** 2), abs=1e-12)
        assert cert.f_min_sv == pytest.approx(1)

    def test_dependent_f(self):
        f = np.array([1, 1]) / np.sqrt(2)
        cert = certify_vk(Ensemble.build(Q22, [0.5, 0.5], [E0, E1], [f, -f]))
        assert not cert.valid and "dependent" in cert.reason

    def test_too_many_components(self, rng):
        cert = certify_vk(random_ensemble(rng, Q22, 3))
        assert not cert.valid and cert.f_min_sv == 0

    def test_single_component(self):
        cert = certify_vk(Ensemble.build(Q22, [1], [E0], [E1]))
        assert cert.valid and cert.ray_gap == 1.0

    def test_singular_value_oracle(self, rng):
        ens = random_ensemble(rng, Dims(3, 4), 3)
        fm = np.column_stack([pv.f for pv in ens.vectors])
        assert certify_vk(ens).f_min_sv == pytest.approx(np.sqrt(np.linalg.eigvalsh(fm.conj().T @ fm)[0]))

    def test_to_json_keys(self):
        cert = certify_vk(Ensemble.build(Q22, [1], [E0], [E1]))
        assert list(cert.to_json()) == ["k", "ray_gap", "f_min_sv", "min_weight", "valid"]


def test_group_rays_phases():
    v = np.array([1, 2j]) / np.sqrt(5)
    assert group_rays([v, E0, -1j * v, E1, E0]) == [[0, 2], [1, 4], [3]]


class TestRecover:
    def test_pure_product(self, rng):
        pv = ProductVector(random_unit_vector(rng, 3), random_unit_vector(rng, 2))
        ens = recover_unique(pure_density(pv.vector, Dims(3, 2)))
        assert len(ens) == 1 and ens.weights[0] == pytest.approx(1)
        assert ens.vectors[0].same_ray(pv)

    def test_diag_half(self):
        rec = recover(DIAG_HALF)
        expect = Ensemble.build(Q22, [0.5, 0.5], [E0, E1], [E0, E1])
        fe, ff, dw = match_ensembles(rec.ensemble, expect)
        assert min(fe, ff) == pytest.approx(1, abs=1e-12) and dw < 1e-12
        assert rec.residual <= 1e-8 and rec.certificate.valid

    def test_diag_half_oracle_agrees(self):
        q = range_basis(DIAG_HALF.mat)
        found = product_vectors_in_subspace(q.T, Q22)
        assert _rays_match(found, [ProductVector(E0, E0), ProductVector(E1, E1)])

    def test_maximally_mixed(self):
        with pytest.raises(NotInRegime):
            recover(DensityMatrix(Q22, np.eye(4) / 4))

    def test_entangled_pure_state(self):
        v = np.array([1, 0, 0, 1]) / np.sqrt(2)
        with pytest.raises(NotInRegime):
            recover(pure_density(v, Q22))

    def test_repeated_ray_is_rejected(self, rng):
        # a 3-ball face: same left ray, two right factors, decomposition not unique;
        # the pencil eigenvalues of the shared ray coincide
        ens = planted_class_ensemble(rng, Dims(2, 3), [2])
        with pytest.raises(RegimeError):
            recover(density_of(ens))

    def test_deterministic(self, rng):
        rho = density_of(random_ensemble_with_margins(rng, Dims(3, 4), 4, 0.05))
        a, b = recover(rho, seed=7), recover(rho, seed=7)
        assert np.array_equal(a.ensemble.e_matrix, b.ensemble.e_matrix)
        assert a.residual == b.residual

    def test_output_is_canonical(self, rng):
        rho = density_of(random_ensemble_with_margins(rng, Dims(3, 3), 3, 0.05))
        w = recover_unique(rho).weights
        assert np.all(np.diff(w) <= 0)

    @pytest.mark.parametrize("dims", ROUND_TRIP_DIMS, ids=str)
    def test_round_trip_each_dims(self, dims):
        for i in range(4):
            rng = rng_for(11, dims.m, dims.n, i)
            k = int(rng.integers(1, max(dims.m, dims.n) + 1))
            ens = random_ensemble_with_margins(rng, dims, k, 0.05)
            rec = recover(density_of(ens), seed=i)
            fe, ff, dw = match_ensembles(rec.ensemble, ens)
            assert min(fe, ff) >= 1 - 1e-7 and dw <= 1e-7 and rec.residual <= 1e-8

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(ROUND_TRIP_DIMS), st.integers(0, 2**32 - 1), st.data())
    def test_round_trip_property(self, dims, seed, data):
        k = data.draw(st.integers(1, max(dims.m, dims.n)))
        ens = random_ensemble_with_margins(rng_for(seed), dims, k, 0.05)
        fe, ff, dw = match_ensembles(recover_unique(density_of(ens)), ens)
        assert min(fe, ff) >= 1 - 1e-7 and dw <= 1e-7


class TestOracle:
    def test_single_ray(self, rng):
        pv = ProductVector(random_unit_vector(rng, 2), random_unit_vector(rng, 3))
        found = product_vectors_in_subspace([pv.vector], Dims(2, 3))
        assert _rays_match(found, [pv])

    def test_two_rays(self, rng):
        pvs = [ProductVector(random_unit_vector(rng, 3), random_unit_vector(rng, 3)) for _ in range(2)]
        found = product_vectors_in_subspace([p.vector for p in pvs], Dims(3, 3))
        assert _rays_match(found, pvs)

    def test_shared_left_factor_gives_continuum(self, rng):
        e = random_unit_vector(rng, 2)
        f1, f2 = random_unit_vector(rng, 3), random_unit_vector(rng, 3)
        found = product_vectors_in_subspace([np.kron(e, f1), np.kron(e, f2)], Dims(2, 3), budget=40)
        # many distinct rays, all with left factor e and right factor in span{f1, f2}
        assert len(found) > 2
        span = range_basis(np.column_stack([f1, f2]))
        for pv in found:
            assert abs(np.vdot(pv.e, e)) == pytest.approx(1, abs=1e-9)
            assert np.linalg.norm(pv.f - span @ (span.conj().T @ pv.f)) < 1e-9

    def test_polish_finishes_slow_runs(self):
        # 2x4 span holding exactly four product rays, two with tiny basins
        rng = rng_for(2002, 3)
        dims = Dims(2, 4)
        ens = random_ensemble_with_margins(rng, dims, int(rng.integers(1, 5)), 0.05)
        assert len(ens) == 4
        q = range_basis(density_of(ens).mat)
        found = product_vectors_in_subspace(q.T, dims, budget=60, max_iter=50)
        assert _rays_match(found, ens.vectors)

    def test_entangled_span_has_none(self):
        v = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert product_vectors_in_subspace([v], Q22, budget=20) == []

    def test_length_check(self):
        with pytest.raises(ContractError):
            product_vectors_in_subspace([np.ones(5)], Q22)


class TestCoarse:
    def test_distinct_rays_are_singletons(self, rng):
        ens = random_ensemble_with_margins(rng, Dims(3, 3), 3, 0.05)
        cd = coarse_decompose(ens)
        assert cd.q == 3 and all(b.dim == 1 for b in cd.blocks)
        for b in cd.blocks:
            assert np.linalg.matrix_rank(b.sigma.mat, tol=1e-10) == 1

    def test_grouping_weights(self):
        e, e2 = E0, np.array([1, 1]) / np.sqrt(2)
        fs = [basis_vector(3, i) for i in range(3)]
        ens = Ensemble.build(Dims(2, 3), [0.5, 0.25, 0.25], [e, e, e2], fs)
        cd = coarse_decompose(ens)
        assert [b.weight for b in cd.blocks] == [0.75, 0.25]
        assert cd.blocks[0].members == (0, 1) and cd.blocks[0].dim == 2

    def test_reconstruction_with_shared_rays(self, rng):
        ens = planted_class_ensemble(rng, Dims(3, 4), [2, 2])
        cd = coarse_decompose(ens)
        assert cd.q == 2
        assert np.linalg.norm(cd.density() - density_of(ens).mat) <= 1e-10

    def test_block_state_lives_on_block_subspace(self, rng):
        ens = planted_class_ensemble(rng, Dims(3, 4), [3, 1])
        for b in coarse_decompose(ens).blocks:
            proj = b.L_basis @ b.L_basis.conj().T
            assert np.allclose(proj @ b.sigma.mat @ proj, b.sigma.mat, atol=1e-12)

    def test_dependent_f_rejected(self, rng):
        with pytest.raises(DependentF):
            coarse_decompose(random_ensemble(rng, Q22, 3))


class TestHjw:
    def test_pure(self, rng):
        v = random_unit_vector(rng, 4)
        out = hjw_mixtures(np.outer(v, v.conj()), 1)
        assert len(out) == 1 and out[0][0] == pytest.approx(1)
        assert abs(np.vdot(out[0][1], v)) == pytest.approx(1)

    @pytest.mark.parametrize("seed", range(5))
    def test_maximally_mixed_qubit(self, seed):
        out = hjw_mixtures(np.eye(2) / 2, 2, seed)
        rebuilt = sum(w * np.outer(x, x.conj()) for w, x in out)
        assert np.allclose(rebuilt, np.eye(2) / 2, atol=1e-10)

    def test_seed_changes_decomposition(self):
        a = hjw_mixtures(np.eye(2) / 2, 2, 0)
        b = hjw_mixtures(np.eye(2) / 2, 2, 1)
        assert abs(abs(np.vdot(a[0][1], b[0][1])) - 1) > 1e-6

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(0, 6))
    def test_reconstruction(self, seed, rank, extra):
        rng = rng_for(seed)
        g = rng.standard_normal((5, rank)) + 1j * rng.standard_normal((5, rank))
        sigma = g @ g.conj().T
        sigma /= np.trace(sigma).real
        out = hjw_mixtures(sigma, rank + extra, seed)
        assert len(out) == rank + extra
        rebuilt = sum(w * np.outer(x, x.conj()) for w, x in out)
        assert np.linalg.norm(rebuilt - sigma) <= 1e-10

    def test_bounds(self):
        with pytest.raises(RankTooHigh):
            hjw_mixtures(np.eye(3) / 3, 2)
        with pytest.raises(ContractError):
            hjw_mixtures(np.eye(3) / 3, 65)


class TestLength:
    def test_pure_product(self):
        lb = length_bounds(DensityMatrix(Q22, np.diag([1.0, 0, 0, 0])))
        assert (lb.lower, lb.upper, lb.exact) == (1, 1, 1)

    def test_octahedron_vertex(self):
        lb = length_bounds(bell_diagonal([0.5, 0.5, 0, 0]))
        assert (lb.lower, lb.upper, lb.exact) == (2, 2, 2)

    def test_diag_half(self):
        lb = length_bounds(DIAG_HALF)
        assert (lb.lower, lb.upper, lb.exact) == (2, 2, 2)

    def test_known_ensemble_outside_regime(self, rng):
        ens = random_ensemble(rng, Q22, 4)
        lb = length_bounds(density_of(ens), known=ens)
        assert lb.lower == 4 and lb.upper == 4 and lb.exact == 4

    def test_unknown_and_unrecoverable(self):
        with pytest.raises(Unbounded):
            length_bounds(DensityMatrix(Q22, np.eye(4) / 4))


class TestPerturb:
    @pytest.mark.parametrize("delta", [1e-2, 1e-4])
    def test_repairs_duplicated_ray(self, rng, delta):
        ens = planted_class_ensemble(rng, Dims(3, 3), [2, 1])
        assert not certify_vk(ens).valid
        fixed = perturb_to_vk(ens, delta, seed=3)
        assert certify_vk(fixed).valid
        assert trace_distance(density_of(fixed), density_of(ens)) <= delta

    def test_rejects_too_many(self, rng):
        with pytest.raises(ContractError):
            perturb_to_vk(random_ensemble(rng, Q22, 3), 1e-2)


def test_match_ensembles_size_mismatch(rng):
    a, b = random_ensemble(rng, Q22, 1), random_ensemble(rng, Q22, 2)
    assert match_ensembles(a, b) == (0.0, 0.0, float("inf"))
