from __future__ import annotations

import numpy as np
import pytest

from momentsep.errors import DomainError, IncompleteTmsError, IntegrityError
from momentsep.polynomial import Polynomial
from momentsep.quantum import DensityMatrix, PartitionSpec, StateTensor, state_to_tensor
from momentsep.semialgebraic import unit_sphere
from momentsep.tms import (Tms, admissible_support, flatness_check, local_support, localizing_matrix,
                           monomial_basis, moment_matrix, mu_to_alpha, numerical_rank, shifted_tms,
                           tensor_to_tms, tms_from_atoms)

from conftest import TETRAHEDRON, dicke, maximally_mixed_symmetric, random_sphere_points, sym_tms

SPHERE = unit_sphere().constraints[0][0]


class TestMonomialBasis:
    def test_degree_one(self):
        assert monomial_basis(3, 1) == [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]

    def test_degree_two(self):
        assert monomial_basis(3, 2) == [
            (0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1),
            (2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2),
        ]

    @pytest.mark.parametrize("n,k", [(1, 4), (3, 3), (6, 2)])
    def test_prefix_and_size(self, n, k):
        small, big = monomial_basis(n, k), monomial_basis(n, k + 1)
        assert big[: len(small)] == small
        from math import comb
        assert len(big) == comb(n + k + 1, k + 1)


class TestMuToAlpha:
    def test_two_qubits(self):
        spec = PartitionSpec.product((2, 2))
        assert mu_to_alpha((2, 3), spec) == (0, 1, 0, 0, 0, 1)
        assert mu_to_alpha((1, 0), spec) == (1, 0, 0, 0, 0, 0)

    def test_symmetric_collapse(self):
        assert mu_to_alpha((0, 0, 0, 1, 1, 2), PartitionSpec.symmetric(6)) == (2, 1, 0)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            mu_to_alpha((4, 0), PartitionSpec.symmetric(2))

    def test_injective_for_product_specs(self):
        spec = PartitionSpec.product((2, 3))
        seen = {mu_to_alpha(mu, spec) for mu in np.ndindex(4, 9)}
        assert len(seen) == 36
        assert all(sum(a[:3]) <= 1 and sum(a[3:]) <= 1 for a in seen)


class TestTensorToTms:
    def test_coherent(self):
        y = sym_tms(DensityMatrix(np.diag([1.0, 0, 0, 0]), (2, 2)))
        for alpha, v in y.values.items():
            assert v == pytest.approx(1.0 if alpha in {(0, 0, 0), (0, 0, 1), (0, 0, 2)} else 0.0, abs=1e-14)

    def test_ps_over_three(self):
        y = sym_tms(maximally_mixed_symmetric(2))
        for alpha, v in y.values.items():
            expected = 1.0 if alpha == (0, 0, 0) else (1 / 3 if alpha in {(2, 0, 0), (0, 2, 0), (0, 0, 2)} else 0)
            assert v == pytest.approx(expected, abs=1e-14)

    def test_general_product(self):
        plus = np.full((2, 2), 0.5)
        rho = DensityMatrix(np.kron(np.diag([1.0, 0]), plus), (2, 2))
        y = tensor_to_tms(state_to_tensor(rho, PartitionSpec.product((2, 2))))
        assert y.n == 6 and y.degree == 2
        assert y[(0, 0, 1, 0, 0, 0)] == pytest.approx(1.0)
        assert y[(0, 0, 0, 1, 0, 0)] == pytest.approx(1.0)
        assert y[(0, 0, 1, 1, 0, 0)] == pytest.approx(1.0)
        assert (2, 0, 0, 0, 0, 0) not in y

    def test_inconsistent_symmetric_entries(self):
        coords = np.diag([1.0, 1 / 3, 1 / 3, 1 / 3])
        coords[0, 1] = 0.2
        with pytest.raises(IntegrityError):
            tensor_to_tms(StateTensor(PartitionSpec.symmetric(2), coords))

    def test_known_support_restricts(self):
        spec = PartitionSpec.symmetric(2)
        spec = spec.with_support(local_support(spec))
        y = tensor_to_tms(state_to_tensor(dicke(2), spec))
        assert set(y.values) == {(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)}
        assert y.degree == 2

    def test_admissible_support_general(self):
        spec = PartitionSpec.product((2, 2))
        assert len(admissible_support(spec)) == 16


class TestMomentMatrices:
    def test_point_mass(self):
        y = tms_from_atoms([[0, 0, 1]], [1.0], 2)
        v = np.array([1, 0, 0, 1.0])
        np.testing.assert_allclose(moment_matrix(y, 1), np.outer(v, v))

    def test_two_antipodal_atoms(self):
        y = tms_from_atoms([[1, 0, 0], [-1, 0, 0]], [0.5, 0.5], 2)
        np.testing.assert_allclose(moment_matrix(y, 1), np.diag([1, 1, 0, 0]), atol=1e-15)

    def test_layout_of_symmetric_two_qubit(self):
        x = state_to_tensor(dicke(2), PartitionSpec.symmetric(2)).coords
        np.testing.assert_allclose(moment_matrix(sym_tms(dicke(2)), 1), x, atol=1e-14)

    def test_hankel_property(self, rng):
        y = tms_from_atoms(random_sphere_points(rng, 5), rng.random(5), 4)
        m = moment_matrix(y, 2)
        basis = monomial_basis(3, 2)
        for i, a in enumerate(basis):
            for j, b in enumerate(basis):
                s = tuple(p + q for p, q in zip(a, b))
                assert m[i, j] == y[s]

    def test_missing_moment(self):
        y = Tms(3, 2, {(0, 0, 0): 1.0})
        with pytest.raises(IncompleteTmsError):
            moment_matrix(y, 1)

    def test_order_too_high(self):
        with pytest.raises(DomainError):
            moment_matrix(tms_from_atoms([[0, 0, 1]], [1.0], 2), 2)

    def test_localizing_matches_second_order_layout(self, rng):
        z = tms_from_atoms(rng.standard_normal((4, 3)), rng.random(4), 4)
        loc = localizing_matrix(SPHERE, z, 2)
        basis = monomial_basis(3, 1)
        for i, a in enumerate(basis):
            for j, b in enumerate(basis):
                ab = tuple(p + q for p, q in zip(a, b))
                entry = sum(z[tuple(p + q for p, q in zip(ab, d))] for d in [(2, 0, 0), (0, 2, 0), (0, 0, 2)]) - z[ab]
                assert loc[i, j] == pytest.approx(entry)

    def test_localizing_vanishes_on_sphere(self, rng):
        z = tms_from_atoms(random_sphere_points(rng, 3), rng.random(3), 4)
        assert np.abs(localizing_matrix(SPHERE, z, 2)).max() < 1e-14

    def test_ball_at_origin(self, rng):
        ball = -SPHERE
        z = tms_from_atoms([[0.0, 0.0, 0.0]], [1.0], 4)
        np.testing.assert_allclose(localizing_matrix(ball, z, 2), moment_matrix(z, 1))


class TestShifted:
    def test_degree_zero_rejected(self):
        with pytest.raises(DomainError):
            shifted_tms(Polynomial.constant(3, 1.0), tms_from_atoms([[0, 0, 1]], [1.0], 2))

    def test_linear_shift_on_point_mass(self):
        pt = np.array([0.3, -0.2, 0.5])
        z = tms_from_atoms([pt], [1.0], 3)
        s = shifted_tms(Polynomial.variable(3, 0), z)
        ref = tms_from_atoms([pt], [1.0], 2)
        for a, v in s.values.items():
            assert v == pytest.approx(pt[0] * ref[a])

    def test_sphere_shift_vanishes(self, rng):
        z = tms_from_atoms(random_sphere_points(rng, 4), rng.random(4), 4)
        assert max(abs(v) for v in shifted_tms(SPHERE, z).values.values()) < 1e-14


class TestRankAndFlatness:
    def test_numerical_rank_examples(self):
        assert numerical_rank(np.eye(4)) == 4
        v = np.arange(1.0, 5.0)
        assert numerical_rank(np.outer(v, v)) == 1
        assert numerical_rank(np.diag([1.0, 1e-9])) == 1

    def test_single_atom_flat(self):
        assert flatness_check(tms_from_atoms([[0, 0, 1]], [1.0], 4), 2, 1)

    def test_tetrahedron_flat_rank_four(self):
        z = tms_from_atoms(TETRAHEDRON, np.full(4, 0.25), 6)
        assert flatness_check(z, 3, 1)
        assert numerical_rank(moment_matrix(z, 3)) == 4

    def test_random_psd_perturbation_not_flat(self, rng):
        z = tms_from_atoms(TETRAHEDRON, np.full(4, 0.25), 4)
        noisy = tms_from_atoms(random_sphere_points(rng, 12), rng.random(12) * 0.2, 4)
        mixed = Tms(3, 4, {a: z[a] + noisy[a] for a in z.values})
        assert not flatness_check(mixed, 2, 1)

    def test_json_round_trip(self, rng):
        z = tms_from_atoms(random_sphere_points(rng, 2), [0.4, 0.6], 3)
        back = Tms.from_json(z.to_json())
        assert back == z
