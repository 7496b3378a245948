"""Angular-momentum algebra against independent oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiraltrain.angmom import (
    HalfInt,
    cos2beta_matrix_caseb,
    cos2beta_matrix_linear,
    cos2beta_structure_linear,
    rotmat_element_caseb,
    rotmat_element_linear,
    wigner_3j,
    wigner_6j,
)
from chiraltrain.molecule import caseb_basis, linear_basis

from oracles import (
    caseb_element_product_oracle,
    cos2beta_func,
    oracle_3j,
    oracle_6j,
    quad_element,
    quad_rotmat_element,
)


def test_halfint_exact_representation():
    assert HalfInt.of(2).twice == 4
    assert HalfInt.of(1.5).twice == 3
    assert float(HalfInt.of(0.5)) == 0.5
    assert HalfInt.of(HalfInt(3)) == HalfInt(3)
    assert (HalfInt.of(1) + HalfInt.of(0.5)).twice == 3
    assert (-HalfInt.of(0.5)).twice == -1
    assert HalfInt.of(2).is_integer and not HalfInt.of(1.5).is_integer
    with pytest.raises(ValueError):
        HalfInt.of(0.3)


class TestWigner3j:
    def test_empty_coupling_identity(self):
        assert wigner_3j(0, 0, 0, 0, 0, 0) == 1.0

    def test_triangle_violation_is_zero(self):
        assert wigner_3j(1, 1, 3, 0, 0, 0) == 0.0

    def test_m_sum_violation_is_zero(self):
        assert wigner_3j(2, 2, 2, 1, 1, 1) == 0.0

    def test_220_value(self):
        # frozen from the exact Racah sum: +1/sqrt(5)
        assert wigner_3j(2, 2, 0, 0, 0, 0) == pytest.approx(
            0.4472135954999579, abs=1e-15
        )

    def test_halfint_arguments(self):
        v = wigner_3j(HalfInt(3), HalfInt(3), 1, HalfInt(1), HalfInt(-3), 1)
        assert v == pytest.approx(oracle_3j(1.5, 1.5, 1, 0.5, -1.5, 1), abs=1e-14)

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_oracle_on_random_arguments(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(200):
            dj = rng.integers(0, 13, size=3)
            dm = [rng.integers(-j, j + 1) for j in dj]
            args = [j / 2 for j in dj] + [
                (m if (m - j) % 2 == 0 else m - 1) / 2 for m, j in zip(dm, dj)
            ]
            assert wigner_3j(*args) == pytest.approx(
                oracle_3j(*args), abs=1e-13
            )

    @given(
        j1=st.integers(0, 6), j2=st.integers(0, 6), j3=st.integers(0, 12),
        m1=st.integers(-6, 6), m2=st.integers(-6, 6),
    )
    @settings(max_examples=150, deadline=None)
    def test_column_permutation_symmetry(self, j1, j2, j3, m1, m2):
        m3 = -m1 - m2
        base = wigner_3j(j1, j2, j3, m1, m2, m3)
        even = wigner_3j(j2, j3, j1, m2, m3, m1)
        odd = wigner_3j(j2, j1, j3, m2, m1, m3)
        assert even == pytest.approx(base, abs=1e-13)
        assert odd == pytest.approx((-1) ** (j1 + j2 + j3) * base, abs=1e-13)

    def test_orthogonality(self):
        for j1 in range(4):
            for j2 in range(4):
                for j3 in range(abs(j1 - j2), j1 + j2 + 1):
                    for j3p in range(abs(j1 - j2), j1 + j2 + 1):
                        for m3 in range(-j3, j3 + 1):
                            for m3p in range(-j3p, j3p + 1):
                                total = sum(
                                    (2 * j3 + 1)
                                    * wigner_3j(j1, j2, j3, m1, m2, m3)
                                    * wigner_3j(j1, j2, j3p, m1, m2, m3p)
                                    for m1 in range(-j1, j1 + 1)
                                    for m2 in range(-j2, j2 + 1)
                                )
                                expect = 1.0 if (j3, m3) == (j3p, m3p) else 0.0
                                assert abs(total - expect) < 1e-12


class TestWigner6j:
    def test_triad_violation_is_zero(self):
        assert wigner_6j(1, 1, 3, 1, 1, 1) == 0.0

    def test_special_case_l1_zero(self):
        # {j1 j2 j3; 0 j3 j2} = (-1)^(j1+j2+j3)/sqrt((2j2+1)(2j3+1))
        assert wigner_6j(1, 2, 2, 0, 2, 2) == pytest.approx(-0.2, abs=1e-15)
        for j1, j2, j3 in [(2, 3, 4), (1, 1, 1), (0, 5, 5)]:
            expect = (-1) ** (j1 + j2 + j3) / math.sqrt(
                (2 * j2 + 1) * (2 * j3 + 1)
            )
            assert wigner_6j(j1, j2, j3, 0, j3, j2) == pytest.approx(
                expect, abs=1e-14
            )

    def test_112_value(self):
        assert wigner_6j(1, 1, 2, 1, 1, 2) == pytest.approx(
            oracle_6j(1, 1, 2, 1, 1, 2), abs=1e-14
        )

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_oracle_on_random_arguments(self, seed):
        rng = np.random.default_rng(100 + seed)
        for _ in range(200):
            args = [j / 2 for j in rng.integers(0, 13, size=6)]
            assert wigner_6j(*args) == pytest.approx(
                oracle_6j(*args), abs=1e-13
            )


class TestRotMatElements:
    def test_scalar_between_s_states_vanishes(self):
        assert rotmat_element_linear(0, 0, 0, 0, 0) == 0.0

    def test_values_against_quadrature(self):
        cases = [
            (2, 0, 0, 0, 0),
            (2, 2, 0, 0, 2),
            (2, -2, 0, 0, -2),
            (4, 2, 2, 0, 2),
            (3, 1, 3, 1, 0),
            (5, -3, 3, -1, -2),
        ]
        for j, m, jp, mp, m0 in cases:
            assert rotmat_element_linear(j, m, jp, mp, m0) == pytest.approx(
                complex(quad_rotmat_element(j, m, jp, mp, m0)).real, abs=1e-10
            )

    def test_known_values(self):
        inv_sqrt5 = 1.0 / math.sqrt(5.0)
        assert rotmat_element_linear(2, 0, 0, 0, 0) == pytest.approx(inv_sqrt5)
        assert rotmat_element_linear(2, 2, 0, 0, 2) == pytest.approx(inv_sqrt5)


class TestCos2BetaLinear:
    def test_isotropic_diagonal(self):
        basis = linear_basis(0, 0, 4)
        mat = cos2beta_matrix_linear(basis, 0.0)
        assert mat.entry(0, 0) == pytest.approx(1.0 / 3.0)

    def test_dj_one_forbidden(self):
        basis = ((0, 0), (1, 0), (2, 0))
        mat = cos2beta_matrix_linear(basis, 0.0)
        assert mat.entry(1, 0) == 0.0

    def test_20_00_element(self):
        basis = linear_basis(0, 0, 4)
        mat = cos2beta_matrix_linear(basis, 0.0)
        idx = {lab: i for i, lab in enumerate(basis)}
        assert mat.entry(idx[(2, 0)], idx[(0, 0)]) == pytest.approx(
            -1.0 / (3.0 * math.sqrt(5.0)), abs=1e-14
        )

    def test_empty_basis_rejected(self):
        with pytest.raises(ValueError):
            cos2beta_matrix_linear((), 0.0)

    @pytest.mark.parametrize("angle", [0.0, 0.31, 2.2])
    def test_matches_quadrature(self, angle):
        basis = tuple((j, m) for j in range(5) for m in range(-j, j + 1))
        dense = cos2beta_matrix_linear(basis, angle).to_dense()
        for a, (j, m) in enumerate(basis):
            for b, (jp, mp) in enumerate(basis):
                if abs(j - jp) > 2 or abs(m - mp) > 2:
                    continue
                oracle = quad_element(j, m, jp, mp, cos2beta_func(angle))
                assert dense[a, b] == pytest.approx(oracle, abs=1e-10)

    @pytest.mark.parametrize("angle", [0.0, 0.7, 1.9])
    def test_hermitian(self, angle):
        basis = linear_basis(0, 0, 12)
        dense = cos2beta_matrix_linear(basis, angle).to_dense()
        assert np.abs(dense - dense.conj().T).max() < 1e-14

    @pytest.mark.parametrize("j_parity,m_parity,j_max", [
        (0, 0, 8), (1, 0, 9), (0, 0, 14), (1, 1, 11),
    ])
    def test_eigenvalues_within_operator_bounds(self, j_parity, m_parity, j_max):
        basis = linear_basis(j_parity, m_parity, j_max)
        dense = cos2beta_matrix_linear(basis, 0.4).to_dense()
        eig = np.linalg.eigvalsh(dense)
        assert eig.min() > -1e-12
        assert eig.max() < 1.0 + 1e-12

    def test_rotation_covariance(self):
        basis = linear_basis(0, 0, 10)
        chi = 0.83
        m0 = cos2beta_matrix_linear(basis, 0.0).to_dense()
        mchi = cos2beta_matrix_linear(basis, chi).to_dense()
        phases = np.exp(-1j * chi * np.array([m for _, m in basis]))
        rotated = phases[:, None] * m0 * phases.conj()[None, :]
        assert np.abs(mchi - rotated).max() < 1e-13

    def test_structure_compose_matches_matrix(self):
        basis = linear_basis(0, 0, 10)
        struct = cos2beta_structure_linear(basis)
        data = struct.compose(1.1)
        assert np.allclose(data, cos2beta_matrix_linear(basis, 1.1).data)


class TestCos2BetaCaseB:
    def test_even_n_rejected(self):
        with pytest.raises(ValueError):
            cos2beta_matrix_caseb(((2, 2, 0),), 0.0)

    def test_odd_dn_vanishes(self):
        # (N 2 N'; 0 0 0) vanishes for odd N+N', so no dN = odd entries exist
        assert rotmat_element_caseb(2, 1, 0, 2, 2, 0, 0) == 0.0

    @pytest.mark.parametrize("angle", [0.0, 0.73])
    def test_matches_product_basis_oracle(self, angle):
        basis = caseb_basis(m_parity=0, n_max=3) + caseb_basis(m_parity=1, n_max=3)
        dense = cos2beta_matrix_caseb(tuple(sorted(set(basis))), angle)
        labels = dense.basis
        mat = dense.to_dense()
        for a, la in enumerate(labels):
            for b, lb in enumerate(labels):
                if abs(la[1] - lb[1]) > 2 or abs(la[2] - lb[2]) > 2:
                    continue
                oracle = caseb_element_product_oracle(*la, *lb, angle)
                assert mat[a, b] == pytest.approx(oracle, abs=1e-10)

    def test_diagonal_j1n1_element(self):
        basis = caseb_basis(m_parity=0, n_max=3)
        mat = cos2beta_matrix_caseb(basis, 0.0)
        idx = {lab: i for i, lab in enumerate(basis)}
        i = idx[(1, 1, 0)]
        oracle = caseb_element_product_oracle(1, 1, 0, 1, 1, 0, 0.0)
        assert mat.entry(i, i) == pytest.approx(oracle, abs=1e-12)

    def test_off_diagonal_element(self):
        basis = caseb_basis(m_parity=0, n_max=3)
        mat = cos2beta_matrix_caseb(basis, 0.0)
        idx = {lab: i for i, lab in enumerate(basis)}
        val = mat.entry(idx[(3, 3, 2)], idx[(1, 1, 0)])
        oracle = caseb_element_product_oracle(3, 3, 2, 1, 1, 0, 0.0)
        assert val == pytest.approx(oracle, abs=1e-12)

    @pytest.mark.parametrize("angle", [0.0, 1.3])
    def test_hermitian(self, angle):
        basis = caseb_basis(m_parity=1, n_max=5)
        dense = cos2beta_matrix_caseb(basis, angle).to_dense()
        assert np.abs(dense - dense.conj().T).max() < 1e-14
