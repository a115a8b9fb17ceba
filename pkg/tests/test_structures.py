"""Almost complex structure tests: Beltrami matrix, dilations, residuals."""

import numpy as np
import pytest

from bishopdiscs.disc import DiscGrid
from bishopdiscs.errors import StructureError
from bishopdiscs.polyfield import ComplexPolynomial
from bishopdiscs.structures import (
    AlmostComplexStructure,
    Dilation,
    beltrami_matrix,
    holomorphy_residual,
    nilpotent_structure,
    standard_structure_matrix,
    structure_distance,
    structure_from_beltrami_matrix,
    transport_structure,
)


def quadratic_fixture(n=2, amp=0.4):
    """J_st + anti-linear nilpotent with mu = amp * w^2 at block (w, z_2)."""
    w = ComplexPolynomial.variable(n, 0)
    return nilpotent_structure(n, {(0, 1): amp * w * w})


def linear_fixture(n=2, amp=0.5):
    """delta^{1/2}-scaling fixture: nu = amp * conj(z_2) at block (z_2, w)."""
    zbar = ComplexPolynomial.variable(n, 1, conjugated=True)
    return nilpotent_structure(n, {(1, 0): amp * zbar})


def antilinear_realification(M):
    """Oracle: realify v -> M conj(v) directly from 2x2 real blocks."""
    n = M.shape[0]
    P = np.zeros((2 * n, 2 * n))
    for p in range(n):
        for q in range(n):
            a, b = M[p, q].real, M[p, q].imag
            P[2 * p:2 * p + 2, 2 * q:2 * q + 2] = [[a, b], [b, -a]]
    return P


class TestStandardStructure:
    def test_square_is_minus_id(self):
        for n in [1, 2, 4]:
            j = standard_structure_matrix(n)
            assert np.allclose(j @ j, -np.eye(2 * n))

    def test_beltrami_vanishes(self):
        J = AlmostComplexStructure(2)
        rng = np.random.default_rng(0)
        Z = 0.5 * (rng.standard_normal((10, 2)) + 1j * rng.standard_normal((10, 2)))
        assert np.abs(beltrami_matrix(J, Z)).max() < 1e-14


class TestNilpotentFixtures:
    def test_exact_square(self):
        J = quadratic_fixture()
        rng = np.random.default_rng(3)
        Z = rng.standard_normal((50, 2)) + 1j * rng.standard_normal((50, 2))
        JZ = J(Z)
        assert np.abs(JZ @ JZ + np.eye(4)).max() < 1e-12

    def test_beltrami_closed_form(self):
        # for the nilpotent family A(Z) = (i/2) M(Z)
        amp = 0.4
        J = quadratic_fixture(amp=amp)
        rng = np.random.default_rng(4)
        Z = 0.6 * (rng.standard_normal((20, 2)) + 1j * rng.standard_normal((20, 2)))
        A = beltrami_matrix(J, Z)
        for i in range(20):
            M = np.zeros((2, 2), dtype=complex)
            M[0, 1] = amp * Z[i, 0] ** 2
            assert np.abs(A[i] - 0.5j * M).max() < 1e-12

    def test_small_tilt_perturbation(self):
        # n = 1: J tilted by a small shear away from J_st -> |A| = O(eps),
        # against the direct real-linear-algebra oracle
        eps = 1e-3
        G = np.array([[1.0, eps], [0.0, 1.0]])
        J = G @ standard_structure_matrix(1) @ np.linalg.inv(G)
        jst = standard_structure_matrix(1)
        B = np.linalg.solve(jst + J, jst - J)
        A = B[0::2, 0::2] + 1j * B[1::2, 0::2]
        assert 0.1 * eps < np.abs(A).max() < 2 * eps
        # reconstruct J back from A
        J2 = structure_from_beltrami_matrix(A)
        assert np.abs(J2 - J).max() < 1e-12

    def test_axis_disc_columns(self):
        # column-1 block of the perturbation vanishes: the axis direction
        # is J_st-compatible along (w, 0)
        J = quadratic_fixture()
        w_axis = np.stack(
            [np.linspace(-0.9, 0.9, 7) + 0j, np.zeros(7, dtype=complex)], axis=-1
        )
        JZ = J(w_axis)
        jst = standard_structure_matrix(2)
        assert np.abs(JZ[..., :, 0:2] - jst[:, 0:2]).max() < 1e-14


class TestRoundTrip:
    def test_j_to_a_to_j(self):
        rng = np.random.default_rng(7)
        for fixture in [quadratic_fixture(), linear_fixture()]:
            Z = 0.7 * (
                rng.standard_normal((100, 2)) + 1j * rng.standard_normal((100, 2))
            )
            A = beltrami_matrix(fixture, Z)
            J_back = structure_from_beltrami_matrix(A)
            assert np.abs(J_back - fixture(Z)).max() < 1e-10

    def test_random_exact_structures(self):
        # Cayley-style random J at a point: G J_st G^{-1}
        rng = np.random.default_rng(9)
        jst = standard_structure_matrix(3)
        for _ in range(100):
            G = np.eye(6) + 0.2 * rng.standard_normal((6, 6))
            J = G @ jst @ np.linalg.inv(G)
            B = np.linalg.solve(jst + J, jst - J)
            A = B[0::2, 0::2] + 1j * B[1::2, 0::2]
            assert np.abs(structure_from_beltrami_matrix(A) - J).max() < 1e-10

    def test_singular_structure_raises(self):
        # J = -J_st makes J_st + J singular
        J = AlmostComplexStructure(1)
        J_minus = lambda Z: -J(Z)
        J_minus = type(
            "Flip", (), {"n": 1, "__call__": lambda self, Z: -standard_structure_matrix(1) + 0.0 * np.asarray(Z, dtype=complex).real[..., None, None]}
        )()
        with pytest.raises(StructureError):
            beltrami_matrix(J_minus, np.zeros((1,), dtype=complex))


class TestTransport:
    def test_standard_fixed(self):
        J = AlmostComplexStructure(2)
        Jd = transport_structure(J, Dilation(0.1, 2))
        assert not Jd.coefficient_table()

    def test_composition(self):
        J = quadratic_fixture()
        d1, d2 = 0.3, 0.5
        left = transport_structure(
            transport_structure(J, Dilation(d1, 2)), Dilation(d2, 2)
        )
        right = transport_structure(J, Dilation(d1 * d2, 2))
        tl, tr = left.coefficient_table(), right.coefficient_table()
        assert set(tl) == set(tr)
        for key in tl:
            assert abs(tl[key] - tr[key]) < 1e-12 * max(1.0, abs(tr[key]))

    def test_origin_fixed(self):
        Jd = transport_structure(quadratic_fixture(), Dilation(0.05, 2))
        jst = standard_structure_matrix(2)
        assert np.abs(Jd(np.zeros((1, 2), dtype=complex)) - jst).max() < 1e-14

    def test_linear_fixture_rate(self):
        # linear-in-z entry in a w-column scales like delta^{1/2}
        J = linear_fixture()
        dists = []
        jst_struct = AlmostComplexStructure(2)
        for delta in [0.1, 0.05, 0.025]:
            Jd = transport_structure(J, Dilation(delta, 2))
            dists.append(structure_distance(Jd, jst_struct, spacing=0.25))
        assert dists[0] > dists[1] > dists[2]
        for a, b in zip(dists, dists[1:]):
            assert 0.6 < b / a < 0.8  # ~ 2^{-1/2}

    def test_quadratic_fixture_rate(self):
        # pure-w quadratic entry in a z-column scales like delta^{1/2}:
        # s_col - s_row + sum = 1 - 1/2 + 1 = ... measured, monotone
        J = quadratic_fixture()
        jst_struct = AlmostComplexStructure(2)
        dists = [
            structure_distance(
                transport_structure(J, Dilation(d, 2)), jst_struct, spacing=0.25
            )
            for d in [0.1, 0.05, 0.025]
        ]
        assert dists[0] > dists[1] > dists[2]

    def test_beltrami_norm_shrinks(self):
        J = quadratic_fixture()
        rng = np.random.default_rng(13)
        Z = rng.standard_normal((200, 2)) + 1j * rng.standard_normal((200, 2))
        Z *= 0.9 / np.abs(Z).max()
        norms = []
        for delta in [0.2, 0.1, 0.05, 0.025]:
            Jd = transport_structure(J, Dilation(delta, 2))
            norms.append(np.abs(beltrami_matrix(Jd, Z)).max())
        assert all(b < a for a, b in zip(norms, norms[1:]))


class TestDistance:
    def test_identical(self):
        J = quadratic_fixture()
        assert structure_distance(J, J, spacing=0.5) == 0.0

    def test_c1_distance_positive(self):
        J = quadratic_fixture()
        jst = AlmostComplexStructure(2)
        d0 = structure_distance(J, jst, order=0, spacing=0.25)
        d1 = structure_distance(J, jst, order=1, spacing=0.25)
        assert d1 >= d0 > 0


class TestHolomorphyResidual:
    def test_standard_holomorphic(self):
        grid = DiscGrid(24, 64)
        J = AlmostComplexStructure(2, validity_radius=3.0)
        Z = grid.function(lambda z: np.stack([z, z ** 2], axis=-1))
        assert holomorphy_residual(J, Z) < 1e-11

    def test_antiholomorphic_is_order_one(self):
        grid = DiscGrid(24, 64)
        J = AlmostComplexStructure(2, validity_radius=3.0)
        Z = grid.function(
            lambda z: np.stack([np.conj(z), np.zeros_like(z)], axis=-1)
        )
        r = holomorphy_residual(J, Z)
        assert abs(r - 1.0) < 1e-10

    def test_axis_disc_under_fixture(self):
        grid = DiscGrid(24, 64)
        for J in [quadratic_fixture(), linear_fixture()]:
            Z = grid.function(
                lambda z: np.stack([z, np.zeros_like(z)], axis=-1)
            )
            assert holomorphy_residual(J, Z) < 1e-10

    def test_range_violation_reports_node(self):
        grid = DiscGrid(12, 16)
        J = AlmostComplexStructure(2, validity_radius=0.5)
        Z = grid.function(lambda z: np.stack([2.0 * z, z], axis=-1))
        with pytest.raises(StructureError, match="validity ball"):
            holomorphy_residual(J, Z)


class TestConfigRoundTrip:
    def test_to_from(self):
        J = linear_fixture()
        cfg = J.to_config()
        J2 = AlmostComplexStructure.from_config(cfg)
        assert J2.coefficient_table() == J.coefficient_table()

    def test_constant_term_rejected(self):
        with pytest.raises(StructureError, match="J_st"):
            AlmostComplexStructure(1, [(0, 0, 0.1, (0, 0))])

    def test_jsq_tolerance_enforced(self):
        # a generic symmetric perturbation breaks J^2 = -Id at order |Z|
        with pytest.raises(StructureError, match=r"J\^2"):
            AlmostComplexStructure(
                1, [(0, 0, 0.8, (1, 0))], validity_radius=1.0
            )
