"""Disc calculus tests: derivatives, Cauchy-Green transform, identities."""

import numpy as np
import pytest

from bishopdiscs.circle import plemelj_minus
from bishopdiscs.disc import (
    DiscGrid,
    cauchy_extension,
    cauchy_green,
    cauchy_green_at,
    cauchy_green_monomial,
    dbar,
    dz,
    generalized_cauchy_residual,
)


def area_quadrature_oracle(g_fn, zeta, n_r=48, n_a=512):
    """Brute-force T g(zeta) = -(1/pi) iint g(tau)/(tau - zeta) dA.

    Polar coordinates centred at zeta: the Jacobian cancels the kernel
    singularity exactly, leaving a smooth integrand on rho in (0, R(alpha)).
    """
    zeta = complex(zeta)
    s, phi = abs(zeta), np.angle(zeta)
    alpha = 2.0 * np.pi * np.arange(n_a) / n_a
    rel = alpha - phi
    rmax = -s * np.cos(rel) + np.sqrt(1.0 - (s * np.sin(rel)) ** 2)
    gx, gw = np.polynomial.legendre.leggauss(n_r)
    acc = 0.0
    for a, rm in zip(alpha, rmax):
        r = 0.5 * rm * (gx + 1.0)
        w = 0.5 * rm * gw
        tau = zeta + r * np.exp(1j * a)
        acc += np.exp(-1j * a) * np.sum(w * g_fn(tau))
    return -(1.0 / np.pi) * acc * (2.0 * np.pi / n_a)


@pytest.fixture(scope="module")
def grid():
    return DiscGrid(24, 64)


class TestGrid:
    def test_weights_positive_sum_to_area(self, grid):
        assert (grid.radial_weights > 0).all()
        assert abs(grid.area_weights.sum() - np.pi) < 1e-12

    def test_boundary_node_present(self, grid):
        assert grid.rho[-1] == 1.0
        assert grid.rho[0] > 0.0

    def test_quadrature_degree(self, grid):
        # Radau rule: exact for radial polynomials up to degree 2n - 2
        for k in [0, 3, 17, 2 * grid.n_radial - 2]:
            got = np.sum(grid.radial_weights * grid.rho ** k)
            assert abs(got - 1.0 / (k + 2)) < 1e-13

    def test_rejects_small(self):
        with pytest.raises(ValueError):
            DiscGrid(3, 64)


class TestDerivatives:
    def test_holomorphic_square(self, grid):
        f = grid.function(lambda z: z ** 2)
        assert dbar(f).sup_norm() < 1e-12
        assert np.abs(dz(f).values - 2 * grid.points).max() < 1e-12

    def test_conjugate(self, grid):
        f = grid.function(np.conj)
        assert np.abs(dbar(f).values - 1.0).max() < 1e-12
        assert dz(f).sup_norm() < 1e-12

    def test_modulus_squared(self, grid):
        f = grid.function(lambda z: np.abs(z) ** 2)
        assert np.abs(dbar(f).values - grid.points).max() < 1e-12
        assert np.abs(dz(f).values - np.conj(grid.points)).max() < 1e-12

    def test_vector_components(self, grid):
        f = grid.function(
            lambda z: np.stack([z ** 3, np.conj(z) ** 2], axis=-1)
        )
        df = dbar(f)
        assert np.abs(df.values[..., 0]).max() < 1e-11
        assert np.abs(df.values[..., 1] - 2 * np.conj(grid.points)).max() < 1e-11


class TestCauchyGreen:
    def test_constant_gives_zbar(self, grid):
        tg = cauchy_green(grid.function(lambda z: np.ones_like(z)))
        assert np.abs(tg.values - np.conj(grid.points)).max() < 1e-12

    def test_monomial_table(self, grid):
        for a in range(5):
            for b in range(5):
                g = grid.function(lambda z: z ** a * np.conj(z) ** b)
                got = cauchy_green(g).values
                want = cauchy_green_monomial(a, b, grid.points)
                assert np.abs(got - want).max() < 1e-12, (a, b)

    def test_oracle_agreement(self, grid):
        rng = np.random.default_rng(2)
        pts = 0.85 * np.sqrt(rng.uniform(0.05, 1.0, 4)) * np.exp(
            2j * np.pi * rng.uniform(size=4)
        )
        cases = [(0, 0), (1, 0), (0, 1), (2, 3), (4, 4)]
        for a, b in cases:
            g_fn = lambda z: z ** a * np.conj(z) ** b
            g = grid.function(g_fn)
            for zeta in pts:
                got = cauchy_green_at(g, zeta)
                ora = area_quadrature_oracle(g_fn, zeta)
                closed = cauchy_green_monomial(a, b, zeta)
                assert abs(got - ora) < 1e-6
                assert abs(got - closed) < 1e-10
                assert abs(ora - closed) < 1e-6

    def test_dbar_inverts(self, grid):
        rng = np.random.default_rng(8)
        for _ in range(5):
            # random smooth polynomial field in (z, zbar), modest degree
            deg = 6
            coef = rng.standard_normal((deg + 1, deg + 1)) * 0.5 ** (
                np.add.outer(np.arange(deg + 1), np.arange(deg + 1))
            )
            g_fn = lambda z: sum(
                coef[a, b] * z ** a * np.conj(z) ** b
                for a in range(deg + 1)
                for b in range(deg + 1)
            )
            g = grid.function(g_fn)
            resid = dbar(cauchy_green(g)) - g
            assert resid.sup_norm() < 1e-9

    def test_complex_linearity(self, grid):
        g1 = grid.function(lambda z: z * np.conj(z))
        g2 = grid.function(lambda z: np.conj(z) ** 2)
        lhs = cauchy_green(g1 + (2.0 - 1j) * g2)
        rhs = cauchy_green(g1) + (2.0 - 1j) * cauchy_green(g2)
        assert (lhs - rhs).sup_norm() < 1e-12

    def test_smoothing_mode_support(self, grid):
        # angular mode m input -> angular mode m - 1 output, so the angular
        # degree grows by at most one
        for m in [0, 3, -4, 10, -11]:
            vals = (grid.rho[:, None] ** abs(m)) * np.exp(
                1j * m * grid.theta[None, :]
            )
            out = cauchy_green(grid.function(vals))
            spec = np.abs(np.fft.fft(out.values, axis=1)).max(axis=0)
            live = set(np.nonzero(spec > 1e-12 * max(spec.max(), 1.0))[0])
            allowed = {(m - 1) % grid.n_theta}
            assert live <= allowed, (m, live)

    def test_boundary_is_minus_exterior_trace(self, grid):
        # T[dbar f]|_bD = -K_-[f|_bD] for smooth f
        for f_fn in [
            lambda z: np.conj(z),
            lambda z: np.abs(z) ** 2,
            lambda z: np.exp(z) * np.conj(z) ** 2,
            lambda z: z ** 3 + 0.3 * np.conj(z) * z,
        ]:
            f = grid.function(f_fn)
            trace = cauchy_green(dbar(f)).boundary()
            km = plemelj_minus(f.boundary())
            assert np.abs(trace.values + km.values).max() < 1e-9

    def test_point_eval_vector(self, grid):
        g = grid.function(
            lambda z: np.stack([np.ones_like(z), z], axis=-1)
        )
        out = cauchy_green_at(g, 0.4 + 0.1j)
        want = np.array(
            [
                cauchy_green_monomial(0, 0, 0.4 + 0.1j),
                cauchy_green_monomial(1, 0, 0.4 + 0.1j),
            ]
        )
        assert np.abs(out - want).max() < 1e-10

    def test_rejects_exterior_point(self, grid):
        g = grid.function(lambda z: np.ones_like(z))
        with pytest.raises(ValueError):
            cauchy_green_at(g, 1.2)


class TestGeneralizedCauchy:
    def test_holomorphic(self, grid):
        f = grid.function(lambda z: z ** 3)
        assert generalized_cauchy_residual(f) < 1e-12

    def test_antiholomorphic(self, grid):
        f = grid.function(np.conj)
        assert generalized_cauchy_residual(f) < 1e-10

    def test_mixed_smooth(self, grid):
        f = grid.function(lambda z: np.exp(z) * np.conj(z) ** 2)
        assert generalized_cauchy_residual(f) < 1e-8

    def test_refined_grid_agrees(self):
        f_fn = lambda z: np.exp(z) * np.conj(z) ** 2
        coarse = generalized_cauchy_residual(DiscGrid(24, 64).function(f_fn))
        fine = generalized_cauchy_residual(DiscGrid(36, 128).function(f_fn))
        assert fine <= coarse + 1e-12

    def test_extension_reproduces_holomorphic(self, grid):
        f = grid.function(lambda z: 1.0 + 2j * z + z ** 5)
        kf = cauchy_extension(f.boundary(), grid)
        assert np.abs(kf.values - f.values).max() < 1e-12
