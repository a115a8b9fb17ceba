"""Circle operator tests: multiplier tables, Plemelj identities, oracles."""

import numpy as np
import pytest

from bishopdiscs.circle import (
    BoundaryGrid,
    BoundaryFunction,
    cauchy_extend,
    cauchy_pv,
    hilbert,
    mean_value,
    plemelj_minus,
    plemelj_plus,
    resynthesize,
    schwarz,
)


def pv_hilbert_oracle(u_fn, theta0, m_factor=8, n_base=512):
    """Principal-value quadrature of the cotangent kernel with Richardson.

    Uses a symmetric offset grid around theta0 so the odd part of the pole
    cancels exactly, then extrapolates the h^2 term from two resolutions.
    """

    def quad(m):
        h = 2.0 * np.pi / m
        th = theta0 + (np.arange(m) + 0.5) * h
        ker = 1.0 / np.tan((theta0 - th) / 2.0)
        return (h / (2.0 * np.pi)) * np.sum(u_fn(th) * ker)

    q1 = quad(n_base * m_factor)
    q2 = quad(2 * n_base * m_factor)
    return (4.0 * q2 - q1) / 3.0


def pv_cauchy_oracle(f_fn, theta0, n=16384):
    """v.p. (1/2 pi i) int f(tau) dtau / (tau - zeta0) on the same offset grid."""
    h = 2.0 * np.pi / n
    th = theta0 + (np.arange(n) + 0.5) * h
    tau = np.exp(1j * th)
    zeta0 = np.exp(1j * theta0)
    return (h / (2.0 * np.pi)) * np.sum(f_fn(th) * tau / (tau - zeta0))


@pytest.fixture(scope="module")
def grid():
    return BoundaryGrid(64)


def random_trig(grid, rng, band=None, real=False):
    n = grid.n
    band = band or n // 2 - 1
    modes = np.zeros(n, dtype=complex)
    ms = grid.mode_numbers
    sel = np.abs(ms) <= band
    modes[sel] = rng.standard_normal(sel.sum()) + 1j * rng.standard_normal(sel.sum())
    if real:
        conj_idx = (-ms) % n
        modes = 0.5 * (modes + np.conj(modes[conj_idx]))
    return BoundaryFunction.from_modes(grid, modes)


class TestModeRoundTrip:
    def test_constant(self, grid):
        f = grid.function(lambda th: np.ones_like(th))
        modes = f.to_modes()
        assert abs(modes[0] - 1.0) < 1e-14
        assert np.abs(modes[1:]).max() < 1e-14

    def test_single_mode(self, grid):
        f = grid.function(lambda th: np.exp(1j * th))
        modes = f.to_modes()
        assert abs(modes[1] - 1.0) < 1e-14
        modes[1] = 0.0
        assert np.abs(modes).max() < 1e-14

    def test_cosine_split(self, grid):
        f = grid.function(np.cos)
        modes = f.to_modes()
        assert abs(modes[1] - 0.5) < 1e-14
        assert abs(modes[-1] - 0.5) < 1e-14

    def test_round_trip(self, grid):
        rng = np.random.default_rng(11)
        f = random_trig(grid, rng)
        g = BoundaryFunction.from_modes(grid, f.to_modes())
        rel = np.abs(g.values - f.values).max() / np.abs(f.values).max()
        assert rel < 1e-12


class TestHilbert:
    def test_cos_to_sin(self, grid):
        hf = hilbert(grid.function(np.cos))
        assert np.abs(hf.values - np.sin(grid.theta)).max() < 1e-13

    def test_constants_annihilated(self, grid):
        hf = hilbert(grid.function(lambda th: 3.0 * np.ones_like(th)))
        assert hf.sup_norm() < 1e-14

    def test_sin2_oracle(self, grid):
        hf = hilbert(grid.function(lambda th: np.sin(2 * th)))
        assert np.abs(hf.values - (-np.cos(2 * grid.theta))).max() < 1e-13
        # independent principal-value quadrature at a few nodes
        for k in [0, 5, 17]:
            ref = pv_hilbert_oracle(lambda th: np.sin(2 * th), grid.theta[k])
            assert abs(hf.values[k] - ref) < 1e-7

    def test_oracle_self_check(self, grid):
        # the PV quadrature itself must reproduce H(cos) = sin
        ref = pv_hilbert_oracle(np.cos, grid.theta[3])
        assert abs(ref - np.sin(grid.theta[3])) < 1e-8

    def test_real_to_real(self, grid):
        rng = np.random.default_rng(5)
        u = random_trig(grid, rng, real=True)
        assert hilbert(u).max_imag() < 1e-12

    def test_rejects_complex(self, grid):
        f = grid.function(lambda th: np.exp(1j * th))
        with pytest.raises(ValueError, match="not real"):
            hilbert(f)

    def test_spectral_convergence(self):
        # analytic but not band-limited: errors vs refined reference decay
        # geometrically until the rounding floor
        u_fn = lambda th: 1.0 / (2.0 - np.cos(th))
        ref_grid = BoundaryGrid(512)
        ref = hilbert(ref_grid.function(u_fn))
        errs = []
        for n in [8, 16, 32]:
            g = BoundaryGrid(n)
            hv = hilbert(g.function(u_fn)).values
            step = ref_grid.n // n
            errs.append(np.abs(hv - ref.values[::step]).max())
        assert errs[1] < 0.2 * errs[0]
        assert errs[2] < 0.2 * errs[1]


class TestMean:
    def test_constant(self, grid):
        f = grid.function(lambda th: (2.0 + 1j) * np.ones_like(th))
        assert abs(mean_value(f) - (2.0 + 1j)) < 1e-14

    def test_oscillation(self, grid):
        assert abs(mean_value(grid.function(lambda th: np.exp(1j * th)))) < 1e-14

    def test_linearity(self, grid):
        f = grid.function(lambda th: 2.0 + 3.0 * np.cos(th))
        assert abs(mean_value(f) - 2.0) < 1e-14


class TestCauchyPV:
    def test_positive_mode(self, grid):
        f = grid.function(lambda th: np.exp(1j * th))
        out = cauchy_pv(f)
        assert np.abs(out.values - 0.5 * f.values).max() < 1e-13
        ref = pv_cauchy_oracle(lambda th: np.exp(1j * th), grid.theta[7])
        assert abs(out.values[7] - ref) < 1e-7

    def test_constant(self, grid):
        out = cauchy_pv(grid.function(lambda th: np.ones_like(th)))
        assert np.abs(out.values - 0.5).max() < 1e-14

    def test_negative_mode(self, grid):
        f = grid.function(lambda th: np.exp(-1j * th))
        out = cauchy_pv(f)
        assert np.abs(out.values + 0.5 * f.values).max() < 1e-13
        ref = pv_cauchy_oracle(lambda th: np.exp(-1j * th), grid.theta[19])
        assert abs(out.values[19] - ref) < 1e-7


class TestPlemelj:
    def test_holomorphic_data(self, grid):
        f = grid.function(lambda th: np.exp(1j * th))
        assert np.abs(plemelj_plus(f).values - f.values).max() < 1e-13
        assert plemelj_minus(f).sup_norm() < 1e-13

    def test_antiholomorphic_data(self, grid):
        f = grid.function(lambda th: np.exp(-1j * th))
        assert plemelj_plus(f).sup_norm() < 1e-13
        assert np.abs(plemelj_minus(f).values + f.values).max() < 1e-13

    def test_jump_identity(self, grid):
        rng = np.random.default_rng(23)
        for _ in range(100):
            f = random_trig(grid, rng)
            jump = plemelj_plus(f).values - plemelj_minus(f).values
            assert np.abs(jump - f.values).max() < 1e-12

    def test_pv_split(self, grid):
        # K0 = (i/2) H + (1/2) P0 coefficient-wise on every resolved mode
        for m in range(-(grid.n // 2) + 1, grid.n // 2):
            f = grid.function(lambda th: np.exp(1j * m * th))
            lhs = cauchy_pv(f).to_modes()
            rhs = 0.5j * hilbert(f, enforce_real=False).to_modes()
            rhs[0] += 0.5 * mean_value(f)
            assert np.abs(lhs - rhs).max() < 1e-13

    def test_multiplier_table(self, grid):
        n = grid.n
        for m in range(-(n // 2) + 1, n // 2):
            f = grid.function(lambda th: np.exp(1j * m * th))
            h_hat = hilbert(f, enforce_real=False).to_modes()[m % n]
            k0_hat = cauchy_pv(f).to_modes()[m % n]
            kp_hat = plemelj_plus(f).to_modes()[m % n]
            km_hat = plemelj_minus(f).to_modes()[m % n]
            if m == 0:
                expected = (0.0, 0.5, 1.0, 0.0)
            else:
                s = np.sign(m)
                expected = (-1j * s, 0.5 * s, 1.0 if m > 0 else 0.0,
                            0.0 if m > 0 else -1.0)
            got = (h_hat, k0_hat, kp_hat, km_hat)
            assert np.abs(np.array(got) - np.array(expected)).max() < 1e-13


class TestCauchyExtend:
    def test_reproduces_holomorphic(self, grid):
        f = grid.function(lambda th: np.exp(1j * th))
        assert abs(cauchy_extend(f, 0.3) - 0.3) < 1e-13

    def test_kills_antiholomorphic(self, grid):
        f = grid.function(lambda th: np.exp(-1j * th))
        for z in [0.1, 0.5j, -0.3 + 0.4j]:
            assert abs(cauchy_extend(f, z)) < 1e-13

    def test_constant(self, grid):
        f = grid.function(lambda th: 5.0 * np.ones_like(th))
        assert abs(cauchy_extend(f, 0.7j) - 5.0) < 1e-13

    def test_rejects_exterior(self, grid):
        f = grid.function(np.cos)
        with pytest.raises(ValueError):
            cauchy_extend(f, 1.2)

    def test_quadrature_agreement(self, grid):
        f_fn = lambda th: np.exp(np.cos(th)) * np.cos(np.sin(th))  # Re e^{e^{i t}}
        f = grid.function(f_fn)
        zeta = 0.4 - 0.2j
        # plain trapezoid of the Cauchy kernel (non-singular inside)
        th = np.linspace(0.0, 2 * np.pi, 4096, endpoint=False)
        tau = np.exp(1j * th)
        ref = np.mean(f_fn(th) * tau / (tau - zeta))
        assert abs(cauchy_extend(f, zeta) - ref) < 1e-10


class TestSchwarz:
    def test_cos(self, grid):
        u = grid.function(np.cos)
        for z in [0.2, 0.5j, -0.6 + 0.1j]:
            assert abs(schwarz(u, z) - z) < 1e-13

    def test_constant(self, grid):
        u = grid.function(lambda th: 4.0 * np.ones_like(th))
        assert abs(schwarz(u, 0.3 + 0.3j) - 4.0) < 1e-13

    def test_cos2(self, grid):
        u = grid.function(lambda th: np.cos(2 * th))
        assert abs(schwarz(u, 0.5) - 0.25) < 1e-13

    def test_boundary_values(self, grid):
        rng = np.random.default_rng(7)
        u = random_trig(grid, rng, band=20, real=True).real_part()
        s = schwarz(u, grid.nodes * (1.0 - 1e-13))
        expected = u.values + 1j * hilbert(u).values
        assert np.abs(s - expected).max() < 1e-10

    def test_origin_is_mean(self, grid):
        u = grid.function(lambda th: 2.0 + np.cos(3 * th))
        s0 = schwarz(u, 0.0)
        assert abs(s0 - 2.0) < 1e-13
        assert abs(np.imag(s0)) < 1e-14

    def test_rejects_complex(self, grid):
        with pytest.raises(ValueError, match="real"):
            schwarz(grid.function(lambda th: np.exp(1j * th)), 0.1)


class TestResynthesis:
    def test_holomorphic_mode(self, grid):
        f = grid.function(lambda th: np.exp(1j * th))
        assert np.abs(resynthesize(f).values - f.values).max() < 1e-13

    def test_antiholomorphic_mode(self, grid):
        f = grid.function(lambda th: np.exp(-1j * th))
        assert np.abs(resynthesize(f).values - f.values).max() < 1e-13

    def test_random_polynomials(self, grid):
        rng = np.random.default_rng(41)
        for _ in range(100):
            f = random_trig(grid, rng)
            assert np.abs(resynthesize(f).values - f.values).max() < 1e-12

    def test_vector_valued(self, grid):
        rng = np.random.default_rng(3)
        vals = np.stack(
            [random_trig(grid, rng).values for _ in range(3)], axis=1
        )
        f = BoundaryFunction(grid, vals)
        assert np.abs(resynthesize(f).values - f.values).max() < 1e-12


class TestGridValidation:
    @pytest.mark.parametrize("n", [4, 7, 9, 2])
    def test_bad_sizes(self, n):
        with pytest.raises(ValueError):
            BoundaryGrid(n)
