"""Model-family tests: ellipse maps, model discs, degenerate limit."""

import numpy as np
import pytest

from bishopdiscs.manifolds import SubmanifoldSpec
from bishopdiscs.model import (
    build_ellipse_map,
    degenerate_disc,
    model_disc,
    series_dbar_residual,
    sigma_set,
)
from bishopdiscs.polyfield import ComplexPolynomial


def n3_spec(gamma=0.2, alpha=0.25, beta=0.2):
    n = 3
    w = ComplexPolynomial.variable(n, 0)
    wb = ComplexPolynomial.variable(n, 0, conjugated=True)
    h3 = alpha * 0.5 * (w * w + wb * wb) + beta * (w * wb)
    return SubmanifoldSpec(n, gamma, h={3: h3})


class TestEllipseMap:
    def test_gamma_zero_identity(self):
        emap = build_ellipse_map(0.0)
        z = np.array([0.3 + 0.1j, -0.7j])
        assert np.abs(emap(z) - z).max() < 1e-15
        assert emap.attachment_residual(256) < 1e-14

    def test_gamma_02_converges(self):
        emap = build_ellipse_map(0.2, tol=1e-9)
        assert emap.boundary_residual <= 1e-9
        assert emap.correspondence_residual < 1e-11
        assert emap.derivative_at_zero() > 0
        # odd real series
        coef = emap.coefficients
        assert np.abs(coef[0::2]).max() == 0.0

    def test_scaling_rule(self):
        # P homogeneous of degree 2: P(sqrt(r) w_1) = r on the boundary
        emap = build_ellipse_map(0.2, tol=1e-9)
        r = 0.7
        th = np.linspace(0, 2 * np.pi, 777, endpoint=False)
        w = np.sqrt(r) * emap(np.exp(1j * th))
        p = np.abs(w) ** 2 + 2 * 0.2 * np.real(w ** 2)
        assert np.abs(p - r).max() < 1e-9

    def test_injectivity(self):
        for gamma in [0.0, 0.2]:
            assert build_ellipse_map(gamma, tol=1e-9).is_injective()

    def test_degree_cap_reported(self):
        from bishopdiscs.errors import ConvergenceError

        with pytest.raises(ConvergenceError) as info:
            build_ellipse_map(0.4, tol=1e-9, max_degree=64)
        assert "achieved_residual" in info.value.diagnostics

    def test_gamma_validation(self):
        with pytest.raises(ValueError):
            build_ellipse_map(0.5)


class TestModelDisc:
    def test_flat_case_explicit(self):
        # gamma = 0, no Q: Z = (sqrt(r) zeta, r)
        spec = SubmanifoldSpec(2, 0.0)
        disc = model_disc(spec, 1.0)
        z = np.array([0.2 + 0.3j, -0.5j])
        vals = disc.evaluate(z)
        assert np.abs(vals[:, 0] - z).max() < 1e-14
        assert np.abs(vals[:, 1] - 1.0).max() < 1e-14

    def test_attachment(self):
        for spec, c in [
            (SubmanifoldSpec(2, 0.2), ()),
            (n3_spec(), (0.3,)),
        ]:
            disc = model_disc(spec, 0.9, c)
            assert disc.attachment_residual() < 1e-9

    def test_holomorphy(self):
        disc = model_disc(n3_spec(), 1.1, (0.2,))
        assert disc.holomorphy_residual() < 1e-11

    def test_series_residual_catches_conjugation(self):
        # sanity of the measurement itself: a conjugated field is loud
        coef = np.array([0.0, 1.0], dtype=complex)
        clean = series_dbar_residual(coef)
        assert clean < 1e-13
        # sample conj(zeta) instead: emulate by measuring z-bar = rho e^{-i t}
        # through a first-mode series with flipped angular dependence;
        # build values manually via the same formula with m = -1 content
        n = 64
        theta = 2 * np.pi * np.arange(n) / n
        m = np.rint(np.fft.fftfreq(n, 1.0 / n)).astype(int)
        rho = 0.7
        vals = rho * np.exp(-1j * theta)  # conj field on the ring
        dtheta = np.fft.ifft(1j * m * np.fft.fft(vals)) / rho
        drho = np.exp(-1j * theta)  # d/d rho of rho e^{-i t}
        resid = 0.5 * np.exp(1j * theta) * (drho + 1j * dtheta)
        assert np.abs(resid).max() > 0.9  # ~ |dbar conj(zeta)| = 1

    def test_schwarz_lift_center(self):
        # Im z_j(0) = c_j by the Schwarz normalisation
        disc = model_disc(n3_spec(), 1.0, (0.45,))
        center = disc.center()
        assert abs(center[2].imag - 0.45) < 1e-12
        assert abs(center[0]) < 1e-14
        assert abs(center[1] - 1.0) < 1e-12

    def test_rejects_r_nonpositive(self):
        with pytest.raises(ValueError, match="r > 0"):
            model_disc(SubmanifoldSpec(2, 0.0), 0.0)

    def test_degenerate_limit(self):
        spec = n3_spec()
        const = degenerate_disc(spec, (1.0,))
        assert np.abs(const - np.array([0, 0, 1j])).max() < 1e-15
        # sup-distance to the constant shrinks like sqrt(r)
        zeta = np.exp(2j * np.pi * np.arange(64) / 64)
        dists = []
        for r in [1e-3, 1e-4]:
            disc = model_disc(spec, r, (1.0,))
            dists.append(np.abs(disc.evaluate(zeta) - const).max())
        assert dists[0] < 0.2
        ratio = dists[1] / dists[0]
        assert 0.25 < ratio < 0.40  # sqrt(1/10) ~ 0.316

    def test_degenerate_zero(self):
        assert np.abs(degenerate_disc(SubmanifoldSpec(2, 0.1))).max() == 0.0


class TestFamilyGeometry:
    def test_distinct_level_sets(self):
        # gamma = 0, Q = 0: curves {|w|^2 = r, z_2 = r} disjoint across r
        spec = SubmanifoldSpec(2, 0.0)
        curves = [
            model_disc(spec, r).boundary_curve(64) for r in [0.6, 1.0, 1.4]
        ]
        for i in range(len(curves)):
            for j in range(i + 1, len(curves)):
                d = np.abs(curves[i][:, None, :] - curves[j][None, :, :])
                assert np.linalg.norm(
                    curves[i][:, None, :] - curves[j][None, :, :], axis=-1
                ).min() > 0.1

    def test_parameter_smoothness(self):
        # finite differences of Z(r, .) across a ladder stay comparable
        spec = n3_spec()
        rs = np.linspace(0.8, 1.2, 5)
        zeta = np.exp(2j * np.pi * np.arange(32) / 32)
        discs = [model_disc(spec, r, (0.0,)).evaluate(zeta) for r in rs]
        first = [np.abs(b - a).max() for a, b in zip(discs, discs[1:])]
        second = [abs(b - a) for a, b in zip(first, first[1:])]
        assert max(second) < 10 * min(first)

    def test_parametrising_rank(self):
        # F(r, c, zeta) has full rank n+1 at (1, 0, interior zeta)
        spec = n3_spec()
        zeta0 = 0.4 + 0.2j
        h = 1e-5
        cols = []
        base = model_disc(spec, 1.0, (0.0,))
        for dr, dc in [(h, 0.0), (0.0, h)]:
            up = model_disc(spec, 1.0 + dr, (dc,)).evaluate(zeta0)
            dn = model_disc(spec, 1.0 - dr, (-dc,)).evaluate(zeta0)
            cols.append((up - dn) / (2 * h))
        for dz in [h, 1j * h]:
            up = base.evaluate(zeta0 + dz)
            dn = base.evaluate(zeta0 - dz)
            cols.append((up - dn) / (2 * dz.real if dz.imag == 0 else 2 * h))
        jac = np.stack(
            [np.concatenate([c.real, c.imag]) for c in cols], axis=1
        )
        s = np.linalg.svd(jac, compute_uv=False)
        assert s[3] > 1e-4

    def test_sigma_description(self):
        info = sigma_set(n3_spec())
        assert info["real_dimension"] == 1
        assert "w = 0" in info["equations"]
