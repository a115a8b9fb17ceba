"""Closed-form Bishop discs attached to the model quadric E_0.

The conformal maps w_r: D -> D_r = {P(w) < r} are built once per gamma by
solving the boundary-correspondence (Theodorsen) equation

    phi(theta) = theta + H[log R(phi)](theta),
    R(phi) = (1 + 2 gamma cos 2 phi)^{-1/2},

with a dense Newton step on a moderate grid followed by damped Picard
polishing on a grid large enough to resolve the Fourier tail.  The ellipse
foci approach the boundary as gamma -> 1/2 and push the nearest
singularity of the map toward |zeta| = 1, so the truncation degree is
chosen adaptively from the measured coefficient decay.

A model disc with parameters (r > 0, c in R^{n-2}) is

    w = w_r = sqrt(r) w_1,    z_2 = r,    z_j = S[Q_j o w_r|_{bD}] + i c_j

whose boundary lies on E_0 and whose components are holomorphic by
construction; both facts are measured, not assumed.
"""

from __future__ import annotations

import numpy as np

from .circle import BoundaryFunction, BoundaryGrid, schwarz_coefficients
from .errors import ConvergenceError
from .manifolds import SubmanifoldSpec
from .structures import Dilation

__all__ = [
    "EllipseMap",
    "build_ellipse_map",
    "ModelDisc",
    "model_disc",
    "degenerate_disc",
    "sigma_set",
    "series_dbar_residual",
]

_EMAP_CACHE: dict = {}


def _hilbert_real(vals):
    n = len(vals)
    m = np.rint(np.fft.fftfreq(n, 1.0 / n)).astype(int)
    mult = -1j * np.sign(m).astype(complex)
    mult[m == -n // 2] = 0.0
    return np.real(np.fft.ifft(mult * np.fft.fft(vals)))


def _correspondence_residual(gamma, phi, theta):
    log_r = -0.5 * np.log(1.0 + 2.0 * gamma * np.cos(2.0 * phi))
    return phi - theta - _hilbert_real(log_r)


def _newton_correspondence(gamma, n, tol=5e-14, maxit=30):
    """Dense-Newton solve of the boundary correspondence on n nodes."""
    theta = 2.0 * np.pi * np.arange(n) / n
    phi = theta.copy()
    m = np.rint(np.fft.fftfreq(n, 1.0 / n)).astype(int)
    mult = -1j * np.sign(m).astype(complex)
    mult[m == -n // 2] = 0.0
    hmat = np.real(np.fft.ifft(mult[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0))
    res = np.inf
    for _ in range(maxit):
        g = _correspondence_residual(gamma, phi, theta)
        res = np.abs(g).max()
        if res < tol:
            break
        slope = 2.0 * gamma * np.sin(2.0 * phi) / (1.0 + 2.0 * gamma * np.cos(2.0 * phi))
        phi = phi - np.linalg.solve(np.eye(n) - hmat * slope[None, :], g)
    return phi, res


def _upsample_correspondence(phi, n_big):
    """Trigonometric interpolation of phi - theta onto a finer grid."""
    n = len(phi)
    g = phi - 2.0 * np.pi * np.arange(n) / n
    gm = np.fft.fft(g)
    big = np.zeros(n_big, dtype=complex)
    big[: n // 2] = gm[: n // 2]
    big[-(n // 2):] = gm[-(n // 2):]
    g_big = np.real(np.fft.ifft(big)) * (n_big / n)
    return 2.0 * np.pi * np.arange(n_big) / n_big + g_big


def _polish_correspondence(gamma, phi, tol=2e-13, maxit=1500):
    n = len(phi)
    theta = 2.0 * np.pi * np.arange(n) / n
    slope_cap = 2.0 * gamma / max(1e-12, np.sqrt(max(1e-12, 1.0 - 4.0 * gamma ** 2)))
    lam = 1.0 / (1.0 + slope_cap)
    res = np.inf
    for _ in range(maxit):
        g = _correspondence_residual(gamma, phi, theta)
        res = np.abs(g).max()
        if res < tol:
            break
        phi = phi - lam * g
    return phi, res


class EllipseMap:
    """Riemann map w_1: D -> {P(w) < 1} as a truncated odd power series.

    Normalised by w_1(0) = 0, w_1'(0) > 0; the scaling rule w_r = sqrt(r) w_1
    maps onto {P < r} because P is homogeneous of degree two.
    """

    def __init__(self, gamma, coefficients, boundary_residual,
                 correspondence_residual):
        self.gamma = float(gamma)
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.degree = len(self.coefficients) - 1
        self.boundary_residual = float(boundary_residual)
        self.correspondence_residual = float(correspondence_residual)

    def boundary_values(self, n_theta: int) -> np.ndarray:
        """w_1 on n_theta equispaced boundary nodes (exact FFT synthesis)."""
        return self.ring_values(1.0, n_theta)

    def ring_values(self, radius: float, n_theta: int) -> np.ndarray:
        """w_1 on the circle |zeta| = radius; aliasing-free when
        n_theta > degree."""
        coef = self.coefficients * radius ** np.arange(self.degree + 1)
        if n_theta > self.degree:
            padded = np.zeros(n_theta, dtype=complex)
            padded[: self.degree + 1] = coef
            return np.fft.ifft(padded) * n_theta
        return self(radius * np.exp(2j * np.pi * np.arange(n_theta) / n_theta))

    def __call__(self, zeta):
        """Evaluate the truncated series by Horner at arbitrary points."""
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros_like(zeta)
        for c in self.coefficients[::-1]:
            out = out * zeta + c
        return out

    def derivative_at_zero(self) -> float:
        return float(self.coefficients[1])

    def attachment_residual(self, n_theta: int = None) -> float:
        """max_theta |P(w_1(e^{i theta})) - 1| on an oversampled grid."""
        n = n_theta or _next_pow2(4 * self.degree + 8)
        w = self.boundary_values(n)
        p = np.abs(w) ** 2 + 2.0 * self.gamma * np.real(w ** 2)
        return float(np.abs(p - 1.0).max())

    def is_injective(self) -> bool:
        """Argument-principle check: w_1' winds zero times around 0 along
        the boundary (no critical point in D) and the boundary image angle
        is strictly monotone (the curve is simple)."""
        n = _next_pow2(2 * self.degree + 8)
        k = np.arange(self.degree + 1)
        dcoef = (k * self.coefficients)[1:]
        padded = np.zeros(n, dtype=complex)
        padded[: len(dcoef)] = dcoef
        dvals = np.fft.ifft(padded) * n
        loop = np.unwrap(np.angle(np.concatenate([dvals, dvals[:1]])))
        zeros_inside = round((loop[-1] - loop[0]) / (2 * np.pi))
        w = self.boundary_values(n)
        angles = np.unwrap(np.angle(w))
        return bool(zeros_inside == 0 and np.all(np.diff(angles) > 0))


def _next_pow2(n):
    p = 64
    while p < n:
        p *= 2
    return p


def build_ellipse_map(gamma: float, tol: float = 1e-9, degree: int = None,
                      max_degree: int = 8192) -> EllipseMap:
    """Construct the normalised Riemann map onto the ellipse {P(w) < 1}.

    The truncation degree is chosen adaptively so the attachment residual
    meets ``tol`` unless an explicit ``degree`` is requested.  Raises
    ConvergenceError with the achieved residual when gamma sits too close
    to 1/2 for the permitted series length.
    """
    gamma = float(gamma)
    if not 0.0 <= gamma < 0.5:
        raise ValueError(f"gamma must lie in [0, 1/2), got {gamma}")
    key = (round(gamma, 12), tol, degree, max_degree)
    if key in _EMAP_CACHE:
        return _EMAP_CACHE[key]
    if gamma == 0.0:
        coef = np.zeros((degree or 1) + 1)
        coef[1] = 1.0
        emap = EllipseMap(0.0, coef, 0.0, 0.0)
        _EMAP_CACHE[key] = emap
        return emap

    phi, res = _newton_correspondence(gamma, 1024)
    # escalate the synthesis grid until the odd-coefficient tail is resolved
    # well inside the band; the tail shrinks slowly as gamma -> 1/2
    floor = max(tol * 1e-3, 1e-14)
    n_big, use_degree, coef = 2048, None, None
    while True:
        phi_big = _upsample_correspondence(phi, n_big)
        phi_big, res = _polish_correspondence(gamma, phi_big)
        theta = 2.0 * np.pi * np.arange(n_big) / n_big
        u = -0.5 * np.log(1.0 + 2.0 * gamma * np.cos(2.0 * phi_big))
        w_bd = np.exp(1j * theta) * np.exp(u + 1j * _hilbert_real(u))
        coef_full = np.fft.fft(w_bd) / n_big
        # enforce the odd-real symmetry of the series
        coef = coef_full[: n_big // 2].real
        coef[0::2] = 0.0
        odd_mags = np.abs(coef[1::2])
        tail = np.cumsum(np.abs(coef)[::-1])[::-1]
        settled = np.nonzero(tail <= tol / 10.0)[0]
        resolved = (
            len(settled) > 0
            and settled[0] <= n_big // 4
            and odd_mags[len(odd_mags) // 2:].max() < floor
        )
        if degree is not None and n_big > 2 * degree:
            break
        if resolved or n_big >= 4 * max_degree:
            break
        n_big *= 2
    if degree is None:
        tail = np.cumsum(np.abs(coef)[::-1])[::-1]
        settled = np.nonzero(tail <= tol / 10.0)[0]
        use_degree = int(settled[0]) if len(settled) else len(coef) - 1
        if use_degree > max_degree or not len(settled):
            probe_deg = min(use_degree, max_degree)
            probe = EllipseMap(gamma, coef[: probe_deg + 1], np.nan, res)
            raise ConvergenceError(
                f"ellipse map at gamma={gamma} needs series degree beyond "
                f"max_degree {max_degree}",
                {"achieved_residual": probe.attachment_residual(),
                 "correspondence_residual": res},
            )
    else:
        use_degree = min(int(degree), len(coef) - 1)
    emap = EllipseMap(gamma, coef[: use_degree + 1], np.nan, res)
    emap.boundary_residual = emap.attachment_residual()
    if degree is None and emap.boundary_residual > tol:
        raise ConvergenceError(
            f"ellipse map at gamma={gamma}: achieved residual "
            f"{emap.boundary_residual:.3e} above tol {tol:.1e}",
            {"achieved_residual": emap.boundary_residual},
        )
    _EMAP_CACHE[key] = emap
    return emap


class ModelDisc:
    """A Bishop disc for the model quadric with the standard structure.

    Components are stored as Taylor coefficients: w has odd coefficients
    sqrt(r) alpha_k, z_2 is the constant r, and each z_j (j >= 3) is the
    Schwarz lift of Q_j o w_r plus i c_j.
    """

    def __init__(self, spec: SubmanifoldSpec, r: float, c, emap: EllipseMap):
        self.spec = spec
        self.r = float(r)
        self.c = np.atleast_1d(np.asarray(c, dtype=float)) if spec.n > 2 else np.zeros(0)
        if self.c.shape != (spec.n - 2,):
            raise ValueError(
                f"need {spec.n - 2} imaginary centres, got shape {self.c.shape}"
            )
        self.emap = emap
        self._build()

    def _build(self):
        spec, r = self.spec, self.r
        if r <= 0:
            raise ValueError("model discs need r > 0; use degenerate_disc")
        w_coef = np.sqrt(r) * self.emap.coefficients.astype(complex)
        comps = [w_coef, np.array([complex(r)])]
        if spec.n > 2:
            deg = self.emap.degree
            n_big = _next_pow2(4 * deg + 8)
            grid = BoundaryGrid(n_big)
            w_bd = np.sqrt(r) * self.emap.boundary_values(n_big)
            zpad = np.zeros((n_big, spec.n), dtype=complex)
            zpad[:, 0] = w_bd
            for idx, j in enumerate(range(3, spec.n + 1)):
                qvals = spec.q_polynomial(j)(zpad).real
                coeffs = schwarz_coefficients(grid.function(qvals))
                coeffs = _trim(coeffs, 1e-15)
                coeffs[0] += 1j * self.c[idx]
                comps.append(coeffs)
        self.components = comps

    @property
    def n(self):
        return self.spec.n

    def max_degree(self) -> int:
        return max(len(c) - 1 for c in self.components)

    def taylor_coefficients(self, n_coef: int) -> np.ndarray:
        """(n, n_coef + 1) coefficient matrix, truncated or zero-padded."""
        out = np.zeros((self.n, n_coef + 1), dtype=complex)
        for i, c in enumerate(self.components):
            m = min(len(c), n_coef + 1)
            out[i, :m] = c[:m]
        return out

    def evaluate(self, zeta) -> np.ndarray:
        """Z(zeta) with components along the last axis."""
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros(zeta.shape + (self.n,), dtype=complex)
        for i, coef in enumerate(self.components):
            acc = np.zeros_like(zeta)
            for ck in coef[::-1]:
                acc = acc * zeta + ck
            out[..., i] = acc
        return out

    def boundary_curve(self, n_theta: int) -> np.ndarray:
        """Z on n_theta boundary nodes via exact FFT synthesis."""
        out = np.zeros((n_theta, self.n), dtype=complex)
        for i, coef in enumerate(self.components):
            n_big = max(_next_pow2(len(coef)), n_theta)
            padded = np.zeros(n_big, dtype=complex)
            padded[: len(coef)] = coef
            vals = np.fft.ifft(padded) * n_big
            step = n_big // n_theta
            out[:, i] = vals[::step] if n_big % n_theta == 0 else self.evaluate(
                np.exp(2j * np.pi * np.arange(n_theta) / n_theta)
            )[:, i]
        return out

    def center(self) -> np.ndarray:
        return self.evaluate(np.zeros(()))

    def attachment_residual(self, n_theta: int = None) -> float:
        """max over the boundary of |r0(Z)| on an oversampled grid."""
        n = n_theta or _next_pow2(2 * self.max_degree() + 8)
        curve = self.boundary_curve(n)
        return float(np.abs(self.spec.model_quadric()(curve)).max())

    def holomorphy_residual(self, radii=(0.35, 0.75, 0.99)) -> float:
        """Spectral d-bar defect of each component on sample rings."""
        return max(
            series_dbar_residual(coef, radii) for coef in self.components
        )

    def __repr__(self):
        return (
            f"ModelDisc(n={self.n}, gamma={self.spec.gamma}, r={self.r}, "
            f"c={list(self.c)})"
        )


def _trim(coeffs, tol):
    mags = np.abs(coeffs)
    keep = np.nonzero(mags > tol * max(1.0, mags.max()))[0]
    last = keep[-1] if len(keep) else 0
    return np.array(coeffs[: last + 1], dtype=complex)


def series_dbar_residual(coefficients, radii=(0.35, 0.75, 0.99)) -> float:
    """d-bar residual of a Taylor-series component, measured on rings.

    The radial derivative differentiates the series (exact for polynomial
    data); the angular derivative is a Fourier multiplier applied to the
    sampled ring values, so any mismatch between the stored coefficients
    and the synthesised field (a stray conjugation, a wrong mode) shows up
    at full size.  Well conditioned at any degree, unlike a radial
    differentiation matrix.
    """
    coef = np.asarray(coefficients, dtype=complex)
    deg = len(coef) - 1
    n = _next_pow2(2 * deg + 8)
    m = np.rint(np.fft.fftfreq(n, 1.0 / n)).astype(int)
    k = np.arange(deg + 1)
    worst = 0.0
    for rho in radii:
        ring = np.zeros(n, dtype=complex)
        ring[: deg + 1] = coef * rho ** k
        vals = np.fft.ifft(ring) * n
        drho = np.zeros(n, dtype=complex)
        drho[: deg + 1] = k * coef * rho ** np.maximum(k - 1, 0)
        drho[0] = 0.0
        drho_vals = np.fft.ifft(drho) * n  # = d f / d rho on the ring
        dtheta_vals = np.fft.ifft(1j * m * np.fft.fft(vals)) / rho
        theta = 2.0 * np.pi * np.arange(n) / n
        resid = 0.5 * np.exp(1j * theta) * (drho_vals + 1j * dtheta_vals)
        worst = max(worst, float(np.abs(resid).max()))
    return worst


def model_disc(spec: SubmanifoldSpec, r: float, c=(), emap: EllipseMap = None,
               tol: float = 1e-9) -> ModelDisc:
    """Assemble the model Bishop disc with parameters (r, c)."""
    if emap is None:
        emap = build_ellipse_map(spec.gamma, tol=tol)
    return ModelDisc(spec, r, c, emap)


def degenerate_disc(spec: SubmanifoldSpec, c=()) -> np.ndarray:
    """The r = 0 limit: the constant map zeta -> (0, 0, i c_3, ..., i c_n)."""
    c = np.atleast_1d(np.asarray(c, dtype=float)) if spec.n > 2 else np.zeros(0)
    if c.shape != (spec.n - 2,):
        raise ValueError(f"need {spec.n - 2} imaginary centres")
    out = np.zeros(spec.n, dtype=complex)
    out[2:] = 1j * c
    return out


def sigma_set(spec: SubmanifoldSpec) -> dict:
    """The degeneracy set Sigma = {w = 0, z_2 = 0, Re z_j = 0} where the
    disc family collapses to constants."""
    return {
        "equations": ["w = 0", "z_2 = 0"]
        + [f"Re z_{j} = 0" for j in range(3, spec.n + 1)],
        "real_dimension": spec.n - 2,
        "parametrised_by": [f"Im z_{j}" for j in range(3, spec.n + 1)],
    }
