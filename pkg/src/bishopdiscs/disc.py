"""d-bar calculus on the closed unit disc.

The grid is polar: equispaced angles crossed with a Gauss-Radau radial rule
for the weight rho on (0, 1] whose last node sits exactly at rho = 1, so
boundary traces are stored, never extrapolated.  Derivatives are spectral
(FFT in the angle, barycentric differentiation in the radius); the
Cauchy-Green transform

    T g (zeta) = -(1/pi) integral_D g(tau) / (tau - zeta) dA(tau)

is applied per angular mode through semi-analytic radial kernels, so the
1/(tau - zeta) singularity never meets a quadrature rule.  The direct area
quadrature survives only in the test suite as an oracle.
"""

from __future__ import annotations

import numpy as np

from .circle import BoundaryFunction, BoundaryGrid

__all__ = [
    "DiscGrid",
    "DiscFunction",
    "dbar",
    "dz",
    "cauchy_green",
    "cauchy_green_at",
    "cauchy_green_monomial",
    "cauchy_extension",
    "generalized_cauchy_residual",
]


def radau_radial_rule(n: int):
    """Nodes/weights for int_0^1 g(rho) rho drho with a fixed node at 1.

    Golub's Radau modification of the Jacobi matrix for the weight (1+t)
    on [-1, 1], mapped to [0, 1].  Exact for polynomials of degree
    <= 2n - 2; all weights positive.
    """
    ks = np.arange(n)
    a = 1.0 / ((2 * ks + 1) * (2 * ks + 3))
    b = np.zeros(n)
    b[0] = 2.0
    kk = np.arange(1, n)
    b[1:] = kk * (kk + 1) / (2 * kk + 1) ** 2
    # monic orthogonal polynomials evaluated at the fixed endpoint t = 1
    pm1, p = 0.0, 1.0
    for k in range(n - 1):
        pm1, p = p, (1.0 - a[k]) * p - (b[k] * pm1 if k > 0 else 0.0)
    a_mod = 1.0 - b[n - 1] * pm1 / p
    diag = np.concatenate([a[: n - 1], [a_mod]])
    off = np.sqrt(b[1:n])
    jac = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    vals, vecs = np.linalg.eigh(jac)
    rho = (1.0 + vals) / 2.0
    weights = 2.0 * vecs[0] ** 2 / 4.0
    rho[-1] = 1.0  # snap the Radau endpoint
    return rho, weights


def _barycentric_weights(x):
    w = np.ones_like(x)
    for j in range(len(x)):
        w[j] = 1.0 / np.prod(x[j] - np.delete(x, j))
    return w


def _diff_matrix(x, w):
    n = len(x)
    with np.errstate(divide="ignore"):
        ratio = w[None, :] / w[:, None]
        dist = x[:, None] - x[None, :]
        d = np.where(np.eye(n, dtype=bool), 0.0, ratio / dist)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


def _cardinal_matrix(xq, x, w):
    """C[q, j] = value of the j-th Lagrange cardinal polynomial at xq[q]."""
    diff = xq[:, None] - x[None, :]
    hit = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        c = w[None, :] / diff
        c = c / c.sum(axis=1)[:, None]
    if hit.any():
        rows = hit.any(axis=1)
        c[rows] = 0.0
        c[hit] = 1.0
    return c


class DiscGrid:
    """Polar grid {rho_j e^{i theta_k}} on the closed unit disc.

    Parameters
    ----------
    n_radial : int
        Number of radial nodes (>= 4); the last one is rho = 1.
    n_theta : int
        Number of equispaced angles; even, >= 8.
    """

    def __init__(self, n_radial: int, n_theta: int):
        if n_radial < 4:
            raise ValueError(f"need n_radial >= 4, got {n_radial}")
        self.boundary = BoundaryGrid(n_theta)
        self.n_radial = int(n_radial)
        self.n_theta = self.boundary.n
        self.rho, self.radial_weights = radau_radial_rule(self.n_radial)
        self.theta = self.boundary.theta
        self._bary = _barycentric_weights(self.rho)
        self.radial_diff = _diff_matrix(self.rho, self._bary)
        self.points = self.rho[:, None] * self.boundary.nodes[None, :]
        self.area_weights = (
            self.radial_weights[:, None]
            * (2.0 * np.pi / self.n_theta)
            * np.ones((1, self.n_theta))
        )
        self._cg_kernels = None

    def function(self, data) -> "DiscFunction":
        """Wrap values (array over the grid or a callable of zeta)."""
        if callable(data):
            data = data(self.points)
        return DiscFunction(self, data)

    # -- Cauchy-Green radial kernels -------------------------------------

    def cauchy_green_kernels(self):
        """Per-mode matrices K[m][i, j]: radial samples -> T at radius rho_i.

        For the angular mode g_m(rho) e^{i m theta} the transform is
        e^{i (m-1) phi} R_m(s) with

            R_m(s) = +2 int_0^s g_m(rho) (rho/s)^{1-m} drho     (m <= 0)
            R_m(s) = -2 int_s^1 g_m(rho) (s/rho)^{m-1} drho     (m >= 1)

        The m <= 0 integrand is a polynomial: one Gauss rule is exact.
        For m >= 1 dyadic panels from s to 1 resolve the (s/rho)^{m-1}
        layer uniformly in m.
        """
        if self._cg_kernels is None:
            self._cg_kernels = self._build_cg_kernels()
        return self._cg_kernels

    def _build_cg_kernels(self):
        modes = self.boundary.mode_numbers
        kern = np.zeros((self.n_theta, self.n_radial, self.n_radial))
        for i, s in enumerate(self.rho):
            kern[:, i, :] = self._cg_rows(s, modes)
        return kern

    def _cg_rows(self, s, modes):
        """Kernel rows (one per angular mode) for a single target radius."""
        rows = np.zeros((len(modes), self.n_radial))
        neg = modes <= 0
        pos = ~neg
        # m <= 0: integrand card_j(rho) * (rho/s)^{1+|m|} is a polynomial of
        # degree <= n_radial - 1 + 1 + max|m|; size the Gauss rule to be exact
        n_neg = (self.n_radial + self.n_theta // 2) // 2 + 4
        gx, gw = np.polynomial.legendre.leggauss(n_neg)
        xq = 0.5 * s * (gx + 1.0)
        wq = 0.5 * s * gw
        card = _cardinal_matrix(xq, self.rho, self._bary)
        with np.errstate(under="ignore"):
            powers = (xq[None, :] / s) ** (1 - modes[neg, None])
        rows[neg] = 2.0 * (powers * wq[None, :]) @ card
        # m >= 1: dyadic panels [s, 2s, 4s, ..., 1]
        if s < 1.0:
            edges = [s]
            while edges[-1] < 1.0:
                edges.append(min(2.0 * edges[-1], 1.0))
            px, pw = np.polynomial.legendre.leggauss(64)
            xs, ws = [], []
            for a, b in zip(edges[:-1], edges[1:]):
                xs.append(0.5 * (b - a) * px + 0.5 * (a + b))
                ws.append(0.5 * (b - a) * pw)
            xq2 = np.concatenate(xs)
            wq2 = np.concatenate(ws)
            card2 = _cardinal_matrix(xq2, self.rho, self._bary)
            with np.errstate(under="ignore"):
                powers2 = (s / xq2[None, :]) ** (modes[pos, None] - 1)
            rows[pos] = -2.0 * (powers2 * wq2[None, :]) @ card2
        return rows

    def __eq__(self, other):
        return (
            isinstance(other, DiscGrid)
            and other.n_radial == self.n_radial
            and other.n_theta == self.n_theta
        )

    def __hash__(self):
        return hash(("DiscGrid", self.n_radial, self.n_theta))

    def __repr__(self):
        return f"DiscGrid(n_radial={self.n_radial}, n_theta={self.n_theta})"


class DiscFunction:
    """Complex (possibly vector-valued) function on a DiscGrid.

    ``values`` has shape (n_radial, n_theta) or (n_radial, n_theta, d);
    the last radial row is the boundary trace.
    """

    def __init__(self, grid: DiscGrid, values):
        values = np.asarray(values, dtype=complex)
        if values.shape[:2] != (grid.n_radial, grid.n_theta):
            raise ValueError(
                f"values shaped {values.shape}, expected leading "
                f"({grid.n_radial}, {grid.n_theta})"
            )
        self.grid = grid
        self.values = values

    def boundary(self) -> BoundaryFunction:
        """Boundary trace (the rho = 1 samples, stored directly)."""
        return BoundaryFunction(self.grid.boundary, self.values[-1])

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def integral(self):
        """Area integral over the disc (per component)."""
        w = self.grid.area_weights
        extra = self.values.ndim - 2
        w = w.reshape(w.shape + (1,) * extra)
        return np.sum(w * self.values, axis=(0, 1))

    def _wrap(self, values):
        return DiscFunction(self.grid, values)

    def __add__(self, other):
        vals = other.values if isinstance(other, DiscFunction) else other
        return self._wrap(self.values + vals)

    def __sub__(self, other):
        vals = other.values if isinstance(other, DiscFunction) else other
        return self._wrap(self.values - vals)

    def __mul__(self, other):
        vals = other.values if isinstance(other, DiscFunction) else other
        return self._wrap(self.values * vals)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.values)

    def __repr__(self):
        return f"DiscFunction(grid={self.grid!r}, shape={self.values.shape})"


def _theta_modes(f: DiscFunction):
    return np.fft.fft(f.values, axis=1) / f.grid.n_theta


def _from_theta_modes(grid: DiscGrid, modes):
    return np.fft.ifft(modes * grid.n_theta, axis=1)


def _polar_derivatives(f: DiscFunction):
    """Return (d/d rho, (1/rho) d/d theta) of the samples."""
    grid = f.grid
    vals = f.values
    flat = vals.reshape(grid.n_radial, -1)
    dr = (grid.radial_diff @ flat).reshape(vals.shape)
    modes = _theta_modes(f)
    m = grid.boundary.mode_numbers
    extra = vals.ndim - 2
    mm = m.reshape((1, -1) + (1,) * extra)
    dth = _from_theta_modes(grid, 1j * mm * modes)
    rho = grid.rho.reshape((-1, 1) + (1,) * extra)
    return dr, dth / rho


def dbar(f: DiscFunction) -> DiscFunction:
    """Wirtinger derivative d/d zeta-bar, spectral in both directions.

    Polar form: dbar = (e^{i theta}/2) (d_rho + (i/rho) d_theta).
    Vanishes on holomorphic samples up to differentiation round-off.
    """
    dr, dth_over_rho = _polar_derivatives(f)
    extra = f.values.ndim - 2
    phase = np.exp(1j * f.grid.theta).reshape((1, -1) + (1,) * extra)
    return DiscFunction(f.grid, 0.5 * phase * (dr + 1j * dth_over_rho))


def dz(f: DiscFunction) -> DiscFunction:
    """Wirtinger derivative d/d zeta (conjugate phase, conjugate combo)."""
    dr, dth_over_rho = _polar_derivatives(f)
    extra = f.values.ndim - 2
    phase = np.exp(-1j * f.grid.theta).reshape((1, -1) + (1,) * extra)
    return DiscFunction(f.grid, 0.5 * phase * (dr - 1j * dth_over_rho))


def cauchy_green(g: DiscFunction) -> DiscFunction:
    """Cauchy-Green transform T g on the grid (boundary row included).

    Satisfies dbar(T g) = g; the boundary trace obeys
    T[dbar f]|_{bD} = -K_-[f|_{bD}] for smooth f.
    """
    grid = g.grid
    kern = grid.cauchy_green_kernels()
    modes = _theta_modes(g)
    if g.values.ndim == 2:
        # stacked matmul over the mode axis: (m,i,j) @ (m,j,1) -> (m,i)
        rhat = (kern @ modes.T[..., None])[..., 0].T
    else:
        rhat = np.transpose(kern @ modes.transpose(1, 0, 2), (1, 0, 2))
    out = _from_theta_modes(grid, rhat)
    extra = g.values.ndim - 2
    phase = np.exp(-1j * grid.theta).reshape((1, -1) + (1,) * extra)
    return DiscFunction(grid, out * phase)


def cauchy_green_at(g: DiscFunction, zeta):
    """T g at one point of the closed disc (|zeta| <= 1)."""
    zeta = complex(zeta)
    s = abs(zeta)
    if s > 1.0 + 1e-13:
        raise ValueError(f"cauchy_green_at requires |zeta| <= 1, got {s}")
    grid = g.grid
    gmodes = _theta_modes(g)  # (n_radial, n_theta[, d])
    rows = grid._cg_rows(min(s, 1.0), grid.boundary.mode_numbers)
    if g.values.ndim == 2:
        rm = np.einsum("mj,jm->m", rows, gmodes)
    else:
        rm = np.einsum("mj,jmd->md", rows, gmodes)
    phi = np.angle(zeta) if s > 0 else 0.0
    m = grid.boundary.mode_numbers
    phase = np.exp(1j * (m - 1) * phi)
    if g.values.ndim == 2:
        return complex(np.sum(rm * phase))
    return np.sum(rm * phase[:, None], axis=0)


def cauchy_green_monomial(a: int, b: int, zeta):
    """Closed form of T[tau^a conj(tau)^b] on the closed disc.

    T = (zeta^a conj(zeta)^{b+1} - [a >= b+1] zeta^{a-b-1}) / (b+1); the
    subtracted holomorphic piece enforces the exterior decay of T.
    """
    zeta = np.asarray(zeta, dtype=complex)
    out = (zeta ** a) * (np.conj(zeta) ** (b + 1)) / (b + 1)
    if a >= b + 1:
        out = out - zeta ** (a - b - 1) / (b + 1)
    return out


def cauchy_extension(bf: BoundaryFunction, grid: DiscGrid) -> DiscFunction:
    """Cauchy integral K of boundary data, sampled on the disc grid.

    Keeps the non-negative modes: K f = sum_{m >= 0} fhat_m zeta^m.
    """
    if bf.grid.n != grid.n_theta:
        raise ValueError("boundary data and disc grid have mismatched angles")
    modes = bf.to_modes()
    m = grid.boundary.mode_numbers
    keep = m >= 0
    extra = modes.ndim - 1
    with np.errstate(under="ignore"):
        radial = np.where(
            keep[None, :], grid.rho[:, None] ** np.abs(m)[None, :], 0.0
        )
    radial = radial.reshape(radial.shape + (1,) * extra)
    return DiscFunction(
        grid, _from_theta_modes(grid, radial * modes[None, ...])
    )


def generalized_cauchy_residual(f: DiscFunction) -> float:
    """Max-norm defect of f = K(f|_bD) + T(dbar f) over the grid.

    A discretisation health check: small exactly when the grid resolves f.
    """
    kf = cauchy_extension(f.boundary(), f.grid)
    tf = cauchy_green(dbar(f))
    return float(np.abs(f.values - kf.values - tf.values).max())
