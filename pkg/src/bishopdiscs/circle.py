"""Spectral calculus of singular integral operators on the unit circle.

Functions live on N equispaced angles theta_k = 2*pi*k/N and are manipulated
through their FFT coefficients.  The operator zoo:

* ``hilbert``        -- conjugate function H, Fourier multiplier -i*sign(m)
* ``mean_value``     -- Poisson mean P0 (the m = 0 coefficient)
* ``cauchy_pv``      -- principal-value boundary Cauchy operator,
                        K0 = (i/2) H + (1/2) P0
* ``plemelj_plus`` / ``plemelj_minus`` -- interior/exterior boundary traces
                        of the Cauchy integral, K0 +- f/2
* ``cauchy_extend``  -- Cauchy integral evaluated inside the disc
* ``schwarz``        -- Schwarz integral: holomorphic extension of a real
                        boundary function, Im = 0 at the origin
* ``resynthesize``   -- rebuilds f from i*Hf + P0 f - 2 K_- f (an identity,
                        kept as a health check for the operator chain)

All operators are pure, act componentwise on vector-valued data and keep
the band convention: trigonometric polynomials of degree <= N/2 - 1 are
represented exactly; the unpaired Nyquist mode is annihilated by H.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "BoundaryGrid",
    "BoundaryFunction",
    "hilbert",
    "mean_value",
    "cauchy_pv",
    "plemelj_plus",
    "plemelj_minus",
    "cauchy_extend",
    "schwarz",
    "schwarz_coefficients",
    "resynthesize",
]

REAL_TOL = 1e-12


class BoundaryGrid:
    """Equispaced angular grid on the unit circle.

    Parameters
    ----------
    n : int
        Number of nodes; must be even and at least 8 (fast transforms).
    """

    def __init__(self, n: int):
        n = int(n)
        if n < 8 or n % 2 != 0:
            raise ValueError(f"boundary grid needs even n >= 8, got {n}")
        self.n = n
        self.theta = 2.0 * np.pi * np.arange(n) / n
        self.nodes = np.exp(1j * self.theta)
        self.mode_numbers = np.rint(np.fft.fftfreq(n, 1.0 / n)).astype(int)

    def function(self, data) -> "BoundaryFunction":
        """Wrap values (array or callable of theta) as a BoundaryFunction."""
        if callable(data):
            data = data(self.theta)
        return BoundaryFunction(self, data)

    def __eq__(self, other):
        return isinstance(other, BoundaryGrid) and other.n == self.n

    def __hash__(self):
        return hash(("BoundaryGrid", self.n))

    def __repr__(self):
        return f"BoundaryGrid(n={self.n})"


class BoundaryFunction:
    """Complex (possibly vector-valued) function sampled on a BoundaryGrid.

    ``values`` has shape (N,) or (N, d); the angular axis is always axis 0.
    Instances are treated as immutable once built.
    """

    def __init__(self, grid: BoundaryGrid, values):
        values = np.asarray(values, dtype=complex)
        if values.shape[0] != grid.n:
            raise ValueError(
                f"values have {values.shape[0]} samples, grid has {grid.n}"
            )
        self.grid = grid
        self.values = values
        self._modes = None

    @classmethod
    def from_modes(cls, grid: BoundaryGrid, modes) -> "BoundaryFunction":
        modes = np.asarray(modes, dtype=complex)
        vals = np.fft.ifft(modes * grid.n, axis=0)
        f = cls(grid, vals)
        f._modes = modes
        return f

    def to_modes(self) -> np.ndarray:
        """Fourier coefficients in numpy fft ordering (axis 0 = mode axis)."""
        if self._modes is None:
            self._modes = np.fft.fft(self.values, axis=0) / self.grid.n
        return self._modes

    def max_imag(self) -> float:
        return float(np.abs(self.values.imag).max())

    def is_real(self, tol: float = REAL_TOL) -> bool:
        return self.max_imag() <= tol

    def real_part(self) -> "BoundaryFunction":
        return BoundaryFunction(self.grid, self.values.real.astype(complex))

    def imag_part(self) -> "BoundaryFunction":
        return BoundaryFunction(self.grid, self.values.imag.astype(complex))

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def _wrap(self, values):
        return BoundaryFunction(self.grid, values)

    def __add__(self, other):
        other_vals = other.values if isinstance(other, BoundaryFunction) else other
        return self._wrap(self.values + other_vals)

    __radd__ = __add__

    def __sub__(self, other):
        other_vals = other.values if isinstance(other, BoundaryFunction) else other
        return self._wrap(self.values - other_vals)

    def __mul__(self, other):
        other_vals = other.values if isinstance(other, BoundaryFunction) else other
        return self._wrap(self.values * other_vals)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.values)

    def __repr__(self):
        return f"BoundaryFunction(n={self.grid.n}, shape={self.values.shape})"


def _mode_shape(modes, f):
    """Broadcast a per-mode multiplier over trailing component axes."""
    extra = f.values.ndim - 1
    return modes.reshape((-1,) + (1,) * extra)


def hilbert(f: BoundaryFunction, enforce_real: bool = True) -> BoundaryFunction:
    """Hilbert transform (conjugate function).

    Multiplier -i*sign(m) for m != 0, zero on the mean and on the unpaired
    Nyquist mode.  For real u the result is real and u + i*H(u) extends
    holomorphically into the disc with zero-mean imaginary part.

    With ``enforce_real`` (the default) non-real input is rejected; pass
    False to apply the multiplier to complex data, which acts on real and
    imaginary parts independently.
    """
    if enforce_real and not f.is_real():
        raise ValueError(
            f"hilbert: input is not real (max |Im| = {f.max_imag():.3e}); "
            "pass enforce_real=False to transform complex data"
        )
    m = f.grid.mode_numbers
    mult = -1j * np.sign(m).astype(complex)
    mult[m == -f.grid.n // 2] = 0.0
    out = BoundaryFunction.from_modes(
        f.grid, _mode_shape(mult, f) * f.to_modes()
    )
    if enforce_real:
        out = out.real_part()
    return out


def mean_value(f: BoundaryFunction):
    """Poisson mean P0 f: the value of the harmonic extension at 0."""
    return f.to_modes()[0]


def cauchy_pv(f: BoundaryFunction) -> BoundaryFunction:
    """Principal-value Cauchy operator K0 on the boundary.

    Defined through the identity K0 = (i/2) H + (1/2) P0, which makes the
    Plemelj chain below exact on the grid.  On exponentials:
    K0(e^{im t}) = sign(m) e^{im t}/2 for m != 0 and K0(1) = 1/2.
    """
    hf = hilbert(f, enforce_real=False)
    return BoundaryFunction(
        f.grid, 0.5j * hf.values + 0.5 * mean_value(f)
    )


def plemelj_plus(f: BoundaryFunction) -> BoundaryFunction:
    """Interior boundary trace K+ f = K0 f + f/2 (keeps modes m >= 0)."""
    return BoundaryFunction(f.grid, cauchy_pv(f).values + 0.5 * f.values)


def plemelj_minus(f: BoundaryFunction) -> BoundaryFunction:
    """Exterior boundary trace K- f = K0 f - f/2 (equals minus the
    anti-holomorphic part of f)."""
    return BoundaryFunction(f.grid, cauchy_pv(f).values - 0.5 * f.values)


def cauchy_extend(f: BoundaryFunction, zeta):
    """Cauchy integral of f evaluated at interior points |zeta| < 1.

    Equals sum_{m >= 0} fhat_m zeta^m over the resolved band.  ``zeta`` may
    be a scalar or an array; the power sum is evaluated by Horner.
    """
    zeta = np.asarray(zeta, dtype=complex)
    if np.any(np.abs(zeta) >= 1.0):
        raise ValueError("cauchy_extend requires |zeta| < 1")
    modes = f.to_modes()
    n = f.grid.n
    coeffs = modes[: n // 2]  # m = 0 .. n/2 - 1
    return _horner(coeffs, zeta)


def _horner(coeffs, zeta):
    """Evaluate sum_k coeffs[k] zeta^k; coeffs may have component axes."""
    zeta = np.asarray(zeta, dtype=complex)
    extra = coeffs.ndim - 1
    z = zeta.reshape(zeta.shape + (1,) * extra)
    out = np.zeros(zeta.shape + coeffs.shape[1:], dtype=complex)
    for c in coeffs[::-1]:
        out = out * z + c
    return out


def schwarz_coefficients(u: BoundaryFunction) -> np.ndarray:
    """Taylor coefficients of the Schwarz integral of a real function u.

    S u is the holomorphic function with Re(S u)|_{bD} = u and
    Im(S u)(0) = 0; its Taylor coefficients are uhat_0 and 2*uhat_m for
    m >= 1.
    """
    if not u.is_real():
        raise ValueError(
            f"schwarz: input must be real (max |Im| = {u.max_imag():.3e})"
        )
    modes = u.to_modes()
    n = u.grid.n
    coeffs = modes[: n // 2].copy()
    coeffs[1:] *= 2.0
    coeffs[0] = coeffs[0].real
    return coeffs


def schwarz(u: BoundaryFunction, zeta):
    """Schwarz integral S u at points of the closed disc |zeta| <= 1.

    On the boundary S u = u + i H u; at the origin S u = P0 u.
    """
    zeta = np.asarray(zeta, dtype=complex)
    if np.any(np.abs(zeta) > 1.0 + 1e-13):
        raise ValueError("schwarz requires |zeta| <= 1")
    return _horner(schwarz_coefficients(u), zeta)


def resynthesize(f: BoundaryFunction) -> BoundaryFunction:
    """Return i*H f + P0 f - 2 K_- f, which reproduces f identically.

    The Hilbert transform acts on real and imaginary parts componentwise.
    Used as a self-test of the multiplier conventions: any drift in H, P0
    or K_- breaks the reconstruction.
    """
    hf = hilbert(f, enforce_real=False)
    km = plemelj_minus(f)
    return BoundaryFunction(
        f.grid, 1j * hf.values + mean_value(f) - 2.0 * km.values
    )
