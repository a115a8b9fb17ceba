"""Operator identity suites used by the CLI gate and the acceptance tests.

The identity battery exercises the full singular-integral chain on a
fixed roster of smooth test functions:

* ``plemelj_jump``        K+ f - K- f = f
* ``pv_multiplier``       K0 acts as sign(m)/2 (1/2 on the mean)
* ``resynthesis``         f = i H f + P0 f - 2 K- f
* ``hilbert_involution``  H(H u) = -u + P0 u for real u
* ``schwarz_boundary``    S u = u + i H u on bD
* ``generalized_cauchy``  f = K(f|bD) + T(dbar f) on the disc
* ``green_boundary``      T[dbar f]|bD = -K-[f|bD]
* ``dbar_inverts``        dbar(T g) = g

Every roster member is spectrally resolved at the reference resolution
(n_theta = 64, n_radial = 24), so the battery must sit at rounding level;
the separate convergence roster decays slowly on purpose and measures the
rate at which refinement buys accuracy.
"""

from __future__ import annotations

import contextlib

import numpy as np

from . import circle
from .circle import BoundaryGrid, mean_value, plemelj_minus, plemelj_plus, \
    schwarz
from .disc import DiscGrid, cauchy_green, dbar, generalized_cauchy_residual

__all__ = [
    "BOUNDARY_SUITE",
    "DISC_SUITE",
    "CONVERGENCE_SUITE",
    "identity_errors",
    "corrupted_hilbert",
]


def _poisson(rho, shift):
    return lambda th: (1 - rho ** 2) / (
        1 - 2 * rho * np.cos(th - shift) + rho ** 2
    )


def _seeded_trig(seed, band, real):
    def build(th):
        n = len(th)
        rng = np.random.default_rng(seed)
        modes = np.zeros(n, dtype=complex)
        ms = np.rint(np.fft.fftfreq(n, 1.0 / n)).astype(int)
        sel = np.abs(ms) <= band
        modes[sel] = rng.standard_normal(sel.sum()) \
            + 1j * rng.standard_normal(sel.sum())
        if real:
            conj_idx = (-ms) % n
            modes = 0.5 * (modes + np.conj(modes[conj_idx]))
        return np.fft.ifft(modes * n)

    return build


# name, callable of theta, real-valued?
BOUNDARY_SUITE = [
    ("runge_pole", lambda th: 1.0 / (1.3 - np.cos(th)), True),
    ("entire_exp", lambda th: np.exp(np.cos(th)) * np.cos(np.sin(th)), True),
    ("bessel_wave", lambda th: np.exp(0.8 * np.sin(3 * th)), True),
    ("band_limited", lambda th: np.cos(5 * th) + 0.3 * np.sin(2 * th), True),
    ("shifted_pole", lambda th: 1.0 / (1.4 + np.sin(th)), True),
    ("poisson_045", _poisson(0.45, 1.0), True),
    ("outer_geometric", lambda th: np.exp(2j * th) / (2.5 - np.exp(1j * th)),
     False),
    ("conjugate_mix", lambda th: np.exp(-1j * th) * (1 + 0.4 * np.cos(th)),
     False),
    ("random_complex", _seeded_trig(101, 20, False), False),
    ("random_real", _seeded_trig(202, 25, True), True),
]

DISC_SUITE = [
    ("cubic", lambda z: z ** 3),
    ("antihol_exp", lambda z: np.exp(z) * np.conj(z) ** 2),
    ("radial_quartic", lambda z: (z * np.conj(z)) ** 2),
    ("mixed_poly", lambda z: 0.7 * z ** 2 * np.conj(z) + z * np.conj(z) ** 3),
    ("entire_pair", lambda z: np.sin(z) + np.cos(0.8 * np.conj(z))),
    ("geometric", lambda z: 1.0 / (2.5 - z)),
    ("geometric_conj", lambda z: np.conj(z) / (2.2 - z)),
    ("gaussian_radial", lambda z: np.exp(0.8 * z * np.conj(z))),
    ("binomial", lambda z: 0.1 * (1 + z) ** 4 * np.conj(z) ** 3),
    ("saddle", lambda z: np.real(z ** 2) * np.conj(z)),
]

# slowly decaying members for the refinement study: angular tails are the
# only error source (radial content is polynomial of degree <= 4)
CONVERGENCE_SUITE = [
    ("slow_pole", lambda th: 1.0 / (1.05 - np.cos(th)), True),
    ("poisson_080", _poisson(0.80, 0.3), True),
    ("slow_disc", "disc:poisson", None),
    ("slow_disc_pole", "disc:pole", None),
]


@contextlib.contextmanager
def corrupted_hilbert(scale: float = 1.001):
    """Test hook: scale the Hilbert multiplier so the gate must trip."""
    original = circle.hilbert

    def tainted(f, enforce_real=True):
        out = original(f, enforce_real=enforce_real)
        return type(out)(out.grid, out.values * scale)

    circle.hilbert = tainted
    try:
        yield
    finally:
        circle.hilbert = original


def _disc_member(tag, grid):
    if tag == "disc:poisson":
        radial = (grid.rho ** 2 * (1 - grid.rho ** 2))[:, None]
        angular = _poisson(0.82, 0.0)(grid.theta)[None, :]
        return grid.function(radial * angular + 0j)
    if tag == "disc:pole":
        radial = (grid.rho ** 4)[:, None]
        angular = (1.0 / (1.2 - np.exp(1j * grid.theta)))[None, :]
        return grid.function(radial * angular)
    raise KeyError(tag)


def identity_errors(n_theta: int = 64, n_radial: int = 24,
                    suite: str = "identity") -> dict:
    """Max defect of each operator identity over the chosen roster."""
    bgrid = BoundaryGrid(n_theta)
    dgrid = DiscGrid(n_radial, n_theta)
    if suite == "identity":
        boundary = [(nm, bgrid.function(fn), rl) for nm, fn, rl in BOUNDARY_SUITE]
        disc = [(nm, dgrid.function(fn)) for nm, fn in DISC_SUITE]
    elif suite == "convergence":
        boundary, disc = [], []
        for nm, fn, rl in CONVERGENCE_SUITE:
            if callable(fn):
                boundary.append((nm, bgrid.function(fn), rl))
            else:
                disc.append((nm, _disc_member(fn, dgrid)))
    else:
        raise ValueError(f"unknown suite {suite!r}")

    errs = {
        "plemelj_jump": 0.0,
        "pv_multiplier": 0.0,
        "resynthesis": 0.0,
        "hilbert_involution": 0.0,
        "schwarz_boundary": 0.0,
        "generalized_cauchy": 0.0,
        "green_boundary": 0.0,
        "dbar_inverts": 0.0,
    }
    hilbert_fn = circle.hilbert  # resolve through the module: fault-aware

    for _, f, is_real in boundary:
        jump = plemelj_plus(f).values - plemelj_minus(f).values - f.values
        errs["plemelj_jump"] = max(errs["plemelj_jump"],
                                   float(np.abs(jump).max()))
        # K0 against the bare multiplier table
        modes = f.to_modes()
        ms = bgrid.mode_numbers
        mult = 0.5 * np.sign(ms).astype(complex)
        mult[ms == 0] = 0.5
        mult[ms == -n_theta // 2] = 0.0
        k0_direct = np.fft.ifft((mult * modes) * n_theta)
        k0 = 0.5j * hilbert_fn(f, enforce_real=False).values \
            + 0.5 * mean_value(f)
        errs["pv_multiplier"] = max(errs["pv_multiplier"],
                                    float(np.abs(k0 - k0_direct).max()))
        resyn = 1j * hilbert_fn(f, enforce_real=False).values \
            + mean_value(f) - 2.0 * plemelj_minus(f).values
        errs["resynthesis"] = max(errs["resynthesis"],
                                  float(np.abs(resyn - f.values).max()))
        if is_real:
            u = f.real_part()
            hh = hilbert_fn(hilbert_fn(u))
            inv = hh.values + u.values - mean_value(u)
            errs["hilbert_involution"] = max(errs["hilbert_involution"],
                                             float(np.abs(inv).max()))
            s_bd = schwarz(u, bgrid.nodes * (1 - 1e-14))
            expected = u.values + 1j * hilbert_fn(u).values
            errs["schwarz_boundary"] = max(errs["schwarz_boundary"],
                                           float(np.abs(s_bd - expected).max()))

    for _, f in disc:
        errs["generalized_cauchy"] = max(errs["generalized_cauchy"],
                                         generalized_cauchy_residual(f))
        trace = cauchy_green(dbar(f)).boundary()
        km = plemelj_minus(f.boundary())
        errs["green_boundary"] = max(errs["green_boundary"],
                                     float(np.abs(trace.values + km.values).max()))
        g = dbar(f)
        errs["dbar_inverts"] = max(errs["dbar_inverts"],
                                   float((dbar(cauchy_green(g)) - g).sup_norm()))
    return errs
