"""Defining functions of the real n-submanifold E.

Elliptic normal form near the distinguished point (coordinates
Z = (w, z_2, ..., z_n)):

    rho(Z) = z_2 - P(w) + R(Z) = 0,          P(w) = w wbar + gamma (w^2 + wbar^2)
    r_j(Z) = Re z_j + h_j(Z) = 0,            j = 3, ..., n

with R = O(|Z|^3), h_j = O(|Z|^2) and gamma in [0, 1/2) (ellipticity).
The R^n-valued defining function is r = (Re rho, Im rho, r_3, ..., r_n).

Under the non-isotropic dilations Lambda_delta the rescaled functions
r_delta(Z) = r(Lambda_delta^{-1} Z) / delta converge at rate sqrt(delta)
to the model quadric

    rho0 = z_2 - P(w),   r_j0 = Re z_j - Q_j(w),

where Q_j is minus the w-quadratic part of h_j (the sign that makes the
limit consistent).  Everything here is polynomial and exact; the dilation
acts on coefficients, never on samples.
"""

from __future__ import annotations

import numpy as np

from .polyfield import ComplexPolynomial

__all__ = [
    "ellipticity_polynomial",
    "SubmanifoldSpec",
    "DefiningFunction",
    "GenericGraphSpec",
    "dilated_limit_report",
]


def ellipticity_polynomial(n: int, gamma: float) -> ComplexPolynomial:
    """P(w) = w wbar + gamma (w^2 + wbar^2) as a polynomial on C^n."""
    w = ComplexPolynomial.variable(n, 0)
    wb = ComplexPolynomial.variable(n, 0, conjugated=True)
    return w * wb + gamma * (w * w + wb * wb)


class SubmanifoldSpec:
    """Elliptic normal form data (gamma, R, h_3..h_n) for E in C^n.

    Parameters
    ----------
    n : int
        Complex dimension (>= 2; the normal form needs the z_2 direction).
    gamma : float
        Ellipticity parameter, must lie in [0, 1/2).
    R : ComplexPolynomial or None
        Third-order correction in rho; every monomial must have total
        degree >= 3.
    h : dict {j: ComplexPolynomial} or None
        Real-valued corrections for j in 3..n with vanishing 1-jet.
    """

    def __init__(self, n: int, gamma: float, R=None, h=None):
        self.n = int(n)
        if self.n < 2:
            raise ValueError("elliptic normal form needs n >= 2")
        gamma = float(gamma)
        if not 0.0 <= gamma < 0.5:
            raise ValueError(
                f"ellipticity requires gamma in [0, 1/2), got {gamma}"
            )
        self.gamma = gamma
        self.R = R if R is not None else ComplexPolynomial.zero(self.n)
        if self.R.n != self.n:
            raise ValueError("R has wrong dimension")
        if not self.R.is_zero() and self.R.min_degree() < 3:
            raise ValueError("R must vanish to third order at 0")
        self.h = {}
        for j in range(3, self.n + 1):
            hj = (h or {}).get(j, ComplexPolynomial.zero(self.n))
            if hj.n != self.n:
                raise ValueError(f"h_{j} has wrong dimension")
            if not hj.is_zero():
                if hj.min_degree() < 2:
                    raise ValueError(f"h_{j} must vanish to second order at 0")
                if not hj.is_real_valued():
                    raise ValueError(f"h_{j} must be real-valued")
            self.h[j] = hj
        self.P = ellipticity_polynomial(self.n, self.gamma)

    def q_polynomial(self, j: int) -> ComplexPolynomial:
        """Q_j(w): minus the quadratic w-part of h_j restricted to z = 0."""
        return -(self.h[j].restrict_first_coordinate().degree_part(2))

    def defining_function(self, mode: str = "original",
                          delta: float = None) -> "DefiningFunction":
        return DefiningFunction(self, mode, delta)

    def model_quadric(self) -> "DefiningFunction":
        """Defining functions of the limit quadric E_0."""
        return DefiningFunction(self, "model")

    # -- config I/O ---------------------------------------------------------

    def to_config(self) -> dict:
        return {
            "n": self.n,
            "gamma": self.gamma,
            "R_terms": self.R.to_term_list(),
            "h_terms": {
                str(j): hj.to_term_list() for j, hj in self.h.items()
                if not hj.is_zero()
            },
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "SubmanifoldSpec":
        n = cfg["n"]
        R = ComplexPolynomial.from_term_list(n, cfg.get("R_terms", []))
        h = {
            int(j): ComplexPolynomial.from_term_list(n, terms)
            for j, terms in cfg.get("h_terms", {}).items()
        }
        return cls(n, cfg["gamma"], R, h)

    def __repr__(self):
        return f"SubmanifoldSpec(n={self.n}, gamma={self.gamma})"


class DefiningFunction:
    """Evaluator for r = (Re rho, Im rho, r_3, ..., r_n) in one of three
    modes: the original functions, the dilated r_delta, or the model r0."""

    def __init__(self, spec: SubmanifoldSpec, mode: str = "original",
                 delta: float = None):
        if mode not in ("original", "dilated", "model"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "dilated":
            if delta is None or not 0.0 < delta <= 1.0:
                raise ValueError("dilated mode needs delta in (0, 1]")
        self.spec = spec
        self.mode = mode
        self.delta = float(delta) if mode == "dilated" else None
        self.n = spec.n
        self._rho, self._real_rows = self._build_rows()

    def _build_rows(self):
        spec = self.spec
        n = spec.n
        z2 = ComplexPolynomial.variable(n, 1)
        if self.mode == "original":
            rho = z2 - spec.P + spec.R
            rows = {}
            for j in range(3, n + 1):
                zj = ComplexPolynomial.variable(n, j - 1)
                zjb = ComplexPolynomial.variable(n, j - 1, conjugated=True)
                rows[j] = 0.5 * (zj + zjb) + spec.h[j]
        elif self.mode == "dilated":
            d = self.delta
            factors = [np.sqrt(d)] + [d] * (n - 1)  # Lambda_delta^{-1}
            rho = z2 - spec.P + (1.0 / d) * spec.R.scale_variables(factors)
            rows = {}
            for j in range(3, n + 1):
                zj = ComplexPolynomial.variable(n, j - 1)
                zjb = ComplexPolynomial.variable(n, j - 1, conjugated=True)
                rows[j] = 0.5 * (zj + zjb) + (1.0 / d) * spec.h[j].scale_variables(
                    factors
                )
        else:  # model
            rho = z2 - spec.P
            rows = {}
            for j in range(3, n + 1):
                zj = ComplexPolynomial.variable(n, j - 1)
                zjb = ComplexPolynomial.variable(n, j - 1, conjugated=True)
                rows[j] = 0.5 * (zj + zjb) - spec.q_polynomial(j)
        return rho, rows

    def __call__(self, Z) -> np.ndarray:
        """r(Z) at complex points (..., n) -> real (..., n)."""
        Z = np.asarray(Z, dtype=complex)
        rho = self._rho(Z)
        out = np.empty(Z.shape[:-1] + (self.n,))
        out[..., 0] = rho.real
        out[..., 1] = rho.imag
        for j in range(3, self.n + 1):
            out[..., j - 1] = self._real_rows[j](Z).real
        return out

    def jacobian(self, Z) -> np.ndarray:
        """d r / d(real coordinates): (..., n, 2n), exact differentiation."""
        Z = np.asarray(Z, dtype=complex)
        out = np.empty(Z.shape[:-1] + (self.n, 2 * self.n))
        for k in range(self.n):
            dz = self._rho.wirtinger(k)(Z)
            dzb = self._rho.wirtinger(k, conjugated=True)(Z)
            dx = dz + dzb
            dy = 1j * (dz - dzb)
            out[..., 0, 2 * k] = dx.real
            out[..., 0, 2 * k + 1] = dy.real
            out[..., 1, 2 * k] = dx.imag
            out[..., 1, 2 * k + 1] = dy.imag
            for j in range(3, self.n + 1):
                dzj = self._real_rows[j].wirtinger(k)(Z)
                dzjb = self._real_rows[j].wirtinger(k, conjugated=True)(Z)
                out[..., j - 1, 2 * k] = (dzj + dzjb).real
                out[..., j - 1, 2 * k + 1] = (1j * (dzj - dzjb)).real
        return out

    def full_rank_at_origin(self, tol: float = 1e-10) -> bool:
        """dr_1 ^ ... ^ dr_n != 0 at 0 (the normal-form transversality)."""
        jac = self.jacobian(np.zeros((self.n,), dtype=complex))
        s = np.linalg.svd(jac, compute_uv=False)
        return bool(s[-1] > tol)

    def __repr__(self):
        tag = self.mode if self.delta is None else f"dilated({self.delta})"
        return f"DefiningFunction({self.spec!r}, {tag})"


class GenericGraphSpec:
    """Generic-point graph form: E = {x = h(y, w)} in C^k x C^{n-k}.

    z = x + i y runs over the graphed block C^k, w over the free block.
    ``h`` maps (y, w) to R^k and is given per component as a
    ComplexPolynomial in the n variables (z_1..z_k, w_1..w_{n-k}) that
    only involves Im z (through z - zbar) and w; in practice the
    components are built with :meth:`from_y_w_terms` below.  The 1-jet of
    h must vanish.
    """

    def __init__(self, n: int, k: int, h_components):
        self.n = int(n)
        self.k = int(k)
        if not 1 <= self.k <= self.n:
            raise ValueError("graph block dimension k must lie in 1..n")
        h_components = list(h_components)
        if len(h_components) != self.k:
            raise ValueError(f"need {self.k} graph components, got {len(h_components)}")
        for hc in h_components:
            if hc.n != self.n:
                raise ValueError("graph component has wrong dimension")
            if not hc.is_zero():
                if hc.min_degree() < 2:
                    raise ValueError("graph polynomial must have vanishing 1-jet")
                if not hc.is_real_valued():
                    raise ValueError("graph components must be real-valued")
        self.h_components = h_components

    def h(self, y, w) -> np.ndarray:
        """Evaluate h at real y (..., k) and complex w (..., n-k)."""
        y = np.asarray(y, dtype=float)
        w = np.asarray(w, dtype=complex)
        Z = np.concatenate([1j * y.astype(complex), w], axis=-1)
        out = np.stack([hc(Z).real for hc in self.h_components], axis=-1)
        return out

    def __repr__(self):
        return f"GenericGraphSpec(n={self.n}, k={self.k})"


def dilated_limit_report(spec: SubmanifoldSpec, deltas, n_samples: int = 200,
                         seed: int = 2024) -> dict:
    """Sup-norm of r_delta - r0 on a unit-polydisc sample, per delta.

    The report records the sup norms and consecutive ratios; for generic
    cubic data the ratios approach sqrt(1/2) per delta halving.
    """
    deltas = [float(d) for d in deltas]
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta ladder must decrease")
    rng = np.random.default_rng(seed)
    Z = (
        rng.uniform(-1, 1, (n_samples, spec.n))
        + 1j * rng.uniform(-1, 1, (n_samples, spec.n))
    )
    model = spec.model_quadric()
    r0 = model(Z)
    sups = []
    for d in deltas:
        rd = spec.defining_function("dilated", d)
        sups.append(float(np.abs(rd(Z) - r0).max()))
    ratios = [b / a if a > 0 else 0.0 for a, b in zip(sups, sups[1:])]
    return {
        "deltas": deltas,
        "sup_norms": sups,
        "ratios": ratios,
        "monotone": all(b <= a + 1e-15 for a, b in zip(sups, sups[1:])),
    }
