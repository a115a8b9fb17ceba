"""Almost complex structures as polynomial matrix fields.

A structure is J(Z) = J_st + perturbation, the perturbation a real
2n x 2n matrix whose entries are polynomials in the real coordinates
(x_1, y_1, ..., x_n, y_n) of C^n.  J^2 = -Id is enforced up to a
tolerance inside a declared validity ball, checked on a sample lattice at
construction.

The Beltrami matrix A(Z) is the complex n x n matrix of the anti-linear
operator (J_st + J(Z))^{-1} (J_st - J(Z)) composed with conjugation; a
disc Z is J-holomorphic exactly when dbar Z = A(Z) conj(dz Z).

Non-isotropic dilations act by Lambda_delta(w, z) = (w/sqrt(delta),
z/delta); transporting J along them is a closed-form reindexing of the
polynomial coefficients.
"""

from __future__ import annotations

import numpy as np

from .disc import DiscFunction, dbar, dz
from .errors import StructureError
from .polyfield import ComplexPolynomial

__all__ = [
    "standard_structure_matrix",
    "AlmostComplexStructure",
    "Dilation",
    "beltrami_matrix",
    "structure_from_beltrami_matrix",
    "transport_structure",
    "structure_distance",
    "holomorphy_residual",
    "nilpotent_structure",
]

JSQ_TOL = 1e-8


def standard_structure_matrix(n: int) -> np.ndarray:
    """J_st on R^{2n}: block-diagonal rotation by 90 degrees per pair."""
    j = np.zeros((2 * n, 2 * n))
    for k in range(n):
        j[2 * k, 2 * k + 1] = -1.0
        j[2 * k + 1, 2 * k] = 1.0
    return j


def complex_points_to_real(Z):
    """(..., n) complex -> (..., 2n) real, interleaved (x_1, y_1, ...)."""
    Z = np.asarray(Z, dtype=complex)
    out = np.empty(Z.shape[:-1] + (2 * Z.shape[-1],))
    out[..., 0::2] = Z.real
    out[..., 1::2] = Z.imag
    return out


def real_points_to_complex(X):
    X = np.asarray(X, dtype=float)
    return X[..., 0::2] + 1j * X[..., 1::2]


class Dilation:
    """Non-isotropic dilation (w, z) -> (w / sqrt(delta), z / delta)."""

    def __init__(self, delta: float, n: int):
        delta = float(delta)
        if not 0.0 < delta <= 1.0:
            raise ValueError(f"delta must be in (0, 1], got {delta}")
        self.delta = delta
        self.n = int(n)
        # weight s_k per complex coordinate: coordinate k scales by delta^{-s_k}
        self.weights = np.array([0.5] + [1.0] * (self.n - 1))

    @property
    def scales(self):
        """Diagonal of dLambda_delta per complex coordinate."""
        return self.delta ** (-self.weights)

    def __call__(self, Z):
        Z = np.asarray(Z, dtype=complex)
        return Z * self.scales

    def inverse(self, Z):
        Z = np.asarray(Z, dtype=complex)
        return Z / self.scales


class AlmostComplexStructure:
    """J_st plus a polynomial perturbation with J(0) = J_st.

    Parameters
    ----------
    n : int
        Complex dimension.
    terms : iterable of (row, col, coefficient, exponents)
        Perturbation entries; ``exponents`` is a length-2n tuple of powers
        of the real coordinates, ``coefficient`` real.
    validity_radius : float
        Ball |Z| <= radius on which J^2 = -Id is required to JSQ_TOL.
    check : bool
        Verify the algebra contract on a sample lattice at construction.
    """

    def __init__(self, n: int, terms=(), validity_radius: float = 1.0,
                 check: bool = True):
        self.n = int(n)
        self.validity_radius = float(validity_radius)
        rows, cols, coeffs, exps = [], [], [], []
        for row, col, coeff, e in terms:
            e = tuple(int(v) for v in e)
            if len(e) != 2 * self.n:
                raise ValueError(f"exponents {e} not of length {2 * self.n}")
            if sum(e) == 0:
                raise StructureError(
                    "constant perturbation term would break J(0) = J_st"
                )
            rows.append(int(row))
            cols.append(int(col))
            coeffs.append(float(coeff))
            exps.append(e)
        self.rows = np.asarray(rows, dtype=int)
        self.cols = np.asarray(cols, dtype=int)
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.exponents = (
            np.asarray(exps, dtype=int)
            if exps
            else np.zeros((0, 2 * self.n), dtype=int)
        )
        self.j_st = standard_structure_matrix(self.n)
        if check:
            self._check_algebra()

    # -- evaluation --------------------------------------------------------

    def __call__(self, Z) -> np.ndarray:
        """Evaluate J at complex points Z (..., n) -> (..., 2n, 2n)."""
        X = complex_points_to_real(Z)
        out = np.broadcast_to(
            self.j_st, X.shape[:-1] + self.j_st.shape
        ).copy()
        if len(self.coeffs) == 0:
            return out
        monos = self._monomials(X)
        for t in range(len(self.coeffs)):
            out[..., self.rows[t], self.cols[t]] += self.coeffs[t] * monos[..., t]
        return out

    def _monomials(self, X):
        """Values of every term's monomial at X: shape (..., nterms)."""
        monos = np.ones(X.shape[:-1] + (len(self.coeffs),))
        for j in range(2 * self.n):
            col = self.exponents[:, j]
            top = int(col.max()) if len(col) else 0
            if top == 0:
                continue
            # power table avoids repeated pow over the point cloud
            powers = np.empty(X.shape[:-1] + (top + 1,))
            powers[..., 0] = 1.0
            for p in range(1, top + 1):
                powers[..., p] = powers[..., p - 1] * X[..., j]
            monos *= powers[..., col]
        return monos

    def derivative(self, Z, coord: int) -> np.ndarray:
        """d J / d x_coord at complex points (..., 2n, 2n)."""
        X = complex_points_to_real(Z)
        out = np.zeros(X.shape[:-1] + (2 * self.n, 2 * self.n))
        for t in range(len(self.coeffs)):
            p = self.exponents[t, coord]
            if p == 0:
                continue
            mono = np.ones(X.shape[:-1])
            for j in range(2 * self.n):
                e = self.exponents[t, j] - (1 if j == coord else 0)
                if e:
                    mono = mono * X[..., j] ** e
            out[..., self.rows[t], self.cols[t]] += self.coeffs[t] * p * mono
        return out

    # -- contract checks ----------------------------------------------------

    def _sample_ball(self, count=200, seed=1234):
        rng = np.random.default_rng(seed)
        pts = rng.standard_normal((count, self.n)) + 1j * rng.standard_normal(
            (count, self.n)
        )
        norms = np.linalg.norm(pts, axis=1, keepdims=True)
        radii = self.validity_radius * rng.uniform(0, 1, (count, 1)) ** (
            1.0 / (2 * self.n)
        )
        return pts / norms * radii

    def _check_algebra(self):
        pts = np.concatenate(
            [np.zeros((1, self.n), dtype=complex), self._sample_ball()]
        )
        J = self(pts)
        defect = J @ J + np.eye(2 * self.n)
        worst = np.abs(defect).max()
        if worst > JSQ_TOL:
            raise StructureError(
                f"J^2 + Id reaches {worst:.3e} inside the validity ball "
                f"(radius {self.validity_radius}); tolerance {JSQ_TOL}"
            )

    def max_perturbation_degree(self) -> int:
        return int(self.exponents.sum(axis=1).max()) if len(self.coeffs) else 0

    def coefficient_table(self):
        """Canonical {(row, col, exponents): coefficient} for comparisons."""
        table = {}
        for t in range(len(self.coeffs)):
            key = (int(self.rows[t]), int(self.cols[t]),
                   tuple(self.exponents[t]))
            table[key] = table.get(key, 0.0) + self.coeffs[t]
        return {k: v for k, v in table.items() if v != 0.0}

    # -- config I/O ---------------------------------------------------------

    def to_config(self) -> dict:
        return {
            "n": self.n,
            "degree": self.max_perturbation_degree(),
            "validity_radius": self.validity_radius,
            "terms": [
                {
                    "row": int(self.rows[t]),
                    "col": int(self.cols[t]),
                    "exponents": [int(v) for v in self.exponents[t]],
                    "coefficient": float(self.coeffs[t]),
                }
                for t in range(len(self.coeffs))
            ],
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "AlmostComplexStructure":
        terms = [
            (t["row"], t["col"], t["coefficient"], tuple(t["exponents"]))
            for t in cfg.get("terms", [])
        ]
        return cls(
            cfg["n"], terms, validity_radius=cfg.get("validity_radius", 1.0)
        )

    def __repr__(self):
        return (
            f"AlmostComplexStructure(n={self.n}, "
            f"nterms={len(self.coeffs)}, radius={self.validity_radius})"
        )


def beltrami_matrix(structure, Z) -> np.ndarray:
    """Complex n x n matrix A(Z) with dbar Z = A(Z) conj(dz Z) on discs.

    A is the matrix of (J_st + J(Z))^{-1} (J_st - J(Z)) composed with
    conjugation; A(0) = 0 whenever J(0) = J_st.
    """
    Z = np.asarray(Z, dtype=complex)
    J = structure(Z)
    n = structure.n
    jst = standard_structure_matrix(n)
    try:
        B = np.linalg.solve(jst + J, jst - J)
    except np.linalg.LinAlgError as exc:
        raise StructureError(
            "J_st + J(Z) is singular: structure too far from integrable "
            "at the evaluation point"
        ) from exc
    return B[..., 0::2, 0::2] + 1j * B[..., 1::2, 0::2]


def structure_from_beltrami_matrix(A) -> np.ndarray:
    """Rebuild the raw matrix J from A at a point (round-trip inverse).

    The anti-linear operator with matrix A ∘ conj is realified column by
    column, then J = J_st (I - B)(I + B)^{-1}.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[-1]
    B = np.zeros(A.shape[:-2] + (2 * n, 2 * n))
    B[..., 0::2, 0::2] = A.real
    B[..., 1::2, 0::2] = A.imag
    # anti-linearity pins the y-columns: B e_{y_k} = -J_st B e_{x_k}
    jst = standard_structure_matrix(n)
    B[..., :, 1::2] = -(jst @ B[..., :, 0::2])
    eye = np.eye(2 * n)
    return jst @ (eye - B) @ np.linalg.inv(eye + B)


def transport_structure(structure: AlmostComplexStructure,
                        dilation: Dilation) -> AlmostComplexStructure:
    """Direct image J_delta = dLambda . J(Lambda^{-1} Z) . dLambda^{-1}.

    Dilations are linear, so each coefficient picks up
    delta^{s_col - s_row + sum_j s_j alpha_j}; no resampling happens.
    """
    if dilation.n != structure.n:
        raise ValueError("dilation and structure dimensions differ")
    delta = dilation.delta
    # real-coordinate weights: each complex weight covers its (x, y) pair
    s = np.repeat(dilation.weights, 2)
    terms = []
    for t in range(len(structure.coeffs)):
        expo = (
            s[structure.cols[t]]
            - s[structure.rows[t]]
            + float(np.dot(s, structure.exponents[t]))
        )
        terms.append(
            (
                structure.rows[t],
                structure.cols[t],
                structure.coeffs[t] * delta ** expo,
                tuple(structure.exponents[t]),
            )
        )
    # the dilated chart blows the ball up; keep the sampled contract ball
    radius = structure.validity_radius
    return AlmostComplexStructure(
        structure.n, terms, validity_radius=radius, check=False
    )


def _lattice(box_radius, dim, spacing, max_points=250_000):
    """Deterministic symmetric lattice on [-r, r]^dim, point count capped."""
    per_axis = int(np.floor(2 * box_radius / spacing)) + 1
    while per_axis ** dim > max_points and per_axis > 3:
        per_axis -= 2
    axis = np.linspace(-box_radius, box_radius, per_axis)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def structure_distance(j_a: AlmostComplexStructure,
                       j_b: AlmostComplexStructure,
                       box_radius: float = 1.0,
                       order: int = 0,
                       spacing: float = 0.05) -> float:
    """C^0 or C^1 lattice distance between two structures on a compact box.

    Max matrix sup-norm of J_a - J_b (order 0) plus first derivatives
    (order 1) over the lattice on [-r, r]^{2n} intersected with the shared
    validity ball.  The per-axis spacing is coarsened automatically when
    the full lattice would exceed the point budget (unavoidable for n >= 3).
    """
    if j_a.n != j_b.n:
        raise ValueError("structures of different dimension")
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    dim = 2 * j_a.n
    X = _lattice(box_radius, dim, spacing)
    radius = min(j_a.validity_radius, j_b.validity_radius)
    X = X[np.linalg.norm(X, axis=1) <= radius]
    Z = real_points_to_complex(X)
    dist = np.abs(j_a(Z) - j_b(Z)).max()
    if order == 1:
        for coord in range(dim):
            dist = max(
                dist,
                np.abs(j_a.derivative(Z, coord) - j_b.derivative(Z, coord)).max(),
            )
    return float(dist)


def holomorphy_residual(structure: AlmostComplexStructure,
                        Z: DiscFunction) -> float:
    """Sup-norm of dbar Z - A(Z) conj(dz Z) over the disc grid.

    Zero characterises J-holomorphic discs; conj(dz Z) realises the
    derivative of the conjugated disc.  Points escaping the validity ball
    are reported, not silently accepted.
    """
    vals = Z.values
    if vals.ndim != 3 or vals.shape[-1] != structure.n:
        raise ValueError(
            f"disc must have {structure.n} components, got shape {vals.shape}"
        )
    radii = np.linalg.norm(vals, axis=-1)
    if radii.max() > structure.validity_radius * (1 + 1e-9):
        i, k = np.unravel_index(np.argmax(radii), radii.shape)
        raise StructureError(
            f"disc leaves the validity ball at node (rho_{i}, theta_{k}): "
            f"|Z| = {radii[i, k]:.4f} > {structure.validity_radius}"
        )
    A = beltrami_matrix(structure, vals)
    resid = dbar(Z).values - np.einsum(
        "rtjk,rtk->rtj", A, np.conj(dz(Z).values)
    )
    return float(np.abs(resid).max())


def nilpotent_structure(n: int, entries, validity_radius: float = 1.0,
                        check: bool = True) -> AlmostComplexStructure:
    """Exact structure J = J_st + P from an anti-linear nilpotent block.

    ``entries`` maps complex matrix positions (p, q) to ComplexPolynomial
    coefficients mu(Z); P realifies v -> M(Z) conj(v).  When M(Z) M(Z)-bar
    vanishes identically (e.g. a single row or column with a zero diagonal
    slot), J^2 = -Id holds exactly for every Z, and the Beltrami matrix is
    A(Z) = (i/2) M(Z).
    """
    terms = []
    for (p, q), mu in entries.items():
        if not isinstance(mu, ComplexPolynomial):
            raise TypeError("entries must be ComplexPolynomial values")
        if mu.n != n:
            raise ValueError("entry polynomial has wrong dimension")
        real_table = mu.to_real_table()
        for exps, coeff in real_table.items():
            a, b = coeff.real, coeff.imag
            # realified anti-linear block [[a, b], [b, -a]] at (2p, 2q)
            for dr, dc, factor in (
                (0, 0, a), (0, 1, b), (1, 0, b), (1, 1, -a),
            ):
                if factor != 0.0:
                    terms.append((2 * p + dr, 2 * q + dc, factor, exps))
    return AlmostComplexStructure(
        n, terms, validity_radius=validity_radius, check=check
    )
