"""Polynomials in (Z_1, ..., Z_n) and their conjugates.

The term table keys are integer exponent tuples of length 2n laid out as
(a_1, b_1, a_2, b_2, ...): a_k powers of Z_k, b_k powers of conj(Z_k).
This is the common currency of the manifold defining functions and the
almost complex structure fixtures.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ComplexPolynomial"]


class ComplexPolynomial:
    """Immutable polynomial in Z and conj(Z) with complex coefficients."""

    def __init__(self, n: int, terms=None, drop_tol: float = 0.0):
        self.n = int(n)
        table = {}
        for exps, coeff in dict(terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != 2 * self.n or min(exps, default=0) < 0:
                raise ValueError(f"bad exponent tuple {exps} for n={self.n}")
            c = complex(coeff)
            if abs(c) > drop_tol:
                table[exps] = table.get(exps, 0.0) + c
        self.terms = {e: c for e, c in table.items() if c != 0.0}

    @classmethod
    def zero(cls, n):
        return cls(n, {})

    @classmethod
    def variable(cls, n, k, conjugated=False):
        exps = [0] * (2 * n)
        exps[2 * k + (1 if conjugated else 0)] = 1
        return cls(n, {tuple(exps): 1.0})

    @classmethod
    def from_term_list(cls, n, term_list):
        """Build from [{'exponents': [...], 'coefficient': [re, im]}, ...]."""
        table = {}
        for t in term_list:
            c = t["coefficient"]
            c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
            exps = tuple(int(e) for e in t["exponents"])
            table[exps] = table.get(exps, 0.0) + c
        return cls(n, table)

    def to_term_list(self):
        return [
            {"exponents": list(e), "coefficient": [c.real, c.imag]}
            for e, c in sorted(self.terms.items())
        ]

    # -- algebra ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = ComplexPolynomial(self.n, {(0,) * (2 * self.n): other})
        table = dict(self.terms)
        for e, c in other.terms.items():
            table[e] = table.get(e, 0.0) + c
        return ComplexPolynomial(self.n, table)

    __radd__ = __add__

    def __neg__(self):
        return ComplexPolynomial(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, ComplexPolynomial) else -complex(other))

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return ComplexPolynomial(
                self.n, {e: c * other for e, c in self.terms.items()}
            )
        table = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                table[e] = table.get(e, 0.0) + c1 * c2
        return ComplexPolynomial(self.n, table)

    __rmul__ = __mul__

    def conjugate(self):
        table = {}
        for e, c in self.terms.items():
            swapped = []
            for k in range(self.n):
                swapped += [e[2 * k + 1], e[2 * k]]
            table[tuple(swapped)] = np.conj(c)
        return ComplexPolynomial(self.n, table)

    # -- queries ----------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def min_degree(self):
        return min((sum(e) for e in self.terms), default=0)

    def max_degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def is_real_valued(self, tol: float = 1e-14) -> bool:
        diff = self - self.conjugate()
        return all(abs(c) <= tol for c in diff.terms.values())

    # -- calculus and coordinate changes ----------------------------------

    def wirtinger(self, k: int, conjugated: bool = False):
        """d/dZ_k (or d/d conj(Z_k)) as a new polynomial."""
        idx = 2 * k + (1 if conjugated else 0)
        table = {}
        for e, c in self.terms.items():
            if e[idx] == 0:
                continue
            ne = list(e)
            ne[idx] -= 1
            table[tuple(ne)] = table.get(tuple(ne), 0.0) + c * e[idx]
        return ComplexPolynomial(self.n, table)

    def scale_variables(self, factors):
        """Substitute Z_k -> factors[k] * Z_k (real positive factors)."""
        factors = [float(f) for f in factors]
        table = {}
        for e, c in self.terms.items():
            scale = 1.0
            for k in range(self.n):
                scale *= factors[k] ** (e[2 * k] + e[2 * k + 1])
            table[e] = table.get(e, 0.0) + c * scale
        return ComplexPolynomial(self.n, table)

    def restrict_first_coordinate(self):
        """Keep only terms not involving Z_2..Z_n (the w-only part)."""
        table = {
            e: c for e, c in self.terms.items() if sum(e[2:]) == 0
        }
        return ComplexPolynomial(self.n, table)

    def degree_part(self, degree: int):
        return ComplexPolynomial(
            self.n, {e: c for e, c in self.terms.items() if sum(e) == degree}
        )

    def __call__(self, Z):
        """Evaluate at complex points; Z has shape (..., n)."""
        Z = np.asarray(Z, dtype=complex)
        if Z.shape[-1] != self.n:
            raise ValueError(f"points have {Z.shape[-1]} coords, need {self.n}")
        out = np.zeros(Z.shape[:-1], dtype=complex)
        Zb = np.conj(Z)
        for e, c in self.terms.items():
            mono = np.ones(Z.shape[:-1], dtype=complex)
            for k in range(self.n):
                if e[2 * k]:
                    mono = mono * Z[..., k] ** e[2 * k]
                if e[2 * k + 1]:
                    mono = mono * Zb[..., k] ** e[2 * k + 1]
            out += c * mono
        return out

    def to_real_table(self):
        """Expand into monomials of the real coordinates (x_1, y_1, ...).

        Returns {real exponent tuple (len 2n): complex coefficient} with
        Z_k = x_k + i y_k substituted and binomials multiplied out.
        """
        out = {(0,) * (2 * self.n): 0.0}
        from math import comb

        for e, c in self.terms.items():
            # per complex coordinate, expand (x + iy)^a (x - iy)^b
            partial = {(): c}
            for k in range(self.n):
                a, b = e[2 * k], e[2 * k + 1]
                local = {}
                for i in range(a + 1):
                    for j in range(b + 1):
                        coeff = (
                            comb(a, i)
                            * comb(b, j)
                            * (1j) ** (a - i)
                            * (-1j) ** (b - j)
                        )
                        key = (i + j, (a - i) + (b - j))  # (x-power, y-power)
                        local[key] = local.get(key, 0.0) + coeff
                partial = {
                    pe + key: pc * lc
                    for pe, pc in partial.items()
                    for key, lc in local.items()
                }
            for pe, pc in partial.items():
                out[pe] = out.get(pe, 0.0) + pc
        return {e: c for e, c in out.items() if c != 0.0}

    def __repr__(self):
        return f"ComplexPolynomial(n={self.n}, nterms={len(self.terms)})"
