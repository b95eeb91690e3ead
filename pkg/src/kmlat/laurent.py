"""2x2 matrices over F_q[z, z^-1].

Exact model of the affine case A = [[2,-2],[-2,2]] (modulo its center): the
group is SL_2(F_q[z, z^-1]), the base edge is stabilised by the Iwahori
subgroup (integral matrices, lower-left entry divisible by z).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from kmlat.ffield import Fq

Poly = tuple[tuple[int, int], ...]  # sorted (exponent, nonzero coefficient)


def poly(F: Fq, terms: Mapping[int, int]) -> Poly:
    return tuple(sorted((e, c) for e, c in terms.items() if c % F.q != 0))


def poly_add(F: Fq, a: Poly, b: Poly) -> Poly:
    d = dict(a)
    for e, c in b:
        d[e] = F.add(d.get(e, 0), c)
    return poly(F, d)


def poly_neg(F: Fq, a: Poly) -> Poly:
    return tuple((e, F.neg(c)) for e, c in a)


def poly_mul(F: Fq, a: Poly, b: Poly) -> Poly:
    d: dict[int, int] = {}
    for e1, c1 in a:
        for e2, c2 in b:
            e = e1 + e2
            d[e] = F.add(d.get(e, 0), F.mul(c1, c2))
    return poly(F, d)


def valuation(a: Poly) -> float:
    return a[0][0] if a else float("inf")


def constant_term(a: Poly, e: int = 0) -> int:
    for k, c in a:
        if k == e:
            return c
    return 0


@dataclass(frozen=True)
class LaurentMatrix:
    F: Fq
    a: Poly
    b: Poly
    c: Poly
    d: Poly

    @classmethod
    def from_entries(cls, F: Fq, a, b, c, d) -> "LaurentMatrix":
        """Entries given as ``{exponent: coeff}`` dicts or field scalars."""
        conv = lambda x: poly(F, x if isinstance(x, Mapping) else {0: x})
        return cls(F, conv(a), conv(b), conv(c), conv(d))

    @classmethod
    def identity(cls, F: Fq) -> "LaurentMatrix":
        return cls.from_entries(F, 1, 0, 0, 1)

    def __matmul__(self, o: "LaurentMatrix") -> "LaurentMatrix":
        F = self.F
        m, a = poly_mul, poly_add
        return LaurentMatrix(
            F,
            a(F, m(F, self.a, o.a), m(F, self.b, o.c)),
            a(F, m(F, self.a, o.b), m(F, self.b, o.d)),
            a(F, m(F, self.c, o.a), m(F, self.d, o.c)),
            a(F, m(F, self.c, o.b), m(F, self.d, o.d)),
        )

    def det(self) -> Poly:
        F = self.F
        return poly_add(F, poly_mul(F, self.a, self.d), poly_neg(F, poly_mul(F, self.b, self.c)))

    def inverse(self) -> "LaurentMatrix":
        """Inverse of a determinant-one matrix."""
        F = self.F
        return LaurentMatrix(F, self.d, poly_neg(F, self.b), poly_neg(F, self.c), self.a)

    def entries(self) -> tuple[Poly, Poly, Poly, Poly]:
        return (self.a, self.b, self.c, self.d)

    def min_valuation(self) -> float:
        return min(valuation(e) for e in self.entries())

    def conj_diag_z(self) -> "LaurentMatrix":
        """D^-1 M D with D = diag(1, z)."""
        sh = lambda p, k: tuple((e + k, c) for e, c in p)
        return LaurentMatrix(self.F, self.a, sh(self.b, 1), sh(self.c, -1), self.d)

    def times_diag_z(self) -> "LaurentMatrix":
        """M D with D = diag(1, z)."""
        sh = lambda p, k: tuple((e + k, c) for e, c in p)
        return LaurentMatrix(self.F, self.a, sh(self.b, 1), self.c, sh(self.d, 1))

    def left_diag_z_inv(self) -> "LaurentMatrix":
        """D^-1 M."""
        sh = lambda p, k: tuple((e + k, c) for e, c in p)
        return LaurentMatrix(self.F, self.a, self.b, sh(self.c, -1), sh(self.d, -1))

    def in_iwahori(self) -> bool:
        return (
            min(valuation(self.a), valuation(self.b), valuation(self.d)) >= 0
            and valuation(self.c) >= 1
        )

    def __str__(self):
        def fmt(p: Poly) -> str:
            if not p:
                return "0"
            return " + ".join(f"{c}z^{e}" if e else str(c) for e, c in p)
        return f"[[{fmt(self.a)}, {fmt(self.b)}], [{fmt(self.c)}, {fmt(self.d)}]]"
