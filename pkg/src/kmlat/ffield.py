"""Exact arithmetic in F_q, q = p^a, plus the split torus of a root datum.

Field elements are plain ints in ``range(q)``: the element
``c0 + c1 x + ... + c_{a-1} x^{a-1}`` is encoded as ``c0 + c1 p + ...``.
Multiplication in extension fields goes through log/antilog tables.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Iterator, Sequence

from kmlat.errors import NotPrime, ParseError, Reducible
from kmlat.roots import GCM, Root, RootDatum

MAX_Q = 2 ** 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


# --- polynomials over F_p: coefficient tuples, low degree first ---

def _trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _polymod(a: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    a = _trim(list(a))
    inv_lead = pow(m[-1], -1, p)
    while len(a) >= len(m):
        coef = a[-1] * inv_lead % p
        shift = len(a) - len(m)
        for k, mk in enumerate(m):
            a[shift + k] = (a[shift + k] - coef * mk) % p
        _trim(a)
    return a


def _polymul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _has_root_factor(m: Sequence[int], p: int, deg: int) -> bool:
    """True if ``m`` has a monic factor of degree ``deg`` (brute force)."""
    for tail in itertools.product(range(p), repeat=deg):
        f = list(tail) + [1]
        if not _polymod(m, f, p):
            return True
    return False


def is_irreducible(m: Sequence[int], p: int) -> bool:
    n = len(m) - 1
    if n < 1 or m[-1] % p == 0:
        return False
    return not any(_has_root_factor(m, p, d) for d in range(1, n // 2 + 1))


def default_modulus(p: int, a: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree ``a``.

    Lexicographic order reads coefficients from x^{a-1} down to x^0.
    """
    for high_to_low in itertools.product(range(p), repeat=a):
        m = tuple(reversed(high_to_low)) + (1,)
        if is_irreducible(m, p):
            return m
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


@dataclass(frozen=True)
class Fq:
    p: int
    a: int
    modulus: tuple[int, ...]
    _exp: tuple[int, ...] = field(default=(), repr=False, compare=False)
    _log: tuple[int, ...] = field(default=(), repr=False, compare=False)

    @property
    def q(self) -> int:
        return self.p ** self.a

    def __str__(self):
        if self.a == 1:
            return f"F_{self.p}"
        return f"F_{self.p}^{self.a}"

    # encoding helpers
    def digits(self, x: int) -> list[int]:
        out = []
        for _ in range(self.a):
            x, d = divmod(x, self.p)
            out.append(d)
        return out

    def from_digits(self, ds: Sequence[int]) -> int:
        return sum((d % self.p) * self.p ** k for k, d in enumerate(ds))

    def elements(self) -> range:
        return range(self.q)

    def units(self) -> range:
        return range(1, self.q)

    # arithmetic
    def add(self, x: int, y: int) -> int:
        if self.a == 1:
            return (x + y) % self.p
        if self.p == 2:
            return x ^ y
        return self.from_digits([u + v for u, v in zip(self.digits(x), self.digits(y))])

    def neg(self, x: int) -> int:
        if self.a == 1:
            return -x % self.p
        if self.p == 2:
            return x
        return self.from_digits([-u for u in self.digits(x)])

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        if self.a == 1:
            return x * y % self.p
        if x == 0 or y == 0:
            return 0
        return self._exp[(self._log[x] + self._log[y]) % (self.q - 1)]

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("inverse of 0 in a finite field")
        if self.a == 1:
            return pow(x, -1, self.p)
        return self._exp[(-self._log[x]) % (self.q - 1)]

    def div(self, x: int, y: int) -> int:
        return self.mul(x, self.inv(y))

    def pow(self, x: int, n: int) -> int:
        if n < 0:
            return self.pow(self.inv(x), -n)
        if self.a == 1:
            return pow(x, n, self.p)
        if x == 0:
            return 1 if n == 0 else 0
        return self._exp[(self._log[x] * n) % (self.q - 1)]

    def from_int(self, n: int) -> int:
        """Image of the integer ``n`` under Z -> F_q."""
        return n % self.p

    def order(self, x: int) -> int:
        """Multiplicative order of a unit."""
        n = self.q - 1
        for d in sorted(_divisors(n)):
            if self.pow(x, d) == 1:
                return d
        raise AssertionError  # pragma: no cover

    def format(self, x: int) -> str:
        return str(x)


def _divisors(n: int) -> set[int]:
    out = set()
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            out.update((d, n // d))
    return out


def _build_tables(p: int, a: int, modulus: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    q = p ** a
    enc = lambda c: sum(d * p ** k for k, d in enumerate(c))

    def mulpoly(x: int, y: int) -> int:
        dx = [(x // p ** k) % p for k in range(a)]
        dy = [(y // p ** k) % p for k in range(a)]
        r = _polymod(_polymul(dx, dy, p), modulus, p)
        return enc(r)

    for g in range(2, q) if q > 2 else [1]:
        exp = [1]
        x = 1
        for _ in range(q - 2):
            x = mulpoly(x, g)
            if x == 1:
                break
            exp.append(x)
        if len(exp) == q - 1:
            log = [0] * q
            for k, v in enumerate(exp):
                log[v] = k
            return tuple(exp), tuple(log)
    raise AssertionError("no primitive element")  # pragma: no cover


@lru_cache(maxsize=None)
def fq_make(p: int, a: int = 1, modulus: tuple[int, ...] | None = None) -> Fq:
    """The field with ``p**a`` elements, defined by ``modulus`` (low degree first)."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if a < 1:
        raise ValueError("degree must be >= 1")
    if modulus is None:
        modulus = default_modulus(p, a) if a > 1 else (0, 1)
    else:
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != a + 1 or modulus[-1] != 1:
            raise Reducible(f"modulus must be monic of degree {a}")
        if not is_irreducible(modulus, p):
            raise Reducible(f"modulus {modulus} is reducible over F_{p}")
    if a == 1:
        return Fq(p, 1, modulus)
    exp, log = _build_tables(p, a, modulus)
    return Fq(p, a, modulus, exp, log)


def field_from_q(q: int) -> Fq:
    if q < 2:
        raise NotPrime(f"{q} is not a prime power")
    for p in range(2, q + 1):
        if q % p == 0:
            break
    a = 0
    n = q
    while n % p == 0:
        n //= p
        a += 1
    if n != 1 or not is_prime(p):
        raise NotPrime(f"{q} is not a prime power")
    return fq_make(p, a)


def parse_field(text: str) -> Fq:
    """Parse ``"p^a"``, ``"q"`` or ``"p^a/c0,c1,...,ca"``."""
    m = re.fullmatch(r"\s*(\d+)(?:\^(\d+))?(?:/([\d,\s]+))?\s*", text)
    if not m:
        raise ParseError(f"cannot parse field {text!r}")
    base, exp, coeffs = m.groups()
    if exp is None and coeffs is None:
        return field_from_q(int(base))
    p, a = int(base), int(exp or 1)
    mod = tuple(int(c) for c in coeffs.split(",")) if coeffs else None
    return fq_make(p, a, mod)


# --- torus ---

@dataclass(frozen=True)
class TorusElement:
    """Element of Y (x) F_q^x by its coordinates on the Y-basis."""

    coords: tuple[int, ...]

    def __post_init__(self):
        if any(c == 0 for c in self.coords):
            raise ValueError("torus coordinates must be nonzero")

    @classmethod
    def identity(cls, rank: int) -> "TorusElement":
        return cls((1,) * rank)

    def is_identity(self) -> bool:
        return all(c == 1 for c in self.coords)

    def __str__(self):
        return "h(" + ",".join(map(str, self.coords)) + ")"


def torus_mul(F: Fq, g: TorusElement, h: TorusElement) -> TorusElement:
    return TorusElement(tuple(F.mul(a, b) for a, b in zip(g.coords, h.coords)))


def torus_inv(F: Fq, g: TorusElement) -> TorusElement:
    return TorusElement(tuple(F.inv(a) for a in g.coords))


def cocharacter(F: Fq, y: Sequence[int], t: int) -> TorusElement:
    """``y (x) t``."""
    return TorusElement(tuple(F.pow(t, k) for k in y))


def coroot_element(F: Fq, datum: RootDatum, i: int, t: int) -> TorusElement:
    """h_i(t) = alpha_i^vee (x) t."""
    return cocharacter(F, datum.coroot(i), t)


def char_eval(F: Fq, datum: RootDatum, i: int, h: TorusElement) -> int:
    """alpha_i(h)."""
    out = 1
    for c, k in zip(h.coords, datum.pairings[i - 1]):
        out = F.mul(out, F.pow(c, k))
    return out


def root_char(F: Fq, datum: RootDatum, r: Root, h: TorusElement) -> int:
    """The character r(h) for r = k1 alpha1 + k2 alpha2."""
    return F.mul(F.pow(char_eval(F, datum, 1, h), r[0]), F.pow(char_eval(F, datum, 2, h), r[1]))


def torus_reflect(F: Fq, datum: RootDatum, i: int, h: TorusElement) -> TorusElement:
    """w_i(h), i.e. ``n_i h n_i^-1``."""
    c = char_eval(F, datum, i, h)
    shift = cocharacter(F, datum.coroot(i), F.inv(c))
    return torus_mul(F, h, shift)


def center_elements(F: Fq, datum: RootDatum) -> list[TorusElement]:
    """Brute force: torus elements killed by both simple characters."""
    out = []
    for coords in itertools.product(F.units(), repeat=datum.rank_y):
        h = TorusElement(coords)
        if char_eval(F, datum, 1, h) == 1 and char_eval(F, datum, 2, h) == 1:
            out.append(h)
    return out


def center_order_bruteforce(F: Fq, datum: RootDatum) -> int:
    return len(center_elements(F, datum))


def smith_invariants(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Smith normal form diagonal of a 2 x n integer matrix.

    Uses determinantal divisors: d1 = gcd of entries, d1*d2 = gcd of 2x2 minors.
    """
    rows = [list(r) for r in matrix]
    if len(rows) != 2:
        raise ValueError("only 2-row matrices are supported")
    entries = [x for r in rows for x in r]
    g1 = reduce(math.gcd, entries, 0)
    if g1 == 0:
        return [0, 0]
    n = len(rows[0])
    minors = [
        rows[0][i] * rows[1][j] - rows[0][j] * rows[1][i]
        for i in range(n) for j in range(i + 1, n)
    ]
    g2 = reduce(math.gcd, minors, 0)
    return [g1, g2 // g1]


def center_order_smith(datum: RootDatum, q: int) -> int:
    """|Z| as the kernel size of the character map on (Z/(q-1))^rank."""
    n = q - 1
    invariants = smith_invariants(datum.pairings)
    size = 1
    for d in invariants:
        size *= math.gcd(d, n)
    # free directions of Y not seen by the characters
    size *= n ** (datum.rank_y - len(invariants))
    return size


def center_order(F: Fq, datum: RootDatum, brute_force_limit: int = 10 ** 6) -> int:
    """|Z(G)| for the group of ``datum`` over ``F``.

    Uses the Smith form; when the torus is small enough it is also counted
    directly and the two must agree.
    """
    fast = center_order_smith(datum, F.q)
    if (F.q - 1) ** datum.rank_y <= brute_force_limit:
        slow = center_order_bruteforce(F, datum)
        if slow != fast:
            raise AssertionError(f"center order mismatch: brute force {slow}, Smith {fast}")
    return fast
