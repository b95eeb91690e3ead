"""Rank-2 generalized Cartan matrices, root data, the infinite dihedral
Weyl group and its real roots.

Roots are kept in simple-root coordinates ``(k1, k2)``.  The simple
reflections act by ``w_i(alpha_j) = alpha_j - a_ij * alpha_i``, which is the
action dual to the pairing ``alpha_i(alpha_j^vee) = a_ji``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

from kmlat.errors import (
    InvalidGCM,
    NotReduced,
    NotRealRoot,
    ParseError,
    SimpleRootCase,
    WrongMatrixShape,
)


def other(i: int) -> int:
    return 3 - i


@dataclass(frozen=True)
class GCM:
    """A 2x2 generalized Cartan matrix ``[[2, a12], [a21, 2]]``."""

    a12: int
    a21: int

    def __post_init__(self):
        if self.a12 > -1 or self.a21 > -1:
            raise InvalidGCM(
                f"off-diagonal entries must be <= -1, got a12={self.a12}, a21={self.a21}"
            )

    a11 = 2
    a22 = 2

    @classmethod
    def symmetric(cls, m: int) -> "GCM":
        return cls(-m, -m)

    @classmethod
    def parse(cls, text: str) -> "GCM":
        """Parse ``"2,a12;a21,2"``."""
        rows = [r for r in text.replace(" ", "").split(";")]
        try:
            entries = [[int(x) for x in r.split(",")] for r in rows]
        except ValueError:
            raise InvalidGCM(f"cannot parse GCM {text!r}") from None
        if len(entries) != 2 or any(len(r) != 2 for r in entries):
            raise InvalidGCM(f"GCM must be 2x2, got {text!r}")
        if entries[0][0] != 2 or entries[1][1] != 2:
            raise InvalidGCM(f"diagonal entries must be 2, got {text!r}")
        return cls(entries[0][1], entries[1][0])

    def entry(self, i: int, j: int) -> int:
        if i == j:
            return 2
        return self.a12 if i == 1 else self.a21

    @property
    def group_admissible(self) -> bool:
        return max(self.a12, self.a21) <= -2

    @property
    def is_symmetric(self) -> bool:
        return self.a12 == self.a21

    def transpose(self) -> "GCM":
        return GCM(self.a21, self.a12)

    def matrix(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((2, self.a12), (self.a21, 2))

    def __str__(self):
        return f"2,{self.a12};{self.a21},2"


class Root(NamedTuple):
    k1: int
    k2: int

    def __str__(self):
        return f"({self.k1},{self.k2})"

    def __neg__(self) -> "Root":
        return Root(-self.k1, -self.k2)

    def coord(self, i: int) -> int:
        return self.k1 if i == 1 else self.k2

    @property
    def height(self) -> int:
        return self.k1 + self.k2

    def plus(self, other: "Root") -> "Root":
        return Root(self.k1 + other.k1, self.k2 + other.k2)

    @classmethod
    def parse(cls, text: str) -> "Root":
        m = re.fullmatch(r"\s*\(?\s*(-?\d+)\s*,\s*(-?\d+)\s*\)?\s*", text)
        if not m:
            raise ParseError(f"cannot parse root {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))


def simple_root(i: int) -> Root:
    return Root(1, 0) if i == 1 else Root(0, 1)


@dataclass(frozen=True)
class WeylWord:
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        if any(x not in (1, 2) for x in self.letters):
            raise ValueError(f"Weyl letters must be 1 or 2, got {self.letters}")

    @classmethod
    def alternating(cls, start: int, length: int) -> "WeylWord":
        return cls(tuple(start if k % 2 == 0 else other(start) for k in range(length)))

    @classmethod
    def parse(cls, text: str) -> "WeylWord":
        text = text.strip()
        if text in ("", "1", "e"):
            return cls(())
        if not re.fullmatch(r"(w[12])+", text):
            raise ParseError(f"cannot parse Weyl word {text!r}")
        return cls(tuple(int(c) for c in text[1::2]))

    def is_reduced(self) -> bool:
        return all(a != b for a, b in zip(self.letters, self.letters[1:]))

    def reduced(self) -> "WeylWord":
        out: list[int] = []
        for x in self.letters:
            if out and out[-1] == x:
                out.pop()
            else:
                out.append(x)
        return WeylWord(tuple(out))

    def __mul__(self, other: "WeylWord") -> "WeylWord":
        return WeylWord(self.letters + other.letters).reduced()

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return "".join(f"w{x}" for x in self.letters)


class RootClass(enum.Enum):
    POS1 = "POS1"
    POS2 = "POS2"
    NEG1 = "NEG1"
    NEG2 = "NEG2"
    NOT_REAL = "NOT_REAL"

    @property
    def is_real(self) -> bool:
        return self is not RootClass.NOT_REAL

    @property
    def positive(self) -> bool:
        return self in (RootClass.POS1, RootClass.POS2)

    @property
    def side(self) -> int:
        if self is RootClass.NOT_REAL:
            raise NotRealRoot("non-real roots have no side")
        return 1 if self in (RootClass.POS1, RootClass.NEG1) else 2


@dataclass(frozen=True)
class RootDatum:
    """Root datum of rank 2 type.

    ``coroots[j]`` gives alpha_{j+1}^vee in the Y-basis and ``pairings[i][k]``
    is alpha_{i+1} evaluated on the k-th Y-basis vector.
    """

    gcm: GCM
    coroots: tuple[tuple[int, ...], tuple[int, ...]]
    pairings: tuple[tuple[int, ...], tuple[int, ...]]

    def __post_init__(self):
        n = self.rank_y
        if n < 1 or any(len(v) != n for v in (*self.coroots, *self.pairings)):
            raise InvalidGCM("coroot and pairing vectors must have length rank_Y")
        for i in (1, 2):
            for j in (1, 2):
                if self.pair(i, self.coroots[j - 1]) != self.gcm.entry(j, i):
                    raise InvalidGCM(
                        f"axiom alpha_{i}(alpha_{j}^vee) = a_{j}{i} fails"
                    )

    @classmethod
    def simply_connected(cls, gcm: GCM) -> "RootDatum":
        a = gcm.matrix()
        # alpha_i(alpha_j^vee) = a_ji with coroots the standard basis
        pairings = ((a[0][0], a[1][0]), (a[0][1], a[1][1]))
        return cls(gcm, ((1, 0), (0, 1)), pairings)

    @property
    def rank_y(self) -> int:
        return len(self.coroots[0])

    def pair(self, i: int, y: Sequence[int]) -> int:
        """alpha_i evaluated on the cocharacter y."""
        return sum(p * c for p, c in zip(self.pairings[i - 1], y))

    def root_pair(self, root: Root, y: Sequence[int]) -> int:
        return root.k1 * self.pair(1, y) + root.k2 * self.pair(2, y)

    def coroot(self, i: int) -> tuple[int, ...]:
        return self.coroots[i - 1]

    def reflect_cocharacter(self, i: int, y: Sequence[int]) -> tuple[int, ...]:
        c = self.pair(i, y)
        return tuple(yk - c * ak for yk, ak in zip(y, self.coroot(i)))


def reflect(gcm: GCM, i: int, r: Root) -> Root:
    """Simple reflection w_i applied to ``r``."""
    if i == 1:
        return Root(-r.k1 - gcm.a12 * r.k2, r.k2)
    return Root(r.k1, -r.k2 - gcm.a21 * r.k1)


def reflection_matrix(gcm: GCM, i: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Matrix of w_i on column vectors (k1, k2)."""
    if i == 1:
        return ((-1, -gcm.a12), (0, 1))
    return ((1, 0), (-gcm.a21, -1))


def apply_word(gcm: GCM, w: WeylWord, r: Root) -> Root:
    for i in reversed(w.letters):
        r = reflect(gcm, i, r)
    return r


def inversion_sequence(gcm: GCM, w: WeylWord) -> list[Root]:
    """Inversion roots ``[alpha_{i1}, w_{i1} alpha_{i2}, ...]`` of a reduced word."""
    if not w.is_reduced():
        raise NotReduced(f"{w} is not reduced")
    out = []
    for k, i in enumerate(w.letters):
        out.append(apply_word(gcm, WeylWord(w.letters[:k]), simple_root(i)))
    return out


def positive_roots(gcm: GCM, side: int, count: int) -> list[Root]:
    """The first ``count`` roots of Phi_+^side, in listing order."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if side not in (1, 2):
        raise ValueError("side must be 1 or 2")
    roots = []
    j = side
    r = simple_root(side)
    prefix: list[int] = []
    for k in range(count):
        roots.append(r)
        prefix.append(j)
        j = other(j)
        # next root is (prefix) alpha_j, computed incrementally from the bottom
        r = apply_word(gcm, WeylWord(tuple(prefix)), simple_root(j))
    return roots


@lru_cache(maxsize=None)
def decompose(gcm: GCM, r: Root) -> tuple[WeylWord, int] | None:
    """Write a real root as ``w(alpha_j)`` with ``w`` reduced.

    Returns ``None`` for non-real vectors.  Descent applies whichever simple
    reflection lowers the height (ties prefer index 1).
    """
    if r == (0, 0):
        raise ValueError("zero is not a root")
    if r.k1 < 0 or r.k2 < 0:
        if r.k1 > 0 or r.k2 > 0:
            return None
        pos = decompose(gcm, -r)
        if pos is None:
            return None
        w, j = pos
        return WeylWord(w.letters + (j,)), j
    letters: list[int] = []
    cur = r
    while True:
        if cur == (1, 0):
            return WeylWord(tuple(letters)), 1
        if cur == (0, 1):
            return WeylWord(tuple(letters)), 2
        best = None
        for i in (1, 2):
            img = reflect(gcm, i, cur)
            if img.height < cur.height and (best is None or img.height < best[1].height):
                best = (i, img)
        if best is None:
            return None
        i, img = best
        if img.k1 < 0 or img.k2 < 0:
            return None
        letters.append(i)
        cur = img


def classify_root(gcm: GCM, r: Root) -> RootClass:
    r = Root(*r)
    if r == (0, 0):
        raise ValueError("zero is not a root")
    dec = decompose(gcm, r)
    if dec is None:
        return RootClass.NOT_REAL
    w, j = dec
    side = w.letters[0] if w.letters else j
    if r.k1 >= 0 and r.k2 >= 0:
        return RootClass.POS1 if side == 1 else RootClass.POS2
    return RootClass.NEG1 if side == 1 else RootClass.NEG2


def is_simple(r: Root) -> bool:
    return r in ((1, 0), (0, 1))


def chevalley_sign(gcm: GCM, eps: tuple[int, int], i: int, r: Root) -> int:
    """Sign in ``n_i x_r(t) n_i^-1 = x_{w_i r}(sign * t)`` for any real root.

    Root elements are normalised by ``x_{w(alpha_j)} = n_w x_{alpha_j} n_w^-1``
    with ``n_w = n_s n_t ...`` along the reduced word ``w = [w_s w_t]_m``.  For
    ``m = 0`` (``r`` simple) the sign is +1 by that normalisation.
    """
    dec = decompose(gcm, Root(*r))
    if dec is None:
        raise NotRealRoot(f"{r} is not a real root")
    w, _ = dec
    if not w.letters or w.letters[0] != i:
        return 1
    img = reflect(gcm, i, Root(*r))
    k_t = img.coord(other(i))
    return eps[i - 1] ** (k_t % 2)


def epsilon_sign(gcm: GCM, eps1: int, eps2: int, i: int, alpha: Root) -> int:
    """epsilon_{i,alpha} for a positive, non-simple real root."""
    alpha = Root(*alpha)
    cls = classify_root(gcm, alpha)
    if not cls.is_real:
        raise NotRealRoot(f"{alpha} is not a real root")
    if is_simple(alpha):
        raise SimpleRootCase(
            f"{alpha} is simple; the sign convention fixes epsilon = +1 there"
        )
    if not cls.positive:
        raise NotRealRoot(f"{alpha} is not positive")
    return chevalley_sign(gcm, (eps1, eps2), i, alpha)


def sum_of_roots_witness(gcm: GCM) -> tuple[Root, Root, Root]:
    """Real root ``w1(alpha2)`` equal to ``alpha1 + w1 w2(alpha1)`` when a12 = -1.

    The identity lives in the reflection representation
    ``rho(w1) = [[-1, |a21|], [0, 1]]``, ``rho(w2) = [[1, 0], [1, -1]]``, which is
    the reflection action of the transposed matrix.
    """
    if gcm.a12 != -1 or gcm.a21 > -2:
        raise WrongMatrixShape(f"need a12 = -1 and a21 <= -2, got {gcm}")
    rho = gcm.transpose()
    lhs = reflect(rho, 1, simple_root(2))
    a = simple_root(1)
    b = reflect(rho, 1, reflect(rho, 2, simple_root(1)))
    assert lhs == a.plus(b), (lhs, a, b)
    for r in (lhs, a, b):
        assert classify_root(rho, r).positive, r
    return lhs, a, b
