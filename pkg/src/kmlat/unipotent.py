"""The positive unipotent group U = U_1 * U_2 as alternating free-product words.

Each factor U_i is the elementary abelian group with one F_q coordinate per
root of Phi_+^i, so a syllable is a finite map ``root -> nonzero coefficient``.
"""
from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from kmlat.errors import InvalidGCM, NotRealRoot, ParseError
from kmlat.ffield import Fq, TorusElement, coroot_element, root_char
from kmlat.roots import (
    Root,
    RootDatum,
    chevalley_sign,
    classify_root,
    other,
    positive_roots,
    reflect,
    simple_root,
)


def _root_key(r: Root) -> tuple[int, int]:
    return (r.k1 + r.k2, r.k1)


@dataclass(frozen=True)
class Syllable:
    side: int
    coords: tuple[tuple[Root, int], ...]

    def __post_init__(self):
        if not self.coords:
            raise ValueError("empty syllable")

    def as_dict(self) -> dict[Root, int]:
        return dict(self.coords)

    def get(self, r: Root) -> int:
        for root, c in self.coords:
            if root == r:
                return c
        return 0

    def __str__(self):
        return " ".join(f"x({r.k1},{r.k2};{c})" for r, c in self.coords)


@dataclass(frozen=True)
class UWord:
    syllables: tuple[Syllable, ...] = ()

    def __len__(self):
        return len(self.syllables)

    def is_identity(self) -> bool:
        return not self.syllables

    def __str__(self):
        if not self.syllables:
            return "1"
        return " ".join(str(s) for s in self.syllables)


IDENTITY = UWord(())


class TorsionKind(enum.Enum):
    IDENTITY = "IDENTITY"
    P_POWER_IN_FACTOR_CONJUGATE = "P_POWER_IN_FACTOR_CONJUGATE"
    INFINITE = "INFINITE"


@dataclass(frozen=True)
class TorsionInfo:
    kind: TorsionKind
    conjugator: UWord
    core: UWord
    order: int | None  # None for infinite order


class NeedsSL2:
    """Returned by conj_by_n when an alpha_i coordinate blocks the direct rule."""

    def __repr__(self):
        return "NeedsSL2"


NEEDS_SL2 = NeedsSL2()

_TOKEN = re.compile(r"x\(\s*(-?\d+)\s*,\s*(-?\d+)\s*;\s*(\d+)\s*\)")


class UnipotentGroup:
    """Arithmetic in U over a fixed root datum and field."""

    def __init__(self, datum: RootDatum, F: Fq, signs: tuple[int, int] = (1, 1)):
        if not datum.gcm.group_admissible:
            # U is the free product U1 * U2 only when max(a12, a21) <= -2
            raise InvalidGCM(f"group computations need max(a12, a21) <= -2, got {datum.gcm}")
        self.datum = datum
        self.gcm = datum.gcm
        self.F = F
        self.signs = signs

    # construction ----------------------------------------------------

    def side_of(self, r: Root) -> int:
        cls = classify_root(self.gcm, r)
        if not cls.positive:
            raise NotRealRoot(f"{r} is not a positive real root")
        return cls.side

    def make_syllable(self, side: int, coords: Mapping[Root, int]) -> Syllable | None:
        items = sorted(
            ((Root(*r), c) for r, c in coords.items() if c != 0),
            key=lambda rc: _root_key(rc[0]),
        )
        if not items:
            return None
        return Syllable(side, tuple(items))

    def x(self, r: Root, c: int) -> UWord:
        """The root element x_r(c) for a positive real root r."""
        r = Root(*r)
        side = self.side_of(r)
        syl = self.make_syllable(side, {r: c})
        return UWord((syl,)) if syl else IDENTITY

    def from_pairs(self, pairs: Iterable[tuple[Root, int]]) -> UWord:
        out = IDENTITY
        for r, c in pairs:
            out = self.mul(out, self.x(r, c))
        return out

    def parse(self, text: str) -> UWord:
        text = text.strip()
        if text in ("", "1"):
            return IDENTITY
        pos = 0
        pairs = []
        for m in _TOKEN.finditer(text):
            if text[pos:m.start()].strip():
                raise ParseError(f"unexpected {text[pos:m.start()]!r} in word")
            pairs.append((Root(int(m.group(1)), int(m.group(2))), int(m.group(3))))
            pos = m.end()
        if text[pos:].strip() or not pairs:
            raise ParseError(f"cannot parse word {text!r}")
        for _, c in pairs:
            if c >= self.F.q:
                raise ParseError(f"coefficient {c} is not an element of {self.F}")
        return self.from_pairs(pairs)

    # group law -------------------------------------------------------

    def _merge(self, a: Syllable, b: Syllable) -> Syllable | None:
        d = a.as_dict()
        for r, c in b.coords:
            d[r] = self.F.add(d.get(r, 0), c)
        return self.make_syllable(a.side, d)

    def mul(self, x: UWord, y: UWord) -> UWord:
        left = list(x.syllables)
        right = list(y.syllables)
        while left and right and left[-1].side == right[0].side:
            merged = self._merge(left.pop(), right.pop(0))
            if merged is not None:
                left.append(merged)
                break
        return UWord(tuple(left + right))

    def mul_all(self, words: Iterable[UWord]) -> UWord:
        out = IDENTITY
        for w in words:
            out = self.mul(out, w)
        return out

    def inverse_syllable(self, s: Syllable) -> Syllable:
        return Syllable(s.side, tuple((r, self.F.neg(c)) for r, c in s.coords))

    def inverse(self, x: UWord) -> UWord:
        return UWord(tuple(self.inverse_syllable(s) for s in reversed(x.syllables)))

    def power(self, x: UWord, n: int) -> UWord:
        if n < 0:
            return self.power(self.inverse(x), -n)
        out = IDENTITY
        for _ in range(n):
            out = self.mul(out, x)
        return out

    def conjugate(self, g: UWord, x: UWord) -> UWord:
        """g x g^-1."""
        return self.mul(self.mul(g, x), self.inverse(g))

    # homomorphisms and actions -----------------------------------------

    def retraction(self, i: int, x: UWord) -> int:
        """Image under the homomorphism U -> U_{alpha_i} killing other root groups."""
        a = simple_root(i)
        out = 0
        for s in x.syllables:
            if s.side == i:
                out = self.F.add(out, s.get(a))
        return out

    def conj_by_torus(self, h: TorusElement, x: UWord) -> UWord:
        """h x h^-1: the coordinate at r is scaled by r(h)."""
        if h.is_identity():
            return x
        out = []
        for s in x.syllables:
            out.append(Syllable(
                s.side,
                tuple((r, self.F.mul(root_char(self.F, self.datum, r, h), c)) for r, c in s.coords),
            ))
        return UWord(tuple(out))

    def n_image_syllable(self, i: int, s: Syllable) -> Syllable:
        """n_i s n_i^-1 for a syllable without an alpha_i coordinate."""
        coords = {}
        for r, c in s.coords:
            sign = chevalley_sign(self.gcm, self.signs, i, r)
            coords[reflect(self.gcm, i, r)] = c if sign == 1 else self.F.neg(c)
        return self.make_syllable(other(s.side), coords)

    def conj_by_n(self, i: int, x: UWord) -> UWord | NeedsSL2:
        """n_i x n_i^-1, or NEEDS_SL2 if some syllable has an alpha_i coordinate."""
        a = simple_root(i)
        if any(s.get(a) for s in x.syllables):
            return NEEDS_SL2
        return UWord(tuple(self.n_image_syllable(i, s) for s in x.syllables))

    def conj_by_n_inverse_kernel(self, i: int, x: UWord) -> UWord:
        """n_i^-1 x n_i for x in the kernel of the alpha_i retraction.

        The kernel is generated by the alpha_i-free parts of side-i syllables
        and by x_i(c) T x_i(-c) for side-j syllables T.  The latter is sent by
        the SL_2 identity x_{-alpha_i}(c) = x_i(-1/c) n_i(1/c) x_i(-1/c) to
        x_i(-1/c) h_i(1/c) T h_i(1/c)^-1 x_i(1/c).
        """
        F = self.F
        a = simple_root(i)
        h_minus = coroot_element(F, self.datum, i, F.neg(1))
        pieces: list[UWord] = []
        offset = 0
        for s in x.syllables:
            if s.side == i:
                offset = F.add(offset, s.get(a))
                rest = {r: c for r, c in s.coords if r != a}
                syl = self.make_syllable(i, rest)
                if syl is not None:
                    img = UWord((self.n_image_syllable(i, syl),))
                    pieces.append(self.conj_by_torus(h_minus, img))
            elif offset == 0:
                img = UWord((self.n_image_syllable(i, s),))
                pieces.append(self.conj_by_torus(h_minus, img))
            else:
                u = F.inv(offset)
                core = self.conj_by_torus(coroot_element(F, self.datum, i, u), UWord((s,)))
                xi = self.x(a, F.neg(u))
                pieces.extend([xi, core, self.inverse(xi)])
        if offset != 0:
            raise ValueError("word is not in the kernel of the retraction")
        return self.mul_all(pieces)

    # torsion -------------------------------------------------------------

    def torsion_class(self, x: UWord) -> TorsionInfo:
        """Cyclically reduce x = c * core * c^-1 and classify its order."""
        conj = IDENTITY
        core = x
        while len(core) >= 2 and core.syllables[0].side == core.syllables[-1].side:
            first = UWord((core.syllables[0],))
            conj = self.mul(conj, first)
            core = self.mul(self.mul(self.inverse(first), core), first)
        if core.is_identity():
            return TorsionInfo(TorsionKind.IDENTITY, conj, core, 1)
        if len(core) == 1:
            return TorsionInfo(TorsionKind.P_POWER_IN_FACTOR_CONJUGATE, conj, core, self.F.p)
        return TorsionInfo(TorsionKind.INFINITE, conj, core, None)

    # sampling --------------------------------------------------------

    def random_syllable(self, rng: random.Random, side: int, depth: int = 4, support: int = 3) -> Syllable:
        roots = positive_roots(self.gcm, side, depth)
        while True:
            chosen = rng.sample(roots, k=rng.randint(1, min(support, len(roots))))
            syl = self.make_syllable(side, {r: rng.randrange(self.F.q) for r in chosen})
            if syl is not None:
                return syl

    def random_word(self, rng: random.Random, max_len: int = 5, depth: int = 4) -> UWord:
        n = rng.randint(0, max_len)
        side = rng.choice((1, 2))
        syls = []
        for _ in range(n):
            syls.append(self.random_syllable(rng, side, depth))
            side = other(side)
        return UWord(tuple(syls))


@dataclass(frozen=True)
class BElement:
    """u * h in B = U x| H."""

    u: UWord
    h: TorusElement

    def __str__(self):
        if self.h.is_identity():
            return str(self.u)
        return f"{self.u} {self.h}" if not self.u.is_identity() else str(self.h)
