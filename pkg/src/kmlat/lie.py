"""Height-truncated rank-2 Kac-Moody algebras over the rationals.

The positive part is built degree by degree.  A vector of degree beta
(height >= 2) is stored through its images ``[f_1, x]`` and ``[f_2, x]``,
which determine it in the quotient of the free Lie algebra by the Serre
ideal (every rank-2 GCM is symmetrizable, so that ideal is the maximal
graded ideal meeting the Cartan part trivially).  The negative part is the
image of the positive part under the Chevalley involution.

Conventions: ``[h_k, e_a] = a(h_k) e_a`` with ``a_i(h_k) = a_ki``, and
``[e_i, f_i] = -h_i``.  With this sign the sl_2 triple (e_i, h_i, f_i)
exponentiates to ``[[0, 1], [-1, 0]]`` so ``eta_i^2`` fixes e_i and f_i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from kmlat.errors import HeightTooSmall, TruncationLoss
from kmlat.roots import GCM, Root, other, simple_root

Label = tuple  # ('e', Root, idx) | ('f', Root, idx) | ('h', i)
Vector = dict  # Label -> Fraction, zero coefficients dropped


def _add_into(acc: dict, v: dict, c=1) -> None:
    for k, x in v.items():
        y = acc.get(k, 0) + c * x
        if y:
            acc[k] = y
        else:
            acc.pop(k, None)


def vec_add(*vs: dict) -> dict:
    out: dict = {}
    for v in vs:
        _add_into(out, v)
    return out


def vec_scale(c, v: dict) -> dict:
    if c == 0:
        return {}
    return {k: c * x for k, x in v.items()}


def vec_sub(u: dict, v: dict) -> dict:
    out = dict(u)
    _add_into(out, v, -1)
    return out


def e(i: int) -> Vector:
    return {("e", simple_root(i), 0): Fraction(1)}


def f(i: int) -> Vector:
    return {("f", simple_root(i), 0): Fraction(1)}


def h(i: int) -> Vector:
    return {("h", i): Fraction(1)}


class _Span:
    """Row-reduced span of sparse rational vectors, with coordinates."""

    def __init__(self):
        self.rows: list[tuple[object, dict, dict]] = []  # pivot, reduced vector, combination

    def _reduce(self, v: dict) -> tuple[dict, dict]:
        v = dict(v)
        combo: dict = {}
        for pivot, row, rc in self.rows:
            c = v.get(pivot, 0)
            if c:
                _add_into(v, row, -c)
                _add_into(combo, rc, c)
        return v, combo

    def add(self, v: dict, tag: int) -> bool:
        r, combo = self._reduce(v)
        if not r:
            return False
        pivot = min(r)
        c = r[pivot]
        row = vec_scale(1 / Fraction(c), r)
        rc = vec_scale(-1 / Fraction(c), combo)
        rc[tag] = rc.get(tag, 0) + 1 / Fraction(c)
        # keep earlier rows reduced against the new pivot
        new_rows = []
        for p, rw, cb in self.rows:
            k = rw.get(pivot, 0)
            if k:
                rw = vec_sub(rw, vec_scale(k, row))
                cb = vec_sub(cb, vec_scale(k, rc))
            new_rows.append((p, rw, cb))
        self.rows = new_rows + [(pivot, row, rc)]
        return True

    def coords(self, v: dict) -> dict | None:
        """Coefficients expressing v in the added vectors, or None if outside."""
        r, combo = self._reduce(v)
        if r:
            return None
        return {k: x for k, x in combo.items() if x}


@dataclass
class _Piece:
    degree: Root
    reps: list[dict] = field(default_factory=list)
    exprs: list[tuple[int, int]] = field(default_factory=list)  # b = [e_i, b'_idx]
    span: _Span = field(default_factory=_Span)

    @property
    def dim(self) -> int:
        return len(self.reps)


class TruncatedKMAlgebra:
    """The derived algebra g'(A) restricted to degrees with |k1| + |k2| <= H.

    Graded pieces are built lazily; ``basis()`` forces all of them.
    Brackets that would land outside the window raise TruncationLoss.
    """

    def __init__(self, gcm: GCM, height_bound: int):
        self.gcm = gcm
        self.H = height_bound
        self._pieces: dict[Root, _Piece] = {}
        self._ad_e_cache: dict = {}

    # degrees -------------------------------------------------------------

    def weight(self, k: int, deg: Root) -> int:
        """deg(h_k) for a degree deg = k1 a_1 + k2 a_2."""
        return deg.k1 * self.gcm.entry(k, 1) + deg.k2 * self.gcm.entry(k, 2)

    def in_window(self, deg: Root) -> bool:
        return abs(deg.k1) + abs(deg.k2) <= self.H

    def _check(self, deg: Root) -> None:
        if not self.in_window(deg):
            raise TruncationLoss(f"degree {deg} lies outside the window H={self.H}")

    # positive pieces -------------------------------------------------------

    def piece(self, deg: Root) -> _Piece:
        deg = Root(*deg)
        if deg in self._pieces:
            return self._pieces[deg]
        self._check(deg)
        p = _Piece(deg)
        if deg.k1 < 0 or deg.k2 < 0 or deg.height <= 0:
            pass
        elif deg.height == 1:
            p.reps.append({})
            p.exprs.append((0, 0))
        else:
            for i in (1, 2):
                lower = Root(deg.k1 - (i == 1), deg.k2 - (i == 2))
                if lower.k1 < 0 or lower.k2 < 0:
                    continue
                for idx in range(self.piece(lower).dim):
                    rep = self._rep_of_bracket(i, ("e", lower, idx))
                    if p.span.add(rep, len(p.reps)):
                        p.reps.append(rep)
                        p.exprs.append((i, idx))
        self._pieces[deg] = p
        return p

    def dim(self, deg: Root) -> int:
        deg = Root(*deg)
        if deg.k1 <= 0 and deg.k2 <= 0 and deg.height < 0:
            return self.piece(-deg).dim
        if deg == (0, 0):
            return 2
        return self.piece(deg).dim

    def _rep_of_bracket(self, i: int, lbl: Label) -> dict:
        """The pair ([f_1, [e_i, y]], [f_2, [e_i, y]]) for a positive basis vector y."""
        deg = lbl[1]
        out: dict = {}
        for j in (1, 2):
            part = self.ad_e(i, self.ad_f(j, {lbl: Fraction(1)}))
            if i == j:
                _add_into(part, {lbl: Fraction(self.weight(i, deg))})
            _add_into(out, part)
        return out

    def positive_labels(self) -> list[Label]:
        out = []
        for ht in range(1, self.H + 1):
            for k1 in range(ht + 1):
                deg = Root(k1, ht - k1)
                out.extend(("e", deg, idx) for idx in range(self.piece(deg).dim))
        return out

    def basis(self) -> list[Label]:
        pos = self.positive_labels()
        return [("f", d, k) for _, d, k in reversed(pos)] + [("h", 1), ("h", 2)] + pos

    @staticmethod
    def degree(lbl: Label) -> Root:
        if lbl[0] == "h":
            return Root(0, 0)
        return lbl[1] if lbl[0] == "e" else -lbl[1]

    # the Chevalley involution ------------------------------------------------

    @staticmethod
    def omega(v: Vector) -> Vector:
        out = {}
        for lbl, c in v.items():
            if lbl[0] == "h":
                out[lbl] = -c
            else:
                out[("f" if lbl[0] == "e" else "e", lbl[1], lbl[2])] = -c
        return out

    # generators acting ---------------------------------------------------------

    def _ad_e_label(self, i: int, lbl: Label) -> Vector:
        key = (i, lbl)
        if key in self._ad_e_cache:
            return self._ad_e_cache[key]
        kind = lbl[0]
        if kind == "h":
            out = {("e", simple_root(i), 0): Fraction(-self.gcm.entry(lbl[1], i))}
        elif kind == "f":
            out = self.omega(self._ad_f_label(i, ("e", lbl[1], lbl[2])))
        else:
            deg = lbl[1]
            target = Root(deg.k1 + (i == 1), deg.k2 + (i == 2))
            self._check(target)
            rep = self._rep_of_bracket(i, lbl)
            p = self.piece(target)
            coords = p.span.coords(rep)
            if coords is None:
                raise AssertionError(f"bracket image at {target} escapes its piece")
            out = {("e", target, idx): c for idx, c in coords.items()}
        self._ad_e_cache[key] = out
        return out

    def _ad_f_label(self, i: int, lbl: Label) -> Vector:
        kind = lbl[0]
        if kind == "h":
            return {("f", simple_root(i), 0): Fraction(self.gcm.entry(lbl[1], i))}
        if kind == "f":
            return self.omega(self._ad_e_label(i, ("e", lbl[1], lbl[2])))
        deg = lbl[1]
        if deg.height == 1:
            return {("h", i): Fraction(1)} if deg == simple_root(i) else {}
        lower = Root(deg.k1 - (i == 1), deg.k2 - (i == 2))
        if lower.k1 < 0 or lower.k2 < 0:
            return {}
        rep = self.piece(deg).reps[lbl[2]]
        return {k: c for k, c in rep.items() if k[1] == lower}

    def ad_e(self, i: int, v: Vector) -> Vector:
        out: dict = {}
        for lbl, c in v.items():
            _add_into(out, self._ad_e_label(i, lbl), c)
        return out

    def ad_f(self, i: int, v: Vector) -> Vector:
        out: dict = {}
        for lbl, c in v.items():
            _add_into(out, self._ad_f_label(i, lbl), c)
        return out

    def ad_h(self, k: int, v: Vector) -> Vector:
        out = {}
        for lbl, c in v.items():
            w = self.weight(k, self.degree(lbl))
            if w:
                out[lbl] = w * c
        return out

    # general bracket -------------------------------------------------------------

    def bracket_label(self, lbl: Label, v: Vector) -> Vector:
        kind = lbl[0]
        if kind == "h":
            return self.ad_h(lbl[1], v)
        deg = lbl[1]
        if deg.height == 1:
            i = 1 if deg == (1, 0) else 2
            return self.ad_e(i, v) if kind == "e" else self.ad_f(i, v)
        i, idx = self.piece(deg).exprs[lbl[2]]
        lower = Root(deg.k1 - (i == 1), deg.k2 - (i == 2))
        y = (kind, lower, idx)
        if kind == "e":
            # [[e_i, y], v] = [e_i, [y, v]] - [y, [e_i, v]]
            return vec_sub(self.ad_e(i, self.bracket_label(y, v)),
                           self.bracket(({y: 1}), self.ad_e(i, v)))
        # negative vector n = -[f_i, n_y]
        return vec_sub(self.bracket({y: 1}, self.ad_f(i, v)),
                       self.ad_f(i, self.bracket_label(y, v)))

    def bracket(self, x: Vector, y: Vector) -> Vector:
        out: dict = {}
        for lbl, c in x.items():
            _add_into(out, self.bracket_label(lbl, y), c)
        return out

    def serre_element(self, i: int, j: int) -> Vector:
        """(ad e_i)^{1 - a_ij} (e_j)."""
        v = e(j)
        for _ in range(1 - self.gcm.entry(i, j)):
            v = self.ad_e(i, v)
        return v


def build_truncated_algebra(gcm: GCM, H: int) -> TruncatedKMAlgebra:
    need = minimal_height(gcm)
    if H < need:
        raise HeightTooSmall(f"H={H} is below the certified minimum {need} for {gcm}")
    return TruncatedKMAlgebra(gcm, H)


def minimal_height(gcm: GCM) -> int:
    return 2 * (1 + max(abs(gcm.a12), abs(gcm.a21)))


# operators ---------------------------------------------------------------------


@dataclass(frozen=True)
class LieOperator:
    """A linear operator on the truncated algebra, applied lazily.

    Images that cannot be certified inside the window raise TruncationLoss.
    """

    algebra: TruncatedKMAlgebra
    fn: Callable[[Vector], Vector]
    name: str = "op"

    def __call__(self, v: Vector) -> Vector:
        return self.fn(v)

    def __matmul__(self, other: "LieOperator") -> "LieOperator":
        return LieOperator(self.algebra, lambda v: self(other(v)), f"{self.name}*{other.name}")

    def power(self, n: int) -> "LieOperator":
        out = LieOperator(self.algebra, lambda v: v, "id")
        for _ in range(n):
            out = self @ out
        return out

    def matrix(self, labels: Iterable[Label]) -> tuple[dict, list]:
        """Sparse columns for the certified labels, plus the list of lossy ones."""
        cols, lossy = {}, []
        for lbl in labels:
            try:
                cols[lbl] = self({lbl: Fraction(1)})
            except TruncationLoss:
                lossy.append(lbl)
        return cols, lossy


def exp_ad(alg: TruncatedKMAlgebra, x: Vector, v: Vector) -> Vector:
    """exp(ad x)(v) as a finite sum; ad x must be nilpotent on v."""
    out = dict(v)
    term = v
    k = 0
    while term:
        k += 1
        if k > 4 * alg.H + 8:
            raise TruncationLoss("ad x is not nilpotent on this vector inside the window")
        term = vec_scale(Fraction(1, k), alg.bracket(x, term))
        _add_into(out, term)
    return out


def eta(alg: TruncatedKMAlgebra, i: int) -> LieOperator:
    """exp(ad e_i) exp(ad f_i) exp(ad e_i)."""
    ei, fi = e(i), f(i)

    def fn(v):
        return exp_ad(alg, ei, exp_ad(alg, fi, exp_ad(alg, ei, v)))

    return LieOperator(alg, fn, f"eta{i}")


def _sign_on(v: Vector, target: Vector) -> int:
    (lbl, c), = target.items()
    if set(v) != {lbl} or abs(v[lbl]) != abs(c):
        raise AssertionError(f"expected +-{target}, got {v}")
    return 1 if v[lbl] == c else -1


@dataclass(frozen=True)
class SignCertificate:
    gcm: GCM
    H: int
    eps: tuple[int, int]
    on_e: tuple[int, int]
    on_f: tuple[int, int]
    string_lengths: tuple[int, int]

    def as_dict(self) -> dict:
        return {
            "gcm": str(self.gcm),
            "H": self.H,
            "eps1": self.eps[0],
            "eps2": self.eps[1],
            "strings": [
                {"i": i, "string": f"alpha_{other(i)} + k alpha_{i}, k <= {n}",
                 "sign_on_e": self.on_e[i - 1], "sign_on_f": self.on_f[i - 1]}
                for i, n in zip((1, 2), self.string_lengths)
            ],
        }


def sign_certificate(gcm: GCM, H: int | None = None) -> SignCertificate:
    alg = build_truncated_algebra(gcm, minimal_height(gcm) if H is None else H)
    on_e, on_f = [], []
    for i in (1, 2):
        j = other(i)
        sq = eta(alg, i).power(2)
        if sq(e(i)) != e(i) or sq(f(i)) != f(i):
            raise AssertionError(f"eta_{i}^2 does not fix e_{i}, f_{i}")
        on_e.append(_sign_on(sq(e(j)), e(j)))
        on_f.append(_sign_on(sq(f(j)), f(j)))
    if on_e != on_f:
        raise AssertionError(f"signs on e and f disagree: {on_e} vs {on_f}")
    return SignCertificate(
        gcm, alg.H, tuple(on_e), tuple(on_e), tuple(on_f),
        (-gcm.a12, -gcm.a21),
    )


def epsilon_pair(gcm: GCM, H: int | None = None) -> tuple[int, int]:
    return sign_certificate(gcm, H).eps


@lru_cache(maxsize=None)
def default_signs(gcm: GCM) -> tuple[int, int]:
    return epsilon_pair(gcm)
