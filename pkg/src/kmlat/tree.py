"""Action of the group on its (q+1)-regular building tree.

An edge is named by its gallery from the base edge ``c = B``:
``x_{i1}(t1) n_{i1} ... x_{il}(tl) n_{il} B`` with alternating types.  Group
elements act letter by letter: an element of B is carried down the gallery,
producing the new coordinate at each step and a new element of B for the
rest of the gallery.

The affine matrix oracle at the bottom of the module models the case
A = [[2,-2],[-2,2]] inside SL_2(F_q[z, z^-1]) and is used to cross-check the
engine.
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from kmlat.errors import (
    AtomNotInParabolic,
    DeterminantNotOne,
    ExplorationTruncated,
    NormalizationBudgetExceeded,
    ParseError,
)
from kmlat.ffield import (
    Fq,
    TorusElement,
    char_eval,
    coroot_element,
    torus_mul,
    torus_reflect,
)
from kmlat.laurent import LaurentMatrix, constant_term, poly
from kmlat.roots import (
    GCM,
    Root,
    RootDatum,
    chevalley_sign,
    classify_root,
    decompose,
    other,
    reflect,
    simple_root,
)
from kmlat.unipotent import IDENTITY, BElement, UnipotentGroup, UWord

DEFAULT_BUDGET = 200_000

# --- edges and vertices ---------------------------------------------------


@dataclass(frozen=True, order=True)
class Edge:
    gallery: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        types = [i for i, _ in self.gallery]
        if any(i not in (1, 2) for i in types):
            raise ValueError(f"gallery types must be 1 or 2: {self.gallery}")
        if any(a == b for a, b in zip(types, types[1:])):
            raise ValueError(f"gallery types must alternate: {self.gallery}")

    def __len__(self):
        return len(self.gallery)

    def __str__(self):
        return format_edge(self)


BASE_EDGE = Edge(())


def format_edge(e: Edge) -> str:
    return ",".join(f"{i}:{t}" for i, t in e.gallery)


def parse_edge(text: str, F: Fq | None = None) -> Edge:
    text = text.strip()
    if not text or text in ("c", "base"):
        return BASE_EDGE
    out = []
    for tok in text.split(","):
        m = re.fullmatch(r"\s*([12])\s*:\s*(\d+)\s*", tok)
        if not m:
            raise ParseError(f"cannot parse edge token {tok!r}")
        t = int(m.group(2))
        if F is not None and t >= F.q:
            raise ParseError(f"coordinate {t} is not an element of {F}")
        out.append((int(m.group(1)), t))
    try:
        return Edge(tuple(out))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


@dataclass(frozen=True, order=True)
class Vertex:
    """Vertex of type ``end`` on ``edge``; ``edge`` is the incident edge nearest c."""

    edge: Edge
    end: int

    def __str__(self):
        return f"{self.end}@[{format_edge(self.edge)}]"


def vertex_of(e: Edge, end: int) -> Vertex:
    if e.gallery and e.gallery[-1][0] == end:
        return Vertex(Edge(e.gallery[:-1]), end)
    return Vertex(e, end)


def ball(q: int, radius: int) -> list[Edge]:
    """All edges at gallery distance <= radius from the base edge."""
    out = [BASE_EDGE]
    for length in range(1, radius + 1):
        for first in (1, 2):
            types = [first if k % 2 == 0 else other(first) for k in range(length)]
            for ts in itertools.product(range(q), repeat=length):
                out.append(Edge(tuple(zip(types, ts))))
    return out


def ball_size(q: int, radius: int) -> int:
    return 1 + sum(2 * q ** k for k in range(1, radius + 1))


# --- group words ---------------------------------------------------------


@dataclass(frozen=True)
class XAtom:
    root: Root
    c: int

    def __str__(self):
        return f"x({self.root.k1},{self.root.k2};{self.c})"


@dataclass(frozen=True)
class NAtom:
    i: int

    def __str__(self):
        return f"n({self.i})"


@dataclass(frozen=True)
class HAtom:
    h: TorusElement

    def __str__(self):
        return str(self.h)


Atom = Union[XAtom, NAtom, HAtom]
GroupWord = tuple  # tuple of atoms, read left to right as a product

_ATOM = re.compile(
    r"x\(\s*(-?\d+)\s*,\s*(-?\d+)\s*;\s*(\d+)\s*\)"
    r"|n\(\s*([12])\s*\)"
    r"|h\(\s*(\d+(?:\s*,\s*\d+)*)\s*\)"
)


def parse_word(text: str, datum: RootDatum, F: Fq) -> tuple[Atom, ...]:
    text = text.strip()
    if text in ("", "1"):
        return ()
    atoms: list[Atom] = []
    pos = 0
    for m in _ATOM.finditer(text):
        if text[pos:m.start()].strip():
            raise ParseError(f"unexpected {text[pos:m.start()]!r} in word")
        pos = m.end()
        if m.group(1) is not None:
            r = Root(int(m.group(1)), int(m.group(2)))
            c = int(m.group(3))
            if c >= F.q:
                raise ParseError(f"coefficient {c} is not an element of {F}")
            if r == (0, 0) or not classify_root(datum.gcm, r).is_real:
                raise ParseError(f"{r} is not a real root")
            atoms.append(XAtom(r, c))
        elif m.group(4) is not None:
            atoms.append(NAtom(int(m.group(4))))
        else:
            coords = tuple(int(x) for x in m.group(5).split(","))
            if len(coords) != datum.rank_y or any(c == 0 or c >= F.q for c in coords):
                raise ParseError(f"torus element needs {datum.rank_y} nonzero field coordinates")
            atoms.append(HAtom(TorusElement(coords)))
    if text[pos:].strip():
        raise ParseError(f"unexpected {text[pos:]!r} in word")
    return tuple(atoms)


def format_word(word: Sequence[Atom]) -> str:
    return " ".join(str(a) for a in word) or "1"


# --- the engine ------------------------------------------------------------


@dataclass
class Budget:
    limit: int = DEFAULT_BUDGET
    used: int = 0

    def spend(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise NormalizationBudgetExceeded(
                f"rewrite budget of {self.limit} steps exhausted"
            )


INF = None  # the point at infinity of a star (the base edge)


class TreeEngine:
    """Exact action of the group of ``datum`` over ``F`` on edges of the tree."""

    def __init__(self, datum: RootDatum, F: Fq, signs: tuple[int, int]):
        self.datum = datum
        self.gcm = datum.gcm
        self.F = F
        self.signs = signs
        self.U = UnipotentGroup(datum, F, signs)
        self.one = TorusElement.identity(datum.rank_y)

    # atoms ---------------------------------------------------------------

    def h_i(self, i: int, t: int) -> TorusElement:
        return coroot_element(self.F, self.datum, i, t)

    def expand_atom(self, atom: Atom) -> list[Atom]:
        """Rewrite negative root atoms through n_i conjugation."""
        if not isinstance(atom, XAtom) or classify_root(self.gcm, atom.root).positive:
            return [atom]
        alpha = atom.root
        s = classify_root(self.gcm, alpha).side
        beta = reflect(self.gcm, s, alpha)
        sign = chevalley_sign(self.gcm, self.signs, s, beta)
        c = atom.c if sign == 1 else self.F.neg(atom.c)
        # x_alpha(c) = n_s x_beta(sign c) n_s^-1 and n_s^-1 = n_s h_s(-1)
        return (
            [NAtom(s)]
            + self.expand_atom(XAtom(beta, c))
            + [NAtom(s), HAtom(self.h_i(s, self.F.neg(1)))]
        )

    def expand_word(self, word: Iterable[Atom]) -> list[Atom]:
        out: list[Atom] = []
        for a in word:
            out.extend(self.expand_atom(a))
        return out

    # carrying B through a gallery ------------------------------------------

    def carry(self, b: BElement, step: tuple[int, int], budget: Budget | None = None) -> tuple[tuple[int, int], BElement]:
        """Rewrite ``b x_i(t) n_i`` as ``x_i(t') n_i b'`` with b' in B."""
        F, U = self.F, self.U
        i, t = step
        if budget is not None:
            budget.spend(1 + len(b.u))
        a = simple_root(i)
        t1 = F.mul(char_eval(F, self.datum, i, b.h), t)
        v = U.mul(b.u, U.x(a, t1))
        t_new = U.retraction(i, v)
        v0 = U.mul(U.x(a, F.neg(t_new)), v)
        u_new = U.conj_by_n_inverse_kernel(i, v0)
        h_new = torus_reflect(F, self.datum, i, b.h)
        return (i, t_new), BElement(u_new, h_new)

    def carry_through(self, b: BElement, gallery: Sequence[tuple[int, int]], budget: Budget | None = None) -> tuple[tuple[int, int], ...]:
        out = []
        for step in gallery:
            step, b = self.carry(b, step, budget)
            out.append(step)
        return tuple(out)

    # acting -----------------------------------------------------------------

    def act_atom(self, atom: Atom, e: Edge, budget: Budget | None = None) -> Edge:
        if isinstance(atom, XAtom):
            if not classify_root(self.gcm, atom.root).positive:
                return self.act(self.expand_atom(atom), e, budget)
            b = BElement(self.U.x(atom.root, atom.c), self.one)
            return Edge(self.carry_through(b, e.gallery, budget))
        if isinstance(atom, HAtom):
            return Edge(self.carry_through(BElement(IDENTITY, atom.h), e.gallery, budget))
        j = atom.i
        g = e.gallery
        if budget is not None:
            budget.spend()
        if not g or g[0][0] != j:
            return Edge(((j, 0),) + g)
        t = g[0][1]
        if t == 0:
            # n_j n_j = h_j(-1)
            b = BElement(IDENTITY, self.h_i(j, self.F.neg(1)))
            return Edge(self.carry_through(b, g[1:], budget))
        # n_j x_j(t) n_j = x_j(-1/t) n_j x_j(-t) h_j(-t)
        F = self.F
        u = self.U.x(simple_root(j), F.neg(t))
        b = BElement(u, self.h_i(j, F.neg(t)))
        head = (j, F.neg(F.inv(t)))
        return Edge((head,) + self.carry_through(b, g[1:], budget))

    def act(self, word: Sequence[Atom], e: Edge, budget: Budget | None = None) -> Edge:
        """Image of ``e`` under the product of ``word`` (rightmost atom first)."""
        for atom in reversed(tuple(word)):
            e = self.act_atom(atom, e, budget)
        return e

    def act_vertex(self, word: Sequence[Atom], v: Vertex, budget: Budget | None = None) -> Vertex:
        return vertex_of(self.act(word, v.edge, budget), v.end)

    # the star of a base vertex -------------------------------------------------

    def local_action(self, atom: Atom, i: int, c: int | None) -> int | None:
        """Permutation of the star of the type-i base vertex.

        ``None`` is the base edge; ``c`` stands for the edge ``x_i(c) n_i B``.
        """
        F = self.F
        if isinstance(atom, NAtom):
            if atom.i != i:
                raise AtomNotInParabolic(f"n({atom.i}) does not fix the type-{i} base vertex")
            if c is INF:
                return 0
            if c == 0:
                return INF
            return F.neg(F.inv(c))
        if isinstance(atom, HAtom):
            return INF if c is INF else F.mul(char_eval(F, self.datum, i, atom.h), c)
        cls = classify_root(self.gcm, atom.root)
        if not cls.positive:
            raise AtomNotInParabolic(f"x_{atom.root} with a negative root is not in B")
        if c is INF:
            return INF
        if atom.root == simple_root(i):
            return F.add(c, atom.c)
        return c


# --- orbits and stabilizers on a ball ------------------------------------------


@dataclass
class OrbitReport:
    radius: int
    group_order: int
    edge_orbits: list[list[Edge]]
    vertex_orbits: list[list[Vertex]]
    vertex_stabilizers: dict[Vertex, int]
    edge_stabilizers: dict[Edge, int]
    scope: str = ""

    def stabilizer_order(self, v: Vertex) -> int:
        return self.vertex_stabilizers[v]


def _orbits(items: Sequence, images_per_element: Iterable[dict]) -> list[list]:
    parent = {x: x for x in items}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for images in images_per_element:
        for x, y in images.items():
            if y in parent:
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[max(rx, ry)] = min(rx, ry)
    groups: dict = {}
    for x in items:
        groups.setdefault(find(x), []).append(x)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def orbit_and_stabilizers(
    engine: TreeEngine,
    gens: Sequence[Sequence[Atom]],
    radius: int,
    max_elements: int = 5000,
    budget: int = DEFAULT_BUDGET,
) -> OrbitReport:
    """Orbits and stabilizer orders for the group generated by ``gens`` on ball(radius).

    Group elements are identified by their action on the ball, so all counts
    are exact for the permutation group induced there.
    """
    edges = ball(engine.F.q, radius)
    identity = tuple(edges)
    seen = {identity}
    queue = deque([identity])
    spent = Budget(budget * max(1, len(edges)))
    gens = [tuple(g) for g in gens]
    while queue:
        images = queue.popleft()
        for g in gens:
            new = tuple(engine.act(g, e, spent) for e in images)
            if new not in seen:
                if len(seen) >= max_elements:
                    raise ExplorationTruncated(
                        f"more than {max_elements} group elements on ball({radius})"
                    )
                seen.add(new)
                queue.append(new)
    elements = [dict(zip(edges, imgs)) for imgs in seen]
    vertices = sorted({vertex_of(e, j) for e in edges for j in (1, 2)})
    vimages = [
        {v: vertex_of(el[v.edge], v.end) for v in vertices}
        for el in elements
    ]
    vstab = {v: sum(1 for vi in vimages if vi[v] == v) for v in vertices}
    estab = {e: sum(1 for el in elements if el[e] == e) for e in edges}
    return OrbitReport(
        radius=radius,
        group_order=len(elements),
        edge_orbits=_orbits(edges, elements),
        vertex_orbits=_orbits(vertices, vimages),
        vertex_stabilizers=vstab,
        edge_stabilizers=estab,
        scope=f"exact within ball({radius}), {len(elements)} elements enumerated",
    )


# --- affine matrix oracle -----------------------------------------------------

AFFINE = GCM(-2, -2)


class AffineOracle:
    """SL_2(F_q[z, z^-1]) model of the affine group A = [[2,-2],[-2,2]]."""

    def __init__(self, F: Fq):
        self.F = F
        self.datum = RootDatum.simply_connected(AFFINE)
        self._n = {1: self.x_simple(1, 1) @ self.x_neg_simple(1, 1) @ self.x_simple(1, 1),
                   2: self.x_simple(2, 1) @ self.x_neg_simple(2, 1) @ self.x_simple(2, 1)}

    def m(self, a, b, c, d) -> LaurentMatrix:
        return LaurentMatrix.from_entries(self.F, a, b, c, d)

    def x_simple(self, i: int, t: int) -> LaurentMatrix:
        if i == 1:
            return self.m(1, t, 0, 1)
        return self.m(1, 0, {1: t}, 1)

    def x_neg_simple(self, i: int, t: int) -> LaurentMatrix:
        nt = self.F.neg(t)
        if i == 1:
            return self.m(1, 0, nt, 1)
        return self.m(1, {-1: nt}, 0, 1)

    def n(self, i: int) -> LaurentMatrix:
        return self._n[i]

    def n_inv(self, i: int) -> LaurentMatrix:
        return self._n[i].inverse()

    def torus(self, h: TorusElement) -> LaurentMatrix:
        s, t = h.coords
        d = self.F.div(s, t)
        return self.m(d, 0, 0, self.F.inv(d))

    def x_root(self, r: Root, t: int) -> LaurentMatrix:
        """x_r(t) = n_w x_{alpha_j}(t) n_w^-1 for r = w(alpha_j)."""
        w, j = decompose(AFFINE, Root(*r))
        nw = LaurentMatrix.identity(self.F)
        for i in w.letters:
            nw = nw @ self.n(i)
        return nw @ self.x_simple(j, t) @ nw.inverse()

    def embed(self, atom: Atom) -> LaurentMatrix:
        if isinstance(atom, XAtom):
            return self.x_root(atom.root, atom.c)
        if isinstance(atom, NAtom):
            return self.n(atom.i)
        return self.torus(atom.h)

    def embed_b(self, b: BElement) -> LaurentMatrix:
        out = LaurentMatrix.identity(self.F)
        for syl in b.u.syllables:
            for r, c in syl.coords:
                out = out @ self.x_root(r, c)
        return out @ self.torus(b.h)

    def embed_word(self, word: Sequence[Atom]) -> LaurentMatrix:
        out = LaurentMatrix.identity(self.F)
        for a in word:
            out = out @ self.embed(a)
        return out

    def step_matrix(self, i: int, t: int) -> LaurentMatrix:
        return self.x_simple(i, t) @ self.n(i)

    def edge_matrix(self, e: Edge) -> LaurentMatrix:
        out = LaurentMatrix.identity(self.F)
        for i, t in e.gallery:
            out = out @ self.step_matrix(i, t)
        return out

    # distances between lattice classes, L1 = O^2 and L2 = O + zO
    @staticmethod
    def _dist(basis: LaurentMatrix, det_val: int) -> int:
        return det_val - 2 * int(basis.min_valuation())

    def _vertex_distances(self, M: LaurentMatrix) -> dict[tuple[int, int], int]:
        """d(L_a, M L_b) for a, b in {1, 2}."""
        MD = M.times_diag_z()
        return {
            (1, 1): self._dist(M, 0),
            (1, 2): self._dist(MD, 1),
            (2, 1): self._dist(M.left_diag_z_inv(), -1),
            (2, 2): self._dist(M.conj_diag_z(), 0),
        }

    def gallery_defect(self, M: LaurentMatrix) -> int:
        d = self._vertex_distances(M)
        return d[(1, 1)] + d[(2, 2)]

    def _direction(self, basis: LaurentMatrix) -> tuple[int, int]:
        """Line spanned by the reduction mod z of a rescaled lattice basis."""
        shift = -int(basis.min_valuation())
        cols = [
            (constant_term(basis.a, -shift), constant_term(basis.c, -shift)),
            (constant_term(basis.b, -shift), constant_term(basis.d, -shift)),
        ]
        for col in cols:
            if col != (0, 0):
                return col
        raise AssertionError("degenerate lattice basis")  # pragma: no cover

    def oracle_edge(self, M: LaurentMatrix) -> Edge:
        """Gallery word of the edge M B, by walking back towards c."""
        F = self.F
        if M.det() != poly(F, {0: 1}):
            raise DeterminantNotOne(f"det {M.det()} != 1")
        out = []
        defect = self.gallery_defect(M)
        while defect > 0:
            d = self._vertex_distances(M)
            near1 = min(d[(1, 1)], d[(1, 2)])
            near2 = min(d[(2, 1)], d[(2, 2)])
            assert abs(near1 - near2) == 1, (near1, near2)
            if near1 < near2:
                i = 1
                far = M if d[(1, 1)] >= d[(1, 2)] else M.times_diag_z()
                x, y = self._direction(far)
                assert y != 0
                t = F.div(x, y)
            else:
                i = 2
                far = M.left_diag_z_inv() if d[(2, 1)] >= d[(2, 2)] else M.conj_diag_z()
                x, y = self._direction(far)
                assert x != 0
                t = F.div(y, x)
            out.append((i, t))
            M = self.step_matrix(i, t).inverse() @ M
            new_defect = self.gallery_defect(M)
            assert new_defect == defect - 2, (defect, new_defect)
            defect = new_defect
        assert M.in_iwahori(), str(M)
        return Edge(tuple(out))

    def act(self, word: Sequence[Atom], e: Edge) -> Edge:
        return self.oracle_edge(self.embed_word(word) @ self.edge_matrix(e))
