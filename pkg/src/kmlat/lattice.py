"""Covolumes of tree lattices given as finite graphs of groups.

A lattice acting on the tree is described by its vertex groups and, in the
edge-transitive case, by an amalgam ``A *_C B`` with explicit injections.
Its covolume is the sum of ``1/|Gamma_x|`` over vertex orbits.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Sequence

from kmlat.errors import BadDelta, InvalidGroupTable, InvalidInjection
from kmlat.ffield import field_from_q

THRESHOLD_Q = 514


class BelowThresholdWarning(UserWarning):
    """The minimal covolume value is only established for q >= 514."""


# --- finite groups ------------------------------------------------------------


@dataclass(frozen=True)
class FiniteGroupTable:
    """A finite group by its multiplication table on indices 0..n-1."""

    table: tuple[tuple[int, ...], ...]
    identity: int = 0
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        n = len(self.table)
        if n == 0 or any(len(row) != n for row in self.table):
            raise InvalidGroupTable("multiplication table must be square and nonempty")
        if any(not 0 <= x < n for row in self.table for x in row):
            raise InvalidGroupTable("table entries out of range")
        e = self.identity
        if any(self.table[e][x] != x or self.table[x][e] != x for x in range(n)):
            raise InvalidGroupTable(f"element {e} is not an identity")
        for row in self.table:
            if len(set(row)) != n:
                raise InvalidGroupTable("rows must be permutations (no inverses)")
        for x in range(n):
            for y in range(n):
                xy = self.table[x][y]
                for z in range(n):
                    if self.table[xy][z] != self.table[x][self.table[y][z]]:
                        raise InvalidGroupTable(f"not associative at ({x},{y},{z})")
        if self.labels is not None and len(self.labels) != n:
            raise InvalidGroupTable("one label per element is required")

    @property
    def order(self) -> int:
        return len(self.table)

    def mul(self, x: int, y: int) -> int:
        return self.table[x][y]

    def element_order(self, x: int) -> int:
        k, y = 1, x
        while y != self.identity:
            y = self.table[y][x]
            k += 1
        return k

    def element_orders(self) -> list[int]:
        return [self.element_order(x) for x in range(self.order)]

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels else str(x)

    # constructors --------------------------------------------------------

    @classmethod
    def from_generators(cls, gens: Sequence[Hashable], mul: Callable, identity: Hashable) -> "FiniteGroupTable":
        """Close ``gens`` under ``mul`` and tabulate."""
        elems = [identity]
        index = {identity: 0}
        frontier = [identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = mul(x, g)
                    if y not in index:
                        index[y] = len(elems)
                        elems.append(y)
                        nxt.append(y)
            frontier = nxt
        table = tuple(tuple(index[mul(x, y)] for y in elems) for x in elems)
        return cls(table, 0)

    @classmethod
    def from_permutations(cls, gens: Sequence[Sequence[int]]) -> "FiniteGroupTable":
        gens = [tuple(g) for g in gens]
        n = len(gens[0]) if gens else 1
        ident = tuple(range(n))
        return cls.from_generators(gens, lambda a, b: tuple(a[i] for i in b), ident)

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroupTable":
        return cls(tuple(tuple((x + y) % n for y in range(n)) for x in range(n)), 0)

    @classmethod
    def trivial(cls) -> "FiniteGroupTable":
        return cls.cyclic(1)

    def direct_product(self, other: "FiniteGroupTable") -> "FiniteGroupTable":
        m = other.order
        n = self.order * m
        idx = lambda a, b: a * m + b
        table = tuple(
            tuple(idx(self.table[x // m][y // m], other.table[x % m][y % m]) for y in range(n))
            for x in range(n)
        )
        return FiniteGroupTable(table, idx(self.identity, other.identity))


def symmetric_group(n: int) -> FiniteGroupTable:
    if n <= 1:
        return FiniteGroupTable.trivial()
    swap = (1, 0) + tuple(range(2, n))
    cycle = tuple(range(1, n)) + (0,)
    return FiniteGroupTable.from_permutations([swap, cycle])


def has_p_torsion(g: FiniteGroupTable, p: int) -> tuple[bool, int | None]:
    """Whether some element has order divisible by p, with such an element."""
    for x in range(g.order):
        if g.element_order(x) % p == 0:
            return True, x
    return False, None


# --- lattices -------------------------------------------------------------------


@dataclass(frozen=True)
class GraphOfGroupsLattice:
    """Edge-transitive data ``A *_C B``, or explicit vertex orbits.

    ``orbit_orders`` lists |Gamma_x| per vertex orbit for general quotients;
    when empty the two vertex groups A and B are the orbits.
    """

    A: FiniteGroupTable | None = None
    B: FiniteGroupTable | None = None
    C: FiniteGroupTable | None = None
    into_A: tuple[int, ...] = ()
    into_B: tuple[int, ...] = ()
    orbit_orders: tuple[int, ...] = ()

    def __post_init__(self):
        if self.orbit_orders:
            if any(n < 1 for n in self.orbit_orders):
                raise InvalidInjection("stabilizer orders must be positive")
            return
        if self.A is None or self.B is None or self.C is None:
            raise InvalidInjection("edge-transitive data needs A, B and C")
        for name, target, inj in (("A", self.A, self.into_A), ("B", self.B, self.into_B)):
            check_injection(self.C, target, inj, name)

    @classmethod
    def edge_transitive(cls, A, B, C=None, into_A=None, into_B=None) -> "GraphOfGroupsLattice":
        C = C or FiniteGroupTable.trivial()
        into_A = tuple(into_A) if into_A is not None else (A.identity,) * (C.order == 1)
        into_B = tuple(into_B) if into_B is not None else (B.identity,) * (C.order == 1)
        return cls(A, B, C, into_A, into_B)

    @classmethod
    def from_orders(cls, a: int, b: int) -> "GraphOfGroupsLattice":
        """Cyclic vertex groups of the given orders with trivial edge group."""
        return cls.edge_transitive(FiniteGroupTable.cyclic(a), FiniteGroupTable.cyclic(b))

    @classmethod
    def from_orbits(cls, orders: Sequence[int]) -> "GraphOfGroupsLattice":
        return cls(orbit_orders=tuple(orders))

    def vertex_orders(self) -> list[int]:
        if self.orbit_orders:
            return list(self.orbit_orders)
        return [self.A.order, self.B.order]


def check_injection(C: FiniteGroupTable, G: FiniteGroupTable, inj: Sequence[int], name: str = "G") -> None:
    if len(inj) != C.order:
        raise InvalidInjection(f"map C -> {name} needs {C.order} images, got {len(inj)}")
    if any(not 0 <= x < G.order for x in inj):
        raise InvalidInjection(f"map C -> {name} has images out of range")
    if len(set(inj)) != len(inj):
        raise InvalidInjection(f"map C -> {name} is not injective")
    for x in range(C.order):
        for y in range(C.order):
            if inj[C.mul(x, y)] != G.mul(inj[x], inj[y]):
                raise InvalidInjection(f"map C -> {name} is not a homomorphism at ({x},{y})")


@dataclass
class CovolumeReport:
    covolume: Fraction
    contributions: list[Fraction]
    flags: dict[str, bool] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "covolume": str(self.covolume),
            "contributions": [str(c) for c in self.contributions],
            "flags": dict(self.flags),
        }


def covolume(lat: GraphOfGroupsLattice) -> Fraction:
    return sum((Fraction(1, n) for n in lat.vertex_orders()), Fraction(0))


def covolume_report(lat: GraphOfGroupsLattice, q: int | None = None, p: int | None = None) -> CovolumeReport:
    contributions = [Fraction(1, n) for n in lat.vertex_orders()]
    flags = admissibility(lat, q, p) if q is not None and p is not None and not lat.orbit_orders else {}
    return CovolumeReport(sum(contributions, Fraction(0)), contributions, flags)


def admissibility(lat: GraphOfGroupsLattice, q: int, p: int) -> dict[str, bool]:
    """Pass/fail per condition for an edge-transitive lattice on the (q+1)-regular tree."""
    c = lat.C.order
    return {
        "index_A_is_q_plus_1": lat.A.order == (q + 1) * c,
        "index_B_is_q_plus_1": lat.B.order == (q + 1) * c,
        "A_has_no_p_torsion": not has_p_torsion(lat.A, p)[0],
        "B_has_no_p_torsion": not has_p_torsion(lat.B, p)[0],
    }


def is_admissible(lat: GraphOfGroupsLattice, q: int, p: int) -> bool:
    return all(admissibility(lat, q, p).values())


# --- the minimal covolume -------------------------------------------------------


def _check_prime_power(q: int) -> int:
    return field_from_q(q).p


def min_covol_value(q: int, center_order: int, delta: int) -> Fraction:
    """2 / ((q+1) |Z| delta), warning when q is below the proven range."""
    if delta not in (1, 2, 4):
        raise BadDelta(f"delta must be 1, 2 or 4, got {delta}")
    _check_prime_power(q)
    if center_order < 1:
        raise ValueError("center order must be positive")
    if q < THRESHOLD_Q:
        warnings.warn(
            f"q={q} < {THRESHOLD_Q}: the minimal covolume value is not established here",
            BelowThresholdWarning,
            stacklevel=2,
        )
    return Fraction(2, (q + 1) * center_order * delta)


def prime_powers(lo: int, hi: int) -> list[int]:
    out = []
    for q in range(max(lo, 2), hi + 1):
        m = q
        p = next(d for d in range(2, q + 1) if q % d == 0)
        while m % p == 0:
            m //= p
        if m == 1:
            out.append(q)
    return out


# --- cross-check against the tree ---------------------------------------------


@dataclass
class CrossCheckReport:
    table_side: Fraction
    census_side: Fraction
    per_vertex: list[dict]
    agree: bool
    discrepancy: str | None = None

    def as_dict(self) -> dict:
        return {
            "table_side": str(self.table_side),
            "census_side": str(self.census_side),
            "per_vertex": self.per_vertex,
            "agree": self.agree,
            "discrepancy": self.discrepancy,
        }


def cross_check_covolume(lat: GraphOfGroupsLattice, engine, gens_A, gens_B, radius: int = 2,
                         max_elements: int = 5000) -> CrossCheckReport:
    """Compare 1/|A| + 1/|B| with the stabilizer census on ball(radius).

    ``gens_A`` (``gens_B``) are group words generating a finite group that
    should realize A (B) as the stabilizer of the type-1 (type-2) base vertex.
    """
    from kmlat.tree import BASE_EDGE, orbit_and_stabilizers, vertex_of

    per_vertex = []
    census = Fraction(0)
    discrepancy = None
    declared = {1: lat.A.order, 2: lat.B.order}
    for end, gens in ((1, gens_A), (2, gens_B)):
        report = orbit_and_stabilizers(engine, gens, radius, max_elements)
        v = vertex_of(BASE_EDGE, end)
        stab = report.vertex_stabilizers[v]
        edge_stab = report.edge_stabilizers[BASE_EDGE]
        census += Fraction(1, stab)
        entry = {
            "vertex_type": end,
            "declared_order": declared[end],
            "census_stabilizer": stab,
            "generated_order": report.group_order,
            "census_edge_stabilizer": edge_stab,
            "declared_edge_order": lat.C.order,
        }
        per_vertex.append(entry)
        if discrepancy is None:
            if stab != declared[end]:
                discrepancy = f"type-{end} vertex: declared |Gamma_x| = {declared[end]}, census {stab}"
            elif report.group_order != stab:
                discrepancy = f"type-{end} generators do not fix the base vertex"
            elif edge_stab != lat.C.order:
                discrepancy = f"type-{end} side: declared |C| = {lat.C.order}, census {edge_stab}"
    table = covolume(lat)
    agree = discrepancy is None and table == census
    return CrossCheckReport(table, census, per_vertex, agree, discrepancy)


# --- lattice files ----------------------------------------------------------------


def _group_from_json(d: dict) -> FiniteGroupTable:
    if "table" in d:
        g = FiniteGroupTable(tuple(tuple(r) for r in d["table"]), d.get("identity", 0))
        if "order" in d and d["order"] != g.order:
            raise InvalidGroupTable(f"declared order {d['order']} != table size {g.order}")
        return g
    if "permutations" in d:
        return FiniteGroupTable.from_permutations(d["permutations"])
    return FiniteGroupTable.cyclic(int(d["order"]))


def lattice_from_json(data: dict | str) -> GraphOfGroupsLattice:
    """Read ``{vertex_groups: [A, B], edge_group: {order, into_A, into_B}}``.

    A group without ``table`` (or ``permutations``) is taken to be cyclic of
    the given order.  ``{"vertex_orbits": [n1, n2, ...]}`` describes a
    general quotient by its stabilizer orders.
    """
    if isinstance(data, str):
        data = json.loads(data)
    if "vertex_orbits" in data:
        return GraphOfGroupsLattice.from_orbits([int(n) for n in data["vertex_orbits"]])
    groups = data.get("vertex_groups", [])
    if len(groups) != 2:
        raise InvalidInjection("edge-transitive data needs exactly two vertex groups")
    A, B = (_group_from_json(g) for g in groups)
    edge = data.get("edge_group", {"order": 1})
    C = _group_from_json(edge)
    into_A = edge.get("into_A", [A.identity] if C.order == 1 else None)
    into_B = edge.get("into_B", [B.identity] if C.order == 1 else None)
    if into_A is None or into_B is None:
        raise InvalidInjection("a nontrivial edge group needs into_A and into_B")
    return GraphOfGroupsLattice(A, B, C, tuple(into_A), tuple(into_B))


def lattice_to_json(lat: GraphOfGroupsLattice) -> dict:
    if lat.orbit_orders:
        return {"vertex_orbits": list(lat.orbit_orders)}
    grp = lambda g: {"order": g.order, "table": [list(r) for r in g.table], "identity": g.identity}
    edge = grp(lat.C)
    edge.update(into_A=list(lat.into_A), into_B=list(lat.into_B))
    return {"vertex_groups": [grp(lat.A), grp(lat.B)], "edge_group": edge}
