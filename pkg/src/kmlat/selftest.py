"""A quick differential self-check shipped with the command line tool.

Each check returns ``(name, passed, detail)``; the checks are small versions
of the package's acceptance tests.
"""
from __future__ import annotations

import random
import warnings
from fractions import Fraction

from kmlat.ffield import TorusElement, center_order_bruteforce, center_order_smith, fq_make
from kmlat.lattice import GraphOfGroupsLattice, covolume, min_covol_value
from kmlat.lie import epsilon_pair
from kmlat.roots import GCM, Root, RootDatum, positive_roots
from kmlat.tree import AffineOracle, HAtom, NAtom, TreeEngine, XAtom, ball


def _atoms(F):
    out = [NAtom(1), NAtom(2)]
    out += [HAtom(TorusElement((s, t))) for s in F.units() for t in F.units()]
    for r in ((1, 0), (0, 1), (2, 1), (1, 2)):
        for sgn in (1, -1):
            out += [XAtom(Root(sgn * r[0], sgn * r[1]), c) for c in F.elements()]
    return out


def check_differential(qs=(2, 3), radius=2):
    mismatches = 0
    total = 0
    for q in qs:
        F = fq_make(q)
        oracle = AffineOracle(F)
        engine = TreeEngine(oracle.datum, F, (1, 1))
        for e in ball(q, radius):
            for a in _atoms(F):
                total += 1
                if engine.act([a], e) != oracle.act([a], e):
                    mismatches += 1
    return "engine vs Laurent oracle", mismatches == 0, f"{total} cases, {mismatches} mismatches"


def check_action_axiom(q=3, trials=100, seed=0):
    rng = random.Random(seed)
    F = fq_make(q)
    oracle = AffineOracle(F)
    engine = TreeEngine(oracle.datum, F, (1, 1))
    atoms = _atoms(F)
    edges = ball(q, 2)
    bad = 0
    for _ in range(trials):
        g1 = [rng.choice(atoms) for _ in range(rng.randint(1, 4))]
        g2 = [rng.choice(atoms) for _ in range(rng.randint(1, 4))]
        e = rng.choice(edges)
        if engine.act(g1, engine.act(g2, e)) != engine.act(g1 + g2, e):
            bad += 1
    return "action axiom", bad == 0, f"{trials} random products, {bad} failures"


def check_roots():
    got = positive_roots(GCM.symmetric(3), 1, 4)
    ok = got == [Root(1, 0), Root(3, 1), Root(8, 3), Root(21, 8)]
    return "root enumeration", ok, ",".join(map(str, got))


def check_signs():
    got = (epsilon_pair(GCM.symmetric(2)), epsilon_pair(GCM.symmetric(3)))
    return "epsilon signs", got == ((1, 1), (-1, -1)), str(got)


def check_covolume():
    got = covolume(GraphOfGroupsLattice.from_orders(6, 4))
    return "covolume 1/6 + 1/4", got == Fraction(5, 12), str(got)


def check_min_covolume():
    F = fq_make(521)
    datum = RootDatum.simply_connected(GCM.symmetric(2))
    z1 = center_order_bruteforce(F, datum)
    z2 = center_order_smith(datum, 521)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        value = min_covol_value(521, z1, 1)
    ok = z1 == z2 == 1040 and value == Fraction(1, 271440)
    return "minimal covolume at q=521", ok, f"|Z|={z1}/{z2}, value={value}"


CHECKS = (
    check_roots,
    check_signs,
    check_differential,
    check_action_axiom,
    check_covolume,
    check_min_covolume,
)


def run_all():
    return [check() for check in CHECKS]
