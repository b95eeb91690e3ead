"""Command line interface: ``kmlat <subcommand> ...``.

Exit codes: 0 on success, 1 on domain errors (reported as one JSON object on
stderr), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings

from kmlat.errors import FieldTooLarge, KmlatError
from kmlat.ffield import MAX_Q, center_order_bruteforce, center_order_smith, field_from_q, parse_field
from kmlat.lattice import (
    BelowThresholdWarning,
    GraphOfGroupsLattice,
    admissibility,
    covolume_report,
    lattice_from_json,
    min_covol_value,
    prime_powers,
)
from kmlat.lie import default_signs, sign_certificate
from kmlat.roots import GCM, Root, RootDatum, classify_root, decompose, positive_roots
from kmlat.tree import (
    Budget,
    TreeEngine,
    format_edge,
    orbit_and_stabilizers,
    parse_edge,
    parse_word,
)
from kmlat.unipotent import UnipotentGroup

DEFAULT_GCM = "2,-2;-2,2"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- shared argument handling ------------------------------------------------


def _field(args):
    if args.field is not None:
        F = parse_field(args.field)
    elif args.q is not None:
        F = field_from_q(args.q)
    else:
        raise UsageError("one of --q or --field is required")
    if F.q > MAX_Q:
        raise FieldTooLarge(f"q={F.q} exceeds the bound {MAX_Q}")
    return F


def _datum(args):
    return RootDatum.simply_connected(GCM.parse(args.gcm))


def _signs(gcm):
    return default_signs(gcm)


def _add_field_args(p):
    p.add_argument("--q", type=int, help="field size (a prime power)")
    p.add_argument("--field", help="field as p^a or p^a/c0,...,ca (monic modulus)")


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


# --- subcommands -------------------------------------------------------------


def cmd_roots(args):
    gcm = GCM.parse(args.gcm)
    roots = positive_roots(gcm, args.side, args.count)
    payload = {"gcm": str(gcm), "side": args.side, "roots": [list(r) for r in roots]}
    text = ",".join(str(r) for r in roots)
    if args.classify:
        r = Root.parse(args.classify)
        cls = classify_root(gcm, r)
        dec = decompose(gcm, r)
        payload["classify"] = {
            "root": list(r),
            "class": cls.name,
            "word": str(dec[0]) if dec else None,
            "simple": dec[1] if dec else None,
        }
        text += f"\n{r}: {cls.name}" + (f" = {dec[0]}(alpha_{dec[1]})" if dec else "")
    _emit(args, payload, text)


def cmd_signs(args):
    cert = sign_certificate(GCM.parse(args.gcm), args.height)
    payload = cert.as_dict()
    if args.format == "text":
        lines = [f"eps1 = {cert.eps[0]:+d}", f"eps2 = {cert.eps[1]:+d}"]
        lines += [
            f"  eta_{s['i']}^2 on the string {s['string']}: e {s['sign_on_e']:+d}, f {s['sign_on_f']:+d}"
            for s in payload["strings"]
        ]
        print("\n".join(lines))
    else:
        print(json.dumps(payload, sort_keys=True))


def cmd_center(args):
    F = _field(args)
    datum = _datum(args)
    smith = center_order_smith(datum, F.q)
    payload = {"gcm": args.gcm, "q": F.q, "smith": smith}
    if (F.q - 1) ** datum.rank_y <= args.brute_force_limit:
        brute = center_order_bruteforce(F, datum)
        payload["brute_force"] = brute
        payload["agree"] = brute == smith
        text = f"|Z| = {smith} (Smith form), {brute} (brute force)"
    else:
        text = f"|Z| = {smith} (Smith form)"
    _emit(args, payload, text)
    return 0 if payload.get("agree", True) else 1


def cmd_normalform(args):
    F = _field(args)
    datum = _datum(args)
    U = UnipotentGroup(datum, F, _signs(datum.gcm))
    x = U.parse(args.word)
    info = U.torsion_class(x)
    payload = {
        "normal_form": str(x),
        "syllables": len(x),
        "torsion": info.kind.value,
        "order": info.order,
        "conjugator": str(info.conjugator),
        "core": str(info.core),
    }
    order = "infinite" if info.order is None else str(info.order)
    _emit(args, payload, f"{x}\n{info.kind.value} (order {order})")


def cmd_act(args):
    F = _field(args)
    datum = _datum(args)
    engine = TreeEngine(datum, F, _signs(datum.gcm))
    word = parse_word(args.word, datum, F)
    edge = parse_edge(args.edge, F)
    budget = Budget(args.budget)
    image = engine.act(word, edge, budget)
    payload = {"edge": format_edge(image), "cell_length": len(image), "budget_used": budget.used}
    _emit(args, payload, format_edge(image) or "c")


def cmd_orbit(args):
    F = _field(args)
    datum = _datum(args)
    engine = TreeEngine(datum, F, _signs(datum.gcm))
    gens = [parse_word(g, datum, F) for g in args.gen]
    rep = orbit_and_stabilizers(engine, gens, args.radius, args.max_elements, args.budget)
    orbits = [[format_edge(e) or "c" for e in orb] for orb in rep.edge_orbits]
    stabs = {str(v): n for v, n in sorted(rep.vertex_stabilizers.items())}
    payload = {
        "group_order": rep.group_order,
        "edge_orbits": orbits,
        "vertex_stabilizers": stabs,
        "scope": rep.scope,
    }
    lines = [f"group order {rep.group_order} ({rep.scope})"]
    lines += ["orbit: " + " ".join(o) for o in orbits if len(o) > 1]
    lines += [f"stab {v} = {n}" for v, n in stabs.items() if n > 1]
    _emit(args, payload, "\n".join(lines))


def cmd_covol(args):
    if args.lattice:
        with open(args.lattice) as fh:
            lat = lattice_from_json(json.load(fh))
    elif args.orbits:
        lat = GraphOfGroupsLattice.from_orbits(args.orbits)
    elif args.A is not None and args.B is not None:
        lat = GraphOfGroupsLattice.from_orders(args.A, args.B)
    else:
        raise UsageError("give --lattice FILE, --orbits N..., or both --A and --B")
    report = covolume_report(lat)
    payload = report.as_dict()
    text = str(report.covolume)
    if args.q is not None and not lat.orbit_orders:
        p = field_from_q(args.q).p
        flags = admissibility(lat, args.q, p)
        payload["admissibility"] = flags
        text += "\n" + "\n".join(f"{k}: {'pass' if v else 'FAIL'}" for k, v in flags.items())
    _emit(args, payload, text)


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError:
        raise UsageError(f"range must look like 514..1024, got {text!r}") from None
    return lo, hi


def cmd_mincovol(args):
    datum = _datum(args)
    if args.q_range:
        qs = prime_powers(*_parse_range(args.q_range))
    elif args.q is not None:
        qs = [args.q]
    else:
        raise UsageError("one of --q or --q-range is required")
    deltas = (1, 2, 4) if args.delta == "all" else (int(args.delta),)
    rows = []
    for q in qs:
        if q > MAX_Q:
            raise FieldTooLarge(f"q={q} exceeds the bound {MAX_Q}")
        field_from_q(q)
        z = center_order_smith(datum, q)
        for d in deltas:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                value = min_covol_value(q, z, d)
            below = any(issubclass(w.category, BelowThresholdWarning) for w in caught)
            rows.append({
                "q": q, "center_order": z, "delta": d,
                "value": str(value), "approx": f"{float(value):.6e}",
                "below_threshold": below,
            })
    if any(r["below_threshold"] for r in rows):
        print("warning: values with q < 514 are outside the proven range", file=sys.stderr)
    payload = {
        "gcm": args.gcm,
        "delta_note": "delta in {1,2,4} is undetermined; all listed values are candidates",
        "rows": rows,
    }
    lines = [f"{'q':>6} {'|Z|':>6} {'delta':>5}  {'value':<16} approx"]
    for r in rows:
        mark = " *" if r["below_threshold"] else ""
        lines.append(f"{r['q']:>6} {r['center_order']:>6} {r['delta']:>5}  {r['value']:<16} ~{r['approx']}{mark}")
    _emit(args, payload, "\n".join(lines))


def cmd_selftest(args):
    from kmlat.selftest import run_all

    results = run_all()
    payload = {"checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in results]}
    lines = [f"{'PASS' if ok else 'FAIL'}  {n}: {d}" for n, ok, d in results]
    passed = sum(ok for _, ok, _ in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    _emit(args, payload, "\n".join(lines))
    return 0 if passed == len(results) else 1


# --- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kmlat", description="Exact computations in rank-2 Kac-Moody groups over finite fields.")
    parser.add_argument("--format", choices=("text", "json"), default=None,
                        help="output format (default: text on a terminal, json otherwise)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_text, gcm=True):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
        if gcm:
            p.add_argument("--gcm", default=DEFAULT_GCM, help='generalized Cartan matrix "2,a12;a21,2"')
        return p

    p = add("roots", cmd_roots, "list real roots of Phi_+^i")
    p.add_argument("--side", type=int, choices=(1, 2), default=1)
    p.add_argument("--count", type=int, default=8)
    p.add_argument("--classify", help="also classify a root given as (k1,k2)")

    p = add("signs", cmd_signs, "epsilon signs from the truncated Lie algebra")
    p.add_argument("--height", type=int, default=None, help="truncation height H")

    p = add("center", cmd_center, "order of the center of the simply connected group")
    _add_field_args(p)
    p.add_argument("--brute-force-limit", type=int, default=10 ** 6)

    p = add("normalform", cmd_normalform, "free product normal form and torsion class of a U-word")
    _add_field_args(p)
    p.add_argument("--word", required=True)

    p = add("act", cmd_act, "act on an edge of the tree")
    _add_field_args(p)
    p.add_argument("--word", required=True)
    p.add_argument("--edge", default="")
    p.add_argument("--budget", type=int, default=200_000)

    p = add("orbit", cmd_orbit, "orbits and stabilizers on a ball of the tree")
    _add_field_args(p)
    p.add_argument("--gen", action="append", default=[], help="a generator word (repeatable)")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--max-elements", type=int, default=5000)
    p.add_argument("--budget", type=int, default=200_000)

    p = add("covol", cmd_covol, "covolume of a graph-of-groups lattice", gcm=False)
    p.add_argument("--A", type=int)
    p.add_argument("--B", type=int)
    p.add_argument("--orbits", type=int, nargs="+")
    p.add_argument("--lattice", help="lattice JSON file")
    p.add_argument("--q", type=int, help="also check admissibility on the (q+1)-regular tree")

    p = add("mincovol", cmd_mincovol, "the minimal covolume 2/((q+1)|Z|delta)")
    p.add_argument("--q", type=int)
    p.add_argument("--q-range", help="inclusive range lo..hi of prime powers")
    p.add_argument("--delta", choices=("1", "2", "4", "all"), default="all")

    add("selftest", cmd_selftest, "run the differential self-check", gcm=False)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.format is None:
            args.format = "text" if sys.stdout.isatty() else "json"
        return args.func(args) or 0
    except UsageError as exc:
        _error("usage", str(exc))
        return 2
    except KmlatError as exc:
        _error(exc.code, str(exc))
        return 1
    except ValueError as exc:
        _error("invalid_input", str(exc))
        return 1


def _error(code: str, message: str) -> None:
    print(json.dumps({"error": {"code": code, "message": message}}, sort_keys=True), file=sys.stderr)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
