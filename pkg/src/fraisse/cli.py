"""Command line front end."""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import algebra, classes, limits, ramsey
from .budget import Budget
from .errors import BudgetExceeded, FraisseError
from .structures import (LinearOrder, Structure, load_structure, parse_structure, serialize_structure,
                         serialize_structures)

SCHEMA = 1
EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

GLOBAL_DEFAULTS = {"threads": 1, "seed": 0, "budget_nodes": None, "budget_secs": None,
                   "out": None, "format": "text"}


class UsageError(Exception):
    pass


# --- JSON plumbing --------------------------------------------------------------------

def _js(x):
    if isinstance(x, Structure):
        return serialize_structure(x)
    if isinstance(x, LinearOrder):
        return list(x.increasing)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {(k if isinstance(k, str) else json.dumps(_js(k))): _js(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        seq = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_js(v) for v in seq]
    return x


def _doc(command: str, **fields) -> dict:
    return {"schema": SCHEMA, "command": command, **{k: _js(v) for k, v in fields.items()}}


def _text(doc: dict) -> str:
    lines = []
    for k, v in doc.items():
        if k == "schema":
            continue
        if isinstance(v, str) and "\n" in v:
            lines.append(f"{k}:")
            lines.extend("  " + ln for ln in v.rstrip("\n").split("\n"))
        else:
            lines.append(f"{k}: {json.dumps(v, sort_keys=False)}")
    return "\n".join(lines) + "\n"


def _emit(args, doc: dict, artifact: str | None = None):
    body = json.dumps(doc, indent=2) + "\n" if args.format == "json" else _text(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(artifact if artifact is not None else json.dumps(doc, indent=2) + "\n")
    sys.stdout.write(body)


# --- argument helpers ----------------------------------------------------------------

def _structure(path: str) -> Structure:
    try:
        return load_structure(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _klass(desc: str) -> classes.ClassSpec:
    return classes.parse_descriptor(desc, loader=_structure)


def _embedding(path: str) -> tuple[int, ...]:
    pairs = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                try:
                    i, j = (int(p) for p in line.split("->"))
                except ValueError:
                    raise UsageError(f"{path}:{lineno}: expected 'i -> j'") from None
                pairs[i] = j
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if sorted(pairs) != list(range(len(pairs))):
        raise UsageError(f"{path}: the map must cover 0..m-1")
    return tuple(pairs[i] for i in range(len(pairs)))


def _budget(args) -> Budget:
    return Budget(args.budget_nodes, args.budget_secs)


def _verdict(v) -> dict:
    if isinstance(v, classes.Verified):
        return {"verdict": "verified", "bound": v.bound}
    if isinstance(v, classes.Exhausted):
        return {"verdict": "exhausted", "bound": v.bound, "instance": v.instance}
    return {"verdict": "counterexample", "witness": v.witness}


def _arrow_doc(cert: ramsey.ArrowCertificate, klass: str | None = None) -> dict:
    q = cert.query
    return _doc("arrow", kind="arrow", **({"class": klass} if klass else {}), verdict=cert.verdict,
                k=q.k, t=q.t, A=q.A, B=q.B, C=q.C, copies=cert.acopies,
                coloring=cert.coloring, nodes=cert.nodes)


# --- subcommands -------------------------------------------------------------------------

def cmd_arrow(args):
    A, B, C = _structure(args.A), _structure(args.B), _structure(args.C)
    if args.klass:
        K = _klass(args.klass)
        for name, X in (("A", A), ("B", B), ("C", C)):
            if not classes.member(K, X):
                raise UsageError(f"{name} is not a member of {K.descriptor}")
    try:
        q = ramsey.ArrowQuery(C, B, A, args.k, args.t)
    except FraisseError as exc:
        raise UsageError(str(exc)) from None
    cert = ramsey.arrow_check(q, _budget(args))
    _emit(args, _arrow_doc(cert, args.klass))
    return EXIT_OK if cert.holds else EXIT_NEGATIVE


def cmd_witness(args):
    K = _klass(args.klass)
    A, B = _structure(args.A), _structure(args.B)
    w = ramsey.ramsey_witness_search(K, A, B, args.k, args.t, args.max_size, _budget(args))
    if isinstance(w, ramsey.Witness):
        cert = w.detail
        doc = _doc("witness", kind="arrow", **{"class": K.descriptor}, verdict="holds", k=args.k, t=args.t,
                   A=A, B=B, C=w.structure, copies=cert.acopies, coloring=None, nodes=cert.nodes)
        _emit(args, doc)
        return EXIT_OK
    _emit(args, _doc("witness", **{"class": K.descriptor}, verdict="exhausted", bound=w.bound,
                     checked=w.checked))
    return EXIT_NEGATIVE


def cmd_degree(args):
    K0, K = _klass(args.class0), _klass(args.classO)
    A0 = _structure(args.A)
    d = ramsey.ramsey_degree_bounds(K0, K, A0, args.max_size, _budget(args))
    _emit(args, _doc("degree", class0=K0.descriptor, classO=K.descriptor, A0=A0, upper=d.upper,
                     upper_note=d.upper_note, lower=d.lower, lower_note=d.lower_note,
                     op_witness=d.op_witness, hosts=d.hosts))
    return EXIT_OK


def cmd_orderings(args):
    K = _klass(args.klass)
    A0 = _structure(args.A)
    rep = ramsey.patterns(K, A0)
    _emit(args, _doc("orderings", **{"class": K.descriptor}, A0=A0, orderings=rep.orderings,
                     orbits=rep.orbits, t_K=rep.t_K, aut_size=rep.aut_size, free_action=rep.free))
    return EXIT_OK


def cmd_op_check(args):
    K = _klass(args.klass)
    A0 = _structure(args.A)
    w = ramsey.ordering_property_check(K, A0, args.max_size, _budget(args))
    if isinstance(w, ramsey.Witness):
        _emit(args, _doc("op-check", kind="op_witness", **{"class": K.descriptor}, verdict="witness",
                         A0=A0, B0=w.structure))
        return EXIT_OK
    _emit(args, _doc("op-check", **{"class": K.descriptor}, verdict="exhausted", A0=A0, bound=w.bound,
                     checked=w.checked))
    return EXIT_NEGATIVE


def cmd_triangle(args):
    K = _klass(args.klass)
    rep = ramsey.triangle_condition_check(K, args.max_size, _budget(args))
    wit = [{"types": list(k), "structure": A, "triple": list(t)} for k, (A, t) in rep.witnessed.items()]
    _emit(args, _doc("triangle", **{"class": K.descriptor}, bound=rep.bound, types=rep.types,
                     witnessed=wit, unwitnessed=rep.unwitnessed))
    return EXIT_OK if rep.satisfied else EXIT_NEGATIVE


CHECKS = {"hp": lambda K, a: classes.check_hp(K, a.bound),
          "jep": lambda K, a: classes.check_jep(K, a.bound, a.instance_size),
          "ap": lambda K, a: classes.check_ap(K, a.bound, a.instance_size),
          "sap": lambda K, a: classes.check_sap(K, a.bound, a.instance_size),
          "reasonable": lambda K, a: classes.check_reasonable(K, a.bound),
          "order_forgetful": lambda K, a: classes.order_forgetful_check(K, a.bound)}


def cmd_check(args):
    K = _klass(args.klass)
    props = [p.strip() for p in args.props.split(",") if p.strip()]
    bad = [p for p in props if p not in CHECKS]
    if bad:
        raise UsageError(f"unknown properties: {', '.join(bad)}")
    reports = []
    negative = False
    for p in props:
        r = CHECKS[p](K, args)
        negative = negative or not r.ok
        reports.append({"property": r.property, **_verdict(r.verdict), "ranges": r.ranges, "nodes": r.nodes})
    _emit(args, _doc("check", kind="check", **{"class": K.descriptor}, reports=reports))
    return EXIT_NEGATIVE if negative else EXIT_OK


def cmd_enumerate(args):
    K = _klass(args.klass)
    ms = classes.enumerate_members(K, args.size, _budget(args))
    text = serialize_structures(ms)
    sys.stdout.write(text) if args.format == "text" and not args.out else None
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.format == "json":
        sys.stdout.write(json.dumps(_doc("enumerate", **{"class": K.descriptor}, size=args.size,
                                         count=len(ms), members=ms), indent=2) + "\n")
    elif args.out:
        sys.stdout.write(f"count: {len(ms)}\n")
    return EXIT_OK


def cmd_limit(args):
    K = _klass(args.klass)
    S, log = limits.build_approximant(K, args.size, args.seed, args.demand_size,
                                      strategy=args.strategy)
    ext = limits.check_extension_property(S, K, min(args.demand_size, S.size), min(args.demand_size + 1, S.size))
    doc = _doc("limit", kind="limit", **{"class": K.descriptor}, seed=args.seed, size=S.size,
               demand_size=args.demand_size, structure=S, satisfied=log.satisfied,
               pending=[{"A": d.A, "type": d.target} for d in log.pending],
               extension_fraction=ext.fraction, extension_checked=ext.checked,
               diagnostic="satisfied-demand fraction is a heuristic quality measure")
    _emit(args, doc)
    return EXIT_OK


def _ordered(path: str) -> Structure:
    A = _structure(path)
    if not A.sig.has_order:
        raise UsageError(f"{path} carries no order")
    return A


def _oba_from(path):
    A = _ordered(path)
    dec = algebra.decode_order(A, "ba")
    if dec is None:
        raise UsageError(f"{path} is not an ordered Boolean algebra")
    k, phi, seq = dec
    atoms = algebra.ba_is_natural(k, seq)
    if atoms is None:
        raise UsageError(f"{path} is not naturally ordered")
    return A, algebra.OrderedBA(k, atoms), phi


def cmd_oba(args):
    if args.action in ("natural", "bridge"):
        atoms = tuple(range(args.atoms)) if args.atom_order is None else tuple(args.atom_order)
        order = algebra.ba_natural_order(args.atoms, atoms)
        S = algebra.bridge_to_structure("ba", args.atoms, order=order)
        _emit(args, _doc("oba", action=args.action, atoms=args.atoms, atom_order=atoms, order=order,
                         structure=S), serialize_structure(S) if args.action == "bridge" else None)
        return EXIT_OK
    if args.action == "recognize":
        A = _ordered(args.A)
        dec = algebra.decode_order(A, "ba")
        atoms = None if dec is None else algebra.ba_is_natural(dec[0], dec[2])
        _emit(args, _doc("oba", action="recognize", natural=atoms is not None,
                         atoms=None if atoms is None else [dec[1][1 << a] for a in atoms]))
        return EXIT_OK if atoms is not None else EXIT_NEGATIVE
    Bs, Bq, pb = _oba_from(args.B)
    Cs, Cq, pc = _oba_from(args.C)
    Ds, Dq, pd = _oba_from(args.D)
    f, g = _embedding(args.f), _embedding(args.g)
    inv_c = {y: x for x, y in enumerate(pc)}
    inv_d = {y: x for x, y in enumerate(pd)}
    try:
        fa = tuple(inv_c[f[pb[1 << i]]] for i in range(Bq.m))
        ga = tuple(inv_d[g[pb[1 << i]]] for i in range(Bq.m))
        E, r, s = algebra.ba_amalgamate(Bq, Cq, Dq, fa, ga)
    except (ValueError, IndexError, KeyError) as exc:
        raise UsageError(f"invalid amalgamation instance: {exc}") from None
    Es = algebra.bridge_to_structure("ba", E.m, order=E.order())
    rmap = [algebra.ba_map(r, inv_c[y]) for y in range(Cs.size)]
    smap = [algebra.ba_map(s, inv_d[y]) for y in range(Ds.size)]
    _emit(args, _doc("oba", kind="amalgam", action="amalgamate", B=Bs, C=Cs, D=Ds, f=f, g=g, E=Es,
                     r=rmap, s=smap))
    return EXIT_OK


def cmd_ovf(args):
    q = args.q
    if not algebra.is_prime(q):
        raise UsageError("only prime q is supported")
    if args.action in ("natural", "bridge"):
        fo = None if args.field_order is None else tuple(args.field_order)
        order = algebra.vs_natural_order(q, args.dim, args.basis, fo)
        S = algebra.bridge_to_structure("vs", q, args.dim, order=order)
        _emit(args, _doc("ovf", action=args.action, q=q, dim=args.dim, order=order, structure=S),
              serialize_structure(S) if args.action == "bridge" else None)
        return EXIT_OK
    A = _ordered(args.A)
    dec = algebra.decode_order(A, "vs", q)
    wit = None if dec is None else algebra.vs_is_natural(q, dec[0], dec[2],
                                                         None if args.field_order is None else args.field_order)
    _emit(args, _doc("ovf", action="recognize", natural=wit is not None,
                     basis=None if wit is None else [dec[1][b] for b in wit[0]],
                     field_order=None if wit is None else wit[1]))
    return EXIT_OK if wit is not None else EXIT_NEGATIVE


def verify_document(doc: dict) -> tuple[bool, str]:
    kind = doc.get("kind")
    if doc.get("schema") != SCHEMA:
        return False, "unsupported schema"
    P = parse_structure
    if kind == "arrow":
        A, B, C = P(doc["A"]), P(doc["B"]), P(doc["C"])
        q = ramsey.ArrowQuery(C, B, A, doc["k"], doc["t"])
        cert = ramsey.ArrowCertificate(q, doc["verdict"] == "holds",
                                       tuple(tuple(c) for c in doc["copies"]),
                                       None if doc["coloring"] is None else tuple(doc["coloring"]), 0)
        if "class" in doc and doc["class"]:
            K = _klass(doc["class"])
            if not all(classes.member(K, X) for X in (A, B, C)):
                return False, "a structure is not a member of the class"
        ok = ramsey.verify_arrow(cert)
        return ok, f"arrow {doc['verdict']} certificate " + ("re-validated" if ok else "rejected")
    if kind == "op_witness":
        K = _klass(doc["class"])
        ok = ramsey.verify_op_witness(K, P(doc["A0"]), P(doc["B0"]))
        return ok, "ordering-property witness " + ("re-validated" if ok else "rejected")
    if kind == "check":
        K = _klass(doc["class"])
        for rep in doc["reports"]:
            if rep["verdict"] != "counterexample":
                continue
            w = {k: (P(v) if isinstance(v, str) and v.startswith("structure") else v)
                 for k, v in rep["witness"].items()}
            r = classes.CheckReport(rep["property"], classes.Counterexample(w), rep["ranges"])
            if not classes.recheck(K, r):
                return False, f"{rep['property']} counterexample rejected"
        return True, "counterexamples re-validated"
    if kind == "amalgam":
        from .structures import is_embedding
        B, C, D, E = P(doc["B"]), P(doc["C"]), P(doc["D"]), P(doc["E"])
        f, g, r, s = doc["f"], doc["g"], doc["r"], doc["s"]
        ok = all(is_embedding(X, Y, h) for X, Y, h in ((B, C, f), (B, D, g), (C, E, r), (D, E, s)))
        ok = ok and all(r[f[x]] == s[g[x]] for x in range(B.size))
        K = classes.catalog_class("oba")
        ok = ok and classes.member(K, E)
        return ok, "amalgam " + ("re-validated" if ok else "rejected")
    if kind == "limit":
        K = _klass(doc["class"])
        S = P(doc["structure"])
        ok = classes.member(K, S) and S.size == doc["size"]
        return ok, "approximant membership " + ("re-validated" if ok else "rejected")
    return False, f"unknown certificate kind {kind!r}"


def cmd_verify(args):
    try:
        with open(args.file, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read certificate {args.file}: {exc}") from None
    ok, msg = verify_document(doc)
    out = _doc("verify", file=os.path.basename(args.file), valid=ok, message=msg)
    args.out = None
    _emit(args, out)
    return EXIT_OK if ok else EXIT_NEGATIVE


# --- parser ------------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--threads", type=int, default=None, help="parallelism hint (results never depend on it)")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--budget-nodes", type=int, default=None)
    g.add_argument("--budget-secs", type=float, default=None)
    g.add_argument("--out", default=None, help="write the artifact to this file")
    g.add_argument("--format", choices=("text", "json"), default=None)
    g.add_argument("--config", default=None, help="JSON file with default values for these flags")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="fraisse", description="Finite Ramsey and Fraisse class workbench",
                                 parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = cmd("arrow", cmd_arrow, "decide C -> (B)^A_{k,t}")
    p.add_argument("--class", dest="klass")
    for s in "ABC":
        p.add_argument(f"--{s}", required=True)
    p.add_argument("-k", type=int, default=2)
    p.add_argument("-t", type=int, default=1)

    p = cmd("witness", cmd_witness, "search the least C with C -> (B)^A_{k,t}")
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("-k", type=int, default=2)
    p.add_argument("-t", type=int, default=1)
    p.add_argument("--max-size", type=int, default=6)

    p = cmd("degree", cmd_degree, "Ramsey degree bounds from patterns")
    p.add_argument("--class0", required=True)
    p.add_argument("--classO", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--max-size", type=int, default=6)

    p = cmd("orderings", cmd_orderings, "admissible orderings and patterns")
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--A", required=True)

    p = cmd("op-check", cmd_op_check, "search an ordering-property witness")
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--max-size", type=int, default=6)

    p = cmd("triangle", cmd_triangle, "check the triangle condition on pair types")
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--max-size", type=int, default=4)

    p = cmd("check", cmd_check, "bounded checks of class properties")
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--props", default="hp,jep,ap")
    p.add_argument("--bound", type=int, default=4)
    p.add_argument("--instance-size", type=int, default=3)

    p = cmd("enumerate", cmd_enumerate, "members of a given size up to isomorphism")
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--size", type=int, required=True)

    p = cmd("limit", cmd_limit, "build a finite approximant of the limit")
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--demand-size", type=int, default=2)
    p.add_argument("--strategy", choices=("greedy", "least"), default="greedy")

    p = cmd("oba", cmd_oba, "ordered Boolean algebras")
    p.add_argument("action", choices=("natural", "bridge", "recognize", "amalgamate"))
    p.add_argument("--atoms", type=int, default=2)
    p.add_argument("--atom-order", type=int, nargs="+")
    p.add_argument("--A")
    for s in ("B", "C", "D", "f", "g"):
        p.add_argument(f"--{s}")

    p = cmd("ovf", cmd_ovf, "ordered vector spaces over GF(q)")
    p.add_argument("action", choices=("natural", "bridge", "recognize"))
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--basis", type=int, nargs="+")
    p.add_argument("--field-order", type=int, nargs="+")
    p.add_argument("--A")

    p = cmd("verify", cmd_verify, "re-validate a certificate file")
    p.add_argument("file")
    return ap


def _apply_config(args):
    cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    for key, default in GLOBAL_DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, cfg.get(key.replace("_", "-"), cfg.get(key, default)))
    if args.format not in ("text", "json"):
        raise UsageError("format must be text or json")


_REQUIRED = {("oba", "recognize"): ("A",), ("oba", "amalgamate"): ("B", "C", "D", "f", "g"),
             ("ovf", "recognize"): ("A",)}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        _apply_config(args)
        missing = [f"--{a}" for a in _REQUIRED.get((args.command, getattr(args, "action", None)), ())
                   if getattr(args, a, None) is None]
        if missing:
            raise UsageError(f"{args.command} {args.action} needs {' '.join(missing)}")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (FraisseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())
