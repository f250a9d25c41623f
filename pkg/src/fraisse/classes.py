"""Classes of finite structures, their catalog, and bounded axiom checkers."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .budget import Budget, ensure
from .errors import ClassSpecError, SignatureMismatch
from .structures import (ORDER, LinearOrder, Signature, Structure, _order_from_table, _trusted,
                         automorphisms, canonical_form, copies, embeddings, expand_with_order,
                         first_embedding, induced_substructure, reduct)


# --- generation components --------------------------------------------------------
# A component owns some symbols and knows how to add one new element (index n) to a
# structure on {0..n-1}, and how to recognise a well-formed table for its symbols.

def _classes_of(n, table):
    parent = list(range(n))
    for a, b in table:
        ra, rb = parent[a], parent[b]
        if ra != rb:
            lo_, hi = min(ra, rb), max(ra, rb)
            parent = [lo_ if p == hi else p for p in parent]
    out: dict[int, list[int]] = {}
    for x in range(n):
        out.setdefault(parent[x], []).append(x)
    return sorted(out.values())


def equivalence_classes(A: Structure, sym: str = "E") -> list[list[int]]:
    return _classes_of(A.size, A.table(sym))


@dataclass(frozen=True)
class Component:
    kind: str
    symbols: tuple[str, ...]
    arity: int = 2

    def options(self, n: int, tables: dict) -> Iterator[dict]:
        k = self.kind
        if k == "order":
            (s,) = self.symbols
            inc = _order_from_table(n, tables[s]) if n else ()
            for pos in range(n + 1):
                yield {s: [(x, n) for x in inc[:pos]] + [(n, x) for x in inc[pos:]]}
        elif k == "graph":
            (s,) = self.symbols
            for r in range(n + 1):
                for nb in itertools.combinations(range(n), r):
                    yield {s: [p for x in nb for p in ((x, n), (n, x))]}
        elif k == "equivalence":
            (s,) = self.symbols
            yield {s: []}
            for cls in _classes_of(n, tables[s]):
                yield {s: [p for x in cls for p in ((x, n), (n, x))]}
        elif k == "unary":
            (s,) = self.symbols
            yield {s: []}
            yield {s: [(n,)]}
        elif k == "partition":
            for s in self.symbols:
                yield {t: ([(n,)] if t == s else []) for t in self.symbols}
        elif k == "hyper":
            (s,) = self.symbols
            faces = list(itertools.combinations(range(n), self.arity - 1))
            for r in range(len(faces) + 1):
                for chosen in itertools.combinations(faces, r):
                    yield {s: [p for f in chosen for p in itertools.permutations(f + (n,))]}
        elif k == "poset":
            (s,) = self.symbols
            rel = tables[s]
            for assign in itertools.product((0, 1, 2), repeat=n):
                down = [x for x in range(n) if assign[x] == 1]
                up = [x for x in range(n) if assign[x] == 2]
                if any((y, x) in rel and assign[y] != 1 for x in down for y in range(n)):
                    continue
                if any((x, y) in rel and assign[y] != 2 for x in up for y in range(n)):
                    continue
                if any((d, u) not in rel for d in down for u in up):
                    continue
                yield {s: [(x, n) for x in down] + [(n, x) for x in up]}
        elif k == "metric":
            for choice in itertools.product(range(len(self.symbols)), repeat=n):
                new: dict[str, list] = {t: [] for t in self.symbols}
                for x, c in enumerate(choice):
                    new[self.symbols[c]] += [(x, n), (n, x)]
                yield new
        elif k == "raw":
            (s,) = self.symbols
            cells = [t for t in itertools.product(range(n + 1), repeat=self.arity) if n in t]
            if len(cells) > 16:
                raise ClassSpecError(f"generic generation for {s!r} is too large; give a generation hint")
            for r in range(len(cells) + 1):
                for chosen in itertools.combinations(cells, r):
                    yield {s: list(chosen)}
        else:
            raise ClassSpecError(f"unknown component kind {k!r}")

    def valid(self, A: Structure) -> bool:
        k = self.kind
        if k in ("order", "raw", "unary"):
            return True
        if k == "partition":
            count = [0] * A.size
            for s in self.symbols:
                for (x,) in A.table(s):
                    count[x] += 1
            return all(c == 1 for c in count)
        if k == "metric":
            seen = {}
            for s in self.symbols:
                for a, b in A.table(s):
                    if a == b or (b, a) not in A.table(s) or (a, b) in seen:
                        return False
                    seen[(a, b)] = s
            return len(seen) == A.size * (A.size - 1)
        rel = A.table(self.symbols[0])
        if k == "graph":
            return all(a != b and (b, a) in rel for a, b in rel)
        if k == "equivalence":
            if not all(a != b and (b, a) in rel for a, b in rel):
                return False
            return all((a, c) in rel for a, b in rel for b2, c in rel if b == b2 and a != c)
        if k == "hyper":
            return all(len(set(t)) == len(t) and all(p in rel for p in itertools.permutations(t))
                       for t in rel)
        if k == "poset":
            if any(a == b for a, b in rel):
                return False
            return all((a, c) in rel for a, b in rel for b2, c in rel if b == b2)
        raise ClassSpecError(f"unknown component kind {k!r}")


# --- class specs ---------------------------------------------------------------------

@dataclass(eq=False)
class ClassSpec:
    name: str
    sig: Signature
    components: tuple[Component, ...] = ()
    predicate: Callable[[Structure], bool] | None = None
    params: tuple = ()
    hereditary: bool = True
    reduct_class: "ClassSpec | None" = None
    generator: Callable[[int], Iterable[Structure]] | None = None
    amalgam_hint: Callable | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        covered = [s for c in self.components for s in c.symbols]
        if len(set(covered)) != len(covered):
            raise ClassSpecError("a symbol is owned by two components")
        extra = [Component("raw", (s,), k) for s, k in self.sig.symbols if s not in covered]
        self.components = tuple(self.components) + tuple(extra)
        unknown = set(covered) - set(self.sig.names)
        if unknown:
            raise ClassSpecError(f"components mention unknown symbols {sorted(unknown)}")
        if self.is_order_class and self.reduct_class is None:
            self.reduct_class = _generic_reduct(self)

    @property
    def is_order_class(self) -> bool:
        return any(c.kind == "order" and c.symbols == (ORDER,) for c in self.components)

    @property
    def descriptor(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}(" + ",".join(f"{k}={v}" for k, v in self.params) + ")"

    def __repr__(self) -> str:
        return f"ClassSpec({self.descriptor})"

    def shape_ok(self, A: Structure) -> bool:
        return all(c.valid(A) for c in self.components)

    def validate(self, max_size: int = 3) -> None:
        """Spot-check isomorphism invariance of membership on all small labelings."""
        for n in range(1, max_size + 1):
            reps = enumerate_members(self, n) if self.generator is not None else _shape_reps(self, n)
            for R in reps:
                want = member(self, R)
                for perm in itertools.permutations(range(n)):
                    if member(self, R.relabel(perm)) != want:
                        raise ClassSpecError(f"membership of {self.descriptor} is not isomorphism invariant")


def member(K: ClassSpec, A: Structure) -> bool:
    if A.sig != K.sig:
        raise SignatureMismatch(f"{K.descriptor} expects signature {K.sig.symbols}")
    if not K.shape_ok(A):
        return False
    return K.predicate is None or bool(K.predicate(A))


def _generic_reduct(K: ClassSpec) -> ClassSpec:
    def some_order(A0):
        return any(member(K, expand_with_order(A0, p)) for p in itertools.permutations(range(A0.size)))
    gen = None
    if K.generator is not None:
        def gen(n):
            return (reduct(A, ORDER) for A in K.generator(n))
    return ClassSpec(K.name + "|L0", K.sig.without(ORDER),
                     tuple(c for c in K.components if c.symbols != (ORDER,)),
                     some_order, K.params, K.hereditary, None, gen)


def _extend_raw(K: ClassSpec, n: int, tables: dict) -> Iterator[Structure]:
    opts = [list(c.options(n, tables)) for c in K.components]
    for combo in itertools.product(*opts):
        new = {s: set(t) for s, t in tables.items()}
        for part in combo:
            for s, ts in part.items():
                new[s].update(ts)
        yield _trusted(K.sig, n + 1, tuple(frozenset(new[s]) for s in K.sig.names))


def one_point_raw(K: ClassSpec, A: Structure | None) -> Iterator[Structure]:
    """Every labeled extension of A by the element |A| permitted by K's components."""
    if A is None:
        return _extend_raw(K, 0, {s: frozenset() for s in K.sig.names})
    return _extend_raw(K, A.size, dict(zip(K.sig.names, A.tables)))


def _level(K: ClassSpec, prev: Sequence[Structure | None], keep, budget: Budget) -> list[Structure]:
    seen = {}
    for A in prev:
        for B in one_point_raw(K, A):
            budget.tick()
            if keep(B):
                c = canonical_form(B)
                seen.setdefault(c, c)
    return sorted(seen, key=Structure.key)


def _shape_reps(K: ClassSpec, n: int) -> list[Structure]:
    key = ("shape", n)
    if key not in K._cache:
        prev = [None] if n == 1 else _shape_reps(K, n - 1)
        K._cache[key] = _level(K, prev, K.shape_ok, Budget())
    return K._cache[key]


def enumerate_members(K: ClassSpec, n: int, budget: Budget | None = None) -> list[Structure]:
    if n < 1:
        raise ValueError("sizes start at 1")
    key = ("members", n)
    if key in K._cache:
        return K._cache[key]
    budget = ensure(budget)
    if K.generator is not None:
        seen = {}
        for A in K.generator(n):
            budget.tick()
            if member(K, A):
                c = canonical_form(A)
                seen.setdefault(c, c)
        out = sorted(seen, key=Structure.key)
    elif K.hereditary:
        prev = [None] if n == 1 else enumerate_members(K, n - 1, budget)
        out = _level(K, prev, lambda B: member(K, B), budget)
    else:
        out = [A for A in _shape_reps(K, n) if member(K, A)]
    K._cache[key] = out
    return out


def members_upto(K: ClassSpec, bound: int, start: int = 1, budget: Budget | None = None) -> list[Structure]:
    return [A for n in range(start, bound + 1) for A in enumerate_members(K, n, budget)]


def admissible_orders(K: ClassSpec, A0: Structure) -> list[LinearOrder]:
    """All linear orders of A0 whose expansion lies in the order class K."""
    return [LinearOrder(p) for p in itertools.permutations(range(A0.size))
            if member(K, expand_with_order(A0, p))]


# --- reports ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verified:
    bound: int


@dataclass(frozen=True)
class Counterexample:
    witness: dict


@dataclass(frozen=True)
class Exhausted:
    bound: int
    instance: dict | None = None


@dataclass
class CheckReport:
    property: str
    verdict: Verified | Counterexample | Exhausted
    ranges: dict
    nodes: int = 0
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return isinstance(self.verdict, Verified)


class _Timer:
    def __init__(self):
        self.t0 = time.perf_counter()
        self.nodes = 0

    def report(self, prop, verdict, **ranges):
        return CheckReport(prop, verdict, ranges, self.nodes, time.perf_counter() - self.t0)


# --- checkers ----------------------------------------------------------------------------

def check_hp(K: ClassSpec, bound: int) -> CheckReport:
    tm = _Timer()
    for A in members_upto(K, bound):
        for r in range(A.size - 1, 0, -1):
            for S in itertools.combinations(range(A.size), r):
                tm.nodes += 1
                sub = induced_substructure(A, S)
                if not member(K, sub):
                    return tm.report("hp", Counterexample({"member": A, "subset": S, "substructure": sub}),
                                     bound=bound)
    return tm.report("hp", Verified(bound), bound=bound)


def check_jep(K: ClassSpec, bound: int, pair_size: int = 3) -> CheckReport:
    tm = _Timer()
    small = members_upto(K, min(pair_size, bound))
    for i, A in enumerate(small):
        for B in small[i:]:
            hi = min(bound, A.size + B.size) if K.hereditary else bound
            found = None
            for D in members_upto(K, hi, max(A.size, B.size)):
                tm.nodes += 1
                if first_embedding(A, D) is not None and first_embedding(B, D) is not None:
                    found = D
                    break
            if found is None:
                return tm.report("jep", Exhausted(bound, {"A": A, "B": B}), bound=bound, pair_size=pair_size)
    return tm.report("jep", Verified(bound), bound=bound, pair_size=pair_size)


def _orbit_reps(maps: list[tuple], group: list[tuple]) -> list[tuple]:
    """One embedding per orbit of post-composition by the target's automorphisms."""
    out, seen = [], set()
    for f in maps:
        if f in seen:
            continue
        out.append(f)
        for g in group:
            seen.add(tuple(g[y] for y in f))
    return out


def find_amalgam(K: ClassSpec, A: Structure, B: Structure, C: Structure, f: Sequence[int],
                 g: Sequence[int], bound: int, strong: bool = False, timer=None):
    """Search (D, r, s) with r.f = s.g; strong also asks r(B) and s(C) to meet only in r(f(A))."""
    cands: list[Structure] = []
    if K.amalgam_hint is not None:
        cands.extend(K.amalgam_hint(A, B, C, f, g))
    top = B.size + C.size - A.size
    if K.hereditary and K.generator is None:
        lo_ = top if strong else max(B.size, C.size)
        cands.extend(members_upto(K, min(bound, top), lo_))
    else:
        cands.extend(members_upto(K, bound, max(B.size, C.size)))
    for D in cands:
        if strong and D.size < top:
            continue
        for r in embeddings(B, D):
            if timer is not None:
                timer.nodes += 1
            fixed = {g[a]: r[f[a]] for a in range(A.size)}
            avoid = set(r) if strong else ()
            s = first_embedding(C, D, fixed=fixed, avoid=avoid)
            if s is not None:
                return D, r, s
    return None


def _ap_like(K: ClassSpec, bound: int, instance_size: int, strong: bool) -> CheckReport:
    prop = "sap" if strong else "ap"
    tm = _Timer()
    small = members_upto(K, min(instance_size, bound))
    for A in small:
        for B in small:
            if B.size < A.size:
                continue
            fs = _orbit_reps(embeddings(A, B), automorphisms(B))
            if not fs:
                continue
            for C in small:
                if C.size < A.size:
                    continue
                gs = _orbit_reps(embeddings(A, C), automorphisms(C))
                for f in fs:
                    for g in gs:
                        if find_amalgam(K, A, B, C, f, g, bound, strong, tm) is None:
                            inst = {"A": A, "B": B, "C": C, "f": f, "g": g}
                            return tm.report(prop, Exhausted(bound, inst), bound=bound,
                                             instance_size=instance_size)
    return tm.report(prop, Verified(bound), bound=bound, instance_size=instance_size)


def check_ap(K: ClassSpec, bound: int, instance_size: int = 3) -> CheckReport:
    return _ap_like(K, bound, instance_size, strong=False)


def check_sap(K: ClassSpec, bound: int, instance_size: int = 3) -> CheckReport:
    return _ap_like(K, bound, instance_size, strong=True)


def check_ap_instance(K: ClassSpec, A, B, C, f, g, bound: int, strong: bool = False) -> CheckReport:
    tm = _Timer()
    prop = "sap" if strong else "ap"
    hit = find_amalgam(K, A, B, C, f, g, bound, strong, tm)
    if hit is None:
        return tm.report(prop, Exhausted(bound, {"A": A, "B": B, "C": C, "f": tuple(f), "g": tuple(g)}),
                         bound=bound)
    D, r, s = hit
    return tm.report(prop, Verified(bound), bound=bound, amalgam={"D": D, "r": r, "s": s})


def transport_instance(A0: Structure, B0: Structure, C0: Structure, f, g):
    """Order an unordered instance so any ordered amalgam must be strong.

    f(A0) is placed below the rest of B0 and the rest of C0 below g(A0).
    """
    A = expand_with_order(A0, range(A0.size))
    bo = [f[a] for a in range(A0.size)] + [y for y in range(B0.size) if y not in set(f)]
    co = [y for y in range(C0.size) if y not in set(g)] + [g[a] for a in range(A0.size)]
    return A, expand_with_order(B0, bo), expand_with_order(C0, co)


def check_reasonable(K: ClassSpec, bound: int) -> CheckReport:
    if not K.is_order_class:
        raise ClassSpecError(f"{K.descriptor} is not an order class")
    K.validate()
    tm = _Timer()
    base = members_upto(K.reduct_class, bound)
    adm = {B0: {o.increasing for o in admissible_orders(K, B0)} for B0 in base}
    for A0 in base:
        for B0 in base:
            if B0.size < A0.size:
                continue
            for pi in embeddings(A0, B0):
                for o in adm[A0]:
                    tm.nodes += 1
                    want = [pi[x] for x in o]
                    if not any(_is_subsequence(want, ob) for ob in adm[B0]):
                        wit = {"A0": A0, "B0": B0, "pi": pi, "order": o}
                        return tm.report("reasonable", Counterexample(wit), bound=bound)
    return tm.report("reasonable", Verified(bound), bound=bound)


def _is_subsequence(want, seq) -> bool:
    it = iter(seq)
    return all(x in it for x in want)


def order_forgetful_check(K: ClassSpec, bound: int) -> CheckReport:
    if not K.is_order_class:
        raise ClassSpecError(f"{K.descriptor} is not an order class")
    tm = _Timer()
    for n in range(1, bound + 1):
        groups: dict[Structure, list[Structure]] = {}
        for A in enumerate_members(K, n):
            tm.nodes += 1
            groups.setdefault(canonical_form(reduct(A, ORDER)), []).append(A)
        for red, ms in groups.items():
            if len(ms) > 1:
                return tm.report("order_forgetful",
                                 Counterexample({"A": ms[0], "B": ms[1], "reduct": red}), bound=bound)
    return tm.report("order_forgetful", Verified(bound), bound=bound)


def product_with_lo(K0: ClassSpec, name: str | None = None) -> ClassSpec:
    if K0.sig.has_order:
        raise ClassSpecError(f"{K0.descriptor} already carries an order")

    def pred(A):
        return member(K0, reduct(A, ORDER))
    gen = None
    if K0.generator is not None:
        def gen(n):
            for A0 in K0.generator(n):
                for p in itertools.permutations(range(n)):
                    yield expand_with_order(A0, p)
    comps = K0.components + (Component("order", (ORDER,)),)
    return ClassSpec(name or ("o" + K0.name), K0.sig.with_order(), comps, pred, K0.params,
                     K0.hereditary, K0, gen)


def recheck(K: ClassSpec, report: CheckReport) -> bool:
    """Re-run the defining predicate on a counterexample payload."""
    v = report.verdict
    if not isinstance(v, Counterexample):
        return False
    w = v.witness
    if report.property == "hp":
        return member(K, w["member"]) and not member(K, induced_substructure(w["member"], w["subset"]))
    if report.property == "order_forgetful":
        A, B = w["A"], w["B"]
        return (member(K, A) and member(K, B) and canonical_form(A) != canonical_form(B)
                and canonical_form(reduct(A, ORDER)) == canonical_form(reduct(B, ORDER)))
    if report.property == "reasonable":
        A0, B0, pi, o = w["A0"], w["B0"], w["pi"], w["order"]
        want = [pi[x] for x in o]
        return member(K, expand_with_order(A0, o)) and not any(
            member(K, expand_with_order(B0, p)) for p in itertools.permutations(range(B0.size))
            if _is_subsequence(want, p))
    return False


# --- catalog -------------------------------------------------------------------------------

GRAPH = Signature.of(("E", 2))


def complete_graph(n: int) -> Structure:
    return Structure.build(GRAPH, n, {"E": [(a, b) for a in range(n) for b in range(n) if a != b]})


def graph(n: int, edges: Iterable[tuple[int, int]]) -> Structure:
    return Structure.build(GRAPH, n, {"E": [p for a, b in edges for p in ((a, b), (b, a))]})


def equivalence(n: int, blocks: Iterable[Iterable[int]]) -> Structure:
    """Equivalence relation stored irreflexively."""
    pairs = [(a, b) for blk in blocks for a in blk for b in blk if a != b]
    return Structure.build(GRAPH, n, {"E": pairs})


def _num_classes(A):
    return len(equivalence_classes(A))


def is_irreducible(F: Structure) -> bool:
    if F.size < 2:
        return False
    covered = {frozenset((a, b)) for table in F.tables for t in table for a in t for b in t if a != b}
    return all(frozenset(p) in covered for p in itertools.combinations(range(F.size), 2))


def hypergraph_signature(spec) -> Signature:
    if isinstance(spec, Signature):
        return spec
    s = str(spec)
    if s.endswith("-uniform"):
        return Signature.of(("R", int(s[:-len("-uniform")])))
    arities = [int(x) for x in s.replace(",", "+").split("+") if x]
    return Signature(tuple((f"R{i + 1}", k) for i, k in enumerate(arities)))


def _hyper_components(sig: Signature) -> tuple[Component, ...]:
    out = []
    for s, k in sig.symbols:
        if k < 2:
            raise ClassSpecError("hypergraph symbols need arity at least 2")
        out.append(Component("hyper", (s,), k))
    return tuple(out)


def metric_values(max_den: int, max_dist) -> list[Fraction]:
    vals = {Fraction(p, q) for q in range(1, max_den + 1)
            for p in range(1, int(Fraction(max_dist) * q) + 1)}
    return sorted(v for v in vals if v <= Fraction(max_dist))


def metric_symbol(v: Fraction) -> str:
    return f"d{v}"


def metric_distance(A: Structure, a: int, b: int) -> Fraction:
    if a == b:
        return Fraction(0)
    for s in A.sig.names:
        if (a, b) in A.table(s):
            return Fraction(s[1:])
    raise ValueError("no distance recorded")


def metric_space(dist: Sequence[Sequence], max_den: int, max_dist) -> Structure:
    vals = metric_values(max_den, max_dist)
    sig = Signature(tuple((metric_symbol(v), 2) for v in vals))
    n = len(dist)
    rels: dict[str, list] = {metric_symbol(v): [] for v in vals}
    for a in range(n):
        for b in range(n):
            if a != b:
                rels[metric_symbol(Fraction(dist[a][b]))].append((a, b))
    return Structure.build(sig, n, rels)


def _triangle_ok(A: Structure) -> bool:
    n = A.size
    d = [[metric_distance(A, a, b) for b in range(n)] for a in range(n)]
    return all(d[a][c] <= d[a][b] + d[b][c] for a in range(n) for b in range(n) for c in range(n))


def _convex(A: Structure) -> bool:
    rank = A.order().ranks()
    for cls in equivalence_classes(A):
        rs = sorted(rank[x] for x in cls)
        if rs[-1] - rs[0] != len(rs) - 1:
            return False
    return True


def _omits(forbidden):
    def pred(A):
        A0 = reduct(A, ORDER) if A.sig.has_order else A
        return all(F.size > A0.size or not copies(A0, F) for F in forbidden)
    return pred


def _int_param(params, key, lo_=1):
    if key not in params:
        raise ClassSpecError(f"missing parameter {key!r}")
    try:
        v = int(params[key])
    except (TypeError, ValueError):
        raise ClassSpecError(f"parameter {key!r} must be an integer") from None
    if v < lo_:
        raise ClassSpecError(f"parameter {key!r} must be at least {lo_}")
    return v


def _base(name: str, params: dict) -> ClassSpec:
    E = (Component("equivalence", ("E",)),)
    if name == "sets":
        return ClassSpec("sets", Signature(()))
    if name == "graphs":
        return ClassSpec("graphs", GRAPH, (Component("graph", ("E",)),))
    if name == "forb_kn":
        n = _int_param(params, "n")
        if n < 3:
            raise ClassSpecError("forb_kn needs n >= 3")
        Kn = complete_graph(n)
        return ClassSpec("forb_kn", GRAPH, (Component("graph", ("E",)),), _omits([Kn]), (("n", n),))
    if name == "eq":
        return ClassSpec("eq", GRAPH, E)
    if name == "eq_n":
        n = _int_param(params, "n")
        return ClassSpec("eq_n", GRAPH, E, lambda A: _num_classes(A) <= n, (("n", n),))
    if name == "eq_star_n":
        n = _int_param(params, "n")
        return ClassSpec("eq_star_n", GRAPH, E,
                         lambda A: all(len(c) <= n for c in equivalence_classes(A)), (("n", n),))
    if name == "hypergraphs":
        sig = hypergraph_signature(params.get("sig", "2-uniform"))
        return ClassSpec("hypergraphs", sig, _hyper_components(sig), None, (("sig", params.get("sig", "2-uniform")),))
    if name == "forb":
        sig = hypergraph_signature(params.get("sig", "2-uniform"))
        forbidden = _forbidden(params, sig)
        return ClassSpec("forb", sig, _hyper_components(sig), _omits(forbidden),
                         (("sig", params.get("sig", "2-uniform")), ("forbid", len(forbidden))))
    if name == "metric_q":
        max_den = _int_param(params, "max_den")
        try:
            max_dist = Fraction(str(params.get("max_dist", "")))
        except (ValueError, ZeroDivisionError):
            raise ClassSpecError("max_dist must be a rational number") from None
        if max_dist <= 0:
            raise ClassSpecError("max_dist must be positive")
        vals = metric_values(max_den, max_dist)
        syms = tuple(metric_symbol(v) for v in vals)
        sig = Signature(tuple((s, 2) for s in syms))
        return ClassSpec("metric_q", sig, (Component("metric", syms),), _triangle_ok,
                         (("max_den", max_den), ("max_dist", max_dist)))
    if name == "p_n":
        n = _int_param(params, "n")
        syms = tuple(f"P{i + 1}" for i in range(n))
        return ClassSpec("p_n", Signature(tuple((s, 1) for s in syms)), (Component("partition", syms),),
                         None, (("n", n),))
    if name == "posets":
        return ClassSpec("posets", Signature.of(("P", 2)), (Component("poset", ("P",)),))
    if name in ("ba", "vf"):
        from . import algebra
        return algebra.algebra_class(name, params)
    return None


def _forbidden(params, sig) -> list[Structure]:
    forbidden = params.get("forbid", [])
    if isinstance(forbidden, Structure):
        forbidden = [forbidden]
    out = []
    for F in forbidden:
        if F.sig != sig:
            raise ClassSpecError("forbidden structure has the wrong signature")
        if not member(ClassSpec("h", sig, _hyper_components(sig)), F):
            raise ClassSpecError("forbidden structure is not a hypergraph")
        if not is_irreducible(F):
            raise ClassSpecError("forbidden structure is not irreducible")
        out.append(F)
    return out


_ORDERED = {"ogr": "graphs", "oeq": "eq", "oforb_kn": "forb_kn", "oeq_n": "eq_n",
            "oeq_star_n": "eq_star_n", "ohypergraphs": "hypergraphs", "ometric_q": "metric_q",
            "lo": "sets"}

CATALOG = ("lo", "sets", "graphs", "forb_kn", "eq", "eq_n", "eq_star_n", "convex_eq", "hypergraphs",
           "forb", "oforb", "metric_q", "p_n", "op_n", "posets", "posets_le", "ba", "oba", "vf", "ovf",
           "ogr", "oeq", "oforb_kn", "oeq_n", "oeq_star_n", "ohypergraphs", "ometric_q")


def catalog_class(name: str, **params) -> ClassSpec:
    if name in _ORDERED:
        K0 = _base(_ORDERED[name], params)
        return product_with_lo(K0, name)
    if name == "convex_eq":
        K0 = _base("eq", {})
        return ClassSpec("convex_eq", K0.sig.with_order(),
                         K0.components + (Component("order", (ORDER,)),), _convex, (), True, K0)
    if name == "oforb":
        K0 = _base("forb", params)
        K = product_with_lo(K0, "oforb")
        K.params = K0.params
        return K
    if name == "op_n":
        K0 = _base("p_n", params)
        return ClassSpec("op_n", K0.sig.with_order(), K0.components + (Component("order", (ORDER,)),),
                         None, K0.params, True, K0)
    if name == "posets_le":
        K0 = _base("posets", {})

        def extends(A):
            return A.table("P") <= A.table(ORDER)
        return ClassSpec("posets_le", K0.sig.with_order(),
                         K0.components + (Component("order", (ORDER,)),), extends, (), True, K0)
    if name in ("oba", "ovf"):
        from . import algebra
        return algebra.algebra_class(name, params)
    K = _base(name, params)
    if K is None:
        raise ClassSpecError(f"unknown class {name!r}")
    return K


def parse_descriptor(text: str, loader: Callable[[str], Structure] | None = None) -> ClassSpec:
    """Parse ``name(key=value,...)``; values starting with @ name structure files."""
    text = text.strip()
    if "(" in text:
        if not text.endswith(")"):
            raise ClassSpecError(f"malformed class descriptor {text!r}")
        name, body = text[:-1].split("(", 1)
    else:
        name, body = text, ""
    params: dict = {}
    for item in filter(None, (p.strip() for p in _split_top(body))):
        if "=" not in item:
            raise ClassSpecError(f"expected key=value in {item!r}")
        k, v = (x.strip() for x in item.split("=", 1))
        if k == "forbid":
            if loader is None:
                raise ClassSpecError("forbidden structures need a file loader")
            params[k] = [loader(p.lstrip("@")) for p in v.split(";") if p]
        else:
            params[k] = v
    return catalog_class(name.strip(), **params)


def _split_top(body: str) -> list[str]:
    # keys cannot contain '=', so a comma followed by a bare key starts the next item
    parts, cur = [], ""
    for tok in body.split(","):
        if cur and "=" in tok:
            parts.append(cur)
            cur = tok
        else:
            cur = f"{cur},{tok}" if cur else tok
    if cur:
        parts.append(cur)
    return parts
