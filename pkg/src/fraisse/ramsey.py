"""Arrow relations, Ramsey witnesses, orderings, patterns and degree bounds."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .budget import Budget, ensure
from .classes import ClassSpec, admissible_orders, enumerate_members, equivalence_classes, member
from .errors import ClassSpecError, FraisseError
from .structures import (ORDER, LinearOrder, Structure, automorphisms, canonical_form, copies,
                         embeddings, embeds, expand_with_order, first_embedding, induced_substructure)


# --- arrows ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArrowQuery:
    C: Structure
    B: Structure
    A: Structure
    k: int = 2
    t: int = 1

    def __post_init__(self):
        if not (self.A.sig == self.B.sig == self.C.sig):
            raise FraisseError("A, B and C must share a signature")
        if self.k < 2 or self.t < 1:
            raise FraisseError("need k >= 2 colors and tolerance t >= 1")
        if not embeds(self.A, self.B) or not embeds(self.B, self.C):
            raise FraisseError("arrow queries need A <= B <= C")


@dataclass(frozen=True)
class ArrowCertificate:
    query: ArrowQuery
    holds: bool
    acopies: tuple[tuple[int, ...], ...]
    coloring: tuple[int, ...] | None  # colors 1..k, parallel to acopies
    nodes: int
    seconds: float = field(default=0.0, compare=False)

    @property
    def verdict(self) -> str:
        return "holds" if self.holds else "fails"


def _layout(C: Structure, B: Structure, A: Structure):
    acop = copies(C, A)
    index = {S: i for i, S in enumerate(acop)}
    bsets = []
    for S in copies(C, B):
        inside = [index[T] for T in itertools.combinations(S, A.size) if T in index]
        bsets.append(inside)
    return acop, bsets


def arrow_check(q: ArrowQuery, budget: Budget | None = None, max_copies: int = 5000) -> ArrowCertificate:
    """Search for a k-coloring of the A-copies giving every B-copy at least t+1 colors."""
    t0 = time.perf_counter()
    budget = ensure(budget)
    acop, bsets = _layout(q.C, q.B, q.A)
    if len(acop) > max_copies:
        raise FraisseError(f"{len(acop)} copies of A exceed the copy budget {max_copies}")
    k, need = q.k, q.t + 1
    na = len(acop)
    if need > k or any(len(b) < need for b in bsets):
        return ArrowCertificate(q, True, tuple(acop), None, 0, time.perf_counter() - t0)
    watch = [[] for _ in range(na)]
    for j, b in enumerate(bsets):
        for i in b:
            watch[i].append(j)
    counts = [[0] * k for _ in bsets]
    distinct = [0] * len(bsets)
    free = [len(b) for b in bsets]
    color = [-1] * na
    nodes = [0]

    def feasible(j):
        return distinct[j] + min(free[j], k - distinct[j]) >= need

    def rec(i, top):
        if i == na:
            return True
        for c in range(min(k, top + 2)):
            nodes[0] += 1
            budget.tick()
            color[i] = c
            for j in watch[i]:
                counts[j][c] += 1
                if counts[j][c] == 1:
                    distinct[j] += 1
                free[j] -= 1
            if all(feasible(j) for j in watch[i]) and rec(i + 1, max(top, c)):
                return True
            for j in watch[i]:
                counts[j][c] -= 1
                if counts[j][c] == 0:
                    distinct[j] -= 1
                free[j] += 1
        color[i] = -1
        return False

    found = rec(0, -1)
    seconds = time.perf_counter() - t0
    if found:
        return ArrowCertificate(q, False, tuple(acop), tuple(c + 1 for c in color), nodes[0], seconds)
    return ArrowCertificate(q, True, tuple(acop), None, nodes[0], seconds)


def find_homogeneous(C: Structure, B: Structure, A: Structure, coloring, t: int = 1):
    """First B-copy (sorted) whose A-copies take at most t colors, or None.

    coloring maps each A-copy (sorted tuple) to a color, or is a list parallel to copies(C, A).
    """
    acop = copies(C, A)
    if not isinstance(coloring, Mapping):
        if len(coloring) != len(acop):
            raise FraisseError("coloring must cover every copy of A")
        coloring = dict(zip(acop, coloring))
    if any(S not in coloring for S in acop):
        raise FraisseError("coloring must cover every copy of A")
    for S in copies(C, B):
        seen = {coloring[T] for T in itertools.combinations(S, A.size) if T in coloring}
        if len(seen) <= t:
            return S
    return None


def verify_arrow(cert: ArrowCertificate, brute_limit: int = 20) -> bool:
    """Re-execute the defining predicate of a certificate."""
    q = cert.query
    if tuple(copies(q.C, q.A)) != tuple(cert.acopies):
        return False
    if not cert.holds:
        if cert.coloring is None or any(not (1 <= c <= q.k) for c in cert.coloring):
            return False
        return find_homogeneous(q.C, q.B, q.A, cert.coloring, q.t) is None
    again = arrow_check(q)
    if not again.holds:
        return False
    if len(cert.acopies) <= brute_limit:
        _, bsets = _layout(q.C, q.B, q.A)
        for col in itertools.product(range(q.k), repeat=len(cert.acopies)):
            if all(len({col[i] for i in b}) > q.t for b in bsets):
                return False
    return True


@dataclass(frozen=True)
class Witness:
    structure: Structure
    detail: object = None


@dataclass(frozen=True)
class SearchExhausted:
    bound: int
    checked: int = 0
    detail: object = None


def ramsey_witness_search(K: ClassSpec, A: Structure, B: Structure, k: int = 2, t: int = 1,
                          size_bound: int = 6, budget: Budget | None = None, log=None):
    if not (member(K, A) and member(K, B)):
        raise ClassSpecError("A and B must be members of the class")
    if not embeds(A, B):
        raise FraisseError("A must embed in B")
    checked = 0
    for m in range(B.size, size_bound + 1):
        for C in enumerate_members(K, m, budget):
            if not embeds(B, C):
                continue
            checked += 1
            cert = arrow_check(ArrowQuery(C, B, A, k, t), budget)
            if log is not None:
                log.append(cert)
            if cert.holds:
                return Witness(C, cert)
    return SearchExhausted(size_bound, checked)


def iterated_witness(K: ClassSpec, As: Sequence[Structure], B: Structure, k: int = 2,
                     size_bound: int = 8, budget: Budget | None = None):
    """Chain arrow witnesses D_i -> (D_{i-1})^{A_i}_k starting from D_0 = B."""
    D = B
    chain = [B]
    for A in As:
        w = ramsey_witness_search(K, A, D, k, 1, size_bound, budget)
        if not isinstance(w, Witness):
            return SearchExhausted(size_bound, len(chain), chain)
        D = w.structure
        chain.append(D)
    return Witness(D, chain)


def least_element_class_coloring(C: Structure, acopies: Sequence[tuple[int, int]]) -> tuple[int, ...]:
    """Two-coloring of pairs in distinct classes of an ordered equivalence relation.

    Classes are ranked by their least elements; a pair x < y gets color 1 when the
    class of x is ranked before the class of y, and 2 otherwise.
    """
    rank = C.order().ranks()
    classes = equivalence_classes(C)
    first = {}
    for cls in classes:
        lead = min(rank[x] for x in cls)
        for x in cls:
            first[x] = lead
    out = []
    for S in acopies:
        x, y = sorted(S, key=rank.__getitem__)
        out.append(1 if first[x] < first[y] else 2)
    return tuple(out)


# --- orderings and patterns ---------------------------------------------------------------

def _need_order_class(K: ClassSpec, A0: Structure):
    if not K.is_order_class:
        raise ClassSpecError(f"{K.descriptor} is not an order class")
    if A0.sig.has_order:
        raise ClassSpecError("A0 already carries an order")
    if A0.sig != K.reduct_class.sig:
        raise ClassSpecError("A0 is not over the reduct signature")


def admissible_orderings(K: ClassSpec, A0: Structure) -> list[LinearOrder]:
    _need_order_class(K, A0)
    return admissible_orders(K, A0)


@dataclass(frozen=True)
class PatternReport:
    orderings: tuple[LinearOrder, ...]
    orbits: tuple[tuple[LinearOrder, ...], ...]
    aut_size: int
    free: bool

    @property
    def t_K(self) -> int:
        return len(self.orbits)

    @property
    def representatives(self) -> tuple[LinearOrder, ...]:
        return tuple(o[0] for o in self.orbits)


def act(g: Sequence[int], order: LinearOrder) -> LinearOrder:
    return LinearOrder(tuple(g[x] for x in order.increasing))


def patterns(K: ClassSpec, A0: Structure, orderings: Sequence[LinearOrder] | None = None) -> PatternReport:
    X = list(orderings) if orderings is not None else admissible_orderings(K, A0)
    auts = automorphisms(A0)
    left = set(o.increasing for o in X)
    orbits = []
    free = True
    for o in X:
        if o.increasing not in left:
            continue
        orb = {act(g, o).increasing for g in auts}
        fixers = sum(1 for g in auts if act(g, o) == o)
        free = free and fixers == 1
        left -= orb
        orbits.append(tuple(LinearOrder(p) for p in sorted(orb)))
    if free and len(X) != len(orbits) * len(auts):
        free = False
    return PatternReport(tuple(X), tuple(orbits), len(auts), free)


def pattern_lookup(K: ClassSpec, A0: Structure, report: PatternReport | None = None) -> dict:
    report = report or patterns(K, A0)
    return {canonical_form(expand_with_order(A0, o)): i for i, o in enumerate(report.representatives)}


# --- ordering property ------------------------------------------------------------------

def _all_embed(pattern_structs, B0: Structure, K: ClassSpec):
    """None if every admissible ordering of B0 contains every pattern, else a bad ordering."""
    for p in itertools.permutations(range(B0.size)):
        B = expand_with_order(B0, p)
        if not member(K, B):
            continue
        for P in pattern_structs:
            if first_embedding(P, B) is None:
                return LinearOrder(p)
    return None


def ordering_property_check(K: ClassSpec, A0: Structure, size_bound: int, budget: Budget | None = None):
    _need_order_class(K, A0)
    budget = ensure(budget)
    pats = [expand_with_order(A0, o) for o in patterns(K, A0).representatives]
    if not pats:
        raise ClassSpecError("A0 has no admissible ordering")
    checked = 0
    for m in range(A0.size, size_bound + 1):
        for B0 in enumerate_members(K.reduct_class, m, budget):
            budget.tick()
            if not embeds(A0, B0):
                continue
            checked += 1
            if _all_embed(pats, B0, K) is None:
                return Witness(B0, {"patterns": len(pats)})
    return SearchExhausted(size_bound, checked)


def verify_op_witness(K: ClassSpec, A0: Structure, B0: Structure) -> bool:
    """Exact re-check: every admissible A0 ordering embeds in every admissible B0 ordering."""
    if not member(K.reduct_class, B0):
        return False
    As = [expand_with_order(A0, o) for o in admissible_orders(K, A0)]
    Bs = [expand_with_order(B0, o) for o in admissible_orders(K, B0)]
    return bool(As) and all(first_embedding(a, b) is not None for a in As for b in Bs)


# --- Ramsey degrees -------------------------------------------------------------------------

@dataclass(frozen=True)
class DegreeBounds:
    upper: int
    upper_note: str
    lower: int | None
    lower_note: str
    op_witness: Structure | None
    hosts: int


def pattern_coloring(K: ClassSpec, A0: Structure, C0: Structure, lookup: dict,
                     order: LinearOrder | None = None) -> tuple[list, list[int]]:
    """Color each copy of A0 in C0 by its pattern under an admissible ordering of C0."""
    if order is None:
        order = next((o for o in _orders_of(K, C0)), None)
        if order is None:
            raise ClassSpecError("host has no admissible ordering")
    C = expand_with_order(C0, order)
    acop = copies(C0, A0)
    return acop, [lookup[canonical_form(induced_substructure(C, S))] for S in acop]


def _orders_of(K, C0):
    for p in itertools.permutations(range(C0.size)):
        if member(K, expand_with_order(C0, p)):
            yield LinearOrder(p)


def ramsey_degree_bounds(K0: ClassSpec, K: ClassSpec, A0: Structure, size_bound: int,
                         budget: Budget | None = None) -> DegreeBounds:
    _need_order_class(K, A0)
    if K0.sig != K.reduct_class.sig or not member(K0, A0):
        raise ClassSpecError("A0 must be a member of K0 and K must expand K0")
    rep = patterns(K, A0)
    upper = rep.t_K
    unote = "conditional on the Ramsey property of the expansion"
    w = ordering_property_check(K, A0, size_bound, budget)
    if not isinstance(w, Witness):
        return DegreeBounds(upper, unote, None, "no lower bound evidence (no ordering-property witness)",
                            None, 0)
    B0 = w.structure
    lookup = pattern_lookup(K, A0, rep)
    lower = None
    hosts = 0
    for m in range(B0.size, size_bound + 1):
        for C0 in enumerate_members(K0, m, budget):
            if not embeds(B0, C0):
                continue
            hosts += 1
            acop, cols = pattern_coloring(K, A0, C0, lookup)
            col = dict(zip(acop, cols))
            worst = min(len({col[T] for T in itertools.combinations(S, A0.size) if T in col})
                        for S in copies(C0, B0))
            lower = worst if lower is None else min(lower, worst)
    note = f"pattern coloring over {hosts} hosts of size <= {size_bound} containing the witness"
    return DegreeBounds(upper, unote, lower, note, B0, hosts)


# --- pair types and the triangle condition ---------------------------------------------------

def pair_type(A: Structure, a: int, b: int) -> tuple:
    if not A.sig.has_order or (a, b) not in A.table(ORDER):
        raise FraisseError("pair_type expects a < b in the structure's order")
    name = {a: "x", b: "y"}
    facts = []
    for (sym, k), table in zip(A.sig.symbols, A.tables):
        for t in itertools.product((a, b), repeat=k):
            if t in table:
                facts.append((sym, "".join(name[z] for z in t)))
    return tuple(sorted(facts))


@dataclass(frozen=True)
class TriangleReport:
    types: tuple
    witnessed: dict
    unwitnessed: tuple
    bound: int

    @property
    def satisfied(self) -> bool:
        return not self.unwitnessed


def triangle_condition_check(K: ClassSpec, size_bound: int, budget: Budget | None = None) -> TriangleReport:
    if not K.is_order_class:
        raise ClassSpecError(f"{K.descriptor} is not an order class")
    types = set()
    configs = {}
    for n in range(2, size_bound + 1):
        for A in enumerate_members(K, n, budget):
            inc = A.order().increasing
            for i, j in itertools.combinations(range(n), 2):
                types.add(pair_type(A, inc[i], inc[j]))
            for i, j, l in itertools.combinations(range(n), 3):
                a, b, c = inc[i], inc[j], inc[l]
                s1, s2, s3 = pair_type(A, a, b), pair_type(A, b, c), pair_type(A, a, c)
                if s1 == s2 and s1 != s3:
                    configs.setdefault((s1, s3), (A, (a, b, c)))
    types = tuple(sorted(types))
    witnessed, missing = {}, []
    for s, t in itertools.combinations(types, 2):
        hit = configs.get((s, t)) or configs.get((t, s))
        if hit is None:
            missing.append((s, t))
        else:
            witnessed[(s, t)] = hit
    return TriangleReport(types, witnessed, tuple(missing), size_bound)


# --- amalgamation through the Ramsey property -----------------------------------------------

def ramsey_amalgam(K: ClassSpec, A: Structure, B: Structure, C: Structure, f: Sequence[int],
                   g: Sequence[int], size_bound: int, budget: Budget | None = None):
    """Amalgamate f: A -> B and g: A -> C through a homogeneous copy of a joint embedding.

    Each copy A0 of A in a host D is colored by which of B, C extend it (r(f(A)) = A0 or
    s(g(A)) = A0).  A copy of E (a member embedding both B and C) on which every A-copy
    gets both colors yields r and s; for rigid A these satisfy r.f = s.g.
    Returns (D, r, s) or None.
    """
    E = None
    for m in range(max(B.size, C.size), size_bound + 1):
        for X in enumerate_members(K, m, budget):
            if embeds(B, X) and embeds(C, X):
                E = X
                break
        if E is not None:
            break
    if E is None:
        return None
    fa, ga = sorted(set(f)), sorted(set(g))
    for m in range(E.size, size_bound + 1):
        for D in enumerate_members(K, m, budget):
            acop = copies(D, A)
            rs, ss = embeddings(B, D), embeddings(C, D)
            bside = {tuple(sorted(r[x] for x in fa)) for r in rs}
            cside = {tuple(sorted(s[x] for x in ga)) for s in ss}
            both = {S for S in acop if S in bside and S in cside}
            for E0 in copies(D, E):
                inside = [T for T in itertools.combinations(E0, A.size) if T in set(acop)]
                if inside and all(T in both for T in inside):
                    A0 = inside[0]
                    r = next(r for r in rs if tuple(sorted(r[x] for x in fa)) == A0)
                    s = next(s for s in ss if tuple(sorted(s[x] for x in ga)) == A0)
                    return D, r, s
    return None
