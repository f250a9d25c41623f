"""Finite approximants of Fraisse limits and bounded extension/homogeneity checks."""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field

from .classes import ClassSpec, enumerate_members, member, one_point_raw
from .errors import ClassSpecError, FraisseError
from .structures import (Structure, _maps, _trusted, automorphisms, canonical_form, first_embedding,
                         induced_substructure)


class BuildStuck(FraisseError):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


def one_point_extensions(K: ClassSpec, A: Structure) -> list[Structure]:
    """Members on |A|+1 points inducing A on {0..|A|-1}, one per type over A."""
    if not member(K, A):
        raise ClassSpecError("A is not a member of the class")
    seen = set()
    out = []
    for B in one_point_raw(K, A):
        if B not in seen and member(K, B):
            seen.add(B)
            out.append(B)
    return sorted(out, key=Structure.key)


def local_type(S: Structure, A: tuple[int, ...], z: int) -> Structure:
    """The structure on A + (z,), with A renumbered 0..|A|-1 in the given order and z last."""
    pos = {x: i for i, x in enumerate(A)}
    pos[z] = len(A)
    tables = tuple(frozenset(tuple(pos[x] for x in t) for t in table if all(x in pos for x in t))
                   for table in S.tables)
    return _trusted(S.sig, len(A) + 1, tables)


class _Index:
    """Per-element incidence lists for fast local types."""

    def __init__(self, S: Structure):
        self.S = S
        self.inc = [[] for _ in range(S.size)]
        for s, table in enumerate(S.tables):
            for t in table:
                for x in set(t):
                    self.inc[x].append((s, t))

    def local(self, A, z):
        pos = {x: i for i, x in enumerate(A)}
        pos[z] = len(A)
        rows = [set() for _ in self.S.tables]
        for u in pos:
            for s, t in self.inc[u]:
                if all(x in pos for x in t):
                    rows[s].add(tuple(pos[x] for x in t))
        return _trusted(self.S.sig, len(A) + 1, tuple(frozenset(r) for r in rows))


@dataclass
class Demand:
    step: int
    A: tuple[int, ...]
    target: Structure

    def key(self):
        return (self.step, canonical_form(self.target).key(), self.A, self.target.key())


@dataclass
class BuildLog:
    seed: int
    demand_size: int
    steps: list = field(default_factory=list)
    satisfied: int = 0
    pending: list = field(default_factory=list)


def _types_over(K, S, A, cache):
    sub = induced_substructure(S, A)
    if sub not in cache:
        cache[sub] = one_point_extensions(K, sub)
    return cache[sub]


def build_approximant(K: ClassSpec, n: int, seed: int = 0, demand_size: int = 2,
                      max_candidates: int = 256, strategy: str = "greedy"):
    """Grow a member of K one point at a time, serving extension demands first in first out.

    The new point must satisfy the head demand; among completions that do, "greedy"
    prefers the one realizing the most outstanding demands, "least" takes the least
    labeled completion.  Returns (structure, log).
    """
    if n < 1:
        raise ValueError("target size must be positive")
    if strategy not in ("greedy", "least"):
        raise ValueError("strategy must be 'greedy' or 'least'")
    rng = random.Random(seed)
    start = enumerate_members(K, 1)
    if not start:
        raise BuildStuck("the class has no one-point member")
    S = start[0]
    log = BuildLog(seed, demand_size)
    cache: dict = {}
    queue: deque[Demand] = deque()

    def demands_for(S, z, step):
        batch = []
        others = [x for x in range(S.size) if x != z]
        for r in range(0, demand_size):
            for rest in itertools.combinations(others, r):
                A = tuple(sorted(rest + (z,)))
                for T in _types_over(K, S, A, cache):
                    batch.append(Demand(step, A, T))
        return sorted(batch, key=Demand.key)

    def satisfied(idx, d, skip=None):
        return any(idx.local(d.A, w) == d.target for w in range(idx.S.size)
                   if w not in d.A and w != skip)

    queue.extend(demands_for(S, 0, 0))
    step = 0
    while S.size < n:
        step += 1
        idx = _Index(S)
        head = None
        while queue:
            d = queue.popleft()
            if satisfied(idx, d):
                log.satisfied += 1
            else:
                head = d
                break
        cands = [T for T in one_point_raw(K, S) if member(K, T)]
        if not cands:
            raise BuildStuck("no one-point extension is a member", S)
        z = S.size
        if head is not None:
            cands = [T for T in cands if _Index(T).local(head.A, z) == head.target]
            if not cands:
                raise BuildStuck("the head demand cannot be met", S)
        cands.sort(key=Structure.key)
        if strategy == "greedy" and len(cands) > 1:
            if len(cands) > max_candidates:
                cands = sorted(rng.sample(cands, max_candidates), key=Structure.key)
            best, best_score = None, -1
            for T in cands:
                ti = _Index(T)
                score = sum(1 for d in queue if ti.local(d.A, z) == d.target)
                score += sum(1 for d in demands_for(T, z, step) if satisfied(ti, d))
                if score > best_score:
                    best, best_score = T, score
            choice = best
        else:
            choice = cands[0]
        log.steps.append({"size": choice.size, "demand": None if head is None else
                          {"A": list(head.A), "type": head.target}})
        if head is not None:
            log.satisfied += 1
        S = choice
        queue.extend(demands_for(S, z, step))
    idx = _Index(S)
    for d in queue:
        if satisfied(idx, d):
            log.satisfied += 1
        else:
            log.pending.append(d)
    return S, log


@dataclass
class ExtensionReport:
    fraction: float
    checked: int
    failures: list


def _extensions_over(K, A_struct, b):
    """Members of size <= b containing A_struct on its first points, up to isomorphism over A."""
    base = A_struct.size
    level = [A_struct]
    out = []
    for size in range(base + 1, b + 1):
        nxt = {}
        for B in level:
            for C in one_point_raw(K, B):
                if not member(K, C):
                    continue
                new = list(range(base, size))
                key = min(C.relabel(list(range(base)) + [base + p[i] for i in range(len(new))]).key()
                          for p in itertools.permutations(range(len(new))))
                nxt.setdefault(key, C)
        level = [nxt[k] for k in sorted(nxt)]
        out.extend(level)
    return out


def check_extension_property(S: Structure, K: ClassSpec, a: int, b: int) -> ExtensionReport:
    failures = []
    total = 0
    for r in range(1, a + 1):
        for A in itertools.combinations(range(S.size), r):
            sub = induced_substructure(S, A)
            for B in _extensions_over(K, sub, b):
                total += 1
                if first_embedding(B, S, fixed={i: x for i, x in enumerate(A)}) is None:
                    failures.append((A, B))
    frac = 1.0 if total == 0 else (total - len(failures)) / total
    return ExtensionReport(frac, total, failures)


@dataclass
class HomogeneityReport:
    checked: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def check_ultrahomogeneity(S: Structure, k: int) -> HomogeneityReport:
    auts = automorphisms(S)
    failures = []
    checked = 0
    for r in range(1, k + 1):
        for X in itertools.combinations(range(S.size), r):
            restr = {tuple(g[x] for x in X) for g in auts}
            sub = induced_substructure(S, X)
            for e in _maps(sub, S):
                checked += 1
                if e not in restr:
                    failures.append((X, e))
    return HomogeneityReport(checked, failures)
