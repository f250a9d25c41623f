"""Finite relational structures, embeddings, automorphisms and canonical forms."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import SignatureMismatch, StructureSyntaxError

ORDER = "<"
_TOKEN = re.compile(r"^[A-Za-z_<][A-Za-z0-9_<>/.+\-]*$")

Embedding = tuple  # map: position i holds the image of source element i


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        names = [s for s, _ in self.symbols]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate symbol names in {names}")
        for name, arity in self.symbols:
            if not isinstance(arity, int) or arity < 1:
                raise ValueError(f"symbol {name!r} needs a positive arity")
            if name == ORDER and arity != 2:
                raise ValueError("the order symbol must be binary")

    @classmethod
    def of(cls, *pairs) -> "Signature":
        return cls(tuple((str(n), int(k)) for n, k in pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.symbols)

    @property
    def has_order(self) -> bool:
        return ORDER in self.names

    @property
    def order_symbol(self) -> str | None:
        return ORDER if self.has_order else None

    def index(self, name: str) -> int:
        for i, (s, _) in enumerate(self.symbols):
            if s == name:
                return i
        raise KeyError(f"unknown symbol {name!r}")

    def arity(self, name: str) -> int:
        return self.symbols[self.index(name)][1]

    def without(self, name: str) -> "Signature":
        self.index(name)
        return Signature(tuple(p for p in self.symbols if p[0] != name))

    def with_order(self) -> "Signature":
        if self.has_order:
            raise ValueError("signature already carries an order symbol")
        return Signature(self.symbols + ((ORDER, 2),))


@dataclass(frozen=True)
class LinearOrder:
    increasing: tuple[int, ...]

    def __post_init__(self):
        inc = tuple(int(x) for x in self.increasing)
        object.__setattr__(self, "increasing", inc)
        if sorted(inc) != list(range(len(inc))):
            raise ValueError(f"{inc} is not a permutation of 0..{len(inc) - 1}")

    def __len__(self) -> int:
        return len(self.increasing)

    def ranks(self) -> list[int]:
        r = [0] * len(self.increasing)
        for i, x in enumerate(self.increasing):
            r[x] = i
        return r

    def pairs(self) -> frozenset:
        inc = self.increasing
        return frozenset((inc[i], inc[j]) for i in range(len(inc)) for j in range(i + 1, len(inc)))

    def reversed(self) -> "LinearOrder":
        return LinearOrder(self.increasing[::-1])


def _order_from_table(n: int, table) -> tuple[int, ...] | None:
    """Increasing enumeration if the table is a strict total order, else None."""
    if len(table) != n * (n - 1) // 2:
        return None
    below = [0] * n
    for a, b in table:
        if a == b:
            return None
        below[b] += 1
    if sorted(below) != list(range(n)):
        return None
    inc = sorted(range(n), key=below.__getitem__)
    rank = [0] * n
    for i, x in enumerate(inc):
        rank[x] = i
    if any(rank[a] >= rank[b] for a, b in table):
        return None
    return tuple(inc)


@dataclass(frozen=True)
class Structure:
    sig: Signature
    size: int
    tables: tuple[frozenset, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("structures must have a non-empty universe")
        if len(self.tables) != len(self.sig.symbols):
            raise ValueError("one table per symbol expected")
        tables = []
        for (sym, k), table in zip(self.sig.symbols, self.tables):
            table = frozenset(tuple(t) for t in table)
            for t in table:
                if len(t) != k:
                    raise ValueError(f"tuple {t} has wrong arity for {sym}")
                if any(not (0 <= x < self.size) for x in t):
                    raise ValueError(f"tuple {t} of {sym} is out of range")
            tables.append(table)
        object.__setattr__(self, "tables", tuple(tables))
        if self.sig.has_order:
            if _order_from_table(self.size, self.tables[self.sig.index(ORDER)]) is None:
                raise ValueError("the order table is not a strict total order")

    @classmethod
    def build(cls, sig: Signature, size: int, rels: Mapping[str, Iterable] | None = None,
              name: str | None = None, order: Sequence[int] | None = None) -> "Structure":
        rels = dict(rels or {})
        if order is not None:
            rels[ORDER] = LinearOrder(tuple(order)).pairs()
        unknown = set(rels) - set(sig.names)
        if unknown:
            raise ValueError(f"unknown symbols {sorted(unknown)}")
        tables = tuple(frozenset(tuple(t) for t in rels.get(s, ())) for s in sig.names)
        return cls(sig, size, tables, name)

    def table(self, name: str) -> frozenset:
        return self.tables[self.sig.index(name)]

    def holds(self, name: str, t: Sequence[int]) -> bool:
        return tuple(t) in self.table(name)

    def order(self) -> LinearOrder:
        return LinearOrder(_order_from_table(self.size, self.table(ORDER)))

    def key(self) -> tuple:
        """Sort key: size first, then the sorted relation tables."""
        return (self.size, tuple(tuple(sorted(t)) for t in self.tables))

    def relabel(self, perm: Sequence[int]) -> "Structure":
        """Image of the structure under the bijection i -> perm[i]."""
        tables = tuple(frozenset(tuple(perm[x] for x in t) for t in tab) for tab in self.tables)
        return _trusted(self.sig, self.size, tables)

    def __str__(self) -> str:
        return serialize_structure(self)


def _trusted(sig: Signature, size: int, tables: tuple, name=None) -> Structure:
    s = object.__new__(Structure)
    object.__setattr__(s, "sig", sig)
    object.__setattr__(s, "size", size)
    object.__setattr__(s, "tables", tables)
    object.__setattr__(s, "name", name)
    return s


FinStructure = Structure


# --- text format --------------------------------------------------------------

def _ints(parts, lineno):
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise StructureSyntaxError(f"expected integers, got {' '.join(parts)!r}", lineno) from None


def parse_structures(text: str) -> list[Structure]:
    out: list[Structure] = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if cur is None:
            if head != "structure" or len(parts) > 2:
                raise StructureSyntaxError("expected 'structure [name]'", lineno)
            cur = {"name": parts[1] if len(parts) == 2 else None, "size": None,
                   "rels": [], "order": None, "line": lineno}
            continue
        if head == "size":
            if cur["size"] is not None or cur["rels"] or len(parts) != 2:
                raise StructureSyntaxError("misplaced or malformed size line", lineno)
            (n,) = _ints(parts[1:], lineno)
            if n < 1:
                raise StructureSyntaxError("size must be positive", lineno)
            cur["size"] = n
        elif cur["size"] is None:
            raise StructureSyntaxError("size line must come first", lineno)
        elif head == "rel":
            if len(parts) != 4 or parts[2] != "arity":
                raise StructureSyntaxError("expected 'rel <name> arity <k>'", lineno)
            name = parts[1]
            if not _TOKEN.match(name):
                raise StructureSyntaxError(f"bad symbol name {name!r}", lineno)
            (k,) = _ints(parts[3:], lineno)
            if k < 1:
                raise StructureSyntaxError("arity must be positive", lineno)
            if any(r[0] == name for r in cur["rels"]):
                raise StructureSyntaxError(f"repeated rel block {name!r}", lineno)
            if name == ORDER and (k != 2 or cur["order"] is not None):
                raise StructureSyntaxError("'<' must be binary and cannot be combined with an order line", lineno)
            cur["rels"].append((name, k, []))
        elif head == "order":
            if cur["order"] is not None or any(r[0] == ORDER for r in cur["rels"]):
                raise StructureSyntaxError("duplicate order specification", lineno)
            inc = _ints(parts[1:], lineno)
            if sorted(inc) != list(range(cur["size"])):
                raise StructureSyntaxError("order must list every element exactly once", lineno)
            cur["order"] = inc
        elif head == "end":
            out.append(_finish(cur, lineno))
            cur = None
        else:
            if not cur["rels"] or cur["order"] is not None:
                raise StructureSyntaxError(f"unexpected line {line!r}", lineno)
            name, k, rows = cur["rels"][-1]
            t = _ints(parts, lineno)
            if len(t) != k:
                raise StructureSyntaxError(f"arity mismatch for {name}: expected {k} entries", lineno)
            if any(not (0 <= x < cur["size"]) for x in t):
                raise StructureSyntaxError(f"element out of range in {t}", lineno)
            if t in rows:
                raise StructureSyntaxError(f"duplicate tuple {t} in {name}", lineno)
            rows.append(t)
    if cur is not None:
        raise StructureSyntaxError("missing 'end'", cur["line"])
    return out


def _finish(cur, lineno) -> Structure:
    if cur["size"] is None:
        raise StructureSyntaxError("missing size line", lineno)
    symbols = tuple((name, k) for name, k, _ in cur["rels"])
    rels = {name: rows for name, _, rows in cur["rels"]}
    if cur["order"] is not None:
        symbols += ((ORDER, 2),)
    try:
        return Structure.build(Signature(symbols), cur["size"], rels, cur["name"], cur["order"])
    except ValueError as exc:
        raise StructureSyntaxError(str(exc), lineno) from None


def parse_structure(text: str) -> Structure:
    found = parse_structures(text)
    if len(found) != 1:
        raise StructureSyntaxError(f"expected exactly one structure, found {len(found)}")
    return found[0]


def serialize_structure(A: Structure, name: str | None = None) -> str:
    name = name if name is not None else A.name
    lines = ["structure" + (f" {name}" if name else ""), f"size {A.size}"]
    for (sym, k), table in zip(A.sig.symbols, A.tables):
        if sym == ORDER:
            continue
        lines.append(f"rel {sym} arity {k}")
        lines.extend(" ".join(map(str, t)) for t in sorted(table))
    if A.sig.has_order:
        lines.append("order " + " ".join(map(str, A.order().increasing)))
    lines.append("end")
    return "\n".join(lines) + "\n"


def serialize_structures(items: Iterable[Structure]) -> str:
    return "".join(serialize_structure(s) for s in items)


def load_structure(path) -> Structure:
    with open(path, encoding="utf-8") as fh:
        return parse_structure(fh.read())


# --- embeddings -----------------------------------------------------------------

def _same_sig(A: Structure, B: Structure):
    if A.sig != B.sig:
        raise SignatureMismatch(f"signatures differ: {A.sig.symbols} vs {B.sig.symbols}")


@lru_cache(maxsize=4096)
def _source_plan(A: Structure):
    """For each element x, the tuples of A whose largest entry is x."""
    last = [[] for _ in range(A.size)]
    for s, table in enumerate(A.tables):
        for t in table:
            last[max(t)].append((s, t))
    diag = [frozenset(s for s, table in enumerate(A.tables) if (x,) * A.sig.symbols[s][1] in table)
            for x in range(A.size)]
    return last, diag


@lru_cache(maxsize=4096)
def _target_plan(B: Structure):
    inc = [[] for _ in range(B.size)]
    for s, table in enumerate(B.tables):
        for u in table:
            for y in set(u):
                inc[y].append((s, u))
    return inc


def _maps(A: Structure, B: Structure, bijective: bool = False,
          fixed: Mapping[int, int] | None = None, avoid: Iterable[int] = (),
          colors: tuple | None = None) -> Iterator[tuple]:
    m, n = A.size, B.size
    if m > n or (bijective and m != n):
        return
    if bijective and tuple(len(t) for t in A.tables) != tuple(len(t) for t in B.tables):
        return
    last, diag_a = _source_plan(A)
    _, diag_b = _source_plan(B)
    b_inc = _target_plan(B)
    a_tabs, b_tabs = A.tables, B.tables
    fixed = dict(fixed or {})
    avoid = frozenset(avoid)
    cands = []
    for x in range(m):
        if x in fixed:
            opts = [fixed[x]] if diag_a[x] == diag_b[fixed[x]] else []
        else:
            opts = [y for y in range(n) if diag_a[x] == diag_b[y] and y not in avoid]
            if colors is not None:
                opts = [y for y in opts if colors[1][y] == colors[0][x]]
        if not opts:
            return
        cands.append(opts)
    img = [0] * m
    inv: dict[int, int] = {}

    def ok(x, y):
        for s, t in last[x]:
            if tuple(img[z] if z != x else y for z in t) not in b_tabs[s]:
                return False
        if not bijective:
            for s, u in b_inc[y]:
                pre = []
                for w in u:
                    if w == y:
                        pre.append(x)
                    elif w in inv:
                        pre.append(inv[w])
                    else:
                        break
                else:
                    if tuple(pre) not in a_tabs[s]:
                        return False
        return True

    def rec(x):
        if x == m:
            yield tuple(img)
            return
        for y in cands[x]:
            if y in inv or not ok(x, y):
                continue
            img[x] = y
            inv[y] = x
            yield from rec(x + 1)
            del inv[y]

    yield from rec(0)


def embeddings(A: Structure, B: Structure) -> list[tuple]:
    _same_sig(A, B)
    return list(_maps(A, B))


def first_embedding(A: Structure, B: Structure, fixed: Mapping[int, int] | None = None,
                    avoid: Iterable[int] = ()) -> tuple | None:
    _same_sig(A, B)
    return next(_maps(A, B, fixed=fixed, avoid=avoid), None)


def embeds(A: Structure, B: Structure) -> bool:
    return first_embedding(A, B) is not None


def is_embedding(A: Structure, B: Structure, f: Sequence[int]) -> bool:
    """Direct table check of the preservation-and-reflection condition."""
    _same_sig(A, B)
    if len(f) != A.size or len(set(f)) != len(f) or any(not (0 <= y < B.size) for y in f):
        return False
    inv = {y: x for x, y in enumerate(f)}
    for ta, tb in zip(A.tables, B.tables):
        if any(tuple(f[x] for x in t) not in tb for t in ta):
            return False
        inside = [u for u in tb if all(y in inv for y in u)]
        if len(inside) != len(ta):
            return False
    return True


def copies(B: Structure, A: Structure) -> list[tuple[int, ...]]:
    _same_sig(A, B)
    return sorted({tuple(sorted(e)) for e in _maps(A, B)})


# --- refinement, automorphisms and canonical labeling ---------------------------

@lru_cache(maxsize=4096)
def _incidence(A: Structure):
    inc = [[] for _ in range(A.size)]
    for s, table in enumerate(A.tables):
        for t in table:
            for pos, x in enumerate(t):
                inc[x].append((s, pos, tuple(y == x for y in t), t))
    return inc


def _rank(keys) -> list[int]:
    ranks = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [ranks[k] for k in keys]


def _refine(A: Structure, colors: list[int]) -> list[int]:
    inc = _incidence(A)
    ncol = len(set(colors))
    while True:
        keys = [(colors[x], tuple(sorted((s, pos, eq, tuple(colors[y] for y in t))
                                         for s, pos, eq, t in inc[x])))
                for x in range(A.size)]
        new = _rank(keys)
        k = len(set(new))
        if k == ncol:
            return new
        colors, ncol = new, k


@lru_cache(maxsize=4096)
def equitable_colors(A: Structure) -> tuple[int, ...]:
    """Colour refinement from the uniform colouring; an isomorphism invariant."""
    return tuple(_refine(A, [0] * A.size))


def automorphisms(A: Structure) -> list[tuple[int, ...]]:
    c = equitable_colors(A)
    return list(_maps(A, A, bijective=True, colors=(c, c)))


def isomorphisms(A: Structure, B: Structure) -> Iterator[tuple]:
    _same_sig(A, B)
    if A.size != B.size:
        return iter(())
    ca, cb = equitable_colors(A), equitable_colors(B)
    if sorted(ca) != sorted(cb):
        return iter(())
    return _maps(A, B, bijective=True, colors=(ca, cb))


def find_isomorphism(A: Structure, B: Structure) -> tuple | None:
    return next(isomorphisms(A, B), None)


def _encode(A: Structure, lab: Sequence[int]) -> tuple:
    return tuple(tuple(sorted(tuple(lab[y] for y in t) for t in table)) for table in A.tables)


@lru_cache(maxsize=200_000)
def canonical_labeling(A: Structure) -> tuple[int, ...]:
    """Labeling lab (element x gets label lab[x]) whose relabeled tables are least."""
    best: list = [None, None]
    autos: list[tuple] = []

    def orbit_reps(cell, prefix, done):
        gens = [g for g in autos if all(g[p] == p for p in prefix)]
        if not gens:
            return False
        parent = {x: x for x in cell}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        changed = True
        while changed:
            changed = False
            for g in gens:
                for x in cell:
                    y = g[x]
                    if y in parent:
                        rx, ry = find(x), find(y)
                        if rx != ry:
                            parent[max(rx, ry)] = min(rx, ry)
                            changed = True
        return find

    def rec(colors, prefix):
        if len(set(colors)) == A.size:
            enc = _encode(A, colors)
            if best[0] is None or enc < best[0]:
                best[0], best[1] = enc, tuple(colors)
            elif enc == best[0]:
                back = {lab: x for x, lab in enumerate(best[1])}
                autos.append(tuple(back[colors[x]] for x in range(A.size)))
            return
        counts: dict[int, list[int]] = {}
        for x, c in enumerate(colors):
            counts.setdefault(c, []).append(x)
        target = min(c for c, xs in counts.items() if len(xs) > 1)
        cell = counts[target]
        done: list[int] = []
        for v in cell:
            if done:
                find = orbit_reps(cell, prefix, done)
                if find and any(find(v) == find(u) for u in done):
                    continue
            ind = _rank([(c, x != v) for x, c in enumerate(colors)])
            rec(_refine(A, ind), prefix + [v])
            done.append(v)

    rec(list(equitable_colors(A)), [])
    return best[1]


@lru_cache(maxsize=200_000)
def canonical_form(A: Structure) -> Structure:
    return A.relabel(canonical_labeling(A))


def is_isomorphic(A: Structure, B: Structure) -> bool:
    _same_sig(A, B)
    return A.size == B.size and canonical_form(A) == canonical_form(B)


# --- substructures, reducts, expansions ----------------------------------------

def induced_substructure(A: Structure, S: Iterable[int]) -> Structure:
    S = sorted(set(S))
    if not S:
        raise ValueError("induced substructure needs a non-empty subset")
    if S[0] < 0 or S[-1] >= A.size:
        raise ValueError(f"subset {S} out of range for size {A.size}")
    pos = {x: i for i, x in enumerate(S)}
    tables = tuple(frozenset(tuple(pos[x] for x in t) for t in table if all(x in pos for x in t))
                   for table in A.tables)
    return _trusted(A.sig, len(S), tables)


def reduct(A: Structure, drop: str = ORDER) -> Structure:
    i = A.sig.index(drop)
    return _trusted(A.sig.without(drop), A.size, A.tables[:i] + A.tables[i + 1:])


def expand_with_order(A0: Structure, order) -> Structure:
    if A0.sig.has_order:
        raise ValueError("structure already carries an order")
    if not isinstance(order, LinearOrder):
        order = LinearOrder(tuple(order))
    if len(order) != A0.size:
        raise ValueError("order size does not match the structure")
    return _trusted(A0.sig.with_order(), A0.size, A0.tables + (order.pairs(),))
