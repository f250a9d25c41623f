"""Brute-force reference computations used to freeze and cross-check expected values.

Nothing here calls into the search code under test; only the Structure container is shared.
"""

import functools
import itertools


def _holds(A, s, t):
    return tuple(t) in A.tables[s]


def is_embedding(A, B, f):
    if len(set(f)) != len(f):
        return False
    for s, (_, k) in enumerate(A.sig.symbols):
        for t in itertools.product(range(A.size), repeat=k):
            if _holds(A, s, t) != _holds(B, s, tuple(f[x] for x in t)):
                return False
    return True


def embeddings(A, B):
    return [f for f in itertools.permutations(range(B.size), A.size) if is_embedding(A, B, f)]


def automorphisms(A):
    return [f for f in itertools.permutations(range(A.size)) if is_embedding(A, A, f)]


def copies(B, A):
    return sorted({tuple(sorted(f)) for f in embeddings(A, B)})


def relabel_key(A, p):
    return tuple(tuple(sorted(tuple(p[x] for x in t) for t in table)) for table in A.tables)


def brute_canonical_key(A):
    return min(relabel_key(A, p) for p in itertools.permutations(range(A.size)))


def iso_classes(structs):
    return {brute_canonical_key(A) for A in structs}


def labelled_graphs(n):
    from fraisse.classes import graph
    pairs = list(itertools.combinations(range(n), 2))
    for bits in range(1 << len(pairs)):
        yield graph(n, [e for i, e in enumerate(pairs) if bits >> i & 1])


def connected(G):
    seen, stack = {0}, [0]
    E = G.tables[0]
    while stack:
        u = stack.pop()
        for v in range(G.size):
            if (u, v) in E and v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == G.size


def arrow_holds(C, B, A, k=2, t=1):
    """Try every k-coloring of the A-copies of C."""
    acopies = copies(C, A)
    index = {c: i for i, c in enumerate(acopies)}
    bsets = []
    for S in copies(C, B):
        bsets.append([index[c] for c in acopies if set(c) <= set(S)])
    for col in itertools.product(range(k), repeat=len(acopies)):
        if not any(len({col[i] for i in inside}) <= t for inside in bsets):
            return False
    return True


def coloring_is_bad(C, B, A, acopies, coloring, t=1):
    """True when no B-copy of C sees at most t colors (coloring parallel to acopies)."""
    col = dict(zip(acopies, coloring))
    for S in copies(C, B):
        seen = {col[c] for c in acopies if set(c) <= set(S)}
        if len(seen) <= t:
            return False
    return True


# --- algebra ---------------------------------------------------------------------------

def ba_order(m, atoms):
    """x < y iff, at the highest-ranked atom where they differ, y contains it."""
    def cmp(x, y):
        for a in reversed(atoms):
            bx, by = x >> a & 1, y >> a & 1
            if bx != by:
                return -1 if by else 1
        return 0
    return tuple(sorted(range(1 << m), key=functools.cmp_to_key(cmp)))


def ba_embedding_count(m, n):
    """Injective Boolean homomorphisms 2^m -> 2^n, counted via atom images."""
    top = (1 << n) - 1
    count = 0
    for imgs in itertools.product(range(1, top + 1), repeat=m):
        acc = 0
        ok = True
        for v in imgs:
            if acc & v:
                ok = False
                break
            acc |= v
        count += ok and acc == top
    return count


def _vec(q, d, v):
    return [v // q ** i % q for i in range(d)]


def _code(q, xs):
    return sum(x * q ** i for i, x in enumerate(xs))


def vs_combo(q, d, basis, alpha):
    cols = [_vec(q, d, b) for b in basis]
    return _code(q, [sum(a * c[i] for a, c in zip(alpha, cols)) % q for i in range(d)])


def vs_order(q, d, basis, field_order):
    """Compare coefficient vectors from the last basis vector down, by field order."""
    rank = {a: i for i, a in enumerate(field_order)}
    vecs = {}
    for alpha in itertools.product(range(q), repeat=d):
        vecs[vs_combo(q, d, basis, alpha)] = alpha

    def cmp(x, y):
        ax, ay = vecs[x], vecs[y]
        for i in reversed(range(d)):
            if ax[i] != ay[i]:
                return -1 if rank[ax[i]] < rank[ay[i]] else 1
        return 0
    return tuple(sorted(vecs, key=functools.cmp_to_key(cmp)))


def vs_embedding_count(q, d, e):
    """Injective linear maps GF(q)^d -> GF(q)^e via basis images."""
    count = 0
    for imgs in itertools.product(range(q ** e), repeat=d):
        span = {vs_combo(q, e, imgs, al) for al in itertools.product(range(q), repeat=d)}
        count += len(span) == q ** d
    return count


# --- class enumeration -----------------------------------------------------------------

def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in set_partitions(rest):
        yield [[first]] + p
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]


def labelled_equivalences(n):
    from fraisse.classes import equivalence
    for p in set_partitions(range(n)):
        yield equivalence(n, p)


def all_orderings(structs):
    from fraisse.structures import expand_with_order
    for A in structs:
        for p in itertools.permutations(range(A.size)):
            yield expand_with_order(A, p)


def is_convex(A):
    inc = A.order().increasing
    E = A.tables[0]
    for i in range(len(inc)):
        for j in range(i + 2, len(inc)):
            if (inc[i], inc[j]) in E:
                if any((inc[i], inc[m]) not in E for m in range(i + 1, j)):
                    return False
    return True
