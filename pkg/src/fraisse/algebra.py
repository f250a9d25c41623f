"""Ordered Boolean algebras and ordered vector spaces over prime fields.

Elements of the m-atom algebra are bitmasks 0..2^m-1 (atom i is 1 << i).  Vectors of
GF(q)^d are integers whose base-q digits are the coordinates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .classes import ClassSpec, ClassSpecError, Component
from .structures import (ORDER, LinearOrder, Signature, Structure, expand_with_order,
                         find_isomorphism, reduct)

MAX_BRIDGE = 64


# --- Boolean algebras -------------------------------------------------------------

@dataclass(frozen=True)
class OrderedBA:
    """The algebra with m atoms, ordered naturally by the atom ranking ``atoms``.

    atoms lists atom indices from least to greatest.
    """
    m: int
    atoms: tuple[int, ...]

    def __post_init__(self):
        if self.m < 1 or sorted(self.atoms) != list(range(self.m)):
            raise ValueError("atoms must be a permutation of 0..m-1 with m >= 1")

    @property
    def top(self) -> int:
        return (1 << self.m) - 1

    def order(self) -> LinearOrder:
        return ba_natural_order(self.m, self.atoms)


def _ba_key(x: int, atoms: Sequence[int]) -> tuple:
    return tuple((x >> a) & 1 for a in reversed(atoms))


def ba_natural_order(m: int, atoms: Sequence[int] | None = None) -> LinearOrder:
    """Antilexicographic order: compare membership of the highest-ranked atom first."""
    atoms = tuple(range(m)) if atoms is None else tuple(atoms)
    if m < 1 or sorted(atoms) != list(range(m)):
        raise ValueError("atom order must rank every atom once")
    return LinearOrder(tuple(sorted(range(1 << m), key=lambda x: _ba_key(x, atoms))))


def ba_is_natural(m: int, order) -> tuple[int, ...] | None:
    """The atom ranking inducing ``order``, or None when the order is not natural."""
    seq = order.increasing if isinstance(order, LinearOrder) else tuple(order)
    if len(seq) != 1 << m:
        raise ValueError("order does not cover the algebra")
    atoms = tuple(x.bit_length() - 1 for x in seq if x and x & (x - 1) == 0)
    if ba_natural_order(m, atoms).increasing != seq:
        return None
    return atoms


def ba_map(f: Sequence[int], x: int) -> int:
    """Extend atom images f to the element x."""
    out = 0
    for i, img in enumerate(f):
        if x >> i & 1:
            out |= img
    return out


def ba_is_order_embedding(B: OrderedBA, C: OrderedBA, f: Sequence[int]) -> bool:
    if len(f) != B.m or any(v <= 0 or v > C.top for v in f):
        return False
    total = 0
    for v in f:
        if total & v:
            return False
        total |= v
    if total != C.top:
        return False
    rank = {x: i for i, x in enumerate(C.order().increasing)}
    seq = [ba_map(f, x) for x in B.order().increasing]
    return all(rank[a] < rank[b] for a, b in zip(seq, seq[1:]))


def ba_amalgamate(B: OrderedBA, C: OrderedBA, D: OrderedBA, f: Sequence[int], g: Sequence[int]):
    """Amalgamate order embeddings f: B -> C and g: B -> D.

    Returns (E, r, s) with r: C -> E and s: D -> E order embeddings (as atom images)
    such that r.f = s.g.  E has |C| + |D| - |B| atoms and its atom ranking is increasing.
    """
    if not ba_is_order_embedding(B, C, f) or not ba_is_order_embedding(B, D, g):
        raise ValueError("f and g must be order embeddings of naturally ordered algebras")
    crank = {a: i for i, a in enumerate(C.atoms)}
    drank = {a: i for i, a in enumerate(D.atoms)}

    def blocks(X, h, rank):
        owner = {}
        for i, b in enumerate(B.atoms):
            for a in range(X.m):
                if h[b] >> a & 1:
                    owner[a] = i
        tops = [max((a for a in range(X.m) if owner[a] == i), key=rank.__getitem__)
                for i in range(B.m)]
        return owner, tops

    cown, ctop = blocks(C, f, crank)
    down, dtop = blocks(D, g, drank)

    def label(side, a, owner, tops):
        return ("t", owner[a]) if tops[owner[a]] == a else (side, a)

    def segments(X, side, owner, tops):
        segs, cur, seen = [], [], []
        for a in X.atoms:
            lab = label(side, a, owner, tops)
            if lab[0] == "t":
                seen.append(lab[1])
                segs.append(cur)
                cur = []
            else:
                cur.append(lab)
        if cur or seen != list(range(B.m)):
            raise ValueError("block maxima are not in the order of B's atoms")
        return segs

    cseg = segments(C, "c", cown, ctop)
    dseg = segments(D, "d", down, dtop)
    seq = []
    for i in range(B.m):
        seq += cseg[i] + dseg[i] + [("t", i)]
    pos = {lab: p for p, lab in enumerate(seq)}
    block_of = {("t", i): i for i in range(B.m)}
    block_of.update({("c", a): cown[a] for a in range(C.m)})
    block_of.update({("d", a): down[a] for a in range(D.m)})

    def images(X, side, owner, tops):
        out = [0] * X.m
        prev = {}
        rank = crank if side == "c" else drank
        for a in sorted(range(X.m), key=rank.__getitem__):
            i = owner[a]
            hi = pos[label(side, a, owner, tops)]
            lo = prev.get(i, -1)
            out[a] = sum(1 << p for lab, p in pos.items() if block_of[lab] == i and lo < p <= hi)
            prev[i] = hi
        return tuple(out)

    E = OrderedBA(len(seq), tuple(range(len(seq))))
    return E, images(C, "c", cown, ctop), images(D, "d", down, dtop)


BA_SIG = Signature.of(("join", 3), ("meet", 3), ("zero", 1), ("one", 1))


def _check_bridge_size(n):
    if n > MAX_BRIDGE:
        raise ValueError(f"bridging is limited to {MAX_BRIDGE} elements")


@lru_cache(maxsize=None)
def bridge_ba(m: int) -> Structure:
    n = 1 << m
    _check_bridge_size(n)
    rels = {"join": [(x, y, x | y) for x in range(n) for y in range(n)],
            "meet": [(x, y, x & y) for x in range(n) for y in range(n)],
            "zero": [(0,)], "one": [(n - 1,)]}
    return Structure.build(BA_SIG, n, rels, name=f"ba{m}")


# --- vector spaces ---------------------------------------------------------------------

def is_prime(q: int) -> bool:
    return q >= 2 and all(q % p for p in range(2, int(q ** 0.5) + 1))


def _need_prime(q):
    if not is_prime(q):
        raise ValueError(f"only prime fields are supported, got q={q}")


def vs_coords(q: int, d: int, v: int) -> tuple[int, ...]:
    return tuple((v // q ** i) % q for i in range(d))


def vs_code(q: int, coords: Sequence[int]) -> int:
    return sum((c % q) * q ** i for i, c in enumerate(coords))


def vs_add(q: int, d: int, u: int, v: int) -> int:
    return vs_code(q, [a + b for a, b in zip(vs_coords(q, d, u), vs_coords(q, d, v))])


def vs_scale(q: int, d: int, a: int, v: int) -> int:
    return vs_code(q, [a * c for c in vs_coords(q, d, v)])


def _span_combo(q, d, basis, alpha):
    return vs_code(q, [sum(a * c for a, c in zip(alpha, col)) for col in
                       zip(*[vs_coords(q, d, b) for b in basis])])


def _antilex(q: int, d: int, basis: Sequence[int], field_order: Sequence[int]) -> tuple[int, ...]:
    rank = {a: i for i, a in enumerate(field_order)}
    alphas = sorted(itertools.product(range(q), repeat=d),
                    key=lambda al: tuple(rank[a] for a in reversed(al)))
    return tuple(_span_combo(q, d, basis, al) for al in alphas)


def vs_natural_order(q: int, d: int, basis: Sequence[int] | None = None,
                     field_order: Sequence[int] | None = None) -> LinearOrder:
    """Natural order from an ordered basis (least first) and a field order with 0 least."""
    _need_prime(q)
    basis = tuple(q ** i for i in range(d)) if basis is None else tuple(basis)
    field_order = tuple(range(q)) if field_order is None else tuple(field_order)
    if sorted(field_order) != list(range(q)) or field_order[0] != 0:
        raise ValueError("field order must be a permutation of GF(q) with 0 least")
    if len(basis) != d or len(set(_antilex(q, d, basis, field_order))) != q ** d:
        raise ValueError("basis is not linearly independent")
    return LinearOrder(_antilex(q, d, basis, field_order))


def ordered_bases(q: int, d: int):
    for basis in itertools.product(range(1, q ** d), repeat=d):
        if len(set(_antilex(q, d, basis, range(q)))) == q ** d:
            yield basis


@lru_cache(maxsize=None)
def _antilex_table(q: int, d: int, field_order: tuple[int, ...]) -> dict:
    out = {}
    for basis in ordered_bases(q, d):
        out.setdefault(_antilex(q, d, basis, field_order), basis)
    return out


def vs_is_natural(q: int, d: int, order, field_order: Sequence[int] | None = None):
    """(basis, field_order) witnessing naturality of ``order``, or None."""
    _need_prime(q)
    seq = order.increasing if isinstance(order, LinearOrder) else tuple(order)
    fos = ([tuple(field_order)] if field_order is not None else
           [(0,) + p for p in itertools.permutations(range(1, q))])
    for fo in fos:
        basis = _antilex_table(q, d, fo).get(seq)
        if basis is not None:
            return basis, fo
    return None


def vs_signature(q: int) -> Signature:
    return Signature(tuple([("add", 3)] + [(f"smul{a}", 2) for a in range(q)] + [("zero", 1)]))


@lru_cache(maxsize=None)
def bridge_vs(q: int, d: int) -> Structure:
    _need_prime(q)
    n = q ** d
    _check_bridge_size(n)
    rels = {"add": [(u, v, vs_add(q, d, u, v)) for u in range(n) for v in range(n)], "zero": [(0,)]}
    for a in range(q):
        rels[f"smul{a}"] = [(v, vs_scale(q, d, a, v)) for v in range(n)]
    return Structure.build(vs_signature(q), n, rels, name=f"gf{q}^{d}")


def bridge_to_structure(kind: str, *args, order=None) -> Structure:
    """Relational encoding of an algebra: ('ba', m) or ('vs', q, d), optionally ordered."""
    S = bridge_ba(*args) if kind == "ba" else bridge_vs(*args)
    return S if order is None else expand_with_order(S, order)


def _log(n: int, base: int) -> int | None:
    d, x = 0, 1
    while x < n:
        x *= base
        d += 1
    return d if x == n else None


@lru_cache(maxsize=100_000)
def _standard_iso(A0: Structure, kind: str, q: int):
    """(standard structure parameters, map standard element -> A0 element) or None."""
    k = _log(A0.size, 2 if kind == "ba" else q)
    if k is None or (kind == "ba" and k < 1) or A0.size > MAX_BRIDGE:
        return None
    S = bridge_ba(k) if kind == "ba" else bridge_vs(q, k)
    if S.sig != A0.sig:
        return None
    phi = find_isomorphism(S, A0)
    return None if phi is None else (k, phi)


def decode_order(A: Structure, kind: str, q: int = 2):
    """Dimension and the order of A transported to the standard algebra."""
    hit = _standard_iso(reduct(A, ORDER), kind, q)
    if hit is None:
        return None
    k, phi = hit
    back = {y: x for x, y in enumerate(phi)}
    return k, phi, tuple(back[y] for y in A.order().increasing)


# --- classes ---------------------------------------------------------------------------------

def _algebra_base(kind: str, q: int, name: str, params: tuple) -> ClassSpec:
    sig = BA_SIG if kind == "ba" else vs_signature(q)

    def pred(A):
        return _standard_iso(A, kind, q) is not None

    def gen(n):
        k = _log(n, 2 if kind == "ba" else q)
        if k is not None and k >= (1 if kind == "ba" else 0) and n <= MAX_BRIDGE and n > 1:
            yield bridge_ba(k) if kind == "ba" else bridge_vs(q, k)
    return ClassSpec(name, sig, (), pred, params, False, None, gen)


def _ordered_algebra(kind: str, q: int, name: str, params: tuple, accept, base: ClassSpec,
                     sample=None) -> ClassSpec:
    def pred(A):
        dec = decode_order(A, kind, q)
        return dec is not None and accept(dec[0], dec[2])

    def gen(n):
        for S in base.generator(n):
            k = _log(n, 2 if kind == "ba" else q)
            if sample is not None:
                yield expand_with_order(S, sample(k))
            else:
                for p in itertools.permutations(range(n)):
                    if accept(k, p):
                        yield expand_with_order(S, p)
    comps = (Component("order", (ORDER,)),)
    K = ClassSpec(name, base.sig.with_order(), comps, pred, params, False, base, gen)
    if kind == "ba":
        K.amalgam_hint = _oba_hint
    return K


def _natural_ba(k, seq):
    return ba_is_natural(k, seq) is not None


def _oba_hint(A, B, C, f, g):
    dec = [decode_order(X, "ba") for X in (A, B, C)]
    if any(x is None for x in dec):
        return []
    (ka, pa, oa), (kb, pb, ob), (kc, pc, oc) = dec
    atoms = [ba_is_natural(k, o) for k, o in ((ka, oa), (kb, ob), (kc, oc))]
    if None in atoms:
        return []
    Bq, Cq, Dq = (OrderedBA(k, at) for k, at in zip((ka, kb, kc), atoms))
    inv_b = {y: x for x, y in enumerate(pb)}
    inv_c = {y: x for x, y in enumerate(pc)}
    fa = tuple(inv_b[f[pa[1 << i]]] for i in range(ka))
    ga = tuple(inv_c[g[pa[1 << i]]] for i in range(ka))
    try:
        E, _, _ = ba_amalgamate(Bq, Cq, Dq, fa, ga)
    except ValueError:
        return []
    return [bridge_to_structure("ba", E.m, order=E.order())]


def ba_expansion_class(pi: Sequence[str], reverse: bool = False) -> ClassSpec:
    """Orders obtained from a natural order by placing 0 and 1 as in ``pi``.

    pi arranges the tokens '0', '1' and 'a' (the block of remaining elements) from least
    to greatest; ``reverse`` flips the whole order.
    """
    pi = tuple(str(t) for t in pi)
    if sorted(pi) != ["0", "1", "a"]:
        raise ValueError("pi must arrange the tokens 0, 1, a")

    def accept(k, seq):
        seq = tuple(seq)[::-1] if reverse else tuple(seq)
        top = (1 << k) - 1
        tokens = []
        for x in seq:
            t = "0" if x == 0 else "1" if x == top else "a"
            if not (tokens and tokens[-1] == "a" and t == "a"):
                tokens.append(t)
        want = [t for t in pi if t != "a" or k > 1]
        if tokens != want:
            return False
        block = [x for x in seq if x not in (0, top)]
        return _natural_ba(k, (0, *block, top))

    name = "ba_exp"
    params = (("pi", "".join(pi)), ("reverse", int(reverse)))
    return _ordered_algebra("ba", 2, name, params, accept, _algebra_base("ba", 2, "ba", ()))


VS_FAMILIES = ("K1", "K2", "L1", "L2")


def vs_expansion_class(family: str, q: int, field_order: Sequence[int] | None = None) -> ClassSpec:
    """K1: natural orders; K2: K1 with 0 moved to the top; L1 and L2 likewise for a field
    order having 0 greatest."""
    _need_prime(q)
    if family not in VS_FAMILIES:
        raise ValueError(f"family must be one of {VS_FAMILIES}")
    if field_order is None:
        field_order = tuple(range(q)) if family.startswith("K") else tuple(range(1, q)) + (0,)
    fo = tuple(field_order)
    if sorted(fo) != list(range(q)):
        raise ValueError("field order must be a permutation of GF(q)")
    if family.startswith("K") and fo[0] != 0:
        raise ValueError("K families need 0 least in the field order")
    if family.startswith("L") and fo[-1] != 0:
        raise ValueError("L families need 0 greatest in the field order")

    def natural(d, seq):
        return tuple(seq) in _antilex_table(q, d, fo)

    def accept(d, seq):
        seq = tuple(seq)
        if family == "K1" or family == "L1":
            return natural(d, seq)
        if family == "K2":
            return seq[-1] == 0 and natural(d, (0,) + seq[:-1])
        return seq[0] == 0 and natural(d, seq[1:] + (0,))

    params = (("family", family), ("q", q), ("field_order", "".join(map(str, fo))))
    return _ordered_algebra("vs", q, "vs_exp", params, accept, _algebra_base("vs", q, "vf", (("q", q),)))


def algebra_class(name: str, params: dict) -> ClassSpec:
    if name in ("ba", "oba"):
        base = _algebra_base("ba", 2, "ba", ())
        if name == "ba":
            return base
        return _ordered_algebra("ba", 2, "oba", (), _natural_ba, base,
                                sample=lambda k: ba_natural_order(k).increasing)
    try:
        q = int(params.get("q", 2))
    except ValueError:
        raise ClassSpecError("q must be an integer") from None
    if not is_prime(q):
        raise ClassSpecError(f"only prime fields are supported, got q={q}")
    base = _algebra_base("vs", q, "vf", (("q", q),))
    if name == "vf":
        return base
    fo = tuple(range(q))
    if "field_order" in params:
        fo = tuple(int(c) for c in str(params["field_order"]).replace(",", " ").replace("-", " ").split())
    if sorted(fo) != list(range(q)) or fo[0] != 0:
        raise ClassSpecError("field_order must list GF(q) with 0 first")

    def accept(d, seq):
        return tuple(seq) in _antilex_table(q, d, fo)
    return _ordered_algebra("vs", q, "ovf", (("q", q),), accept, base,
                            sample=lambda d: _antilex(q, d, tuple(q ** i for i in range(d)), fo))
