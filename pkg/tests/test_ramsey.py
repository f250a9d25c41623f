import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fraisse.budget import Budget
from fraisse.classes import catalog_class, complete_graph, enumerate_members, equivalence, graph
from fraisse.errors import BudgetExceeded, ClassSpecError, FraisseError
from fraisse.ramsey import (ArrowQuery, SearchExhausted, Witness, admissible_orderings, arrow_check,
                            find_homogeneous, iterated_witness, ordering_property_check, pair_type,
                            pattern_coloring, pattern_lookup, patterns, ramsey_amalgam, ramsey_degree_bounds,
                            ramsey_witness_search, triangle_condition_check, verify_arrow, verify_op_witness)
from fraisse.structures import (ORDER, Signature, Structure, automorphisms, copies, embeds,
                                expand_with_order, induced_substructure, reduct)

K = complete_graph
P3 = graph(3, [(0, 1), (1, 2)])
LO = catalog_class("lo")
OGR = catalog_class("ogr")


def chain(n):
    return expand_with_order(Structure.build(Signature(), n), range(n))


def arrow(C, B, A, k=2, t=1):
    return arrow_check(ArrowQuery(C, B, A, k, t))


def test_arrow_examples():
    assert arrow(K(4), K(3), K(2), t=2).holds
    assert not arrow(K(5), K(3), K(2)).holds
    assert arrow(K(6), K(3), K(2)).holds
    assert arrow(chain(5), chain(3), chain(1)).holds
    assert not arrow(chain(4), chain(3), chain(1)).holds


def test_arrow_against_brute_force():
    for C, B, A in [(K(5), K(3), K(2)), (K(6), K(3), K(2)), (chain(5), chain(3), chain(1)),
                    (chain(4), chain(3), chain(1)), (graph(5, [(i, (i + 1) % 5) for i in range(5)]), P3, K(2))]:
        assert arrow(C, B, A).holds == oracles.arrow_holds(C, B, A)


def test_fails_certificate_is_sound():
    cert = arrow(K(5), K(3), K(2))
    assert cert.verdict == "fails"
    assert set(cert.coloring) == {1, 2}
    assert oracles.coloring_is_bad(K(5), K(3), K(2), cert.acopies, cert.coloring)
    assert verify_arrow(cert)
    assert find_homogeneous(K(5), K(3), K(2), cert.coloring) is None


def test_tampered_certificate_is_rejected():
    cert = arrow(K(5), K(3), K(2))
    bad = type(cert)(cert.query, False, cert.acopies, (1,) * len(cert.acopies), 0)
    assert not verify_arrow(bad)
    lie = type(cert)(cert.query, True, cert.acopies, None, 0)
    assert not verify_arrow(lie)


def test_query_validation():
    with pytest.raises(FraisseError):
        ArrowQuery(K(3), K(4), K(2))
    with pytest.raises(FraisseError):
        ArrowQuery(K(3), K(3), K(2), k=1)
    with pytest.raises(FraisseError):
        ArrowQuery(K(3), K(3), chain(1))


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        arrow_check(ArrowQuery(K(6), K(3), K(2)), Budget(nodes=10))


def test_find_homogeneous():
    n = len(copies(K(4), K(2)))
    assert find_homogeneous(K(4), K(3), K(2), [1] * n) == (0, 1, 2)
    acop = copies(K(6), K(2))
    col = {S: sum(S) % 2 for S in acop}
    S = find_homogeneous(K(6), K(3), K(2), col)
    assert S is not None and len({col[T] for T in itertools.combinations(S, 2)}) == 1
    brute = [T for T in itertools.combinations(range(6), 3)
             if len({col[p] for p in itertools.combinations(T, 2)}) == 1]
    assert S == brute[0]
    with pytest.raises(FraisseError):
        find_homogeneous(K(4), K(3), K(2), [1, 2])


def test_witness_search():
    w = ramsey_witness_search(LO, chain(1), chain(3), 2, 1, 6)
    assert isinstance(w, Witness) and w.structure.size == 5
    w = ramsey_witness_search(catalog_class("graphs"), K(2), K(3), 2, 1, 6)
    assert isinstance(w, Witness) and w.structure == K(6)
    log = []
    w = ramsey_witness_search(catalog_class("graphs"), K(2), K(3), 2, 1, 5, log=log)
    assert isinstance(w, SearchExhausted) and w.checked == len(log) > 0


def test_iterated_witness_on_chains():
    w = iterated_witness(LO, [chain(1), chain(1)], chain(2), 2, 6)
    assert isinstance(w, Witness)
    assert [D.size for D in w.detail] == [2, 3, 5]


def test_admissible_orderings_and_patterns():
    assert len(admissible_orderings(OGR, K(2))) == 2
    assert len(admissible_orderings(catalog_class("convex_eq"), equivalence(3, [[0, 1], [2]]))) == 4
    assert len(admissible_orderings(catalog_class("oba"), reduct(_oba(2)))) == 2
    assert patterns(OGR, K(2)).t_K == 1
    assert patterns(OGR, P3).t_K == 3
    assert patterns(OGR, K(1)).t_K == 1
    with pytest.raises(ClassSpecError):
        patterns(catalog_class("graphs"), K(2))


def _oba(m):
    from fraisse.algebra import ba_natural_order, bridge_to_structure
    return bridge_to_structure("ba", m, order=ba_natural_order(m))


def test_pattern_count_matches_brute_orbits():
    for G in enumerate_members(catalog_class("graphs"), 4):
        auts = oracles.automorphisms(G)
        orbits = {min(tuple(g[x] for x in p) for g in auts) for p in itertools.permutations(range(4))}
        assert patterns(OGR, G).t_K == len(orbits)


def test_ordering_property():
    w = ordering_property_check(LO, Structure.build(Signature(), 3), 5)
    assert isinstance(w, Witness) and w.structure.size == 3
    A0 = equivalence(2, [[0, 1]])
    w = ordering_property_check(catalog_class("convex_eq"), A0, 6)
    assert isinstance(w, Witness)
    assert verify_op_witness(catalog_class("convex_eq"), A0, w.structure)
    A1 = equivalence(3, [[0, 1], [2]])
    assert not verify_op_witness(catalog_class("oeq"), A1, A1)


def test_degree_bounds():
    d = ramsey_degree_bounds(catalog_class("graphs"), OGR, K(3), 5)
    assert (d.upper, d.lower) == (1, 1)
    d = ramsey_degree_bounds(catalog_class("sets"), LO, Structure.build(Signature(), 2), 4)
    assert d.upper == 1
    d = ramsey_degree_bounds(catalog_class("graphs"), OGR, P3, 4)
    assert d.upper == 3 and d.lower is None


def test_degree_of_path_reaches_three():
    d = ramsey_degree_bounds(catalog_class("graphs"), OGR, P3, 7)
    assert d.upper == 3 and d.lower == 3
    assert verify_op_witness(OGR, P3, d.op_witness)


def test_pattern_coloring_depends_only_on_pattern():
    lookup = pattern_lookup(OGR, P3)
    C0 = graph(4, [(0, 1), (1, 2), (2, 3)])
    order = (2, 0, 3, 1)
    acop, cols = pattern_coloring(OGR, P3, C0, lookup, order)
    C = expand_with_order(C0, order)
    reps = patterns(OGR, P3).representatives
    for S, c in zip(acop, cols):
        sub = induced_substructure(C, S)
        match = [i for i, o in enumerate(reps)
                 if oracles.brute_canonical_key(expand_with_order(P3, o)) == oracles.brute_canonical_key(sub)]
        assert match == [c]


def test_pair_types():
    e = expand_with_order(K(2), (0, 1))
    assert pair_type(e, 0, 1) == (("<", "xy"), ("E", "xy"), ("E", "yx"))
    assert pair_type(expand_with_order(graph(2, []), (0, 1)), 0, 1) == (("<", "xy"),)
    oeq = expand_with_order(equivalence(3, [[0, 1], [2]]), (0, 1, 2))
    assert pair_type(oeq, 0, 1) != pair_type(oeq, 1, 2)
    with pytest.raises(FraisseError):
        pair_type(e, 1, 0)


def test_triangle_condition():
    assert triangle_condition_check(catalog_class("posets_le"), 4).satisfied
    rep = triangle_condition_check(catalog_class("convex_eq"), 4)
    assert len(rep.unwitnessed) == 1
    rep = triangle_condition_check(OGR, 3)
    assert rep.satisfied and len(rep.types) == 2
    (A, (a, b, c)), = rep.witnessed.values()
    s1, s2, s3 = pair_type(A, a, b), pair_type(A, b, c), pair_type(A, a, c)
    assert s1 == s2 != s3


def test_ramsey_amalgam_on_chains():
    A, B, C = chain(1), chain(2), chain(2)
    D, r, s = ramsey_amalgam(LO, A, B, C, (0,), (1,), 4)
    assert r[0] == s[1]
    assert embeds(B, D)


ARROW_INSTANCES = [(K(4), K(3), K(2)), (K(5), K(3), K(2)), (K(6), K(3), K(2)), (K(5), K(4), K(2)),
                   (chain(4), chain(3), chain(1)), (chain(5), chain(3), chain(1)), (chain(6), chain(3), chain(2)),
                   (chain(5), chain(4), chain(2)), (K(5), K(3), K(1)), (K(6), K(2), K(1))]


@pytest.mark.parametrize("i", range(len(ARROW_INSTANCES)))
def test_arrow_t_monotone(i):
    C, B, A = ARROW_INSTANCES[i]
    for k in (2, 3):
        prev = False
        for t in (1, 2, 3):
            now = arrow(C, B, A, k, t).holds
            assert now or not prev
            prev = now


@given(st.sampled_from(range(len(ARROW_INSTANCES))), st.integers(0, 2))
def test_arrow_host_monotone(i, extra):
    C, B, A = ARROW_INSTANCES[i]
    if C.size + extra > 6:
        return
    bigger = K(C.size + extra) if ORDER not in C.sig.names else chain(C.size + extra)
    assert embeds(C, bigger)
    if arrow(C, B, A).holds:
        assert arrow(bigger, B, A).holds


@pytest.mark.parametrize("i", range(len(ARROW_INSTANCES)))
def test_certificates_cross_checked(i):
    C, B, A = ARROW_INSTANCES[i]
    cert = arrow(C, B, A)
    assert verify_arrow(cert)
    if len(cert.acopies) <= 20:
        assert cert.holds == oracles.arrow_holds(C, B, A)


FREE_CLASSES = [("ogr", "graphs", 5), ("convex_eq", "eq", 5), ("posets_le", "posets", 4), ("oeq", "eq", 5),
                ("op_n", None, 4)]


@pytest.mark.parametrize("name,base,top", FREE_CLASSES)
def test_free_action(name, base, top):
    Kc = catalog_class(name, **({"n": 2} if name == "op_n" else {}))
    for n in range(1, top + 1):
        for A0 in enumerate_members(Kc.reduct_class, n):
            rep = patterns(Kc, A0)
            assert rep.free
            assert len(rep.orderings) == rep.t_K * rep.aut_size
            for o in rep.orderings:
                C = expand_with_order(A0, o)
                assert len(automorphisms(C)) == 1
