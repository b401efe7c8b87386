import itertools

import pytest

from ccsp.errors import ArgumentError
from ccsp.instance import make_instance
from ccsp.oracle import brute_force_count
from ccsp.reductions import (
    AffineMap,
    BipartiteGraph,
    bis_feasible,
    crossing_to_nonthick,
    parse_graph,
    reduce_bis,
    reduce_constants,
    reduce_crossing,
    reduce_pp_conjunction,
    reduce_pp_exists,
    reduce_restriction,
)
from ccsp.relations import (
    ConstraintLanguage,
    Domain,
    Partition,
    Relation,
    project,
    thick_mapping_decompose,
    vectors_with_total,
)
from ccsp.solver import solve_counts


LE = Relation(2, [(0, 0), (0, 1), (1, 1)], "le")
EQ = Relation.equality(range(2), "eq")
NEQ = Relation(2, [(0, 1), (1, 0)], "neq")


def equivalent(original, out):
    """Feasibility agrees for every vector, checked by brute force on both sides."""
    before, after = brute_force_count(original), brute_force_count(out.instance)
    return all(
        (pi in before) == (out.transform(pi) in after)
        for pi in vectors_with_total(original.domain_size, original.num_vars)
    )


def test_affine_map_compose():
    f = AffineMap(((1, 0), (0, 2)), (1, 0))
    g = AffineMap(((0, 1), (1, 0)), (0, 5))
    assert f.then(g)((3, 4)) == g(f((3, 4)))
    with pytest.raises(ArgumentError):
        f((1, 2, 3))


# -- restriction ----------------------------------------------------------------------------


def _three_language():
    le = Relation(2, [(a, b) for a in range(3) for b in range(3) if a <= b], "le")
    return ConstraintLanguage(Domain(3), (le,))


def test_restriction_forward_map():
    # PAPER: vector extended by zeros off the subset
    full = _three_language()
    p = make_instance(full.restrict([0, 1]), 2, [("le", (0, 1))])
    out = reduce_restriction(p, full, [0, 1])
    assert out.transform((1, 1)) == (1, 1, 0)
    assert equivalent(p, out)


def test_restriction_identity():
    # TRIVIAL
    full = _three_language()
    p = make_instance(full, 2, [("le", (0, 1))])
    out = reduce_restriction(p, full, [0, 1, 2])
    assert out.forward_map == AffineMap.identity(3)


def test_restriction_unmatched_relation():
    full = _three_language()
    other = ConstraintLanguage(Domain(2), (Relation(2, [(1, 0)], "le"),))
    with pytest.raises(ArgumentError):
        reduce_restriction(make_instance(other, 2, [("le", (0, 1))]), full, [0, 1])


# -- pp-definitions ------------------------------------------------------------------------------


def test_pp_and_trivial_conjunction():
    # TRIVIAL: R equal to a single conjunct
    gamma = ConstraintLanguage(Domain(2), (LE,))
    p = make_instance(ConstraintLanguage(Domain(2), (LE.renamed("R"),)).with_relations([LE]), 2,
                      [("R", (0, 1))])
    out = reduce_pp_conjunction(p, gamma, "R", [(LE, None)])
    assert [c.relation.name for c in out.instance.constraints] == ["le"]
    assert equivalent(p, out)


def test_pp_and_equality_and_unary():
    # TRIVIAL: equality plus unary {0} on one pair
    zero = Relation(1, [(0,)], "zero")
    gamma = ConstraintLanguage(Domain(2), (EQ, zero))
    defined = Relation(2, [(0, 0)], "R")
    p = make_instance(gamma.with_relations([defined]), 2, [("R", (0, 1))])
    out = reduce_pp_conjunction(p, gamma, "R", [(EQ, (1, 2)), (zero, (1,))])
    assert len(out.instance.constraints) == 2
    assert brute_force_count(out.instance) == brute_force_count(p)


def test_pp_and_wrong_definition():
    gamma = ConstraintLanguage(Domain(2), (LE, EQ))
    p = make_instance(gamma.with_relations([NEQ.renamed("R")]), 2, [("R", (0, 1))])
    with pytest.raises(ArgumentError):
        reduce_pp_conjunction(p, gamma, "R", [(LE, (1, 2))])
    with pytest.raises(ArgumentError):
        reduce_pp_conjunction(p, gamma, "R", [(LE, (1,))])


def _exists_setup():
    w = Relation(3, [(0, 0, 0), (0, 1, 1), (1, 1, 0)], "W")
    defined = project(w, [1, 2]).renamed("R")
    gamma = ConstraintLanguage(Domain(2), (w,))
    return w, defined, gamma


def test_pp_exists_sizes_and_map():
    # PAPER: q = 1, |D| = 2, |V| = 2, pi = (1,1) gives (3,3) on 6 variables
    w, defined, gamma = _exists_setup()
    p = make_instance(gamma.with_relations([defined]), 2, [("R", (0, 1))])
    out = reduce_pp_exists(p, gamma, "R", w)
    assert out.instance.num_vars == 6
    assert out.transform((1, 1)) == (3, 3)


@pytest.mark.parametrize("scope", [(0, 1), (1, 0), (0, 0)])
def test_pp_exists_both_directions(scope):
    # DERIVED: oracle on both sides, feasible and infeasible vectors
    w, defined, gamma = _exists_setup()
    p = make_instance(gamma.with_relations([defined]), 2, [("R", scope)])
    assert equivalent(p, reduce_pp_exists(p, gamma, "R", w))


def test_pp_exists_needs_constraint():
    w, defined, gamma = _exists_setup()
    p = make_instance(gamma.with_relations([defined]), 2, [])
    with pytest.raises(ArgumentError):
        reduce_pp_exists(p, gamma, "R", w)


def test_pp_exists_size_polynomial():
    # size ladder: variable count is q|D|(|V| + 1) + ... with fixed exponent
    w, defined, gamma = _exists_setup()
    sizes = []
    for n in (2, 4, 8):
        p = make_instance(gamma.with_relations([defined]), n, [("R", (i, i + 1)) for i in range(n - 1)])
        sizes.append(reduce_pp_exists(p, gamma, "R", w).instance.num_vars)
    q = [n - 1 for n in (2, 4, 8)]
    assert sizes == [qq * 2 * n + qq * 2 for qq, n in zip(q, (2, 4, 8))]


# -- constants ------------------------------------------------------------------------------


def test_constants_gadget_sizes():
    # PAPER: n = 3, one constrained variable, pi = (2,1) gives blocks 9 and 3, pi' = (10,4)
    c0 = Relation(1, [(0,)], "C0")
    gamma = ConstraintLanguage(Domain(2), (LE,))
    p = make_instance(gamma.with_relations([c0]), 3, [("C0", (0,)), ("le", (1, 2))])
    out = reduce_constants(p, gamma)
    assert out.instance.num_vars == 14
    assert out.transform((2, 1)) == (10, 4)
    assert equivalent(p, out)


def test_constants_none_present():
    # DERIVED: gadget attached without a constant, equivalence preserved
    gamma = ConstraintLanguage(Domain(2), (NEQ,))
    p = make_instance(gamma, 2, [("neq", (0, 1))])
    out = reduce_constants(p, gamma)
    assert out.instance.num_vars > 2
    assert equivalent(p, out)


def test_constants_two_values():
    # DERIVED: oracle on the small side, polynomial counter on the gadget side
    c0, c1 = Relation(1, [(0,)], "C0"), Relation(1, [(1,)], "C1")
    gamma = ConstraintLanguage(Domain(2), (NEQ,))
    p = make_instance(gamma.with_relations([c0, c1]), 2, [("C0", (0,)), ("C1", (1,)), ("neq", (0, 1))])
    out = reduce_constants(p, gamma)
    assert {c.relation.name for c in out.instance.constraints} <= {"neq"}
    before, after = brute_force_count(p), solve_counts(out.instance)
    for pi in vectors_with_total(2, 2):
        assert (pi in before) == (out.transform(pi) in after)


# -- BIS ------------------------------------------------------------------------------------

CASE1 = Relation(2, [(0, 2), (0, 3), (1, 3)], "R")


def test_bis_single_edge_both_selected():
    # DERIVED: selecting both endpoints of the only edge is excluded
    g = BipartiteGraph(1, 1, ((0, 0),))
    out = reduce_bis(g, 1, 1, CASE1, "1")
    pi = out.transform((1, 1))
    assert pi == (0, 1, 1, 0)
    assert pi not in brute_force_count(out.instance)
    assert not bis_feasible(g, 1, 1)


def test_bis_single_edge_left_only():
    # DERIVED: oracle
    g = BipartiteGraph(1, 1, ((0, 0),))
    out = reduce_bis(g, 1, 0, CASE1, "1")
    assert out.transform((1, 0)) in brute_force_count(out.instance)


@pytest.mark.parametrize(
    "rel, case",
    [
        (Relation(2, [(0, 2), (0, 1), (1, 1)], "R"), "3a"),
        (Relation(2, [(0, 2), (0, 0), (1, 0)], "R"), "3a"),
        (Relation(2, [(0, 0), (0, 2), (1, 2)], "R"), "3b"),
        (Relation(2, [(0, 1), (0, 2), (1, 2)], "R"), "3b"),
    ],
)
def test_bis_case3_small_graphs(rel, case):
    # DERIVED: exhaustive BIS enumerator against oracle
    for g in (BipartiteGraph(1, 1, ((0, 0),)), BipartiteGraph(1, 2, ((0, 0), (0, 1)))):
        for k1, k2 in itertools.product(range(g.left + 1), range(g.right + 1)):
            out = reduce_bis(g, k1, k2, rel, case)
            assert (out.transform((k1, k2)) in brute_force_count(out.instance)) == bis_feasible(g, k1, k2)


def test_bis_errors():
    g = BipartiteGraph(1, 1, ((0, 0),))
    with pytest.raises(ArgumentError):
        reduce_bis(g, 0, 0, Relation.equality(range(2), "R"), "1")
    with pytest.raises(ArgumentError):
        reduce_bis(g, 0, 0, Relation(2, [(0, 2), (0, 1), (1, 1)], "R"), "1")
    with pytest.raises(ArgumentError):
        reduce_bis(BipartiteGraph(2, 1, ((0, 0),)), 0, 0, CASE1, "1")


def test_bis_enumerator_direct():
    # TRIVIAL: path L0 - R0 - L1
    g = BipartiteGraph(2, 1, ((0, 0), (1, 0)))
    assert bis_feasible(g, 2, 0) and bis_feasible(g, 0, 1)
    assert not bis_feasible(g, 1, 1)


def test_parse_graph():
    g = parse_graph("left 2\nright 1\n# c\nedge 0 0\nedge 1 0\n")
    assert g == BipartiteGraph(2, 1, ((0, 0), (1, 0)))
    with pytest.raises(ArgumentError):
        parse_graph("left 1\nedge 0 0\n")


# -- crossing --------------------------------------------------------------------------------

ALPHA = Partition.from_blocks([[0, 2], [1]])
BETA = Partition.from_blocks([[0], [1, 2]])


def test_crossing_relation_pairs():
    # PAPER: the eight listed pairs with a=0, b=1, c=2
    r = crossing_to_nonthick(ALPHA, BETA)
    a, b, c = 0, 1, 2
    assert r.tuple_set == {(a, a), (b, b), (c, c), (a, c), (c, a), (b, c), (c, b), (a, b)}


def test_crossing_relation_not_rectangular():
    # DERIVED: (b,a) missing while (b,b), (a,b), (a,a) present
    r = crossing_to_nonthick(ALPHA, BETA)
    assert thick_mapping_decompose(r)[0] is None
    assert (1, 0) not in r and {(1, 1), (0, 1), (0, 0)} <= r.tuple_set


def test_crossing_requires_crossing():
    # TRIVIAL
    with pytest.raises(ArgumentError):
        crossing_to_nonthick(ALPHA, ALPHA)


@pytest.mark.parametrize("scope", [(0, 1), (1, 0), (0, 0)])
def test_crossing_chain(scope):
    r = crossing_to_nonthick(ALPHA, BETA)
    p = make_instance(ConstraintLanguage(Domain(3), (r,)), 2, [("R", scope)])
    out = reduce_crossing(p, ALPHA, BETA, 3)
    assert {c.relation.name for c in out.instance.constraints} <= {"alpha", "beta"}
    assert equivalent(p, out)
