"""Property-based checks of the algebraic laws and oracle agreement."""
import itertools
import random

from hypothesis import given, strategies as st

from ccsp.classifier import Verdict, bounded_crossing_scan, build_mh_from_equivalences, classify
from ccsp.consistency import enforce_2consistency, initial_binarization
from ccsp.counter import count_add, count_convolve
from ccsp.errors import PreconditionError
from ccsp.formats import format_language, format_vector, parse_language, parse_vector
from ccsp.oracle import GeneratorConfig, brute_force_count, generate
from ccsp.relations import (
    ConstraintLanguage,
    Domain,
    Partition,
    Relation,
    cardvec_convolve,
    compose,
    crossing_witness,
    inverse,
    join,
    thick_mapping_decompose,
)
from ccsp.solver import SolverStats, solve_counts


def binary_relations(d):
    cells = list(itertools.product(range(d), repeat=2))
    return st.sets(st.sampled_from(cells)).map(lambda s: Relation(2, s))


def partitions(carrier):
    carrier = list(carrier)
    return st.lists(st.integers(0, len(carrier) - 1), min_size=len(carrier), max_size=len(carrier)).map(
        lambda labels: Partition.from_blocks(
            [[x for x, l in zip(carrier, labels) if l == k] for k in set(labels)]
        )
    )


def count_maps(size=2, total=3):
    vecs = [v for v in itertools.product(range(total + 1), repeat=size) if sum(v) == total]
    return st.dictionaries(st.sampled_from(vecs), st.integers(1, 10**12), max_size=4)


@given(binary_relations(4), binary_relations(4), binary_relations(4))
def test_compose_associative(r, q, s):
    assert compose(compose(r, q), s) == compose(r, compose(q, s))


@given(binary_relations(5))
def test_identity_two_sided(r):
    ident = Relation.equality(range(5))
    assert compose(ident, r) == r == compose(r, ident)


@given(binary_relations(4))
def test_inverse_involution(r):
    assert inverse(inverse(r)) == r


@given(binary_relations(3).filter(len))
def test_thick_witness_reconstructs(r):
    w, bad = thick_mapping_decompose(r)
    if w is None:
        a, b, c, d = bad
        assert (b, c) not in r
        return
    rebuilt = {
        (x, y)
        for x in w.alpha1.carrier
        for y in w.block_bijection[w.alpha1.block_of(x)]
    }
    assert rebuilt == r.tuple_set


@given(partitions(range(5)), partitions(range(5)))
def test_crossing_restatement(alpha, beta):
    exists = any(c - b and c & b and b - c for c in alpha.blocks for b in beta.blocks)
    assert (crossing_witness(alpha, beta) is not None) == exists


@given(partitions(range(5)), partitions(range(5)))
def test_join_is_least_upper_bound(alpha, beta):
    j = join(alpha, beta)
    assert j == join(beta, alpha)
    for p in (alpha, beta):
        assert all(any(blk <= big for big in j.blocks) for blk in p.blocks)
    if crossing_witness(alpha, beta) is None:
        union = alpha.to_relation().tuple_set | beta.to_relation().tuple_set
        # non-crossing partitions: join equals the union of the relations
        assert j.to_relation().tuple_set == union


@given(count_maps(), count_maps(), count_maps())
def test_count_convolve_laws(a, b, c):
    assert count_convolve(a, b) == count_convolve(b, a)
    assert count_convolve(count_convolve(a, b), c) == count_convolve(a, count_convolve(b, c))
    assert count_convolve(a, count_add(dict(b), c)) == count_add(count_convolve(a, b), count_convolve(a, c))


@given(count_maps(), count_maps())
def test_cardvec_convolve_matches_support(a, b):
    assert cardvec_convolve(a, b) == set(count_convolve(a, b))
    totals = {sum(v) for v in cardvec_convolve(a, b)}
    assert totals <= {6}


@given(st.integers(1, 5), st.data())
def test_language_round_trip(d, data):
    arity = data.draw(st.integers(1, 3))
    tuples = data.draw(st.sets(st.tuples(*[st.integers(0, d - 1)] * arity), max_size=8))
    lang = ConstraintLanguage(Domain(d), (Relation(arity, tuples, "r"),))
    assert parse_language(format_language(lang)) == lang


@given(st.lists(st.integers(0, 50), min_size=3, max_size=3))
def test_vector_round_trip(v):
    assert parse_vector(format_vector(tuple(v)), Domain(3)) == tuple(v)


@given(st.sets(partitions(range(4)), max_size=3))
def test_mh_identities(family):
    fam = list(family)
    # keep the family only when no triple is separated twice
    try:
        m, h = build_mh_from_equivalences(fam, 4)
    except PreconditionError:
        return
    assert m.is_majority() and m.is_conservative()
    assert h.is_minority() and h.is_conservative()


@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 6), st.integers(0, 8))
def test_solver_matches_oracle(seed, d, n, m):
    _, inst = generate(GeneratorConfig(seed=seed, domain_size=d, num_vars=n, num_constraints=m))
    stats = SolverStats()
    rho = solve_counts(inst, stats=stats, debug=True)
    truth = brute_force_count(inst)
    assert rho == truth
    assert set(rho) == {v for v, c in truth.items() if c}
    assert stats.max_depth <= d


@given(st.integers(0, 10**6))
def test_consistency_confluent(seed):
    _, inst = generate(GeneratorConfig(seed=seed, num_vars=6, num_constraints=8, tractable_only=False))
    start = initial_binarization(inst)
    ref = enforce_2consistency(start, inst, method="worklist")
    other = enforce_2consistency(start, inst, method="worklist", rng=random.Random(seed))
    assert other.same_state(ref)
    assert enforce_2consistency(start, inst, method="dense").same_state(ref)
    assert ref.inconsistent or (ref.masks <= start.masks).all()


@given(st.integers(0, 10**6))
def test_tractable_never_crossing(seed):
    _, inst = generate(GeneratorConfig(seed=seed, domain_size=3, max_arity=2))
    lang = inst.language
    assert classify(lang).verdict is Verdict.TRACTABLE
    assert bounded_crossing_scan(lang, budget=2).witness is None
    # conservative operations restrict to every subset
    for sub in ([0, 1], [1, 2], [0, 2]):
        assert classify(lang.restrict(sub)).tractable
