import itertools
import random

import numpy as np
import pytest

from ccsp.classifier import classify, is_polymorphism
from ccsp.consistency import (
    binarize,
    check_supports,
    enforce_2consistency,
    initial_binarization,
    is_2consistent,
    solution_equivalence_check,
)
from ccsp.instance import make_instance
from ccsp.oracle import GeneratorConfig, brute_force_solutions, generate
from ccsp.relations import ConstraintLanguage, Domain, Relation

from conftest import eq_neq


def pairs(b, v, w):
    return set(b.relation(v, w).tuples)


def test_initial_equality():
    # TRIVIAL
    b = initial_binarization(make_instance(eq_neq(), 2, [("eq", (0, 1))]))
    assert pairs(b, 0, 1) == {(0, 0), (1, 1)}


def test_initial_example_projection(ex11):
    # PAPER: ten-element example, projection onto the first two coordinates
    b = initial_binarization(make_instance(ex11, 3, [("R", (0, 1, 2))]))
    e = ex11.domain.element
    want = {(e("1"), e("2")), (e("1"), e("4")), (e("a"), e("b")), (e("d"), e("e"))}
    assert pairs(b, 0, 1) == want


def test_initial_contradiction():
    # TRIVIAL
    b = initial_binarization(make_instance(eq_neq(), 2, [("eq", (0, 1)), ("neq", (0, 1))]))
    assert b.inconsistent


def test_repeated_scope_diagonal():
    # TRIVIAL: neq(v0, v0) has no consistent row
    b = initial_binarization(make_instance(eq_neq(), 2, [("neq", (0, 0))]))
    assert b.inconsistent


def test_chain_with_unary_propagates():
    # TRIVIAL
    lang = eq_neq().with_relations([Relation(1, [(0,)], "zero")])
    inst = make_instance(lang, 3, [("eq", (0, 1)), ("eq", (1, 2)), ("zero", (0,))])
    b = binarize(inst)
    for v, w in itertools.combinations(range(3), 2):
        assert pairs(b, v, w) == {(0, 0)}
    assert all(b.support(v) == {0} for v in range(3))


def test_neq_triangle_empties():
    # DERIVED: brute force finds no solution; each pair lacks an extension
    inst = make_instance(eq_neq(), 3, [("neq", (0, 1)), ("neq", (1, 2)), ("neq", (0, 2))])
    assert binarize(inst).inconsistent


def test_two_variable_supports_synced():
    # DERIVED: binary constraint forces v0 = 1 through the support of v1
    lang = ConstraintLanguage(Domain(3), (Relation(2, [(0, 2), (1, 1), (2, 0)], "r"),
                                          Relation(1, [(1,)], "one")))
    inst = make_instance(lang, 2, [("r", (1, 0)), ("one", (1,))])
    b = binarize(inst)
    assert b.support(0) == {1} and b.support(1) == {1}
    check_supports(b)


def test_idempotent():
    lang, inst = generate(GeneratorConfig(seed=7, num_vars=6, num_constraints=6))
    b = binarize(inst)
    assert enforce_2consistency(b, inst).same_state(b)
    assert is_2consistent(b, inst)


@pytest.mark.parametrize("seed", range(25))
def test_dense_worklist_and_random_orders_agree(seed):
    # DERIVED: greatest fixed point is unique, so every schedule agrees
    cfg = GeneratorConfig(seed=seed, domain_size=3, num_vars=6, num_constraints=7, tractable_only=seed % 2 == 0)
    _, inst = generate(cfg)
    start = initial_binarization(inst)
    ref = enforce_2consistency(start, inst, method="worklist")
    assert enforce_2consistency(start, inst, method="dense").same_state(ref)
    shuffled = enforce_2consistency(start, inst, method="worklist", rng=random.Random(seed))
    assert shuffled.same_state(ref)


def test_unknown_method():
    _, inst = generate(GeneratorConfig(seed=1))
    with pytest.raises(ValueError):
        enforce_2consistency(initial_binarization(inst), inst, method="nope")


def test_only_removes_pairs():
    _, inst = generate(GeneratorConfig(seed=3, num_vars=6, num_constraints=8))
    start = initial_binarization(inst)
    end = binarize(inst)
    if not end.inconsistent:
        assert (end.masks <= start.masks).all()


def test_polymorphisms_preserve_pair_relations():
    # majority and minority of the language also preserve every R_vw
    for seed in range(10):
        lang, inst = generate(GeneratorConfig(seed=seed, num_vars=5, num_constraints=5))
        res = classify(lang)
        b = binarize(inst)
        if b.inconsistent:
            continue
        rels = [b.relation(v, w) for v, w in itertools.combinations(range(b.n), 2)]
        assert is_polymorphism(res.majority, rels) and is_polymorphism(res.minority, rels)


def test_solution_equivalence_chain():
    # TRIVIAL
    inst = make_instance(eq_neq(), 4, [("eq", (i, i + 1)) for i in range(3)])
    assert solution_equivalence_check(inst, binarize(inst))


def test_solution_equivalence_example(ex11):
    # DERIVED: all 10^3 assignments on both sides
    inst = make_instance(ex11, 3, [("R", (0, 1, 2))])
    assert solution_equivalence_check(inst, binarize(inst))


def test_solution_equivalence_fails_without_majority():
    # DERIVED: ternary relation missing only the all-different triples is not
    # captured by its binary projections, which are all full
    rel = Relation(3, [t for t in itertools.product(range(3), repeat=3) if len(set(t)) < 3], "R")
    inst = make_instance(ConstraintLanguage(Domain(3), (rel,)), 3, [("R", (0, 1, 2))])
    b = initial_binarization(inst)
    assert not solution_equivalence_check(inst, b)


def test_global_consistency_after_2consistency():
    # every surviving pair extends to a full solution for majority languages
    for seed in range(15):
        _, inst = generate(GeneratorConfig(seed=seed, num_vars=5, num_constraints=6))
        b = binarize(inst)
        if b.inconsistent:
            continue
        sols = np.array(brute_force_solutions(inst))
        for v, w in itertools.combinations(range(b.n), 2):
            seen = {(int(x), int(y)) for x, y in sols[:, [v, w]]}
            assert seen == pairs(b, v, w)
