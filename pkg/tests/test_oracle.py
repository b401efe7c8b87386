import pytest

from ccsp.classifier import Verdict, classify, is_polymorphism
from ccsp.errors import ArgumentError, ResourceLimitError
from ccsp.instance import make_instance
from ccsp.oracle import (
    GeneratorConfig,
    brute_force_count,
    brute_force_solutions,
    cross_validate,
    generate,
    generation_operations,
)
from ccsp.solver import solve_counts

from conftest import eq_neq, ex11_language


def test_disequality_count():
    # TRIVIAL
    assert brute_force_count(make_instance(eq_neq(), 2, [("neq", (0, 1))])) == {(1, 1): 2}


def test_example_relation_four_solutions():
    # PAPER: a single constraint has exactly the four tuples as solutions
    rho = brute_force_count(make_instance(ex11_language(), 3, [("R", (0, 1, 2))]))
    assert sum(rho.values()) == 4


def test_inconsistent_empty():
    # TRIVIAL
    assert brute_force_count(make_instance(eq_neq(), 2, [("eq", (0, 1)), ("neq", (0, 1))])) == {}


def test_cap_guard():
    with pytest.raises(ResourceLimitError):
        brute_force_count(make_instance(eq_neq(), 30, []), cap=1000)


def test_solutions_in_odometer_order():
    sols = brute_force_solutions(make_instance(eq_neq(), 2, []))
    assert sols == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_generate_deterministic():
    # TRIVIAL
    a = generate(GeneratorConfig(seed=1))
    b = generate(GeneratorConfig(seed=1))
    assert a == b


def test_generate_tractable_100_seeds():
    # DERIVED: classify on 100 seeds
    for seed in range(100):
        cfg = GeneratorConfig(seed=seed, domain_size=1 + seed % 4, num_vars=4, max_arity=3)
        lang, inst = generate(cfg)
        assert classify(lang).verdict is Verdict.TRACTABLE
        assert all(r.arity <= 3 for r in lang)
        assert len(inst.constraints) == cfg.num_constraints


def test_generated_relations_closed():
    # exhaustive closure check against the chosen operations
    for seed in range(30):
        cfg = GeneratorConfig(seed=seed, domain_size=4)
        lang, _ = generate(cfg)
        m, h = generation_operations(cfg)
        assert m.is_majority() and h.is_minority()
        assert is_polymorphism(m, lang) and is_polymorphism(h, lang)


def test_generator_rejects_bad_config():
    with pytest.raises(ArgumentError):
        GeneratorConfig(seed=0, domain_size=0)
    with pytest.raises(ArgumentError):
        GeneratorConfig(seed=0, num_constraints=-1)


def test_cross_validate_chain():
    # TRIVIAL
    inst = make_instance(eq_neq(), 4, [("eq", (i, i + 1)) for i in range(3)])
    assert cross_validate(inst).match


def test_cross_validate_detects_corrupted_solver():
    # TRIVIAL: harness sanity through the replacement hook
    inst = make_instance(eq_neq(), 3, [("eq", (0, 1))])

    def broken(p):
        rho = dict(solve_counts(p))
        key = next(iter(sorted(rho)))
        rho[key] += 1
        rho[(1, 1, 1)[: p.domain_size]] = 1
        return rho

    report = cross_validate(inst, solver=broken)
    assert not report.match
    assert report.wrong_counts and "mismatch" in report.summary()
