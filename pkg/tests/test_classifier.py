import itertools

import pytest

from ccsp.classifier import (
    TernaryOperation,
    Verdict,
    bounded_crossing_scan,
    build_mh_from_equivalences,
    classify,
    find_conservative_majority,
    find_conservative_minority,
    is_polymorphism,
    polymorphism_violation,
)
from ccsp.errors import PreconditionError
from ccsp.relations import ConstraintLanguage, Domain, Partition, Relation

from conftest import eq_neq, ex11_language, neq3, xor3

MAJ2 = TernaryOperation.from_function(2, lambda x, y, z: x if x in (y, z) else y, "maj")
XOR = TernaryOperation.from_function(2, lambda x, y, z: x ^ y ^ z, "xor")


def _full_checks(op, kind, lang):
    ident = op.is_majority() if kind == "maj" else op.is_minority()
    return ident and op.is_conservative() and is_polymorphism(op, lang)


def test_majority_preserves_eq_neq():
    # TRIVIAL: verified exhaustively by is_polymorphism
    assert is_polymorphism(MAJ2, eq_neq())


def test_xor_preserves_affine():
    # TRIVIAL: linearity
    assert is_polymorphism(XOR, xor3())


def test_majority_breaks_affine():
    # DERIVED: exhaustive check over all row triples
    assert not is_polymorphism(MAJ2, xor3())
    rel, rows, image = polymorphism_violation(MAJ2, xor3())
    assert image not in rel
    assert all(r in rel for r in rows)
    witness = ((0, 0, 0), (0, 1, 1), (1, 0, 1))
    assert MAJ2.apply(*witness) == (0, 0, 1) and (0, 0, 1) not in rel


def test_majority_found_for_example_relation():
    # PAPER: ten-element example relation is tractable, so a majority exists
    m = find_conservative_majority(ex11_language())
    assert m is not None and _full_checks(m, "maj", ex11_language())


def test_majority_absent_for_three_colouring():
    # PAPER: three-colouring is NP-complete
    assert find_conservative_majority(neq3()) is None


def test_empty_language_gets_least_majority():
    # TRIVIAL: nothing to preserve, first value on every free triple
    lang = ConstraintLanguage(Domain(3), ())
    m = find_conservative_majority(lang)
    for x, y, z in itertools.permutations(range(3)):
        assert m(x, y, z) == x


def test_minority_on_two_values_is_xor():
    # DERIVED: the only conservative minority on two elements
    h = find_conservative_minority(eq_neq())
    assert h.table == XOR.table
    assert find_conservative_minority(xor3()).table == XOR.table


def test_neq3_hard_regardless_of_minority():
    # DERIVED: hardness follows from the failed majority search
    res = classify(neq3())
    assert res.verdict is Verdict.HARD and res.majority is None


@pytest.mark.parametrize(
    "lang, verdict",
    [(neq3(), Verdict.HARD), (eq_neq(), Verdict.TRACTABLE), (xor3(), Verdict.HARD)],
    ids=["three-colouring", "eq-neq", "affine"],
)
def test_classify_fixed_points(lang, verdict):
    # PAPER: verdicts for the standard examples
    res = classify(lang)
    assert res.verdict is verdict
    if verdict is Verdict.TRACTABLE:
        assert _full_checks(res.majority, "maj", lang) and _full_checks(res.minority, "min", lang)
    else:
        assert res.hard_reason


def test_classify_inconclusive_on_tiny_budget():
    res = classify(ex11_language(), node_limit=1)
    assert res.verdict is Verdict.INCONCLUSIVE


def test_classify_deterministic():
    a, b = classify(ex11_language()), classify(ex11_language())
    assert a.majority.table == b.majority.table and a.minority.table == b.minority.table


def test_restriction_stays_tractable():
    lang = ex11_language()
    for subset in ([0, 1, 2], [5, 6, 7, 8], [0, 3, 9]):
        assert classify(lang.restrict(subset)).tractable


# -- m/h construction ---------------------------------------------------------------


def test_mh_defaults_without_equivalences():
    # TRIVIAL
    m, h = build_mh_from_equivalences([], 3)
    assert m(0, 1, 2) == 0 and h(0, 1, 2) == 0
    assert m(1, 0, 0) == 0 and h(1, 0, 0) == 1


def test_mh_separated_case():
    # PAPER: (a|bc) gives m = b and h = a
    a, b, c = 0, 1, 2
    m, h = build_mh_from_equivalences([Partition.from_blocks([[b, c], [a]])], 3)
    assert m(a, b, c) == b
    assert h(a, b, c) == a


def test_mh_identities_and_conservative():
    eqs = [Partition.from_blocks([[0, 1], [2, 3]]), Partition.from_blocks([[0, 1, 2, 3]]),
           Partition.from_blocks([[0], [1]])]
    m, h = build_mh_from_equivalences(eqs, 4)
    assert m.is_majority() and m.is_conservative()
    assert h.is_minority() and h.is_conservative()


def test_mh_rejects_crossing_family():
    crossing = [Partition.from_blocks([[0, 2], [1]]), Partition.from_blocks([[0], [1, 2]])]
    with pytest.raises(PreconditionError):
        build_mh_from_equivalences(crossing, 3)


# -- crossing scan -------------------------------------------------------------------


def test_scan_finds_crossing_pair():
    # PAPER: the two restricted equivalences of the crossing construction
    alpha = Partition.from_blocks([[0, 2], [1]]).to_relation("alpha")
    beta = Partition.from_blocks([[0], [1, 2]]).to_relation("beta")
    res = bounded_crossing_scan(ConstraintLanguage(Domain(3), (alpha, beta)), budget=1)
    assert res.witness is not None
    assert classify(ConstraintLanguage(Domain(3), (alpha, beta))).verdict is Verdict.HARD


def test_scan_equality_absent():
    # TRIVIAL
    res = bounded_crossing_scan(ConstraintLanguage(Domain(2), (Relation.equality(range(2), "eq"),)), 5)
    assert res.witness is None and res.fixed_point


@pytest.mark.parametrize("budget", [0, 1, 2])
def test_scan_example_absent(budget):
    # DERIVED: tractable by classify, so no crossing pair exists in the closure
    assert bounded_crossing_scan(ex11_language(), budget).witness is None
