"""The eight acceptance criteria at their full sizes.

Each test prints one PASS/FAIL line (also collected into the terminal
summary).  Run alone with ``pytest tests/test_acceptance.py -s``.
"""
import pytest

from ccsp import acceptance

from conftest import ACCEPTANCE_LINES

SUITE = 500


def _report(result):
    line = result.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert result.passed, line


def test_criterion_1_decision_matches_oracle():
    _report(acceptance.criterion_1(SUITE))


def test_criterion_2_counts_match_oracle():
    _report(acceptance.criterion_2(SUITE))


def test_criterion_3_classifier_fixed_points():
    _report(acceptance.criterion_3())


def test_criterion_4_dichotomy_coherence():
    _report(acceptance.criterion_4())


def test_criterion_5_structural_invariants():
    _report(acceptance.criterion_5(SUITE))


def test_criterion_6_reduction_soundness():
    _report(acceptance.criterion_6())


def test_criterion_7_binarization_equivalence():
    _report(acceptance.criterion_7())


@pytest.mark.slow
def test_criterion_8_polynomial_scaling():
    _report(acceptance.criterion_8())
