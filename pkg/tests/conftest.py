import itertools

import pytest
from hypothesis import HealthCheck, settings

from ccsp.relations import ConstraintLanguage, Domain, Relation

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

EX11_LABELS = ("1", "2", "3", "4", "5", "a", "b", "c", "d", "e")


def ex11_domain() -> Domain:
    return Domain(10, EX11_LABELS)


def ex11_relation() -> Relation:
    e = ex11_domain().element
    rows = [("1", "2", "3"), ("1", "4", "5"), ("a", "b", "c"), ("d", "e", "c")]
    return Relation(3, [tuple(e(x) for x in t) for t in rows], "R")


def ex11_language() -> ConstraintLanguage:
    return ConstraintLanguage(ex11_domain(), (ex11_relation(),))


def eq_neq() -> ConstraintLanguage:
    return ConstraintLanguage(
        Domain(2), (Relation.equality(range(2), "eq"), Relation(2, [(0, 1), (1, 0)], "neq"))
    )


def neq3() -> ConstraintLanguage:
    return ConstraintLanguage(
        Domain(3), (Relation(2, [(a, b) for a in range(3) for b in range(3) if a != b], "neq"),)
    )


def xor3() -> ConstraintLanguage:
    return ConstraintLanguage(
        Domain(2),
        (Relation(3, [t for t in itertools.product(range(2), repeat=3) if sum(t) % 2 == 0], "x"),),
    )


@pytest.fixture
def ex11():
    return ex11_language()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
