"""CSP instances over a constraint language."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import ArgumentError
from .relations import CardinalityVector, ConstraintLanguage, Relation


@dataclass(frozen=True)
class Constraint:
    scope: tuple[int, ...]
    relation: Relation

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(int(v) for v in self.scope))
        if len(self.scope) != self.relation.arity:
            raise ArgumentError(
                f"scope of length {len(self.scope)} for relation of arity {self.relation.arity}"
            )

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        return tuple(assignment[v] for v in self.scope) in self.relation.tuple_set


@dataclass(frozen=True)
class Instance:
    num_vars: int
    constraints: tuple[Constraint, ...]
    language: ConstraintLanguage
    cardinality: CardinalityVector | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.num_vars < 0:
            raise ArgumentError("variable count must be nonnegative")
        for c in self.constraints:
            if any(not 0 <= v < self.num_vars for v in c.scope):
                raise ArgumentError(f"constraint scope {c.scope} uses an unknown variable")
            if c.relation.max_element() >= self.domain_size:
                raise ArgumentError("constraint relation uses elements outside the domain")
        if self.cardinality is not None:
            check_total(self.cardinality, self.num_vars, self.domain_size)

    @property
    def domain_size(self) -> int:
        return self.language.domain.size

    def is_solution(self, assignment: Sequence[int]) -> bool:
        return all(c.satisfied_by(assignment) for c in self.constraints)

    def with_cardinality(self, pi: CardinalityVector | None) -> Instance:
        return Instance(self.num_vars, self.constraints, self.language, pi)


def check_total(pi: CardinalityVector, num_vars: int, domain_size: int) -> None:
    if len(pi) != domain_size:
        raise ArgumentError(f"cardinality vector has {len(pi)} entries, domain has {domain_size}")
    if any(x < 0 for x in pi):
        raise ArgumentError("cardinality entries must be nonnegative")
    if sum(pi) != num_vars:
        raise ArgumentError(f"cardinality total {sum(pi)} differs from variable count {num_vars}")


def make_instance(
    language: ConstraintLanguage,
    num_vars: int,
    constraints: Sequence[tuple[str, Sequence[int]]],
    cardinality: CardinalityVector | None = None,
) -> Instance:
    """Build an instance from ``(relation name, scope)`` pairs."""
    return Instance(
        num_vars,
        tuple(Constraint(tuple(scope), language[name]) for name, scope in constraints),
        language,
        cardinality,
    )
