"""Constraint satisfaction with global cardinality constraints.

Polynomial solving and exact counting for tractable conservative languages,
checked against a brute-force oracle.
"""
from .classifier import (
    ClassificationResult,
    TernaryOperation,
    Verdict,
    bounded_crossing_scan,
    build_mh_from_equivalences,
    classify,
    find_conservative_majority,
    find_conservative_minority,
    is_polymorphism,
)
from .consistency import (
    BinarizedInstance,
    binarize,
    enforce_2consistency,
    initial_binarization,
    solution_equivalence_check,
)
from .counter import count_all, count_convolve, count_decide, ext_count
from .errors import (
    ArgumentError,
    CCSPError,
    FormatError,
    InvariantError,
    PreconditionError,
    ResourceLimitError,
)
from .formats import parse_instance, parse_language, read_instance, read_language
from .instance import Constraint, Instance, make_instance
from .oracle import GeneratorConfig, brute_force_count, cross_validate, generate
from .relations import (
    ConstraintLanguage,
    Domain,
    Partition,
    Relation,
    cardvec_convolve,
    compose,
    crossing_witness,
    inverse,
    join,
    project,
    thick_mapping_decompose,
    two_decomposability_counterexample,
)
from .solver import (
    cardinality_decide,
    class_map,
    constraint_graph,
    eta,
    ext_cardinality,
    feasible_vectors,
    restrict_instance,
    solve_counts,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "BinarizedInstance",
    "CCSPError",
    "ClassificationResult",
    "Constraint",
    "ConstraintLanguage",
    "Domain",
    "FormatError",
    "GeneratorConfig",
    "Instance",
    "InvariantError",
    "Partition",
    "PreconditionError",
    "Relation",
    "ResourceLimitError",
    "TernaryOperation",
    "Verdict",
    "binarize",
    "bounded_crossing_scan",
    "brute_force_count",
    "build_mh_from_equivalences",
    "cardinality_decide",
    "cardvec_convolve",
    "class_map",
    "classify",
    "compose",
    "constraint_graph",
    "count_all",
    "count_convolve",
    "count_decide",
    "cross_validate",
    "crossing_witness",
    "enforce_2consistency",
    "eta",
    "ext_cardinality",
    "ext_count",
    "feasible_vectors",
    "find_conservative_majority",
    "find_conservative_minority",
    "generate",
    "initial_binarization",
    "inverse",
    "is_polymorphism",
    "join",
    "make_instance",
    "parse_instance",
    "parse_language",
    "project",
    "read_instance",
    "read_language",
    "restrict_instance",
    "solution_equivalence_check",
    "solve_counts",
    "thick_mapping_decompose",
    "two_decomposability_counterexample",
]
