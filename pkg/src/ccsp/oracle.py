"""Exhaustive reference solver and random generators for tractable languages."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .classifier import TernaryOperation, _unique_rows, build_mh_from_equivalences, major, minor
from .enumeration import DEFAULT_CAP, assignment_chunks, relation_table, tuple_codes
from .errors import ArgumentError, PreconditionError
from .instance import Constraint, Instance
from .relations import CardinalityVector, ConstraintLanguage, Domain, Partition, Relation

CountMap = dict[CardinalityVector, int]


def brute_force_count(instance: Instance, cap: int = DEFAULT_CAP) -> CountMap:
    """Enumerate every assignment, keep the solutions, bucket by histogram."""
    n, d = instance.num_vars, instance.domain_size
    tables = [
        (np.array(c.scope, dtype=np.intp), relation_table(c.relation.tuples, c.relation.arity, d))
        for c in instance.constraints
    ]
    totals: dict[int, int] = {}
    for chunk in assignment_chunks(n, d, cap):
        chunk = chunk.astype(np.int64)
        ok = np.ones(len(chunk), dtype=bool)
        for scope, table in tables:
            ok &= table[tuple_codes(chunk[:, scope], d)]
            if not ok.any():
                break
        sols = chunk[ok]
        if not len(sols):
            continue
        hist = np.stack([(sols == a).sum(axis=1) for a in range(d)], axis=1)
        codes = tuple_codes(hist, n + 1)
        keys, counts = np.unique(codes, return_counts=True)
        for k, c in zip(keys.tolist(), counts.tolist()):
            totals[k] = totals.get(k, 0) + c
    out: CountMap = {}
    for code, c in totals.items():
        vec = []
        for _ in range(d):
            code, r = divmod(code, n + 1)
            vec.append(r)
        out[tuple(reversed(vec))] = c
    return out


def brute_force_solutions(instance: Instance, cap: int = DEFAULT_CAP) -> list[tuple[int, ...]]:
    n, d = instance.num_vars, instance.domain_size
    tables = [
        (np.array(c.scope, dtype=np.intp), relation_table(c.relation.tuples, c.relation.arity, d))
        for c in instance.constraints
    ]
    found = []
    for chunk in assignment_chunks(n, d, cap):
        chunk = chunk.astype(np.int64)
        ok = np.ones(len(chunk), dtype=bool)
        for scope, table in tables:
            ok &= table[tuple_codes(chunk[:, scope], d)]
        found.extend(map(tuple, chunk[ok].tolist()))
    return found


# -- generation ------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorConfig:
    seed: int
    domain_size: int = 3
    num_vars: int = 5
    num_constraints: int = 4
    max_arity: int = 3
    tractable_only: bool = True
    num_relations: int = 2

    def __post_init__(self):
        for name in ("domain_size", "num_vars", "max_arity", "num_relations"):
            if getattr(self, name) < 1:
                raise ArgumentError(f"{name} must be positive")
        if self.num_constraints < 0:
            raise ArgumentError("num_constraints must be nonnegative")


def close_under(tuples, ops: list[TernaryOperation], arity: int) -> set[tuple[int, ...]]:
    """Smallest superset of ``tuples`` preserved by every operation."""
    current = {tuple(t) for t in tuples}
    tabs = [op.array for op in ops]
    while True:
        arr = np.array(sorted(current), dtype=np.intp).reshape(-1, arity)
        k = len(arr)
        a = arr[:, None, None, :]
        b = arr[None, :, None, :]
        c = arr[None, None, :, :]
        new = set()
        for tab in tabs:
            img = tab[a, b, c].reshape(k * k * k, arity)
            new.update(map(tuple, _unique_rows(img).tolist()))
        if new <= current:
            return current
        current |= new


def _laminar_partitions(rng: random.Random, elements: list[int]) -> list[Partition]:
    """Partitions read off a random hierarchy of nested blocks; such a family
    never has two of (a|bc), (b|ac), (c|ab) true at once."""
    out = []
    if len(elements) < 2:
        return out
    shuffled = elements[:]
    rng.shuffle(shuffled)
    k = rng.randint(2, min(3, len(shuffled)))
    cuts = sorted(rng.sample(range(1, len(shuffled)), k - 1))
    parts = [shuffled[i:j] for i, j in zip([0] + cuts, cuts + [len(shuffled)])]
    out.append(Partition.from_blocks(parts))
    for part in parts:
        out.extend(_laminar_partitions(rng, part))
    return out


def random_operations(rng: random.Random, d: int):
    """``(m, h, family)``: conservative majority and minority tables plus the
    equivalence relations they came from (empty when drawn freely)."""
    if rng.random() < 0.7:
        fam = _laminar_partitions(rng, list(range(d)))
        fam = [p for p in fam if rng.random() < 0.8]
        try:
            m, h = build_mh_from_equivalences(fam, d)
            return m, h, fam
        except PreconditionError:
            pass
    m, h = [], []
    for x in range(d):
        for y in range(d):
            for z in range(d):
                if len({x, y, z}) == 3:
                    m.append(rng.choice((x, y, z)))
                    h.append(rng.choice((x, y, z)))
                else:
                    m.append(major(x, y, z))
                    h.append(minor(x, y, z))
    return TernaryOperation(d, tuple(m), "majority"), TernaryOperation(d, tuple(h), "minority"), []


def _structured_seeds(rng: random.Random, arity: int, fam: list[Partition]) -> list[tuple[int, ...]]:
    """Tuples of an equivalence relation, or a block bijection between two
    partitions, padded to the arity by repeating coordinates."""
    alpha = rng.choice(fam)
    betas = [p for p in fam if len(p) == len(alpha)]
    beta = rng.choice(betas)
    order = list(beta.blocks)
    rng.shuffle(order)
    pairs = [(a, b) for blk, img in zip(alpha.blocks, order) for a in blk for b in img]
    if rng.random() < 0.5:
        pairs = [(a, b) for blk in alpha.blocks for a in blk for b in blk]
    out = []
    for a, b in pairs:
        t = [a, b][:arity]
        while len(t) < arity:
            t.append(rng.choice((a, b)))
        out.append(tuple(t))
    return out


def _random_relation(rng: random.Random, d: int, arity: int, ops, fam) -> Relation:
    if fam and rng.random() < 0.5:
        seeds = _structured_seeds(rng, arity, fam)
    else:
        subset = sorted(rng.sample(range(d), rng.randint(min(2, d), d)))
        count = rng.randint(1, max(2, d**arity // 3))
        seeds = [tuple(rng.choice(subset) for _ in range(arity)) for _ in range(count)]
    if ops:
        tuples = close_under(seeds, list(ops), arity)
    else:
        tuples = set(seeds)
    return Relation(arity, tuples)


def generate(config: GeneratorConfig) -> tuple[ConstraintLanguage, Instance]:
    """Deterministic in the seed.  With ``tractable_only`` every relation is
    closed under one randomly drawn conservative majority/minority pair."""
    rng = random.Random(config.seed)
    d = config.domain_size
    if config.tractable_only:
        m, h, fam = random_operations(rng, d)
        ops = (m, h)
    else:
        ops, fam = None, []
    rels = []
    for i in range(config.num_relations):
        arity = rng.randint(1, config.max_arity)
        rels.append(_random_relation(rng, d, arity, ops, fam).renamed(f"r{i}"))
    lang = ConstraintLanguage(Domain(d), tuple(rels))
    n = config.num_vars
    constraints = []
    for _ in range(config.num_constraints):
        rel = rng.choice(lang.relations)
        if rng.random() < 0.1 or rel.arity > n:
            scope = tuple(rng.randrange(n) for _ in range(rel.arity))
        else:
            scope = tuple(rng.sample(range(n), rel.arity))
        constraints.append(Constraint(scope, rel))
    cuts = sorted(rng.randint(0, n) for _ in range(d - 1))
    pi = tuple(b - a for a, b in zip([0] + cuts, cuts + [n]))
    return lang, Instance(n, tuple(constraints), lang, pi)


def generation_operations(config: GeneratorConfig) -> tuple[TernaryOperation, TernaryOperation]:
    """The operation pair :func:`generate` draws for ``config`` (tractable mode)."""
    m, h, _ = random_operations(random.Random(config.seed), config.domain_size)
    return m, h


# -- cross validation ------------------------------------------------------------------

@dataclass
class CrossValidationReport:
    oracle: CountMap
    solver: CountMap
    missing: list[CardinalityVector] = field(default_factory=list)
    extra: list[CardinalityVector] = field(default_factory=list)
    wrong_counts: list[tuple[CardinalityVector, int, int]] = field(default_factory=list)

    @property
    def match(self) -> bool:
        return not (self.missing or self.extra or self.wrong_counts)

    def summary(self) -> str:
        if self.match:
            return f"match: {len(self.oracle)} vectors, {sum(self.oracle.values())} solutions"
        return (
            f"mismatch: missing {self.missing}, extra {self.extra}, "
            f"wrong counts {self.wrong_counts}"
        )


def cross_validate(
    instance: Instance,
    solver: Callable[[Instance], CountMap] | None = None,
    cap: int = DEFAULT_CAP,
) -> CrossValidationReport:
    """Compare the polynomial-time counter (or any replacement hook) with brute force."""
    if solver is None:
        from .solver import solve_counts

        solver = solve_counts
    truth = brute_force_count(instance, cap)
    got = solver(instance)
    report = CrossValidationReport(truth, dict(got))
    report.missing = sorted(set(truth) - set(got))
    report.extra = sorted(set(got) - set(truth))
    report.wrong_counts = sorted(
        (v, truth[v], got[v]) for v in set(truth) & set(got) if truth[v] != got[v]
    )
    return report
