"""The eight acceptance checks, runnable from tests and from ``ccsp selftest``.

Each ``criterion_N`` returns a :class:`CriterionResult`; nothing here asserts,
so a failing check reports its numbers instead of stopping the run.
"""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field

import numpy as np

from .classifier import (
    TernaryOperation,
    Verdict,
    bounded_crossing_scan,
    classify,
    is_polymorphism,
)
from .consistency import binarize, solution_equivalence_check
from .errors import CCSPError, InvariantError
from .instance import Instance, make_instance
from .oracle import GeneratorConfig, brute_force_count, close_under, generate, random_operations
from .reductions import (
    BipartiteGraph,
    bis_feasible,
    crossing_to_nonthick,
    reduce_bis,
    reduce_constants,
    reduce_crossing,
    reduce_pp_conjunction,
    reduce_pp_exists,
    reduce_restriction,
)
from .relations import ConstraintLanguage, Domain, Partition, Relation, project, vectors_with_total
from .solver import SolverStats, ext_cardinality, ext_count, solve_counts


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.name} ({self.detail}; {self.seconds:.1f}s)"


def suite_config(seed: int) -> GeneratorConfig:
    rng = random.Random(10_000 + seed)
    return GeneratorConfig(
        seed=seed,
        domain_size=rng.randint(1, 4),
        num_vars=rng.randint(1, 7),
        num_constraints=rng.randint(0, 10),
        max_arity=3,
        tractable_only=True,
        num_relations=rng.randint(1, 3),
    )


@dataclass
class SuiteRun:
    size: int
    seconds: float
    set_mismatches: list[int] = field(default_factory=list)
    count_mismatches: list[int] = field(default_factory=list)
    not_tractable: list[int] = field(default_factory=list)
    invariant_failures: list[tuple[int, str]] = field(default_factory=list)
    stats: SolverStats = field(default_factory=SolverStats)
    nonempty: int = 0


_SUITE_CACHE: dict[int, SuiteRun] = {}


def run_suite(size: int = 500) -> SuiteRun:
    """Generate ``size`` tractable instances and compare solver and counter
    against brute force.  Structural invariants are checked inside the engine
    on every run (debug mode also re-verifies 2-consistency of each branch)."""
    if size in _SUITE_CACHE:
        return _SUITE_CACHE[size]
    start = time.perf_counter()
    run = SuiteRun(size, 0.0)
    for seed in range(size):
        lang, inst = generate(suite_config(seed))
        if classify(lang).verdict is not Verdict.TRACTABLE:
            run.not_tractable.append(seed)
            continue
        truth = brute_force_count(inst)
        try:
            b = binarize(inst)
            feasible = ext_cardinality(b, stats=run.stats, instance=inst, debug=True)
            counts = ext_count(b, instance=inst)
        except InvariantError as exc:
            run.invariant_failures.append((seed, str(exc)))
            continue
        if feasible != set(truth):
            run.set_mismatches.append(seed)
        if counts != truth:
            run.count_mismatches.append(seed)
        run.nonempty += bool(truth)
    run.seconds = time.perf_counter() - start
    _SUITE_CACHE[size] = run
    return run


def criterion_1(size: int = 500) -> CriterionResult:
    run = run_suite(size)
    ok = not run.set_mismatches and not run.not_tractable and not run.invariant_failures and run.seconds <= 120
    return CriterionResult(
        1,
        "feasible vectors equal brute-force support",
        ok,
        f"{size} instances, {run.nonempty} satisfiable, {len(run.set_mismatches)} mismatches, "
        f"{len(run.not_tractable)} non-tractable, suite {run.seconds:.1f}s (limit 120s)",
        run.seconds,
    )


def criterion_2(size: int = 500) -> CriterionResult:
    run = run_suite(size)
    ok = not run.count_mismatches and not run.invariant_failures
    return CriterionResult(
        2,
        "exact counts equal brute force",
        ok,
        f"{size} instances, {len(run.count_mismatches)} count mismatches",
        0.0,
    )


def _eq_neq() -> ConstraintLanguage:
    return ConstraintLanguage(
        Domain(2), (Relation.equality(range(2), "eq"), Relation(2, [(0, 1), (1, 0)], "neq"))
    )


def example_11_language() -> ConstraintLanguage:
    """The 10-element example relation {(1,2,3),(1,4,5),(a,b,c),(d,e,c)}."""
    labels = ("1", "2", "3", "4", "5", "a", "b", "c", "d", "e")
    dom = Domain(10, labels)
    e = dom.element
    tuples = [tuple(e(x) for x in t) for t in (("1", "2", "3"), ("1", "4", "5"), ("a", "b", "c"), ("d", "e", "c"))]
    return ConstraintLanguage(dom, (Relation(3, tuples, "R"),))


def three_colouring() -> ConstraintLanguage:
    return ConstraintLanguage(
        Domain(3), (Relation(2, [(a, b) for a in range(3) for b in range(3) if a != b], "neq"),)
    )


def affine_language() -> ConstraintLanguage:
    return ConstraintLanguage(
        Domain(2), (Relation(3, [t for t in itertools.product(range(2), repeat=3) if sum(t) % 2 == 0], "xyz0"),)
    )


def _op_checks(op: TernaryOperation, kind: str, lang: ConstraintLanguage) -> bool:
    ident = op.is_majority() if kind == "majority" else op.is_minority()
    return ident and op.is_conservative() and is_polymorphism(op, lang)


def criterion_3() -> CriterionResult:
    start = time.perf_counter()
    expectations = [
        ("eq/neq on 2 values", _eq_neq(), Verdict.TRACTABLE),
        ("10-element example relation", example_11_language(), Verdict.TRACTABLE),
        ("3-colouring", three_colouring(), Verdict.HARD),
        ("x+y+z=0", affine_language(), Verdict.HARD),
    ]
    failures = []
    for label, lang, want in expectations:
        res = classify(lang)
        if res.verdict is not want:
            failures.append(f"{label}: got {res.verdict.value}")
            continue
        if want is Verdict.TRACTABLE:
            if not (_op_checks(res.majority, "majority", lang) and _op_checks(res.minority, "minority", lang)):
                failures.append(f"{label}: returned operations fail the exhaustive checks")
    return CriterionResult(
        3,
        "classifier fixed points",
        not failures,
        "; ".join(failures) if failures else "4 languages classified as expected, operations verified",
        time.perf_counter() - start,
    )


def random_language(rng: random.Random, d: int = 3, max_relations: int = 2, max_arity: int = 3) -> ConstraintLanguage:
    rels = []
    for i in range(rng.randint(1, max_relations)):
        arity = rng.randint(1, max_arity)
        space = list(itertools.product(range(d), repeat=arity))
        if rng.random() < 0.5:
            m, h, _ = random_operations(rng, d)
            seeds = rng.sample(space, rng.randint(1, min(4, len(space))))
            tuples = close_under(seeds, [m, h], arity)
        else:
            density = rng.choice((0.2, 0.4, 0.6))
            tuples = [t for t in space if rng.random() < density] or [rng.choice(space)]
        rels.append(Relation(arity, tuples, f"r{i}"))
    return ConstraintLanguage(Domain(d), tuple(rels))


def criterion_4(count: int = 100, budget: int = 3) -> CriterionResult:
    start = time.perf_counter()
    rng = random.Random(4)
    tractable = hard = witnesses = 0
    violations = []
    for i in range(count):
        lang = random_language(rng)
        verdict = classify(lang).verdict
        scan = bounded_crossing_scan(lang, budget)
        tractable += verdict is Verdict.TRACTABLE
        hard += verdict is Verdict.HARD
        witnesses += scan.witness is not None
        if scan.witness is not None and verdict is not Verdict.HARD:
            violations.append(i)
    return CriterionResult(
        4,
        "tractable verdicts never meet a crossing witness",
        not violations,
        f"{count} languages: {tractable} tractable, {hard} hard, {witnesses} crossing witnesses, "
        f"{len(violations)} contradictions",
        time.perf_counter() - start,
    )


def criterion_5(size: int = 500) -> CriterionResult:
    run = run_suite(size)
    st = run.stats
    # the engine raises on any violation (depth > |D| included); the tallies
    # show the checks actually ran
    ok = not run.invariant_failures and st.eta_checked > 0 and st.psi_checked > 0
    return CriterionResult(
        5,
        "structural invariants on every tractable run",
        ok,
        f"{len(run.invariant_failures)} violations; cliques in {st.components_checked} components, "
        f"{st.eta_checked} eta splits, {st.psi_checked} class maps, {st.consistency_rechecks} branch "
        f"rechecks, max block depth {st.max_depth}",
        0.0,
    )


# -- criterion 6 ------------------------------------------------------------------------------

def _equivalent(original: Instance, out, vectors) -> bool:
    before = brute_force_count(original)
    after = brute_force_count(out.instance)
    return all((pi in before) == (out.transform(pi) in after) for pi in vectors)


def random_bipartite(rng: random.Random, max_left: int, max_right: int) -> BipartiteGraph:
    n1, n2 = rng.randint(1, max_left), rng.randint(1, max_right)
    edges = {(u, rng.randrange(n2)) for u in range(n1)} | {(rng.randrange(n1), w) for w in range(n2)}
    edges |= {(rng.randrange(n1), rng.randrange(n2)) for _ in range(rng.randint(0, n1 * n2))}
    return BipartiteGraph(n1, n2, tuple(edges))


def reduction_cases(seed: int = 6):
    """Yield (kind, passed) for every tiny case of every reduction."""
    rng = random.Random(seed)
    d2 = Domain(2)
    # restriction: a 3-element language restricted to two values
    le3 = Relation(2, [(a, b) for a in range(3) for b in range(3) if a <= b], "le")
    neq3 = Relation(2, [(a, b) for a in range(3) for b in range(3) if a != b], "neq")
    full = ConstraintLanguage(Domain(3), (le3, neq3))
    for _ in range(20):
        subset = sorted(rng.sample(range(3), 2))
        small = full.restrict(subset)
        n = rng.randint(1, 4)
        cons = [(rng.choice(small.names), (rng.randrange(n), rng.randrange(n))) for _ in range(rng.randint(0, 4))]
        p = make_instance(small, n, cons)
        out = reduce_restriction(p, full, subset)
        yield "restriction", _equivalent(p, out, vectors_with_total(2, n))
    # pp-conjunction: R(x, y, z) = le(x, y) and eq(y, z)
    le = Relation(2, [(0, 0), (0, 1), (1, 1)], "le")
    eq = Relation.equality(range(2), "eq")
    defined = Relation(3, [(x, y, z) for x, y, z in itertools.product(range(2), repeat=3) if x <= y and y == z], "R")
    gamma = ConstraintLanguage(d2, (le, eq))
    for _ in range(20):
        n = rng.randint(1, 5)
        cons = [("R", tuple(rng.randrange(n) for _ in range(3))) for _ in range(rng.randint(1, 3))]
        cons += [("le", (rng.randrange(n), rng.randrange(n))) for _ in range(rng.randint(0, 2))]
        p = make_instance(gamma.with_relations([defined]), n, cons)
        out = reduce_pp_conjunction(p, gamma, "R", [(le, (1, 2)), (eq, (2, 3))])
        yield "pp-and", _equivalent(p, out, vectors_with_total(2, n))
    # pp-exists: R(x, y) = exists z W(x, y, z)
    w = Relation(3, [(0, 0, 0), (0, 1, 1), (1, 1, 0)], "W")
    defined = project(w, [1, 2]).renamed("R")
    gamma = ConstraintLanguage(d2, (w, le))
    for _ in range(20):
        n = rng.randint(1, 2)
        cons = [("R", (rng.randrange(n), rng.randrange(n)))]
        if rng.random() < 0.5:
            cons.append(("le", (rng.randrange(n), rng.randrange(n))))
        p = make_instance(gamma.with_relations([defined]), n, cons)
        out = reduce_pp_exists(p, gamma, "R", w)
        yield "pp-exists", _equivalent(p, out, vectors_with_total(2, n))
    # constants
    neq = Relation(2, [(0, 1), (1, 0)], "neq")
    gamma = ConstraintLanguage(d2, (neq, le))
    for i in range(20):
        value = i % 2
        const = Relation(1, [(value,)], f"C{value}")
        n = rng.randint(1, 3)
        cons = [(const.name, (rng.randrange(n),))]
        cons += [(rng.choice(["neq", "le"]), (rng.randrange(n), rng.randrange(n))) for _ in range(rng.randint(0, 2))]
        p = make_instance(gamma.with_relations([const]), n, cons)
        out = reduce_constants(p, gamma)
        yield "constants", _equivalent(p, out, vectors_with_total(2, n))
    # BIS, every case, small enough for brute force on the CCSP side
    shapes = {
        "1": Relation(2, [(0, 2), (0, 3), (1, 3)], "R"),
        "3a": Relation(2, [(0, 2), (0, 1), (1, 1)], "R"),
        "3b": Relation(2, [(0, 0), (0, 2), (1, 2)], "R"),
    }
    done = 0
    while done < 24:
        case = ("1", "3a", "3b")[done % 3]
        g = random_bipartite(rng, 3, 3) if case == "1" else random_bipartite(rng, 1, 3)
        k1, k2 = rng.randint(0, g.left), rng.randint(0, g.right)
        out = reduce_bis(g, k1, k2, shapes[case], case)
        pi = out.transform((k1, k2))
        yield "bis", (pi in brute_force_count(out.instance)) == bis_feasible(g, k1, k2)
        done += 1
    # crossing: instances over the 8-pair relation lifted to {alpha, beta}
    pairs = [
        (Partition.from_blocks([[0, 2], [1]]), Partition.from_blocks([[0], [1, 2]]), 3),
        (Partition.from_blocks([[0, 1], [2, 3]]), Partition.from_blocks([[0], [1, 2], [3]]), 4),
    ]
    for i in range(20):
        alpha, beta, size = pairs[i % 2]
        r = crossing_to_nonthick(alpha, beta)
        triple = sorted({x for t in r.tuples for x in t})
        idx = {x: j for j, x in enumerate(triple)}
        small_r = Relation(2, [(idx[x], idx[y]) for x, y in r.tuples], "R")
        lang = ConstraintLanguage(Domain(3, tuple(str(x) for x in triple)), (small_r,))
        n = rng.randint(1, 2)
        cons = [("R", (rng.randrange(n), rng.randrange(n)))]
        p = make_instance(lang, n, cons)
        out = reduce_crossing(p, alpha, beta, size)
        yield "crossing", _equivalent(p, out, vectors_with_total(3, n))


def bis_agreement(count: int = 30, seed: int = 66) -> tuple[int, int]:
    """Case 1 instances on graphs with up to 8 vertices: CCSP answer (brute
    force) versus the direct independent-set enumerator."""
    rng = random.Random(seed)
    rel = Relation(2, [(0, 2), (0, 3), (1, 3)], "R")
    agree = 0
    for _ in range(count):
        g = random_bipartite(rng, 4, 4)
        k1, k2 = rng.randint(0, g.left), rng.randint(0, g.right)
        out = reduce_bis(g, k1, k2, rel, "1")
        agree += (out.transform((k1, k2)) in brute_force_count(out.instance)) == bis_feasible(g, k1, k2)
    return agree, count


def criterion_6() -> CriterionResult:
    start = time.perf_counter()
    tally: dict[str, list[int]] = {}
    for kind, ok in reduction_cases():
        t = tally.setdefault(kind, [0, 0])
        t[0] += bool(ok)
        t[1] += 1
    agree, total = bis_agreement()
    ok = all(p == n and n >= 20 for p, n in tally.values()) and len(tally) == 6 and agree == total
    detail = ", ".join(f"{k} {p}/{n}" for k, (p, n) in tally.items()) + f"; BIS enumerator {agree}/{total}"
    return CriterionResult(6, "reductions preserve feasibility", ok, detail, time.perf_counter() - start)


def criterion_7(count: int = 50) -> CriterionResult:
    start = time.perf_counter()
    checked = mismatches = seed = 0
    while checked < count:
        cfg = suite_config(seed)
        seed += 1
        lang, inst = generate(cfg)
        b = binarize(inst)
        if b.inconsistent or not inst.constraints:
            continue
        checked += 1
        if not solution_equivalence_check(inst, b):
            mismatches += 1
    return CriterionResult(
        7,
        "binarization keeps the solution set",
        mismatches == 0,
        f"{checked} consistent instances, {mismatches} differing solution sets",
        time.perf_counter() - start,
    )


def equality_chain(n: int, pi=None) -> Instance:
    lang = ConstraintLanguage(Domain(2), (Relation.equality(range(2), "eq"),))
    return make_instance(lang, n, [("eq", (i, i + 1)) for i in range(n - 1)], pi)


def scaling_exponent(sizes=(250, 500, 1000, 2000)) -> tuple[float, list[float], bool]:
    times, correct = [], True
    for n in sizes:
        inst = equality_chain(n)
        t0 = time.perf_counter()
        result = solve_counts(inst, check_language=False)
        times.append(time.perf_counter() - t0)
        correct &= result == {(n, 0): 1, (0, n): 1}
    slope = float(np.polyfit(np.log(sizes), np.log(times), 1)[0])
    return slope, times, correct


def criterion_8(sizes=(250, 500, 1000, 2000)) -> CriterionResult:
    start = time.perf_counter()
    slope, times, correct = scaling_exponent(sizes)
    return CriterionResult(
        8,
        "equality chains scale at most cubically",
        correct and slope <= 3.0,
        "times " + ", ".join(f"n={n}: {t:.2f}s" for n, t in zip(sizes, times)) + f"; fitted exponent {slope:.2f} (limit 3.0)",
        time.perf_counter() - start,
    )


def run_all(quick: bool = False) -> list[CriterionResult]:
    size = 100 if quick else 500
    sizes = (125, 250, 500, 1000) if quick else (250, 500, 1000, 2000)
    out = []
    for fn in (
        lambda: criterion_1(size),
        lambda: criterion_2(size),
        criterion_3,
        criterion_4,
        lambda: criterion_5(size),
        criterion_6,
        criterion_7,
        lambda: criterion_8(sizes),
    ):
        try:
            out.append(fn())
        except CCSPError as exc:  # report, do not abort the rest
            out.append(CriterionResult(len(out) + 1, "error", False, f"{type(exc).__name__}: {exc}"))
    return out
