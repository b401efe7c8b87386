"""Tractability classifier: conservative majority and minority polymorphism search.

A language is tractable exactly when it has a conservative majority and a
conservative minority polymorphism.  Conservativity leaves only the entries
on pairwise-distinct argument triples free (three choices each); the
majority/minority identities fix every other entry.  The search below is
plain backtracking over those free triples, in lexicographic order, with
forward checking on the preservation constraints.
"""
from __future__ import annotations

import enum
import itertools
import sys
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, PreconditionError, ResourceLimitError
from .relations import ConstraintLanguage, Partition, Relation, crossing_witness

DEFAULT_NODE_LIMIT = 2_000_000


@dataclass(frozen=True)
class TernaryOperation:
    size: int
    table: tuple[int, ...]
    name: str = field(default="f", compare=False)

    def __post_init__(self):
        table = tuple(int(v) for v in self.table)
        if len(table) != self.size**3:
            raise ArgumentError("operation table must have size**3 entries")
        if any(not 0 <= v < self.size for v in table):
            raise ArgumentError("operation values must lie in the domain")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(cls, size: int, func, name: str = "f") -> TernaryOperation:
        return cls(size, tuple(func(x, y, z) for x, y, z in itertools.product(range(size), repeat=3)), name)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.int64).reshape(self.size, self.size, self.size)

    def __call__(self, x: int, y: int, z: int) -> int:
        return self.table[(x * self.size + y) * self.size + z]

    def apply(self, a: Sequence[int], b: Sequence[int], c: Sequence[int]) -> tuple[int, ...]:
        return tuple(self(x, y, z) for x, y, z in zip(a, b, c))

    def is_conservative(self) -> bool:
        return all(self(x, y, z) in (x, y, z) for x, y, z in itertools.product(range(self.size), repeat=3))

    def is_majority(self) -> bool:
        return all(
            self(x, x, y) == x and self(x, y, x) == x and self(y, x, x) == x
            for x, y in itertools.product(range(self.size), repeat=2)
        )

    def is_minority(self) -> bool:
        return all(
            self(x, x, y) == y and self(x, y, x) == y and self(y, x, x) == y
            for x, y in itertools.product(range(self.size), repeat=2)
        )

    def restrict(self, subset: Sequence[int]) -> TernaryOperation:
        """Restriction to ``subset`` (re-indexed); only valid for conservative operations."""
        index = {a: i for i, a in enumerate(subset)}
        return TernaryOperation.from_function(
            len(subset), lambda x, y, z: index[self(subset[x], subset[y], subset[z])], self.name
        )


class Verdict(enum.Enum):
    TRACTABLE = "TRACTABLE"
    HARD = "HARD"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class ClassificationResult:
    verdict: Verdict
    majority: TernaryOperation | None = None
    minority: TernaryOperation | None = None
    hard_reason: str | None = None

    @property
    def tractable(self) -> bool:
        return self.verdict is Verdict.TRACTABLE


def _tuple_codes(arr: np.ndarray, size: int) -> np.ndarray:
    codes = np.zeros(arr.shape[:-1], dtype=np.int64)
    for i in range(arr.shape[-1]):
        codes = codes * size + arr[..., i]
    return codes


def _unique_rows(rows: np.ndarray) -> np.ndarray:
    """np.unique(rows, axis=0), via integer codes when they fit in int64."""
    if rows.size == 0:
        return rows
    lo = int(rows.min())
    base = int(rows.max()) - lo + 1
    if base ** rows.shape[1] >= 2**62:
        return np.unique(rows, axis=0)
    codes = np.unique(_tuple_codes(rows - lo, base))
    out = np.empty((len(codes), rows.shape[1]), dtype=rows.dtype)
    for i in range(rows.shape[1] - 1, -1, -1):
        codes, out[:, i] = np.divmod(codes, base)
    return out + lo


def _membership(rel: Relation, size: int) -> np.ndarray:
    table = np.zeros(size**rel.arity, dtype=bool)
    if rel.tuples:
        table[_tuple_codes(np.array(rel.tuples, dtype=np.int64), size)] = True
    return table


def polymorphism_violation(f: TernaryOperation, relations: Iterable[Relation]):
    """First ``(relation, (a, b, c), image)`` with a,b,c in R and f(a,b,c) outside R."""
    d = f.size
    for rel in relations:
        if not rel.tuples:
            continue
        arr = np.array(rel.tuples, dtype=np.int64)
        member = _membership(rel, d)
        image = f.array[arr[:, None, None, :], arr[None, :, None, :], arr[None, None, :, :]]
        bad = ~member[_tuple_codes(image, d)]
        if bad.any():
            i, j, k = (int(x) for x in np.argwhere(bad)[0])
            return rel, (rel.tuples[i], rel.tuples[j], rel.tuples[k]), tuple(int(x) for x in image[i, j, k])
    return None


def is_polymorphism(f: TernaryOperation, language: ConstraintLanguage | Iterable[Relation]) -> bool:
    return polymorphism_violation(f, language) is None


def _fixed_value(x: int, y: int, z: int, kind: str) -> int:
    """Entry forced by the majority/minority identities when two arguments agree."""
    if x == y == z:
        return x
    if x == y:
        return x if kind == "majority" else z
    if x == z:
        return x if kind == "majority" else y
    return y if kind == "majority" else x


class _PolymorphismSearch:
    def __init__(self, language: ConstraintLanguage, kind: str, node_limit: int):
        self.d = d = language.domain.size
        self.kind = kind
        self.node_limit = node_limit
        self.triples = [t for t in itertools.permutations(range(d), 3)]
        self.triples.sort()
        self.var_of = {t: i for i, t in enumerate(self.triples)}
        # column key: a fixed value (>= 0) or -(var+1)
        key = np.empty((d, d, d), dtype=np.int64)
        for x, y, z in itertools.product(range(d), repeat=3):
            if len({x, y, z}) == 3:
                key[x, y, z] = -(self.var_of[x, y, z] + 1)
            else:
                key[x, y, z] = _fixed_value(x, y, z, kind)
        self.constraints: list[tuple[tuple[int, ...], frozenset]] = []
        self.feasible = True
        for rel in language.relations:
            if not rel.tuples:
                continue
            arr = np.array(rel.tuples, dtype=np.int64)
            keys = key[arr[:, None, None, :], arr[None, :, None, :], arr[None, None, :, :]]
            keys = _unique_rows(keys.reshape(-1, rel.arity))
            for row in keys:
                row = tuple(int(x) for x in row)
                if all(k >= 0 for k in row):
                    if row not in rel.tuple_set:
                        self.feasible = False
                    continue
                self.constraints.append((row, rel.tuple_set))
        self.by_var: list[list[int]] = [[] for _ in self.triples]
        for ci, (row, _) in enumerate(self.constraints):
            for v in {-k - 1 for k in row if k < 0}:
                self.by_var[v].append(ci)

    def run(self) -> TernaryOperation | None:
        if not self.feasible:
            return None
        nvars = len(self.triples)
        domains = [list(t) for t in self.triples]
        assign: list[int | None] = [None] * nvars
        nodes = 0

        def image(row):
            return tuple(k if k >= 0 else assign[-k - 1] for k in row)

        def propagate(var: int, trail: list) -> bool:
            for ci in self.by_var[var]:
                row, member = self.constraints[ci]
                free = {-k - 1 for k in row if k < 0 and assign[-k - 1] is None}
                if not free:
                    if image(row) not in member:
                        return False
                elif len(free) == 1:
                    (u,) = free
                    keep = []
                    for val in domains[u]:
                        assign[u] = val
                        if image(row) in member:
                            keep.append(val)
                    assign[u] = None
                    if len(keep) != len(domains[u]):
                        trail.append((u, domains[u]))
                        domains[u] = keep
                        if not keep:
                            return False
            return True

        def search(i: int) -> bool:
            nonlocal nodes
            if i == nvars:
                return True
            for val in list(domains[i]):
                nodes += 1
                if nodes > self.node_limit:
                    raise ResourceLimitError(
                        f"{self.kind} search exceeded node limit {self.node_limit}"
                    )
                assign[i] = val
                trail: list = []
                if propagate(i, trail) and search(i + 1):
                    return True
                for u, dom in reversed(trail):
                    domains[u] = dom
                assign[i] = None
            return False

        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, nvars + 1000))
        try:
            if not search(0):
                return None
        finally:
            sys.setrecursionlimit(old)
        d = self.d
        table = []
        for x, y, z in itertools.product(range(d), repeat=3):
            if len({x, y, z}) == 3:
                table.append(assign[self.var_of[x, y, z]])
            else:
                table.append(_fixed_value(x, y, z, self.kind))
        return TernaryOperation(d, tuple(table), self.kind)


def find_conservative_majority(language: ConstraintLanguage, node_limit: int = DEFAULT_NODE_LIMIT):
    """The lexicographically first conservative majority polymorphism, or None.

    Raises ResourceLimitError when the node limit is hit (inconclusive, not absent).
    """
    return _PolymorphismSearch(language, "majority", node_limit).run()


def find_conservative_minority(language: ConstraintLanguage, node_limit: int = DEFAULT_NODE_LIMIT):
    return _PolymorphismSearch(language, "minority", node_limit).run()


def classify(language: ConstraintLanguage, node_limit: int = DEFAULT_NODE_LIMIT) -> ClassificationResult:
    try:
        m = find_conservative_majority(language, node_limit)
    except ResourceLimitError as exc:
        return ClassificationResult(Verdict.INCONCLUSIVE, hard_reason=str(exc))
    if m is None:
        return ClassificationResult(Verdict.HARD, hard_reason="no conservative majority polymorphism")
    try:
        h = find_conservative_minority(language, node_limit)
    except ResourceLimitError as exc:
        return ClassificationResult(Verdict.INCONCLUSIVE, majority=m, hard_reason=str(exc))
    if h is None:
        return ClassificationResult(Verdict.HARD, majority=m, hard_reason="no conservative minority polymorphism")
    return ClassificationResult(Verdict.TRACTABLE, m, h)


# -- operations built from a family of equivalence relations ----------------

def separated(a: int, b: int, c: int, eqrels: Iterable[Partition]) -> bool:
    """``(a|bc)``: some partition contains a, b, c with b~c and a apart."""
    for alpha in eqrels:
        carrier = alpha.carrier
        if a in carrier and b in carrier and c in carrier:
            if alpha.related(b, c) and not alpha.related(a, b):
                return True
    return False


def major(a: int, b: int, c: int) -> int:
    if a == b or a == c:
        return a
    if b == c:
        return b
    return a


def minor(a: int, b: int, c: int) -> int:
    if a == b:
        return c
    if a == c:
        return b
    if b == c:
        return a
    return a


def build_mh_from_equivalences(
    eqrels: Iterable[Partition], size: int
) -> tuple[TernaryOperation, TernaryOperation]:
    eqrels = list(eqrels)
    m_table, h_table = [], []
    for a, b, c in itertools.product(range(size), repeat=3):
        flags = (
            separated(a, b, c, eqrels),
            separated(b, a, c, eqrels),
            separated(c, a, b, eqrels),
        )
        if sum(flags) > 1:
            raise PreconditionError(
                f"more than one of ({a}|{b}{c}), ({b}|{a}{c}), ({c}|{a}{b}) holds"
            )
        if flags[0]:
            m_table.append(b)
            h_table.append(a)
        elif flags[1]:
            m_table.append(a)
            h_table.append(b)
        elif flags[2]:
            m_table.append(b)
            h_table.append(c)
        else:
            m_table.append(major(a, b, c))
            h_table.append(minor(a, b, c))
    return TernaryOperation(size, tuple(m_table), "majority"), TernaryOperation(size, tuple(h_table), "minority")


# -- bounded closure scan for crossing equivalence relations ----------------

@dataclass
class CrossingScanResult:
    witness: tuple[Partition, Partition, tuple[frozenset, frozenset]] | None
    rounds: int
    fixed_point: bool
    closure_size: int


class _Bits:
    """Binary relations over ``range(d)`` as ``d*d``-bit integers."""

    def __init__(self, d: int):
        self.d = d
        self.row_mask = (1 << d) - 1

    def encode(self, pairs) -> int:
        m = 0
        for x, y in pairs:
            m |= 1 << (x * self.d + y)
        return m

    def rows(self, m: int) -> list[int]:
        return [(m >> (x * self.d)) & self.row_mask for x in range(self.d)]

    def from_rows(self, rows) -> int:
        m = 0
        for x, r in enumerate(rows):
            m |= r << (x * self.d)
        return m

    def compose(self, r: int, q: int) -> int:
        qr = self.rows(q)
        out = []
        for row in self.rows(r):
            acc = 0
            z = 0
            while row:
                if row & 1:
                    acc |= qr[z]
                row >>= 1
                z += 1
            out.append(acc)
        return self.from_rows(out)

    def inverse(self, r: int) -> int:
        m = 0
        for x, row in enumerate(self.rows(r)):
            for y in range(self.d):
                if row >> y & 1:
                    m |= 1 << (y * self.d + x)
        return m

    def dom(self, r: int) -> int:
        return sum(1 << x for x, row in enumerate(self.rows(r)) if row)

    def rng(self, r: int) -> int:
        acc = 0
        for row in self.rows(r):
            acc |= row
        return acc

    def product(self, u: int, v: int) -> int:
        return self.from_rows([v if u >> x & 1 else 0 for x in range(self.d)])

    def pairs(self, r: int):
        return [(x, y) for x, row in enumerate(self.rows(r)) for y in range(self.d) if row >> y & 1]

    def is_equivalence(self, r: int) -> bool:
        s = self.dom(r)
        if s != self.rng(r):
            return False
        diag = sum(1 << (x * self.d + x) for x in range(self.d) if s >> x & 1)
        return (r & diag) == diag and self.inverse(r) == r and (self.compose(r, r) | r) == r


def _seed_relations(language: ConstraintLanguage, bits: _Bits):
    """Binary projections, with any other coordinates optionally fixed to constants."""
    binary, unary = set(), set()
    d = language.domain.size
    for a in range(d):
        unary.add(1 << a)
    for rel in language.relations:
        k = rel.arity
        for i in range(k):
            unary.add(sum(1 << v for v in {t[i] for t in rel.tuples}))
        for i, j in itertools.permutations(range(k), 2):
            others = [p for p in range(k) if p not in (i, j)]
            binary.add(bits.encode({(t[i], t[j]) for t in rel.tuples}))
            for r in range(1, len(others) + 1):
                for fixed in itertools.combinations(others, r):
                    groups: dict[tuple, set] = {}
                    for t in rel.tuples:
                        groups.setdefault(tuple(t[p] for p in fixed), set()).add((t[i], t[j]))
                    for pairs in groups.values():
                        binary.add(bits.encode(pairs))
    unary.discard(0)
    binary.discard(0)
    return binary, unary


def bounded_crossing_scan(
    language: ConstraintLanguage, budget: int = 3, max_closure: int = 20_000
) -> CrossingScanResult:
    """Look for a crossing pair of equivalence relations in a bounded closure.

    The closure starts from binary projections (including constant-fixed
    ones) and is grown ``budget`` rounds under inverse, composition,
    intersection and restriction to unary projections.  A witness certifies
    hardness; absence certifies nothing.
    """
    d = language.domain.size
    bits = _Bits(d)
    binary, unary = _seed_relations(language, bits)
    for r in list(binary):
        unary.add(bits.dom(r))
        unary.add(bits.rng(r))
    unary.discard(0)

    rounds = 0
    fixed_point = False
    frontier = set(binary)
    while True:
        witness = _find_crossing(binary, bits)
        if witness is not None:
            return CrossingScanResult(witness, rounds, fixed_point, len(binary))
        if fixed_point or rounds >= budget or len(binary) > max_closure:
            return CrossingScanResult(None, rounds, fixed_point, len(binary))
        rounds += 1
        new = set()
        current = sorted(binary)
        for r in sorted(frontier):
            new.add(bits.inverse(r))
            full = (1 << d) - 1
            for u in unary:
                new.add(r & bits.product(u, full))
                new.add(r & bits.product(full, u))
            for q in current:
                new.add(bits.compose(r, q))
                new.add(bits.compose(q, r))
                new.add(r & q)
        new.discard(0)
        new -= binary
        for r in new:
            unary.add(bits.dom(r))
            unary.add(bits.rng(r))
        binary |= new
        frontier = new
        if not new:
            fixed_point = True


def _find_crossing(binary: set[int], bits: _Bits):
    by_carrier: dict[int, list[int]] = {}
    for r in sorted(binary):
        if bits.is_equivalence(r):
            by_carrier.setdefault(bits.dom(r), []).append(r)
    carriers = sorted(by_carrier)
    # equivalences on different carriers are compared on their common carrier
    eqs = [(c, r) for c in carriers for r in by_carrier[c]]
    for i, (c1, r1) in enumerate(eqs):
        for c2, r2 in eqs[i + 1:]:
            common = c1 & c2
            if not common:
                continue
            sq = bits.product(common, common)
            a = Partition.from_relation(Relation(2, bits.pairs(r1 & sq)))
            b = Partition.from_relation(Relation(2, bits.pairs(r2 & sq)))
            w = crossing_witness(a, b)
            if w is not None:
                return a, b, w
    return None
