"""Relations, partitions and cardinality vectors over a finite domain.

Domain elements are the integers ``0 .. size-1``; labels are only used when
reading and printing files.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import ArgumentError, ResourceLimitError

Tuple_ = tuple[int, ...]
CardinalityVector = tuple[int, ...]


@dataclass(frozen=True)
class Domain:
    size: int
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.size < 1:
            raise ArgumentError("domain size must be positive")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.size)))
        if len(self.labels) != self.size:
            raise ArgumentError(f"expected {self.size} labels, got {len(self.labels)}")
        if len(set(self.labels)) != self.size:
            raise ArgumentError("domain labels must be distinct")
        for lab in self.labels:
            if not lab or any(ch.isspace() for ch in lab) or lab.startswith("#"):
                raise ArgumentError(f"bad domain label {lab!r}")

    @cached_property
    def _index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def element(self, token: str) -> int:
        """Resolve a label, falling back to a numeric index."""
        if token in self._index:
            return self._index[token]
        try:
            value = int(token)
        except ValueError:
            raise ArgumentError(f"unknown domain element {token!r}") from None
        if not 0 <= value < self.size:
            raise ArgumentError(f"domain element {value} out of range")
        return value

    def label(self, element: int) -> str:
        return self.labels[element]

    def elements(self) -> range:
        return range(self.size)


@dataclass(frozen=True)
class Relation:
    """A finite relation: a sorted, duplicate-free tuple of equal-length tuples."""

    arity: int
    tuples: tuple[Tuple_, ...] = ()
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.arity < 1:
            raise ArgumentError("relation arity must be positive")
        tuples = tuple(sorted({tuple(int(x) for x in t) for t in self.tuples}))
        for t in tuples:
            if len(t) != self.arity:
                raise ArgumentError(f"tuple {t} does not have arity {self.arity}")
            if any(x < 0 for x in t):
                raise ArgumentError(f"negative element in tuple {t}")
        object.__setattr__(self, "tuples", tuples)

    @cached_property
    def tuple_set(self) -> frozenset[Tuple_]:
        return frozenset(self.tuples)

    def __contains__(self, t) -> bool:
        return tuple(t) in self.tuple_set

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)

    def __bool__(self) -> bool:
        return bool(self.tuples)

    def max_element(self) -> int:
        return max((max(t) for t in self.tuples), default=-1)

    def renamed(self, name: str | None) -> Relation:
        return Relation(self.arity, self.tuples, name)

    def restrict(self, subset: Iterable[int]) -> Relation:
        keep = set(subset)
        return Relation(self.arity, [t for t in self.tuples if all(x in keep for x in t)], self.name)

    def intersect(self, other: Relation) -> Relation:
        if other.arity != self.arity:
            raise ArgumentError("arity mismatch in intersection")
        return Relation(self.arity, self.tuple_set & other.tuple_set, self.name)

    @classmethod
    def equality(cls, elements: Iterable[int], name: str | None = None) -> Relation:
        return cls(2, [(a, a) for a in elements], name)

    @classmethod
    def full(cls, elements: Iterable[int], arity: int, name: str | None = None) -> Relation:
        return cls(arity, itertools.product(sorted(set(elements)), repeat=arity), name)


@dataclass(frozen=True)
class ConstraintLanguage:
    domain: Domain
    relations: tuple[Relation, ...] = ()

    def __post_init__(self):
        rels = []
        seen = set()
        for i, rel in enumerate(self.relations):
            if rel.name is None:
                rel = rel.renamed(f"R{i}")
            if rel.name in seen:
                raise ArgumentError(f"duplicate relation name {rel.name!r}")
            if rel.max_element() >= self.domain.size:
                raise ArgumentError(f"relation {rel.name!r} uses elements outside the domain")
            seen.add(rel.name)
            rels.append(rel)
        object.__setattr__(self, "relations", tuple(rels))

    def __getitem__(self, name: str) -> Relation:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(rel.name == name for rel in self.relations)

    def __iter__(self):
        return iter(self.relations)

    def __len__(self) -> int:
        return len(self.relations)

    @property
    def names(self) -> list[str]:
        return [rel.name for rel in self.relations]

    def with_relations(self, extra: Iterable[Relation]) -> ConstraintLanguage:
        return ConstraintLanguage(self.domain, self.relations + tuple(extra))

    def without(self, names: Iterable[str]) -> ConstraintLanguage:
        drop = set(names)
        return ConstraintLanguage(self.domain, tuple(r for r in self.relations if r.name not in drop))

    def restrict(self, subset: Sequence[int]) -> ConstraintLanguage:
        """The language restricted to ``subset``, re-indexed onto ``0..len(subset)-1``."""
        subset = list(subset)
        if len(set(subset)) != len(subset) or not subset:
            raise ArgumentError("restriction subset must be nonempty and duplicate-free")
        index = {a: i for i, a in enumerate(subset)}
        domain = Domain(len(subset), tuple(self.domain.labels[a] for a in subset))
        rels = []
        for rel in self.relations:
            kept = rel.restrict(subset)
            rels.append(Relation(rel.arity, [tuple(index[x] for x in t) for t in kept], rel.name))
        return ConstraintLanguage(domain, tuple(rels))


class UnionFind:
    def __init__(self, items: Iterable[int]):
        self.parent = {x: x for x in items}

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # keep the smaller element as root so block listings are canonical
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx

    def groups(self) -> list[frozenset[int]]:
        out: dict[int, set[int]] = {}
        for x in self.parent:
            out.setdefault(self.find(x), set()).add(x)
        return [frozenset(g) for g in out.values()]


@dataclass(frozen=True)
class Partition:
    """An equivalence relation on ``carrier``, stored as its blocks."""

    blocks: tuple[frozenset[int], ...]

    def __post_init__(self):
        blocks = [frozenset(b) for b in self.blocks]
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise ArgumentError("partition blocks must be nonempty")
            if seen & b:
                raise ArgumentError("partition blocks must be disjoint")
            seen |= b
        object.__setattr__(self, "blocks", tuple(sorted(blocks, key=min)))

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> Partition:
        return cls(tuple(frozenset(b) for b in blocks))

    @classmethod
    def discrete(cls, carrier: Iterable[int]) -> Partition:
        return cls(tuple(frozenset([a]) for a in carrier))

    @classmethod
    def total(cls, carrier: Iterable[int]) -> Partition:
        carrier = frozenset(carrier)
        return cls((carrier,) if carrier else ())

    @classmethod
    def from_relation(cls, rel: Relation) -> Partition:
        """Blocks of a binary relation that must be an equivalence relation."""
        if not is_equivalence(rel):
            raise ArgumentError("relation is not an equivalence relation on its carrier")
        uf = UnionFind(sorted({a for a, _ in rel}))
        for a, b in rel:
            uf.union(a, b)
        return cls(tuple(uf.groups()))

    @cached_property
    def carrier(self) -> frozenset[int]:
        return frozenset().union(*self.blocks)

    @cached_property
    def _block_of(self) -> dict[int, frozenset[int]]:
        return {a: b for b in self.blocks for a in b}

    def block_of(self, a: int) -> frozenset[int]:
        return self._block_of[a]

    def related(self, a: int, b: int) -> bool:
        return a in self._block_of and b in self._block_of[a]

    def is_discrete(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def is_total(self) -> bool:
        return len(self.blocks) <= 1

    def to_relation(self, name: str | None = None) -> Relation:
        return Relation(2, [(a, b) for blk in self.blocks for a in blk for b in blk], name)

    def restrict(self, subset: Iterable[int]) -> Partition:
        keep = frozenset(subset)
        return Partition(tuple(b & keep for b in self.blocks if b & keep))

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class ThickMapping:
    alpha1: Partition
    alpha2: Partition
    block_bijection: Mapping[frozenset[int], frozenset[int]]

    def __hash__(self):
        return hash((self.alpha1, self.alpha2))


def _require_binary(*rels: Relation) -> None:
    for rel in rels:
        if rel.arity != 2:
            raise ArgumentError(f"expected a binary relation, got arity {rel.arity}")


def project(rel: Relation, indices: Sequence[int]) -> Relation:
    """Project onto 1-based coordinate positions (repeats and any order allowed)."""
    if not indices:
        raise ArgumentError("projection needs at least one index")
    for i in indices:
        if not 1 <= i <= rel.arity:
            raise ArgumentError(f"projection index {i} out of range 1..{rel.arity}")
    pos = [i - 1 for i in indices]
    return Relation(len(pos), [tuple(t[p] for p in pos) for t in rel.tuples])


def compose(r: Relation, q: Relation) -> Relation:
    _require_binary(r, q)
    succ: dict[int, set[int]] = {}
    for z, y in q:
        succ.setdefault(z, set()).add(y)
    return Relation(2, [(x, y) for x, z in r for y in succ.get(z, ())])


def inverse(r: Relation) -> Relation:
    _require_binary(r)
    return Relation(2, [(y, x) for x, y in r])


def is_equivalence(rel: Relation) -> bool:
    """Reflexive on its carrier, symmetric and transitive."""
    if rel.arity != 2:
        return False
    pairs = rel.tuple_set
    carrier = {a for a, _ in pairs} | {b for _, b in pairs}
    if any((a, a) not in pairs for a in carrier):
        return False
    if any((b, a) not in pairs for a, b in pairs):
        return False
    return compose(rel, rel).tuple_set <= pairs


def rectangularity_violation(r: Relation) -> tuple[int, int, int, int] | None:
    """First ``(a, b, c, d)`` with (a,c),(a,d),(b,d) in R and (b,c) not in R."""
    _require_binary(r)
    pairs = r.tuple_set
    rows: dict[int, list[int]] = {}
    cols: dict[int, list[int]] = {}
    for x, y in r.tuples:
        rows.setdefault(x, []).append(y)
        cols.setdefault(y, []).append(x)
    for a in sorted(rows):
        for c in rows[a]:
            for d in rows[a]:
                for b in cols[d]:
                    if (b, c) not in pairs:
                        return a, b, c, d
    return None


def thick_mapping_decompose(
    r: Relation,
) -> tuple[ThickMapping | None, tuple[int, int, int, int] | None]:
    """Return ``(witness, None)`` for a rectangular relation, else ``(None, (a, b, c, d))``."""
    _require_binary(r)
    if not r:
        raise ArgumentError("an empty relation has no thick-mapping classes")
    bad = rectangularity_violation(r)
    if bad is not None:
        return None, bad
    alpha1 = Partition.from_relation(compose(r, inverse(r)))
    alpha2 = Partition.from_relation(compose(inverse(r), r))
    phi = {}
    for blk in alpha1.blocks:
        a = min(blk)
        b = next(y for x, y in r if x == a)
        phi[blk] = alpha2.block_of(b)
    return ThickMapping(alpha1, alpha2, phi), None


def crossing_witness(alpha: Partition, beta: Partition) -> tuple[frozenset[int], frozenset[int]] | None:
    """A block ``C`` of alpha and ``B`` of beta with C-B, C&B, B-C all nonempty."""
    if alpha.carrier != beta.carrier:
        raise ArgumentError("crossing check needs partitions of the same carrier")
    for c in alpha.blocks:
        for b in beta.blocks:
            if c - b and c & b and b - c:
                return c, b
    return None


def join(alpha: Partition, beta: Partition) -> Partition:
    if alpha.carrier != beta.carrier:
        raise ArgumentError("join needs partitions of the same carrier")
    uf = UnionFind(sorted(alpha.carrier))
    for part in (alpha, beta):
        for blk in part.blocks:
            first = min(blk)
            for x in blk:
                uf.union(first, x)
    return Partition(tuple(uf.groups()))


def union_join(alpha: Partition, beta: Partition) -> Partition | None:
    """alpha | beta as a partition when that union is already transitive, else None."""
    rel = Relation(2, alpha.to_relation().tuple_set | beta.to_relation().tuple_set)
    return Partition.from_relation(rel) if is_equivalence(rel) else None


def two_decomposability_counterexample(r: Relation, cap: int = 10**6) -> Tuple_ | None:
    """A tuple outside R whose binary projections all lie in R's, if one exists."""
    if r.arity < 2:
        raise ArgumentError("2-decomposability needs arity at least 2")
    if r.arity == 2 or not r:
        return None
    unary = [sorted({t[i] for t in r}) for i in range(r.arity)]
    space = 1
    for u in unary:
        space *= len(u)
    if space > cap:
        raise ResourceLimitError(f"2-decomposability search space {space} exceeds cap {cap}")
    pairs = {
        (i, j): {(t[i], t[j]) for t in r}
        for i, j in itertools.combinations(range(r.arity), 2)
    }
    for cand in itertools.product(*unary):
        if cand in r.tuple_set:
            continue
        if all((cand[i], cand[j]) in p for (i, j), p in pairs.items()):
            return cand
    return None


# -- cardinality vectors -----------------------------------------------------

def zero_vector(size: int) -> CardinalityVector:
    return (0,) * size


def unit_vector(size: int, a: int) -> CardinalityVector:
    return tuple(1 if i == a else 0 for i in range(size))


def add_vectors(p: CardinalityVector, q: CardinalityVector) -> CardinalityVector:
    if len(p) != len(q):
        raise ArgumentError("cardinality vectors over different domains")
    return tuple(x + y for x, y in zip(p, q))


def cardvec_convolve(pi: Iterable[CardinalityVector], pi2: Iterable[CardinalityVector]) -> set[CardinalityVector]:
    pi2 = list(pi2)
    return {add_vectors(p, q) for p in pi for q in pi2}


def histogram(values: Iterable[int], size: int) -> CardinalityVector:
    counts = [0] * size
    for v in values:
        counts[v] += 1
    return tuple(counts)


def vectors_with_total(size: int, total: int):
    """All cardinality vectors of the given length and total, lexicographically."""
    if size == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in vectors_with_total(size - 1, total - first):
            yield (first,) + rest
