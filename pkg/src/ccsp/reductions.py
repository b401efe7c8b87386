"""Instance transformers behind the hardness results.

Each transformer returns a :class:`ReductionOutput` holding the new instance
with an affine map.  The map takes the original cardinality vector (for BIS,
the pair ``(k1, k2)``) to the vector the new instance must meet.

Variable layouts are fixed so that generated instances are reproducible:

* pp-exists: ``W_v`` occupies ids ``v*q|D| .. v*q|D| + q|D| - 1``; then the
  witnesses ``w_1..w_q``; then ``w_i^1..w_i^{|D|-1}`` for i = 1..q.
* constants: the unconstrained variables keep their relative order and come
  first, followed by the gadget blocks ``V_{d_1}, V_{d_2}, ...``.
* BIS case 1: the left side, then the right side.  Case 3: the blocks ``V^w``
  for left vertices w in order, then the right side.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArgumentError, InvariantError
from .instance import Constraint, Instance, check_total
from .relations import (
    CardinalityVector,
    ConstraintLanguage,
    Domain,
    Partition,
    Relation,
    compose,
    crossing_witness,
    project,
    thick_mapping_decompose,
)


@dataclass(frozen=True)
class AffineMap:
    """``pi -> matrix @ pi + offset`` on integer vectors."""

    matrix: tuple[tuple[int, ...], ...]
    offset: tuple[int, ...]

    @classmethod
    def identity(cls, size: int) -> AffineMap:
        return cls(tuple(tuple(int(i == j) for j in range(size)) for i in range(size)), (0,) * size)

    def __call__(self, pi: Sequence[int]) -> CardinalityVector:
        if len(pi) != len(self.matrix[0]):
            raise ArgumentError(f"expected a vector of length {len(self.matrix[0])}")
        out = np.array(self.matrix, dtype=object).dot(np.array(list(pi), dtype=object))
        return tuple(int(x) + b for x, b in zip(out, self.offset))

    def then(self, after: AffineMap) -> AffineMap:
        a = np.array(after.matrix, dtype=object)
        m = a.dot(np.array(self.matrix, dtype=object))
        off = a.dot(np.array(self.offset, dtype=object))
        return AffineMap(
            tuple(tuple(int(x) for x in row) for row in m),
            tuple(int(x) + b for x, b in zip(off, after.offset)),
        )

    def to_json(self) -> dict:
        return {"matrix": [list(r) for r in self.matrix], "offset": list(self.offset)}


@dataclass
class ReductionOutput:
    instance: Instance
    forward_map: AffineMap
    notes: str = ""
    variable_names: list[str] = field(default_factory=list)

    def transform(self, pi: Sequence[int]) -> CardinalityVector:
        """Apply the forward map and confirm the total matches the new instance."""
        new = self.forward_map(pi)
        check_total(new, self.instance.num_vars, self.instance.domain_size)
        return new


def _named(language: ConstraintLanguage, rel: Relation) -> Relation:
    """The member of ``language`` carrying ``rel``'s name, checked for equality."""
    if rel.name is None or rel.name not in language:
        raise ArgumentError(f"relation {rel.name!r} is not in the target language")
    target = language[rel.name]
    if target != rel:
        raise ArgumentError(f"relation {rel.name!r} differs from the target language's version")
    return target


# -- restriction -------------------------------------------------------------------

def reduce_restriction(instance: Instance, language: ConstraintLanguage, subset: Sequence[int]) -> ReductionOutput:
    """Instance over ``language`` restricted to ``subset`` (re-indexed onto
    0..len(subset)-1) to the same constraints over the full language."""
    subset = list(subset)
    if instance.domain_size != len(subset):
        raise ArgumentError("instance domain size does not match the subset")
    restricted = language.restrict(subset)
    constraints = []
    for c in instance.constraints:
        name = c.relation.name
        if name is None or name not in restricted or restricted[name] != c.relation:
            raise ArgumentError(f"relation {name!r} is not the restriction of a relation of the language")
        constraints.append(Constraint(c.scope, language[name]))
    d = language.domain.size
    matrix = tuple(tuple(int(subset[j] == i) for j in range(len(subset))) for i in range(d))
    fmap = AffineMap(matrix, (0,) * d)
    return ReductionOutput(
        Instance(instance.num_vars, tuple(constraints), language),
        fmap,
        f"restriction to {subset} undone; values outside get count 0",
        [f"v{i}" for i in range(instance.num_vars)],
    )


# -- pp-definitions --------------------------------------------------------------------

def reduce_pp_conjunction(
    instance: Instance,
    language: ConstraintLanguage,
    name: str,
    conjuncts: Sequence[tuple[Relation, Sequence[int] | None]],
) -> ReductionOutput:
    """Replace every constraint on relation ``name`` by its conjuncts.

    Each conjunct is ``(relation, coords)``: the relation applied to the listed
    1-based coordinates of the defined relation (``None`` means all of them, in
    order).  Coordinates a conjunct leaves out are fictitious for it.
    """
    if name not in instance.language:
        raise ArgumentError(f"relation {name!r} is not used by the instance language")
    target = instance.language[name]
    d = instance.domain_size
    parts = []
    for rel, coords in conjuncts:
        rel = _named(language, rel)
        coords = tuple(range(1, target.arity + 1)) if coords is None else tuple(coords)
        if len(coords) != rel.arity:
            raise ArgumentError(
                f"conjunct {rel.name!r} has arity {rel.arity} but {len(coords)} coordinates were given"
            )
        if any(not 1 <= i <= target.arity for i in coords):
            raise ArgumentError("conjunct coordinate out of range")
        parts.append((rel, coords))
    defined = {
        t
        for t in itertools.product(range(d), repeat=target.arity)
        if all(tuple(t[i - 1] for i in coords) in rel.tuple_set for rel, coords in parts)
    }
    if defined != set(target.tuples):
        raise ArgumentError(f"the conjunction does not define relation {name!r}")
    constraints = []
    for c in instance.constraints:
        if c.relation.name == name:
            for rel, coords in parts:
                constraints.append(Constraint(tuple(c.scope[i - 1] for i in coords), rel))
        else:
            constraints.append(Constraint(c.scope, _named(language, c.relation)))
    return ReductionOutput(
        Instance(instance.num_vars, tuple(constraints), language),
        AffineMap.identity(d),
        f"{name} replaced by " + " and ".join(r.name for r, _ in parts),
        [f"v{i}" for i in range(instance.num_vars)],
    )


def reduce_pp_exists(
    instance: Instance, language: ConstraintLanguage, name: str, witness: Relation
) -> ReductionOutput:
    """``R(x) = exists y R'(x, y)`` with the quantified coordinate last.

    Every variable becomes a block of q|D| copies, each R-constraint gets a
    fresh witness variable and |D|-1 free companions; the cardinality vector
    becomes ``q|D| pi + q`` pointwise, q being the number of R-constraints.
    """
    if name not in instance.language:
        raise ArgumentError(f"relation {name!r} is not used by the instance language")
    target = instance.language[name]
    witness = _named(language, witness)
    if witness.arity != target.arity + 1:
        raise ArgumentError("the witness relation must have exactly one more coordinate")
    if project(witness, list(range(1, target.arity + 1))) != target.renamed(None):
        raise ArgumentError(f"projecting {witness.name!r} does not give {name!r}")
    d = instance.domain_size
    n = instance.num_vars
    r_cons = [c for c in instance.constraints if c.relation.name == name]
    q = len(r_cons)
    if q == 0:
        raise ArgumentError(f"no constraint uses {name!r}; the instance needs no reduction")
    block = q * d

    def members(v: int) -> range:
        return range(v * block, (v + 1) * block)

    w_first = n * block
    companions = w_first + q
    total = companions + q * (d - 1)
    names = [f"W{v}[{j}]" for v in range(n) for j in range(block)]
    names += [f"w{i}" for i in range(q)]
    names += [f"w{i}^{j}" for i in range(q) for j in range(1, d)]
    constraints = []
    i = 0
    for c in instance.constraints:
        if c.relation.name == name:
            for combo in itertools.product(*(members(v) for v in c.scope)):
                constraints.append(Constraint(combo + (w_first + i,), witness))
            i += 1
        else:
            rel = _named(language, c.relation)
            for combo in itertools.product(*(members(v) for v in c.scope)):
                constraints.append(Constraint(combo, rel))
    fmap = AffineMap(
        tuple(tuple(block * int(a == b) for b in range(d)) for a in range(d)), (q,) * d
    )
    return ReductionOutput(
        Instance(total, tuple(constraints), language),
        fmap,
        f"{name}(x) = exists y {witness.name}(x, y); q = {q}, blocks of {block}",
        names,
    )


# -- constants -----------------------------------------------------------------------------

def constant_value(rel: Relation) -> int | None:
    if rel.arity == 1 and len(rel) == 1:
        return rel.tuples[0][0]
    return None


def _reduce_one_constant(instance: Instance, base: ConstraintLanguage, const_name: str) -> ReductionOutput:
    rel_c = instance.language[const_name]
    a = constant_value(rel_c)
    d = instance.domain_size
    n = instance.num_vars
    if n < 1:
        raise ArgumentError("the constants reduction needs at least one variable")
    order = [a] + [x for x in range(d) if x != a]
    sizes = {order[i]: n ** (d - i) for i in range(d)}  # |V_{d_i}| = n^{|D|+1-i}, i 1-based
    w_set = sorted({c.scope[0] for c in instance.constraints if c.relation.name == const_name})
    keep = [v for v in range(n) if v not in set(w_set)]
    new_id = {v: i for i, v in enumerate(keep)}
    names = [f"v{v}" for v in keep]
    start = len(keep)
    blocks = {}
    for x in order:
        blocks[x] = range(start, start + sizes[x])
        names += [f"V[{x}][{j}]" for j in range(sizes[x])]
        start += sizes[x]
    constraints = []
    for rel in base.relations:  # the gadget
        for t in rel.tuples:
            for combo in itertools.product(*(blocks[x] for x in t)):
                constraints.append(Constraint(combo, rel))
    w_lookup = set(w_set)
    for c in instance.constraints:
        if c.relation.name == const_name:
            continue
        rel = _named(base, c.relation)
        choices = [blocks[a] if v in w_lookup else (new_id[v],) for v in c.scope]
        for combo in itertools.product(*choices):
            constraints.append(Constraint(combo, rel))
    offset = tuple(sizes[x] - (len(w_set) if x == a else 0) for x in range(d))
    fmap = AffineMap(AffineMap.identity(d).matrix, offset)
    return ReductionOutput(
        Instance(start, tuple(constraints), base),
        fmap,
        f"constant {const_name} (value {a}) removed with gadget blocks "
        + ", ".join(f"{x}:{sizes[x]}" for x in order),
        names,
    )


def reduce_constants(instance: Instance, language: ConstraintLanguage) -> ReductionOutput:
    """Remove constant (singleton unary) relations not in ``language``, one per pass."""
    lang = instance.language
    consts = [r.name for r in lang.relations if r.name not in language and constant_value(r) is not None]
    for c in instance.constraints:
        if c.relation.name not in consts:
            _named(language, c.relation)
    if not consts:
        # no constants: a gadget built for the first constant-free pass is still
        # valid, so attach one keyed on value 0 with an empty W
        base = ConstraintLanguage(lang.domain, tuple(language.relations))
        dummy = Relation(1, [(0,)], "__const0")
        extended = Instance(instance.num_vars, instance.constraints, base.with_relations([dummy]))
        out = _reduce_one_constant(extended, base, "__const0")
        out.notes = "no constants; gadget attached"
        return out
    current = instance
    fmap = AffineMap.identity(instance.domain_size)
    notes = []
    names = [f"v{i}" for i in range(instance.num_vars)]
    for k, name in enumerate(consts):
        remaining = [r for r in lang.relations if r.name in consts[k + 1:]]
        base = ConstraintLanguage(lang.domain, tuple(language.relations) + tuple(remaining))
        step = _reduce_one_constant(current, base, name)
        fmap = fmap.then(step.forward_map)
        notes.append(step.notes)
        current = step.instance
        names = step.variable_names
    final = Instance(current.num_vars, current.constraints, language)
    return ReductionOutput(final, fmap, "; ".join(notes), names)


# -- bipartite independent set --------------------------------------------------------------

@dataclass(frozen=True)
class BipartiteGraph:
    left: int
    right: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted({(int(u), int(w)) for u, w in self.edges})))
        if self.left < 0 or self.right < 0:
            raise ArgumentError("side sizes must be nonnegative")
        for u, w in self.edges:
            if not (0 <= u < self.left and 0 <= w < self.right):
                raise ArgumentError(f"edge ({u}, {w}) out of range")

    @property
    def size(self) -> int:
        return self.left + self.right

    def isolated(self) -> list[str]:
        lu = {u for u, _ in self.edges}
        rw = {w for _, w in self.edges}
        return [f"L{u}" for u in range(self.left) if u not in lu] + [
            f"R{w}" for w in range(self.right) if w not in rw
        ]


def parse_graph(text: str) -> BipartiteGraph:
    """``left <n1>``, ``right <n2>``, then ``edge <u> <w>`` lines."""
    left = right = None
    edges = []
    for raw in text.splitlines():
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        try:
            if toks[0] == "left":
                left = int(toks[1])
            elif toks[0] == "right":
                right = int(toks[1])
            elif toks[0] == "edge":
                edges.append((int(toks[1]), int(toks[2])))
            else:
                raise ArgumentError(f"unknown graph keyword {toks[0]!r}")
        except (IndexError, ValueError):
            raise ArgumentError(f"bad graph line {raw.strip()!r}") from None
    if left is None or right is None:
        raise ArgumentError("graph needs 'left' and 'right' lines")
    return BipartiteGraph(left, right, tuple(edges))


def bis_feasible(graph: BipartiteGraph, k1: int, k2: int) -> bool:
    """Exhaustive search for an independent set with k1 left and k2 right vertices."""
    if not (0 <= k1 <= graph.left and 0 <= k2 <= graph.right):
        return False
    adj = {u: set() for u in range(graph.left)}
    for u, w in graph.edges:
        adj[u].add(w)
    for chosen in itertools.combinations(range(graph.left), k1):
        blocked = set().union(*(adj[u] for u in chosen)) if chosen else set()
        if graph.right - len(blocked) >= k2:
            return True
    return False


def non_thick_witnesses(rel: Relation):
    """Every (a, b, c, d) with (a,c), (a,d), (b,d) in R and (b,c) not in R."""
    pairs = rel.tuple_set
    for (a, c), (a2, d) in itertools.product(rel.tuples, repeat=2):
        if a2 != a:
            continue
        for b, d2 in rel.tuples:
            if d2 == d and (b, c) not in pairs:
                yield a, b, c, d


def _case_ok(rel: Relation, w, case: str) -> bool:
    a, b, c, d = w
    pr1 = {x for x, _ in rel.tuples}
    pr2 = {y for _, y in rel.tuples}
    if case == "1":
        return len({a, b, c, d}) == 4 and pr1 == {a, b} and pr2 == {c, d}
    if len({a, b, c, d}) != 3 or pr1 != {a, b}:
        return False
    if case == "3a":
        return c not in (a, b)
    if case == "3b":
        return d not in (a, b) and (b, a) not in rel.tuple_set and (b, b) not in rel.tuple_set
    raise ArgumentError(f"unknown BIS case {case!r}; use 1, 3a or 3b")


def reduce_bis(
    graph: BipartiteGraph, k1: int, k2: int, rel: Relation, case: str, domain_size: int | None = None
) -> ReductionOutput:
    """A CCSP({R}) instance that is feasible exactly when the graph has an
    independent set with k1 left and k2 right vertices.  The forward map
    takes ``(k1, k2)`` to the cardinality vector."""
    if rel.arity != 2:
        raise ArgumentError("BIS reductions need a binary relation")
    case = str(case)
    if case not in ("1", "3a", "3b"):
        raise ArgumentError(f"unknown BIS case {case!r}; use 1, 3a or 3b")
    witness = next((w for w in non_thick_witnesses(rel) if _case_ok(rel, w, case)), None)
    if witness is None:
        if next(non_thick_witnesses(rel), None) is None:
            raise ArgumentError("relation is a thick mapping; no BIS witness exists")
        raise ArgumentError(f"relation does not meet the side conditions of case {case}")
    if graph.isolated():
        raise ArgumentError(f"graph has isolated vertices: {', '.join(graph.isolated())}")
    d = domain_size if domain_size is not None else rel.max_element() + 1
    lang = ConstraintLanguage(Domain(d), (rel if rel.name else rel.renamed("R"),))
    rel = lang.relations[0]
    a, b, c, dd = witness
    n1, n2 = graph.left, graph.right
    # forward map on (k1, k2): rows are domain values
    m = [[0, 0] for _ in range(d)]
    off = [0] * d
    if case == "1":
        names = [f"L{u}" for u in range(n1)] + [f"R{w}" for w in range(n2)]
        constraints = [Constraint((u, n1 + w), rel) for u, w in graph.edges]
        m[a][0] -= 1
        off[a] += n1
        m[b][0] += 1
        m[c][1] += 1
        m[dd][1] -= 1
        off[dd] += n2
        num_vars = n1 + n2
    else:
        big = 2 * graph.size
        names = [f"L{u}[{j}]" for u in range(n1) for j in range(big)] + [f"R{w}" for w in range(n2)]
        right0 = n1 * big
        constraints = [
            Constraint((u * big + j, right0 + w), rel) for u, w in graph.edges for j in range(big)
        ]
        m[a][0] -= big
        off[a] += n1 * big
        m[b][0] += big
        if case == "3a":
            # c counts the selected right vertices, d (one of a, b) the rest
            m[c][1] += 1
            m[dd][1] -= 1
            off[dd] += n2
        else:
            # d counts the unselected right vertices, c (one of a, b) the rest
            m[dd][1] -= 1
            off[dd] += n2
            m[c][1] += 1
        num_vars = right0 + n2
    fmap = AffineMap(tuple(tuple(r) for r in m), tuple(off))
    return ReductionOutput(
        Instance(num_vars, tuple(constraints), lang),
        fmap,
        f"BIS case {case} with witness a={a} b={b} c={c} d={dd}",
        names,
    )


# -- crossing equivalence relations ------------------------------------------------------

def crossing_triple(alpha: Partition, beta: Partition) -> tuple[int, int, int]:
    """(a, b, c) with a~c in alpha only and c~b in beta only."""
    w = crossing_witness(alpha, beta)
    if w is None:
        raise ArgumentError("the equivalence relations do not cross")
    block_a, block_b = w
    return min(block_a - block_b), min(block_b - block_a), min(block_a & block_b)


def crossing_to_nonthick(alpha: Partition, beta: Partition) -> Relation:
    """alpha' o beta' for the restrictions to a crossing triple; never a thick mapping."""
    a, b, c = crossing_triple(alpha, beta)
    keep = (a, b, c)
    r = compose(alpha.to_relation().restrict(keep), beta.to_relation().restrict(keep))
    if thick_mapping_decompose(r)[0] is not None:
        raise InvariantError("composition of crossing restrictions came out rectangular")
    return r.renamed("R")


def reduce_crossing(
    instance: Instance, alpha: Partition, beta: Partition, domain_size: int
) -> ReductionOutput:
    """Instance over the 8-pair relation R (on the crossing triple, re-indexed
    to 0, 1, 2 in increasing order) to an instance over {alpha, beta}.

    Chain: R(x, y) = exists z Q(x, y, z); Q = alpha'(x, z) and beta'(z, y);
    then undo the restriction to the triple."""
    a, b, c = crossing_triple(alpha, beta)
    triple = sorted((a, b, c))
    index = {x: i for i, x in enumerate(triple)}
    alpha_r = Relation(2, [(index[x], index[y]) for x, y in alpha.to_relation().restrict(triple)], "alpha")
    beta_r = Relation(2, [(index[x], index[y]) for x, y in beta.to_relation().restrict(triple)], "beta")
    r = Relation(2, [(index[x], index[y]) for x, y in crossing_to_nonthick(alpha, beta)], "R")
    if instance.domain_size != 3 or any(con.relation != r for con in instance.constraints):
        raise ArgumentError("instance must use only the crossing relation R over the 3-element triple")
    small = Domain(3, tuple(str(x) for x in triple))
    q_rel = Relation(
        3,
        [(x, y, z) for x, y, z in itertools.product(range(3), repeat=3)
         if (x, z) in alpha_r.tuple_set and (z, y) in beta_r.tuple_set],
        "Q",
    )
    lang_r = ConstraintLanguage(small, (r,))
    start = Instance(instance.num_vars, tuple(Constraint(con.scope, r) for con in instance.constraints), lang_r)
    lang_q = ConstraintLanguage(small, (q_rel,))
    if not start.constraints:
        step1 = ReductionOutput(Instance(start.num_vars, (), lang_q), AffineMap.identity(3), "no constraints")
    else:
        step1 = reduce_pp_exists(
            Instance(start.num_vars, start.constraints, lang_r.with_relations([q_rel])), lang_q, "R", q_rel
        )
    lang_ab = ConstraintLanguage(small, (alpha_r, beta_r))
    step2 = reduce_pp_conjunction(
        Instance(step1.instance.num_vars, step1.instance.constraints, lang_ab.with_relations([q_rel])),
        lang_ab,
        "Q",
        [(alpha_r, (1, 3)), (beta_r, (3, 2))],
    )
    full = ConstraintLanguage(
        Domain(domain_size), (alpha.to_relation("alpha"), beta.to_relation("beta"))
    )
    step3 = reduce_restriction(step2.instance, full, triple)
    fmap = step1.forward_map.then(step2.forward_map).then(step3.forward_map)
    return ReductionOutput(
        step3.instance,
        fmap,
        f"crossing triple a={a} b={b} c={c}; " + step1.notes,
        step1.variable_names or [f"v{i}" for i in range(step3.instance.num_vars)],
    )
