"""Binarization and the 2-consistency algorithm.

A :class:`BinarizedInstance` holds one binary relation per variable pair as a
dense boolean tensor ``masks[v, w, x, y]`` (``(x, y) in R_vw``), together with
the supports ``S_v``.  ``masks[v, w]`` is always the transpose of
``masks[w, v]`` and ``masks[v, v]`` is the diagonal of ``S_v``.
"""
from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .enumeration import assignment_chunks, relation_table, tuple_codes
from .errors import InvariantError
from .instance import Constraint, Instance
from .relations import Relation

# above this many variables the dense sweep is used instead of the worklist
DENSE_THRESHOLD = 64


@dataclass
class BinarizedInstance:
    masks: np.ndarray
    supports: np.ndarray
    inconsistent: bool = False
    variables: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.variables:
            self.variables = tuple(range(self.supports.shape[0]))

    @property
    def n(self) -> int:
        return self.supports.shape[0]

    @property
    def domain_size(self) -> int:
        return self.supports.shape[1]

    def support(self, v: int) -> frozenset[int]:
        return frozenset(int(x) for x in np.flatnonzero(self.supports[v]))

    def pairs(self, v: int, w: int) -> frozenset[tuple[int, int]]:
        xs, ys = np.nonzero(self.masks[v, w])
        return frozenset(zip(xs.tolist(), ys.tolist()))

    def relation(self, v: int, w: int) -> Relation:
        return Relation(2, self.pairs(v, w), f"R_{v}_{w}")

    def pair_relations(self) -> dict[tuple[int, int], Relation]:
        return {(v, w): self.relation(v, w) for v, w in itertools.combinations(range(self.n), 2)}

    def copy(self) -> BinarizedInstance:
        return BinarizedInstance(self.masks.copy(), self.supports.copy(), self.inconsistent, self.variables)

    def subinstance(self, vertices) -> BinarizedInstance:
        idx = np.asarray(vertices, dtype=np.intp)
        return BinarizedInstance(
            self.masks[np.ix_(idx, idx)],
            self.supports[idx],
            self.inconsistent,
            tuple(self.variables[i] for i in idx),
        )

    def is_solution(self, assignment) -> bool:
        if self.inconsistent:
            return False
        a = np.asarray(assignment)
        n = self.n
        if not self.supports[np.arange(n), a].all():
            return False
        return bool(self.masks[np.arange(n)[:, None], np.arange(n)[None, :], a[:, None], a[None, :]].all())

    def same_state(self, other: BinarizedInstance) -> bool:
        return (
            self.inconsistent == other.inconsistent
            and np.array_equal(self.masks, other.masks)
            and np.array_equal(self.supports, other.supports)
        )


def _empty(n: int, d: int, variables=()) -> BinarizedInstance:
    return BinarizedInstance(
        np.zeros((n, n, d, d), dtype=bool), np.zeros((n, d), dtype=bool), True, tuple(variables)
    )


def _consistent_rows(c: Constraint) -> tuple[list[int], np.ndarray]:
    """Distinct scope variables and the relation tuples projected onto them,
    keeping only tuples that agree on repeated variables."""
    distinct = list(dict.fromkeys(c.scope))
    arr = np.array(c.relation.tuples, dtype=np.int64).reshape(-1, c.relation.arity)
    ok = np.ones(len(arr), dtype=bool)
    first = []
    for v in distinct:
        pos = [i for i, s in enumerate(c.scope) if s == v]
        for p in pos[1:]:
            ok &= arr[:, p] == arr[:, pos[0]]
        first.append(pos[0])
    return distinct, arr[ok][:, first]


def _finish(masks: np.ndarray, supports: np.ndarray, variables=()) -> BinarizedInstance:
    n, d = supports.shape
    idx = np.arange(n)
    masks[idx, idx] = False
    masks &= supports[:, None, :, None] & supports[None, :, None, :]
    if not supports.any(axis=1).all():
        return _empty(n, d, variables)
    off = ~np.eye(n, dtype=bool)
    if n > 1 and not masks.any(axis=(2, 3))[off].all():
        return _empty(n, d, variables)
    diag = np.eye(d, dtype=bool)[None, :, :] & supports[:, :, None]
    masks[idx, idx] = diag
    return BinarizedInstance(masks, supports, False, tuple(variables))


def initial_binarization(instance: Instance) -> BinarizedInstance:
    """Pair relations from the unary and binary projections of every constraint."""
    n, d = instance.num_vars, instance.domain_size
    masks = np.ones((n, n, d, d), dtype=bool)
    supports = np.ones((n, d), dtype=bool)
    for c in instance.constraints:
        distinct, rows = _consistent_rows(c)
        if len(rows) == 0:
            return _empty(n, d)
        for i, v in enumerate(distinct):
            allowed = np.zeros(d, dtype=bool)
            allowed[rows[:, i]] = True
            supports[v] &= allowed
        for (i, v), (j, w) in itertools.combinations(enumerate(distinct), 2):
            allowed = np.zeros((d, d), dtype=bool)
            allowed[rows[:, i], rows[:, j]] = True
            masks[v, w] &= allowed
            masks[w, v] &= allowed.T
    return _finish(masks, supports)


def _triple_tables(instance: Instance) -> dict[tuple[int, int, int], np.ndarray]:
    """For each sorted variable triple covered by one constraint scope, the
    intersection of those constraints' projections onto the triple."""
    d = instance.domain_size
    tables: dict[tuple[int, int, int], np.ndarray] = {}
    for c in instance.constraints:
        distinct, rows = _consistent_rows(c)
        if len(distinct) < 3:
            continue
        order = sorted(range(len(distinct)), key=lambda i: distinct[i])
        for i, j, k in itertools.combinations(order, 3):
            key = (distinct[i], distinct[j], distinct[k])
            t = np.zeros((d, d, d), dtype=bool)
            t[rows[:, i], rows[:, j], rows[:, k]] = True
            if key in tables:
                tables[key] &= t
            else:
                tables[key] = t
    return tables


def _oriented(table: np.ndarray, key: tuple[int, int, int], v: int, w: int, u: int) -> np.ndarray:
    """View the table for sorted ``key`` with axes ordered as (v, w, u)."""
    return np.transpose(table, (key.index(v), key.index(w), key.index(u)))


def _special_thirds(tables) -> dict[tuple[int, int], list[int]]:
    out: dict[tuple[int, int], list[int]] = {}
    for key in tables:
        for v, w in itertools.combinations(key, 2):
            u = next(x for x in key if x != v and x != w)
            out.setdefault((v, w), []).append(u)
    return out


def _special_extension(masks, tables, v, w, u) -> np.ndarray:
    key = tuple(sorted((v, w, u)))
    t = _oriented(tables[key], key, v, w, u)
    return (masks[v, u][:, None, :] & masks[w, u][None, :, :] & t).any(axis=2)


def _worklist(masks: np.ndarray, tables, rng: random.Random | None) -> np.ndarray:
    n = masks.shape[0]
    idx = np.arange(n)
    specials = _special_thirds(tables)
    pairs = list(itertools.combinations(range(n), 2))
    if rng is not None:
        rng.shuffle(pairs)
    queue = deque(pairs)
    queued = set(pairs)
    while queue:
        if rng is not None and len(queue) > 1:
            queue.rotate(-rng.randrange(len(queue)))
        v, w = queue.popleft()
        queued.discard((v, w))
        cur = masks[v, w]
        if not cur.any():
            continue
        ext = np.einsum("uxc,uyc->uxy", masks[v].astype(np.int32), masks[w].astype(np.int32)) > 0
        ext[[v, w]] = True
        ok = ext.all(axis=0)
        for u in specials.get((v, w), ()):
            ok &= _special_extension(masks, tables, v, w, u)
        new = cur & ok
        if np.array_equal(new, cur):
            continue
        masks[v, w] = new
        masks[w, v] = new.T
        for u in idx:
            if u == v or u == w:
                continue
            for p in ((min(v, u), max(v, u)), (min(w, u), max(w, u))):
                if p not in queued:
                    queued.add(p)
                    queue.append(p)
    return masks


def _dense_fail(masks: np.ndarray) -> np.ndarray:
    """fail[v, w, x, y]: some variable u admits no c with (x,c) in R_vu and
    (y,c) in R_wu.  "For all c, not A or not B" is expanded into a union over
    subsets T of D of (no c in T with A) and (no c outside T with B); the
    union over T and u is then a single boolean matrix product."""
    n, _, d, _ = masks.shape
    neg = ~masks
    full = (1 << d) - 1
    # none[T][v, u, x]: no c in T with (x, c) in R_vu
    none = {}
    for t in range(1, full + 1):
        acc = np.ones((n, n, d), dtype=bool)
        for z in range(d):
            if t >> z & 1:
                acc &= neg[:, :, :, z]
        none[t] = acc
    # T empty or T = D: some u gives x (or y) no partner at all
    lonely = none[full].any(axis=1)  # (v, x)
    fail = lonely[:, None, :, None] | lonely[None, :, None, :]
    mixed = list(range(1, full))
    if mixed:
        left = np.stack([none[t] for t in mixed], axis=1)  # (v, T, u, x)
        right = np.stack([none[full ^ t] for t in mixed], axis=1)
        left = left.transpose(0, 3, 1, 2).reshape(n * d, -1).astype(np.float32)
        right = right.transpose(0, 3, 1, 2).reshape(n * d, -1).astype(np.float32)
        prod = (left @ right.T) > 0  # ((v, x), (w, y))
        fail = fail | prod.reshape(n, d, n, d).transpose(0, 2, 1, 3)
    return fail


def _dense(masks: np.ndarray, tables) -> np.ndarray:
    specials = _special_thirds(tables)
    while True:
        fail = _dense_fail(masks)
        for (v, w), thirds in specials.items():
            ok = np.ones(masks.shape[2:], dtype=bool)
            for u in thirds:
                ok &= _special_extension(masks, tables, v, w, u)
            fail[v, w] |= ~ok
            fail[w, v] |= ~ok.T
        new = masks & ~fail
        if np.array_equal(new, masks):
            return masks
        masks = new


def enforce_2consistency(
    binarized: BinarizedInstance,
    instance: Instance,
    method: str = "auto",
    rng: random.Random | None = None,
) -> BinarizedInstance:
    """Delete pairs that do not extend to a third variable until nothing changes.

    ``method`` is ``"worklist"`` (pair queue, deterministic unless ``rng`` is
    given), ``"dense"`` (simultaneous sweeps via boolean matrix products) or
    ``"auto"``.  Both reach the same greatest fixed point.
    """
    if binarized.inconsistent:
        return binarized.copy()
    n, d = binarized.n, binarized.domain_size
    if n < 2:
        return binarized.copy()
    masks = binarized.masks.copy()
    idx = np.arange(n)
    masks[idx, idx] = True
    tables = _triple_tables(instance)
    local = {g: i for i, g in enumerate(binarized.variables)}
    tables = {tuple(local[g] for g in key): t for key, t in tables.items() if all(g in local for g in key)}
    if method == "auto":
        method = "dense" if n > DENSE_THRESHOLD and d <= 6 else "worklist"
    if method == "worklist":
        masks = _worklist(masks, tables, rng)
    elif method == "dense":
        masks = _dense(masks, tables)
    else:
        raise ValueError(f"unknown consistency method {method!r}")
    masks[idx, idx] = False
    off = ~np.eye(n, dtype=bool)
    if not masks.any(axis=(2, 3))[off].all():
        return _empty(n, d, binarized.variables)
    supports = masks.any(axis=3)  # (v, w, x): x in pr1 R_vw
    supports[idx, idx] = True
    supports = supports.all(axis=1) & binarized.supports
    return _finish(masks, supports, binarized.variables)


def binarize(instance: Instance, method: str = "auto") -> BinarizedInstance:
    """Initial binarization followed by 2-consistency."""
    return enforce_2consistency(initial_binarization(instance), instance, method)


def check_supports(b: BinarizedInstance) -> None:
    """S_v = pr1 R_vw for every w != v (holds after 2-consistency)."""
    if b.inconsistent or b.n < 2:
        return
    pr1 = b.masks.any(axis=3)
    for v in range(b.n):
        others = np.delete(pr1[v], v, axis=0)
        if not (others == b.supports[v]).all():
            raise InvariantError(f"support of variable {v} differs from a pair projection")


def is_2consistent(b: BinarizedInstance, instance: Instance) -> bool:
    again = enforce_2consistency(b, instance, method="worklist")
    return again.same_state(b)


def solution_sets(instance: Instance, b: BinarizedInstance, cap: int = 10**6):
    """Solution sets of the instance and of its binarization, as sets of tuples."""
    n, d = instance.num_vars, instance.domain_size
    tables = [
        (np.array(c.scope, dtype=np.intp), relation_table(c.relation.tuples, c.relation.arity, d))
        for c in instance.constraints
    ]
    sol_p, sol_b = set(), set()
    for chunk in assignment_chunks(n, d, cap):
        chunk64 = chunk.astype(np.int64)
        ok = np.ones(len(chunk), dtype=bool)
        for scope, table in tables:
            ok &= table[tuple_codes(chunk64[:, scope], d)]
        okb = np.full(len(chunk), not b.inconsistent)
        if not b.inconsistent:
            for v in range(n):
                okb &= b.supports[v][chunk64[:, v]]
            for v, w in itertools.combinations(range(n), 2):
                okb &= b.masks[v, w][chunk64[:, v], chunk64[:, w]]
        sol_p.update(map(tuple, chunk64[ok].tolist()))
        sol_b.update(map(tuple, chunk64[okb].tolist()))
    return sol_p, sol_b


def solution_equivalence_check(instance: Instance, b: BinarizedInstance, cap: int = 10**6) -> bool:
    """True when the instance and its binarization have identical solution sets."""
    sol_p, sol_b = solution_sets(instance, b, cap)
    return sol_p == sol_b
