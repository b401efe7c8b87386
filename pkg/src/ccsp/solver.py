"""Feasible cardinality vectors (and their solution counts) for tractable instances.

One recursive engine serves both the decision and the counting variants: it
returns a map from cardinality vector to the exact number of solutions with
that histogram, and the decision read-out is the key set.

A single variable contributes one unit vector per support value.  Larger
instances convolve the maps of their constraint-graph components.  Inside a
connected component the smallest variable ``v0`` is split along the blocks
of ``eta_v0``; each branch restricts every variable to its matching block,
and branch results add up because their solution sets are disjoint.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .classifier import Verdict, classify
from .consistency import BinarizedInstance, binarize, enforce_2consistency
from .errors import ArgumentError, InvariantError, PreconditionError, ResourceLimitError
from .instance import Instance, check_total
from .relations import CardinalityVector, ConstraintLanguage, Partition

CountMap = dict[CardinalityVector, int]

DEBUG = bool(os.environ.get("CCSP_DEBUG"))


@dataclass
class SolverStats:
    """Counters filled in by one engine run; every structural check that
    passed is tallied so callers can see the invariants were exercised."""

    calls: int = 0
    max_depth: int = 0
    components_checked: int = 0
    eta_checked: int = 0
    psi_checked: int = 0
    consistency_rechecks: int = 0

    def merge(self, other: SolverStats) -> None:
        self.calls += other.calls
        self.max_depth = max(self.max_depth, other.max_depth)
        self.components_checked += other.components_checked
        self.eta_checked += other.eta_checked
        self.psi_checked += other.psi_checked
        self.consistency_rechecks += other.consistency_rechecks


@dataclass
class ConstraintGraph:
    vertices: tuple[int, ...]
    nontrivial: np.ndarray = field(repr=False)
    components: tuple[tuple[int, ...], ...]

    @property
    def edges(self) -> list[tuple[int, int]]:
        vs, ws = np.nonzero(np.triu(self.nontrivial, 1))
        return list(zip(vs.tolist(), ws.tolist()))


@dataclass
class ClassMap:
    """``maps[w]`` sends each block of eta_base to the matching block of eta_w."""

    base: int
    eta: Partition
    maps: dict[int, dict[frozenset[int], frozenset[int]]]


# -- vectorized building blocks -----------------------------------------------

def _bool_mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.matmul(a.astype(np.int32), b.astype(np.int32)) > 0


def _nontrivial(b: BinarizedInstance) -> np.ndarray:
    s = b.supports
    product = s[:, None, :, None] & s[None, :, None, :]
    out = (b.masks != product).any(axis=(2, 3))
    np.fill_diagonal(out, False)
    return out


def constraint_graph(b: BinarizedInstance) -> ConstraintGraph:
    """Edges join pairs whose relation is not the full product of the supports.
    Every component must be a clique."""
    if b.inconsistent:
        raise PreconditionError("the binarized instance is inconsistent")
    nt = _nontrivial(b)
    if b.n == 0:
        return ConstraintGraph((), nt, ())
    _, labels = connected_components(csr_matrix(nt), directed=False)
    groups: dict[int, list[int]] = {}
    for v, lab in enumerate(labels.tolist()):
        groups.setdefault(lab, []).append(v)
    comps = tuple(sorted((tuple(g) for g in groups.values()), key=lambda g: g[0]))
    for comp in comps:
        if len(comp) > 1:
            sub = nt[np.ix_(comp, comp)]
            if not (sub | np.eye(len(comp), dtype=bool)).all():
                raise InvariantError(f"constraint graph component {comp} is not a clique")
    return ConstraintGraph(tuple(range(b.n)), nt, comps)


def _closure(rel: np.ndarray) -> np.ndarray:
    """Transitive closure of a stack of d x d boolean matrices."""
    out = rel.copy()
    for k in range(rel.shape[-1]):
        out |= out[..., :, k, None] & out[..., None, k, :]
    return out


def _rectangular(rels: np.ndarray) -> np.ndarray:
    """Per stacked relation: R R^-1 R is contained in R."""
    back = _bool_mm(_bool_mm(rels, np.swapaxes(rels, -1, -2)), rels)
    return ~(back & ~rels).any(axis=(-2, -1))


def _alpha1(rels: np.ndarray) -> np.ndarray:
    return _bool_mm(rels, np.swapaxes(rels, -1, -2))


def _blocks_of(eq: np.ndarray, support: np.ndarray) -> list[np.ndarray]:
    """Blocks of an equivalence matrix on ``support``, ordered by smallest element."""
    blocks, seen = [], np.zeros_like(support)
    for a in np.flatnonzero(support):
        if not seen[a]:
            blk = eq[a] & support
            seen |= blk
            blocks.append(blk)
    return blocks


def _component_etas(b: BinarizedInstance) -> np.ndarray:
    """eta_v for every variable of a connected clique: join of alpha1 of R_vw
    over w != v, as a (n, d, d) stack of equivalence matrices."""
    a1 = _alpha1(b.masks)  # (v, w, d, d)
    idx = np.arange(b.n)
    a1[idx, idx] = False
    union = a1.any(axis=1)
    eta = _closure(union)
    if DEBUG and not np.array_equal(eta, union):
        raise InvariantError("join of the alpha1 relations differs from their union")
    return eta


def _check_thick(b: BinarizedInstance) -> None:
    ok = _rectangular(b.masks)
    if not ok.all():
        v, w = (int(x) for x in np.argwhere(~ok)[0])
        raise PreconditionError(
            f"pair relation of variables {b.variables[v]},{b.variables[w]} is not a thick mapping;"
            " the language is not tractable"
        )


def _psi_images(b: BinarizedInstance, v0: int, block: np.ndarray) -> np.ndarray:
    """(n, d): image of the block under R_{v0,w} for every w (row v0 is the block)."""
    return _bool_mm(block[None, None, :], b.masks[v0])[:, 0, :]


def _check_images(b: BinarizedInstance, v0: int, blocks, images, etas, stats: SolverStats) -> None:
    n = b.n
    cover = np.zeros_like(b.supports)
    masks32 = b.masks.astype(np.int32)
    for blk, img in zip(blocks, images):
        if not img.any(axis=1).all():
            raise InvariantError("a class correspondence maps a block to nothing")
        # the image must be one eta_w block: the eta_w class of its first element
        first = img.argmax(axis=1)
        cls = etas[np.arange(n), first] & b.supports
        if not np.array_equal(cls, img):
            bad = int(np.flatnonzero((cls != img).any(axis=1))[0])
            raise InvariantError(f"image of an eta block at variable {b.variables[bad]} is not one block")
        if (cover & img).any():
            raise InvariantError("class correspondence is not injective")
        cover |= img
        # psi_{uw}(psi_{v0,u}(A)) = psi_{v0,w}(A) for all u, w
        composed = np.einsum("ux,uwxy->uwy", img.astype(np.int32), masks32) > 0
        if not (composed == img[None, :, :]).all():
            raise InvariantError("class correspondences are not composition-consistent")
    if not np.array_equal(cover, b.supports):
        raise InvariantError("class correspondence is not surjective")
    stats.psi_checked += len(blocks) * (n - 1)


def _restrict(b: BinarizedInstance, images: np.ndarray) -> BinarizedInstance:
    masks = b.masks & images[:, None, :, None] & images[None, :, None, :]
    supports = b.supports & images
    out = BinarizedInstance(masks, supports, False, b.variables)
    off = ~np.eye(b.n, dtype=bool)
    if not supports.any(axis=1).all() or (b.n > 1 and not masks.any(axis=(2, 3))[off].all()):
        out.inconsistent = True
    return out


# -- count maps ----------------------------------------------------------------

def count_convolve(rho: Mapping[CardinalityVector, int], rho2: Mapping[CardinalityVector, int]) -> CountMap:
    out: CountMap = {}
    for p, a in rho.items():
        for q, c in rho2.items():
            if len(p) != len(q):
                raise ArgumentError("count maps over different domains")
            key = tuple(x + y for x, y in zip(p, q))
            out[key] = out.get(key, 0) + a * c
    return {k: v for k, v in out.items() if v}


def count_add(rho: CountMap, rho2: Mapping[CardinalityVector, int]) -> CountMap:
    for k, v in rho2.items():
        rho[k] = rho.get(k, 0) + v
    return rho


def _singletons_map(supports: np.ndarray) -> CountMap:
    """Convolution of independent single variables, grouped by support."""
    d = supports.shape[1]
    result: CountMap = {(0,) * d: 1}
    keys, counts = np.unique(supports, axis=0, return_counts=True)
    for key, k in zip(keys, counts.tolist()):
        values = np.flatnonzero(key).tolist()
        # k variables each free over ``values``: multinomial coefficients
        layer: CountMap = {(0,) * d: 1}
        unit = {tuple(1 if i == a else 0 for i in range(d)): 1 for a in values}
        power, exp = unit, k
        while exp:
            if exp & 1:
                layer = count_convolve(layer, power)
            exp >>= 1
            if exp:
                power = count_convolve(power, power)
        result = count_convolve(result, layer)
    return result


# -- the engine ------------------------------------------------------------------

class _Engine:
    def __init__(self, domain_size: int, jobs: int = 1, debug: bool = DEBUG, instance: Instance | None = None):
        self.d = domain_size
        self.jobs = max(1, int(jobs))
        self.debug = debug
        self.instance = instance
        self.stats = SolverStats()

    def _map(self, fn, items, depth: int):
        if self.jobs > 1 and depth == 0 and len(items) > 1:
            with ThreadPoolExecutor(self.jobs) as pool:
                return list(pool.map(fn, items))
        return [fn(x) for x in items]

    def run(self, b: BinarizedInstance) -> CountMap:
        return self._solve(b, 0, 0)

    def _solve(self, b: BinarizedInstance, depth: int, branch_depth: int) -> CountMap:
        self.stats.calls += 1
        self.stats.max_depth = max(self.stats.max_depth, branch_depth)
        if branch_depth > self.d:
            raise InvariantError(f"block recursion depth {branch_depth} exceeds domain size {self.d}")
        if b.inconsistent:
            return {}
        if b.n == 0:
            return {(0,) * self.d: 1}
        if b.n == 1:
            return {tuple(1 if i == a else 0 for i in range(self.d)): 1 for a in np.flatnonzero(b.supports[0])}
        graph = constraint_graph(b)
        self.stats.components_checked += len(graph.components)
        if len(graph.components) > 1:
            singles = [c[0] for c in graph.components if len(c) == 1]
            multi = [c for c in graph.components if len(c) > 1]
            result = _singletons_map(b.supports[singles]) if singles else {(0,) * self.d: 1}
            parts = self._map(lambda c: self._solve(b.subinstance(c), depth + 1, branch_depth), multi, depth)
            for part in parts:
                result = count_convolve(result, part)
                if not result:
                    break
            return result
        return self._connected(b, depth, branch_depth)

    def _connected(self, b: BinarizedInstance, depth: int, branch_depth: int) -> CountMap:
        v0 = 0
        _check_thick(b)
        etas = _component_etas(b)
        blocks = _blocks_of(etas[v0], b.supports[v0])
        if len(blocks) < 2:
            raise InvariantError(f"eta of variable {b.variables[v0]} is trivial on a connected component")
        self.stats.eta_checked += 1
        images = [_psi_images(b, v0, blk) for blk in blocks]
        _check_images(b, v0, blocks, images, etas, self.stats)

        def branch(img):
            sub = _restrict(b, img)
            if self.debug and self.instance is not None and not sub.inconsistent:
                again = enforce_2consistency(sub, self.instance, method="worklist")
                self.stats.consistency_rechecks += 1
                if not again.same_state(sub):
                    raise InvariantError("restricted instance is not 2-consistent")
            return self._solve(sub, depth + 1, branch_depth + 1)

        result: CountMap = {}
        for part in self._map(branch, images, depth):
            count_add(result, part)
        return result


# -- public interface ------------------------------------------------------------

def eta(b: BinarizedInstance, v: int) -> Partition:
    """Join of alpha1 of R_vw over the other members of v's component."""
    graph = constraint_graph(b)
    comp = next(c for c in graph.components if v in c)
    if len(comp) < 2:
        raise PreconditionError(f"variable {v} is alone in its component")
    sub = b.subinstance(comp)
    local = comp.index(v)
    _check_thick(sub)
    a1 = _alpha1(np.delete(sub.masks[local], local, axis=0)).any(axis=0)
    eq = _closure(a1[None])[0]
    blocks = _blocks_of(eq, sub.supports[local])
    if len(blocks) < 2:
        raise InvariantError(f"eta of variable {v} is trivial")
    return Partition(tuple(frozenset(np.flatnonzero(x).tolist()) for x in blocks))


def class_map(b: BinarizedInstance, v0: int) -> ClassMap:
    graph = constraint_graph(b)
    comp = next(c for c in graph.components if v0 in c)
    if len(comp) < 2:
        raise PreconditionError(f"variable {v0} is alone in its component")
    sub = b.subinstance(comp)
    local = comp.index(v0)
    _check_thick(sub)
    etas = _component_etas(sub)
    blocks = _blocks_of(etas[local], sub.supports[local])
    images = [_psi_images(sub, local, blk) for blk in blocks]
    _check_images(sub, local, blocks, images, etas, SolverStats())
    base_eta = Partition(tuple(frozenset(np.flatnonzero(x).tolist()) for x in blocks))
    maps: dict[int, dict[frozenset[int], frozenset[int]]] = {}
    for i, w in enumerate(comp):
        if w == v0:
            continue
        maps[w] = {
            frozenset(np.flatnonzero(blk).tolist()): frozenset(np.flatnonzero(img[i]).tolist())
            for blk, img in zip(blocks, images)
        }
    return ClassMap(v0, base_eta, maps)


def restrict_instance(
    b: BinarizedInstance,
    v0: int,
    block,
    instance: Instance | None = None,
    debug: bool = DEBUG,
) -> BinarizedInstance:
    """Intersect every pair relation R_vw with psi(A)_v x psi(A)_w, where psi
    follows the class correspondences out of v0.  Variables outside v0's
    component are left alone."""
    graph = constraint_graph(b)
    comp = next(c for c in graph.components if v0 in c)
    a = np.zeros(b.domain_size, dtype=bool)
    a[list(block)] = True
    if not (a <= b.supports[v0]).all():
        raise PreconditionError("block is not contained in the support of the base variable")
    images = b.supports.copy()
    if len(comp) > 1:
        sub = b.subinstance(comp)
        local = comp.index(v0)
        images[list(comp)] = _psi_images(sub, local, a)
    else:
        images[v0] = a
    out = _restrict(b, images)
    if debug and instance is not None and not out.inconsistent:
        again = enforce_2consistency(out, instance, method="worklist")
        if not again.same_state(out):
            raise InvariantError("restricted instance is not 2-consistent")
    return out


def ext_count(b: BinarizedInstance, jobs: int = 1, stats: SolverStats | None = None,
              instance: Instance | None = None, debug: bool = DEBUG) -> CountMap:
    """Exact number of solutions per cardinality vector of a 2-consistent
    binarized instance over a tractable language."""
    engine = _Engine(b.domain_size, jobs, debug, instance)
    result = engine.run(b)
    if stats is not None:
        stats.merge(engine.stats)
    return result


def ext_cardinality(b: BinarizedInstance, jobs: int = 1, stats: SolverStats | None = None,
                    instance: Instance | None = None, debug: bool = DEBUG) -> set[CardinalityVector]:
    """All cardinality vectors realized by solutions."""
    return set(ext_count(b, jobs, stats, instance, debug))


@lru_cache(maxsize=128)
def _verdict(language: ConstraintLanguage) -> Verdict:
    return classify(language).verdict


def require_tractable(language: ConstraintLanguage) -> None:
    verdict = _verdict(language)
    if verdict is Verdict.HARD:
        raise PreconditionError("the language is not tractable; use the brute-force oracle instead")
    if verdict is Verdict.INCONCLUSIVE:
        raise ResourceLimitError("could not decide tractability of the language within the search limit")


def solve_counts(instance: Instance, jobs: int = 1, stats: SolverStats | None = None,
                 check_language: bool = True, debug: bool = DEBUG) -> CountMap:
    """Binarize with 2-consistency, then run the engine."""
    if check_language:
        require_tractable(instance.language)
    return ext_count(binarize(instance), jobs, stats, instance, debug)


def feasible_vectors(instance: Instance, **kwargs) -> set[CardinalityVector]:
    return set(solve_counts(instance, **kwargs))


def cardinality_decide(instance: Instance, pi: CardinalityVector | None = None, **kwargs) -> bool:
    """Whether some solution has value histogram ``pi`` (default: the instance's own)."""
    pi = instance.cardinality if pi is None else tuple(pi)
    if pi is None:
        raise PreconditionError("no cardinality vector given")
    check_total(pi, instance.num_vars, instance.domain_size)
    return pi in solve_counts(instance, **kwargs)
