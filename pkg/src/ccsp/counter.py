"""Exact solution counts per cardinality vector.

The recursion is the one in :mod:`ccsp.solver`; components multiply through
:func:`count_convolve` and the disjoint block branches add pointwise.
"""
from __future__ import annotations

from .errors import PreconditionError
from .instance import Instance, check_total
from .relations import CardinalityVector
from .solver import CountMap, count_add, count_convolve, ext_count, solve_counts

__all__ = ["CountMap", "count_add", "count_convolve", "ext_count", "count_decide", "count_all"]


def count_all(instance: Instance, **kwargs) -> CountMap:
    return solve_counts(instance, **kwargs)


def count_decide(instance: Instance, pi: CardinalityVector | None = None, **kwargs) -> int:
    """Number of solutions whose value histogram is ``pi`` (default: the instance's own)."""
    pi = instance.cardinality if pi is None else tuple(pi)
    if pi is None:
        raise PreconditionError("no cardinality vector given")
    check_total(pi, instance.num_vars, instance.domain_size)
    return solve_counts(instance, **kwargs).get(pi, 0)
