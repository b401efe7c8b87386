"""Exhaustive enumeration of assignments in odometer order, in numpy chunks."""
from __future__ import annotations

import numpy as np

from .errors import ResourceLimitError

DEFAULT_CAP = 10**7
CHUNK = 1 << 18


def assignment_count(num_vars: int, domain_size: int) -> int:
    return domain_size**num_vars


def check_cap(num_vars: int, domain_size: int, cap: int) -> None:
    total = assignment_count(num_vars, domain_size)
    if total > cap:
        raise ResourceLimitError(
            f"{domain_size}^{num_vars} = {total} assignments exceeds the enumeration cap {cap}"
        )


def assignment_chunks(num_vars: int, domain_size: int, cap: int = DEFAULT_CAP, start: int = 0,
                      stop: int | None = None):
    """Yield int8/int16 arrays of shape (k, num_vars); row i is the odometer
    assignment with index ``start + i`` (variable 0 is the most significant digit)."""
    check_cap(num_vars, domain_size, cap)
    total = assignment_count(num_vars, domain_size)
    stop = total if stop is None else min(stop, total)
    dtype = np.int16 if domain_size > 127 else np.int8
    for lo in range(start, stop, CHUNK):
        idx = np.arange(lo, min(lo + CHUNK, stop), dtype=np.int64)
        out = np.empty((len(idx), num_vars), dtype=dtype)
        for v in range(num_vars - 1, -1, -1):
            out[:, v] = idx % domain_size
            idx //= domain_size
        yield out


def tuple_codes(columns: np.ndarray, domain_size: int) -> np.ndarray:
    codes = np.zeros(columns.shape[0], dtype=np.int64)
    for i in range(columns.shape[1]):
        codes = codes * domain_size + columns[:, i]
    return codes


def relation_table(tuples, arity: int, domain_size: int) -> np.ndarray:
    table = np.zeros(domain_size**arity, dtype=bool)
    if tuples:
        arr = np.array(tuples, dtype=np.int64).reshape(-1, arity)
        table[tuple_codes(arr, domain_size)] = True
    return table
