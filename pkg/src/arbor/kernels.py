"""Integer kernels for enumerating the X^j_{S1,S2} candidates of one pivot.

For a fixed pivot j with m = n - 1 other indices, a candidate is a pair of
bitmasks (m1, m2) over the others; bit a of m1 (m2) puts the a-th other
index into S1 (S2). Index a then carries type

    t = bit_a(m1) | bit_a(m2) << 1   (0: g, 1: g_j g, 2: g g_j^-1, 3: g_j g g_j^-1)

and the candidate's L is a sum of table lookups:

    base + sum_a single[a, t_a] + sum_{a<b} pair[a, b, t_a, t_b]

where ``single`` already folds in the two products with g_j. Candidates are
visited in the order code = m1 << m | m2, which is lexicographic in
(m1, m2). The (0, 0) candidate is X itself and is skipped.

Set ARBOR_DISABLE_NUMBA=1 to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _numba_requested() -> bool:
    return os.environ.get("ARBOR_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes", "on")


USE_NUMBA = numba is not None and _numba_requested()
BACKEND = "numba" if USE_NUMBA else "numpy"


def _first_improvement_loop(base, single, pair, target):
    m = single.shape[0]
    full = 1 << m
    types = np.zeros(m, dtype=np.int64)
    for m1 in range(full):
        for m2 in range(full):
            if m1 == 0 and m2 == 0:
                continue
            total = base
            for a in range(m):
                t = ((m1 >> a) & 1) | (((m2 >> a) & 1) << 1)
                types[a] = t
                total += single[a, t]
            for a in range(m):
                ta = types[a]
                for b in range(a + 1, m):
                    total += pair[a, b, ta, types[b]]
            if total < target:
                return m1, m2, total
    return -1, -1, target


def _all_values_loop(base, single, pair):
    m = single.shape[0]
    full = 1 << m
    out = np.empty(full * full, dtype=np.int64)
    types = np.zeros(m, dtype=np.int64)
    for m1 in range(full):
        for m2 in range(full):
            total = base
            for a in range(m):
                t = ((m1 >> a) & 1) | (((m2 >> a) & 1) << 1)
                types[a] = t
                total += single[a, t]
            for a in range(m):
                ta = types[a]
                for b in range(a + 1, m):
                    total += pair[a, b, ta, types[b]]
            out[(m1 << m) | m2] = total
    return out


_CHUNK = 1 << 15


def _values_numpy(codes, base, single, pair):
    m = single.shape[0]
    if m == 0:
        return np.full(codes.shape, base, dtype=np.int64)
    ar = np.arange(m, dtype=np.int64)
    m1 = codes >> m
    m2 = codes & ((1 << m) - 1)
    types = ((m1[:, None] >> ar) & 1) | (((m2[:, None] >> ar) & 1) << 1)
    vals = base + single[ar, types].sum(axis=1)
    ia, ib = np.triu_indices(m, 1)
    if ia.size:
        vals = vals + pair[ia, ib, types[:, ia], types[:, ib]].sum(axis=1)
    return vals


def first_improvement_numpy(base, single, pair, target):
    m = single.shape[0]
    total_codes = 1 << (2 * m)
    for start in range(1, total_codes, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total_codes), dtype=np.int64)
        vals = _values_numpy(codes, base, single, pair)
        hit = np.flatnonzero(vals < target)
        if hit.size:
            c = int(codes[hit[0]])
            return c >> m, c & ((1 << m) - 1), int(vals[hit[0]])
    return -1, -1, target


def all_values_numpy(base, single, pair):
    m = single.shape[0]
    total_codes = 1 << (2 * m)
    out = np.empty(total_codes, dtype=np.int64)
    for start in range(0, total_codes, _CHUNK):
        stop = min(start + _CHUNK, total_codes)
        out[start:stop] = _values_numpy(np.arange(start, stop, dtype=np.int64), base, single, pair)
    return out


if numba is not None:
    first_improvement_numba = numba.njit(cache=True, nogil=True)(_first_improvement_loop)
    all_values_numba = numba.njit(cache=True, nogil=True)(_all_values_loop)
else:  # pragma: no cover
    first_improvement_numba = None
    all_values_numba = None


def first_improvement(base: int, single: np.ndarray, pair: np.ndarray, target: int):
    """First candidate (m1, m2, value) with value < target, or (-1, -1, target)."""
    if USE_NUMBA:
        m1, m2, v = first_improvement_numba(base, single, pair, target)
        return int(m1), int(m2), int(v)
    return first_improvement_numpy(base, single, pair, target)


def all_values(base: int, single: np.ndarray, pair: np.ndarray) -> np.ndarray:
    """L of every candidate, indexed by code = m1 << m | m2 (code 0 is X itself)."""
    if USE_NUMBA:
        return all_values_numba(base, single, pair)
    return all_values_numpy(base, single, pair)
