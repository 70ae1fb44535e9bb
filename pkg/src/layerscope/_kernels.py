"""Hot inner loops: threshold sweeps and cluster-size tables.

Every kernel has a numba implementation and a pure numpy fallback with the
same signature. The numba path is used when numba imports and the
environment variable ``LAYERSCOPE_DISABLE_NUMBA`` is unset (or ``0``).
Both paths are exported under explicit names so they can be compared.
"""
from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("LAYERSCOPE_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _flag not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by LAYERSCOPE_DISABLE_NUMBA")
    from numba import njit
except ImportError:
    njit = None

NUMBA_ENABLED = njit is not None


def vertex_births(rank: np.ndarray, k: int, n_levels: int) -> np.ndarray:
    """Level index at which each point first has ``k`` distinct neighbours.

    Points that never get ``k`` neighbours are assigned ``n_levels``.
    """
    n = rank.shape[0]
    if k == 0:
        return np.zeros(n, dtype=np.int32)
    if k > n - 1:
        return np.full(n, n_levels, dtype=np.int32)
    # the row includes the point itself at rank 0, so position k is the
    # k-th nearest other point
    return np.sort(rank, axis=1)[:, k].astype(np.int32)


# --- threshold sweep -------------------------------------------------------

def _sweep_loops(rank, births, n_levels):
    n = rank.shape[0]
    out = np.full((n_levels, n), -1, dtype=np.int32)
    m = n * (n - 1) // 2
    ei = np.empty(m, dtype=np.int64)
    ej = np.empty(m, dtype=np.int64)
    act = np.empty(m, dtype=np.int64)
    c = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = rank[i, j]
            if births[i] > a:
                a = births[i]
            if births[j] > a:
                a = births[j]
            ei[c] = i
            ej[c] = j
            act[c] = a
            c += 1
    order = np.argsort(act, kind="mergesort")
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    low = np.arange(n)
    p = 0
    for r in range(n_levels):
        while p < m and act[order[p]] <= r:
            e = order[p]
            a = ei[e]
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            b = ej[e]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a != b:
                if size[a] < size[b]:
                    a, b = b, a
                parent[b] = a
                size[a] += size[b]
                if low[b] < low[a]:
                    low[a] = low[b]
            p += 1
        for z in range(n):
            if births[z] <= r:
                a = z
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                out[r, z] = low[a]
    return out


def sweep_labels_numpy(rank: np.ndarray, births: np.ndarray, n_levels: int) -> np.ndarray:
    """Component labels (least member index, or -1) at every distance level.

    Vectorized min-label propagation with pointer jumping; independent of the
    union-find used by the compiled path.
    """
    n = rank.shape[0]
    out = np.full((n_levels, n), -1, dtype=np.int32)
    idx = np.arange(n)
    for r in range(n_levels):
        alive = births <= r
        if not alive.any():
            continue
        adj = (rank <= r) & alive[:, None] & alive[None, :]
        lab = np.where(alive, idx, n)
        while True:
            new = np.where(adj, lab[None, :], n).min(axis=1)
            new = np.minimum(new, lab)
            new = np.where(alive, new[np.minimum(new, n - 1)], n)
            if np.array_equal(new, lab):
                break
            lab = new
        out[r] = np.where(alive, lab, -1)
    return out


# --- cluster sizes ---------------------------------------------------------

def _sizes_loops(flat):
    rows, n = flat.shape
    out = np.zeros((rows, n), dtype=np.int32)
    counts = np.zeros(n, dtype=np.int32)
    for r in range(rows):
        counts[:] = 0
        for z in range(n):
            if flat[r, z] >= 0:
                counts[flat[r, z]] += 1
        for z in range(n):
            if flat[r, z] >= 0:
                out[r, z] = counts[flat[r, z]]
    return out


def cluster_sizes_numpy(flat: np.ndarray) -> np.ndarray:
    rows, n = flat.shape
    valid = flat >= 0
    key = np.where(valid, flat + n * np.arange(rows)[:, None], 0)
    counts = np.bincount(key[valid], minlength=rows * n)
    return np.where(valid, counts[key], 0).astype(np.int32)


if NUMBA_ENABLED:
    sweep_labels_numba = njit(cache=True)(_sweep_loops)
    cluster_sizes_numba = njit(cache=True)(_sizes_loops)
else:
    sweep_labels_numba = None
    cluster_sizes_numba = None


def sweep_labels(rank: np.ndarray, births: np.ndarray, n_levels: int) -> np.ndarray:
    rank = np.ascontiguousarray(rank, dtype=np.int32)
    births = np.ascontiguousarray(births, dtype=np.int32)
    if NUMBA_ENABLED:
        return sweep_labels_numba(rank, births, n_levels)
    return sweep_labels_numpy(rank, births, n_levels)


def cluster_sizes(labels: np.ndarray) -> np.ndarray:
    """For every cell and point, the size of the point's cluster (0 if absent)."""
    n = labels.shape[-1]
    flat = np.ascontiguousarray(labels.reshape(-1, n), dtype=np.int32)
    if NUMBA_ENABLED:
        out = cluster_sizes_numba(flat)
    else:
        out = cluster_sizes_numpy(flat)
    return out.reshape(labels.shape)
