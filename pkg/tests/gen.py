"""Seeded generators of small metric spaces for tests."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from layerscope.metric import FiniteMetricSpace


def _distinct_ints(rng, n: int, lo: int, hi: int, dim: int) -> list[tuple[int, ...]]:
    seen: set = set()
    while len(seen) < n:
        seen.add(tuple(int(v) for v in rng.integers(lo, hi, size=dim)))
    return sorted(seen)


def manhattan_matrix(pts) -> list[list[Fraction]]:
    return [[Fraction(sum(abs(a - b) for a, b in zip(p, q))) for q in pts] for p in pts]


def graph_metric(rng, n: int, wmax: int = 6) -> list[list[Fraction]]:
    """Shortest-path metric of a complete graph with random integer weights (many ties)."""
    W = rng.integers(1, wmax + 1, size=(n, n))
    D = np.minimum(W, W.T).astype(np.int64)
    np.fill_diagonal(D, 0)
    for m in range(n):
        D = np.minimum(D, D[:, [m]] + D[[m], :])
    return [[Fraction(int(x)) for x in row] for row in D]


def random_space(rng, n_min: int = 1, n_max: int = 8):
    """(space, exact distance matrix computed independently)."""
    n = int(rng.integers(n_min, n_max + 1))
    kind = int(rng.integers(3))
    if kind == 0:
        pts = _distinct_ints(rng, n, 0, 4 * n + 2, 1)
        return FiniteMetricSpace.from_points([list(p) for p in pts], "euclidean"), manhattan_matrix(pts)
    if kind == 1:
        pts = _distinct_ints(rng, n, 0, 2 * n + 2, 2)
        return FiniteMetricSpace.from_points([list(p) for p in pts], "manhattan"), manhattan_matrix(pts)
    D = graph_metric(rng, n)
    return FiniteMetricSpace.from_matrix(D), D


def random_pair(rng, n_min: int = 2, n_max: int = 8):
    """(Y, D, X indices) with X a random nonempty subset."""
    Y, D = random_space(rng, n_min, n_max)
    size = int(rng.integers(1, Y.n + 1))
    X = tuple(sorted(int(i) for i in rng.choice(Y.n, size=size, replace=False)))
    return Y, D, X


def well_separated(rng, centers: int | None = None, spacing: int = 100):
    """Centers on a line at multiples of ``spacing`` each with 1-3 jitter points within 3."""
    m = int(rng.integers(2, 5)) if centers is None else centers
    slots = sorted(int(s) for s in rng.choice(np.arange(0, 2 * m), size=m, replace=False))
    coords, X = [], []
    for s in slots:
        c = s * spacing
        X.append(len(coords))
        coords.append(c)
        offs = rng.choice(np.array([-3, -2, -1, 1, 2, 3]), size=int(rng.integers(1, 4)), replace=False)
        coords.extend(c + int(o) for o in offs)
    order = np.argsort(coords, kind="stable")
    rank = {int(old): new for new, old in enumerate(order)}
    pts = [[coords[int(i)]] for i in order]
    Y = FiniteMetricSpace.from_points(pts, "euclidean")
    return Y, manhattan_matrix([tuple(p) for p in pts]), tuple(sorted(rank[x] for x in X))
