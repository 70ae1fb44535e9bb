"""Degree-Rips (Lesnick) complexes, reduced to their 1-skeleta, and the
clusterings given by their path components.

Only vertices and edges are ever built: path components of a simplicial
complex depend on nothing else.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from ._kernels import sweep_labels, vertex_births
from .exact import as_exact
from .metric import FiniteMetricSpace

__all__ = [
    "SENTINEL",
    "Clustering",
    "LesnickGraph",
    "lesnick_graph",
    "components",
    "clustering_at",
    "critical_grid",
    "degree_rips_labels",
]

#: grid value standing for the empty region s < 0 of the scale axis
SENTINEL = Fraction(-1)


@dataclass(frozen=True)
class Clustering:
    """Disjoint nonempty clusters, each a sorted index tuple, ordered by least member.

    The least member doubles as the cluster's canonical label. A clustering
    may be empty and need not cover the ground set.
    """

    clusters: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        cl = tuple(sorted(tuple(sorted(int(z) for z in c)) for c in self.clusters))
        seen: set[int] = set()
        for c in cl:
            if not c:
                raise ValueError("clusters must be nonempty")
            if seen.intersection(c):
                raise ValueError("clusters must be disjoint")
            seen.update(c)
        object.__setattr__(self, "clusters", cl)

    @classmethod
    def from_labels(cls, labels: Iterable[int]) -> "Clustering":
        groups: dict[int, list[int]] = {}
        for z, lab in enumerate(labels):
            if lab >= 0:
                groups.setdefault(int(lab), []).append(z)
        return cls(tuple(tuple(g) for g in groups.values()))

    def labels(self, n: int) -> np.ndarray:
        out = np.full(n, -1, dtype=np.int32)
        for c in self.clusters:
            out[list(c)] = c[0]
        return out

    def cluster_of(self, z: int) -> tuple[int, ...] | None:
        for c in self.clusters:
            if z in c:
                return c
        return None

    def __len__(self) -> int:
        return len(self.clusters)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.clusters)

    def __contains__(self, cluster) -> bool:
        return tuple(sorted(cluster)) in self.clusters

    def __repr__(self) -> str:
        inner = ", ".join("{" + ",".join(map(str, c)) + "}" for c in self.clusters)
        return f"Clustering({{{inner}}})"


@dataclass(frozen=True)
class LesnickGraph:
    space: FiniteMetricSpace
    scale: Fraction
    degree: int
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]


def _neighbour_counts(Z: FiniteMetricSpace, r: int) -> np.ndarray:
    return (Z.rank <= r).sum(axis=1) - 1


def lesnick_graph(Z: FiniteMetricSpace, s, k: int) -> LesnickGraph:
    """1-skeleton of L_{s,k}(Z): points with at least ``k`` distinct s-neighbours,
    joined when at distance ``<= s``."""
    if k < 0:
        raise ValueError("degree k must be nonnegative")
    s = as_exact(s)
    r = Z.level_index(s)
    if r < 0:
        return LesnickGraph(Z, s, k, (), ())
    close = Z.rank <= r
    verts = np.flatnonzero(close.sum(axis=1) - 1 >= k)
    vs = set(verts.tolist())
    edges = tuple((int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(close, 1)))
                  if i in vs and j in vs)
    return LesnickGraph(Z, s, k, tuple(int(v) for v in verts), edges)


def components(g: LesnickGraph) -> Clustering:
    ds = DisjointSet(g.vertices)
    for i, j in g.edges:
        ds.merge(i, j)
    return Clustering(tuple(tuple(sorted(c)) for c in ds.subsets()))


def clustering_at(Z: FiniteMetricSpace, s, t) -> Clustering:
    """L(s, t): components of L_{s, ceil(t)}(Z), empty unless s >= 0 and t >= 0."""
    s, t = as_exact(s), as_exact(t)
    if s < 0 or t < 0:
        return Clustering()
    return components(lesnick_graph(Z, s, math.ceil(t)))


def critical_grid(Z: FiniteMetricSpace, k_max: int) -> tuple[tuple[Fraction, ...], tuple[int, ...]]:
    """Scale axis (sentinel then the distinct distances) and degree axis ``0..k_max``."""
    if not 0 <= k_max <= Z.n - 1:
        raise ValueError(f"k_max must lie in 0..{Z.n - 1}")
    return (SENTINEL, *Z.levels), tuple(range(k_max + 1))


def degree_rips_labels(Z: FiniteMetricSpace, degrees: Iterable[int]) -> np.ndarray:
    """Component labels of L_{s,k}(Z) for every distance level s and each k.

    Returns shape ``(len(degrees), len(Z.levels), n)``; entry ``[j, r, z]`` is
    the least index in z's component at level ``r`` and degree ``degrees[j]``,
    or -1 if z is not a vertex there.
    """
    n_levels = len(Z.levels)
    return np.stack([
        sweep_labels(Z.rank, vertex_births(Z.rank, k, n_levels), n_levels)
        for k in degrees
    ])
