"""The poset Gamma(H) of (grid cell, cluster) pairs and its layers.

An element is written ``(cell, label)`` where ``label`` is the least member of
the cluster. Two facts about step clusterings keep everything local:

* for cells ``b <= a`` the cluster at ``b`` containing ``min(S)`` is a subset
  of ``S``, so ``S`` is present at ``b`` exactly when that cluster has the
  same size as ``S``;
* comparability on the grid is generated by single-axis steps, so covering
  links between neighbouring cells determine the whole order.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ._kernels import cluster_sizes
from .clustering import Cell, StepClustering
from .exact import format_value

__all__ = [
    "Element",
    "GammaPoset",
    "Layer",
    "BoundaryCheck",
    "build_gamma",
    "layers",
    "up_set",
    "down_set",
    "is_closed_below",
    "gamma_to_dot",
]

Element = tuple[Cell, int]


class GammaPoset:
    """Gamma(H) restricted to grid cells, with covering links between neighbouring cells."""

    def __init__(self, H: StepClustering):
        self.source = H
        lab = H.labels
        n = H.n
        canon = lab == np.arange(n)
        coords = np.argwhere(canon)
        self._coords = coords
        self.elements: tuple[Element, ...] = tuple(
            (tuple(int(x) for x in row[:-1]), int(row[-1])) for row in coords)
        self.index = {e: i for i, e in enumerate(self.elements)}
        self.sizes = cluster_sizes(lab)
        eid = np.full(lab.shape, -1, dtype=np.int64)
        eid[canon] = np.arange(len(coords))
        self._eid = eid
        # per axis: (source ids, target ids, same-cluster flags)
        self._steps = [self._axis_steps(axis) for axis in range(H.ndim)]

    def _axis_steps(self, axis: int):
        H = self.source
        coords = self._coords
        nd = H.ndim
        ids = np.flatnonzero(coords[:, axis] < H.shape[axis] - 1)
        src = coords[ids]
        dst = src.copy()
        dst[:, axis] += 1
        lab_idx = tuple(dst[:, :nd].T)
        dst_label = H.labels[lab_idx + (src[:, nd],)]
        dst_ids = self._eid[lab_idx + (dst_label,)]
        same = self.sizes[lab_idx + (src[:, nd],)] == self.sizes[tuple(src.T)]
        return ids, dst_ids, same

    # basic queries -------------------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Element]:
        return iter(self.elements)

    def __contains__(self, e) -> bool:
        return e in self.index

    @property
    def ndim(self) -> int:
        return self.source.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.source.shape

    def cluster(self, e: Element) -> frozenset[int]:
        cell, l = e
        return frozenset(int(z) for z in np.flatnonzero(self.source.labels[cell] == l))

    def size(self, e: Element) -> int:
        cell, l = e
        return int(self.sizes[cell + (l,)])

    def keys(self, e: Element) -> tuple[Fraction, ...]:
        return self.source.cell_keys(e[0])

    def values(self, e: Element) -> tuple[Fraction, ...]:
        return self.source.cell_values(e[0])

    def has_cluster(self, cell: Cell, e: Element) -> bool:
        """Whether the cluster of ``e`` is present at ``cell`` (any cell)."""
        l = e[1]
        lab = self.source.labels[tuple(cell)]
        if lab[l] != l:
            return False
        return bool(np.array_equal(lab == l, self.source.labels[e[0]] == l))

    def leq(self, e: Element, f: Element) -> bool:
        (a, l), (b, m) = e, f
        if any(x > y for x, y in zip(a, b)):
            return False
        return int(self.source.labels[b + (l,)]) == m

    def carry(self, e: Element, cell: Cell) -> Element:
        """The element at ``cell`` (>= e's cell) whose cluster contains e's cluster."""
        cell = tuple(cell)
        return cell, int(self.source.labels[cell + (e[1],)])

    def step_down(self, e: Element, axis: int) -> Element | None:
        """The same cluster one grid step down ``axis``, if it is present there."""
        cell, l = e
        if cell[axis] == 0:
            return None
        pred = list(cell)
        pred[axis] -= 1
        pred = tuple(pred)
        if self.sizes[pred + (l,)] == self.sizes[cell + (l,)]:
            return pred, l
        return None

    def covers(self) -> list[tuple[Element, Element]]:
        """Covering links (one grid step, cluster carried forward)."""
        out = []
        for ids, dst, _ in self._steps:
            out.extend((self.elements[int(a)], self.elements[int(b)]) for a, b in zip(ids, dst))
        return sorted(out)

    def same_cluster_links(self) -> list[tuple[int, int]]:
        out = []
        for ids, dst, same in self._steps:
            out.extend(zip(ids[same].tolist(), dst[same].tolist()))
        return out


def build_gamma(H: StepClustering) -> GammaPoset:
    return GammaPoset(H)


@dataclass(frozen=True)
class Layer:
    cluster: frozenset[int]
    support: frozenset[Cell]
    elements: tuple[Element, ...]

    @property
    def label(self) -> int:
        return min(self.cluster)


def layers(g: GammaPoset) -> tuple[Layer, ...]:
    """Equivalence classes of equal clusters at comparable cells."""
    m = len(g)
    if m == 0:
        return ()
    links = g.same_cluster_links()
    rows = [a for a, _ in links]
    cols = [b for _, b in links]
    graph = coo_matrix((np.ones(len(links)), (rows, cols)), shape=(m, m))
    _, comp = connected_components(graph, directed=False)
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(comp):
        groups.setdefault(int(c), []).append(i)
    out = []
    for members in sorted(groups.values()):
        els = tuple(g.elements[i] for i in members)
        out.append(Layer(g.cluster(els[0]), frozenset(e[0] for e in els), els))
    return tuple(out)


def _mask(P: Iterable[Cell], shape: Sequence[int]) -> np.ndarray:
    mask = np.zeros(tuple(shape), dtype=bool)
    for p in P:
        mask[tuple(p)] = True
    return mask


def _cells(mask: np.ndarray) -> frozenset[Cell]:
    return frozenset(tuple(int(x) for x in row) for row in np.argwhere(mask))


def up_set(P: Iterable[Cell], shape: Sequence[int]) -> frozenset[Cell]:
    """Grid cells above some cell of P."""
    mask = _mask(P, shape)
    for axis in range(mask.ndim):
        mask = np.logical_or.accumulate(mask, axis=axis)
    return _cells(mask)


def down_set(P: Iterable[Cell], shape: Sequence[int]) -> frozenset[Cell]:
    """Grid cells below some cell of P."""
    mask = _mask(P, shape)
    for axis in range(mask.ndim):
        flipped = np.flip(mask, axis=axis)
        mask = np.flip(np.logical_or.accumulate(flipped, axis=axis), axis=axis)
    return _cells(mask)


@dataclass(frozen=True)
class BoundaryCheck:
    closed: bool
    representable: bool
    minimal_cells: tuple[Cell, ...]


def is_closed_below(layer: Layer, g: GammaPoset) -> BoundaryCheck:
    """Check support = U ∩ D and report the minimal support cells.

    On a step grid every support is a union of boxes closed on their lower
    side, so its lower boundary consists of its minimal cells.
    """
    P = layer.support
    representable = P == (up_set(P, g.shape) & down_set(P, g.shape))
    minimal = []
    for cell in sorted(P):
        below = False
        for axis in range(len(cell)):
            if cell[axis] > 0:
                pred = cell[:axis] + (cell[axis] - 1,) + cell[axis + 1:]
                if pred in P:
                    below = True
                    break
        if not below:
            minimal.append(cell)
    closed = representable and all(c in P for c in minimal)
    return BoundaryCheck(closed, representable, tuple(minimal))


def _node_name(g: GammaPoset, e: Element) -> str:
    vals = ",".join(format_value(x) for x in g.values(e))
    return f"({vals} | {e[1]})"


def gamma_to_dot(g: GammaPoset, elements: Iterable[Element] | None = None,
                 edges: Iterable[tuple[Element, Element]] | None = None,
                 name: str = "gamma") -> str:
    """Graphviz text for Gamma(H) (covering links) or a given sub-poset."""
    els = sorted(g.elements if elements is None else elements)
    es = g.covers() if edges is None else sorted(edges)
    ids = {e: f"n{i}" for i, e in enumerate(els)}
    lines = [f"digraph {name} {{"]
    for e in els:
        members = ",".join(str(z) for z in sorted(g.cluster(e)))
        lines.append(f'  {ids[e]} [label="{_node_name(g, e)}\\n{{{members}}}"];')
    for a, b in es:
        lines.append(f"  {ids[a]} -> {ids[b]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
