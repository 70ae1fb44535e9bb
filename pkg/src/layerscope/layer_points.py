"""Layer points, branch points and the retractions onto layer points.

Layer points mark where a cluster first appears. On a step grid an element
``(s, S)`` is a global layer point exactly when ``S`` is absent from every
immediate predecessor cell; the per-axis version of the same test gives the
layer points of the single-parameter slices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .clustering import slice_at_cell
from .exact import format_value
from .gamma import Element, GammaPoset, gamma_to_dot

__all__ = [
    "LayerPointSet",
    "global_layer_points",
    "slice_layer_points",
    "max_layer_point",
    "slice_max_layer_point",
    "branch_points",
    "slice_branch_points",
    "global_branch_points",
    "hasse_edges",
    "layer_points_to_dict",
    "layer_points_to_dot",
]


@dataclass(frozen=True)
class LayerPointSet:
    gamma: GammaPoset
    global_points: frozenset[Element]
    slice_points: Mapping[int, frozenset[Element]] = field(default_factory=dict)
    kind: str = "layer"

    def __contains__(self, e) -> bool:
        return e in self.global_points

    def __len__(self) -> int:
        return len(self.global_points)

    def sorted(self) -> list[Element]:
        return sorted(self.global_points)


def _first_on_axis(g: GammaPoset, axis: int) -> np.ndarray:
    """Per element: True when its cluster is absent one step down ``axis``."""
    coords = g._coords
    nd = g.ndim
    cells = coords[:, :nd]
    has = cells[:, axis] > 0
    pred = cells.copy()
    pred[:, axis] = np.where(has, pred[:, axis] - 1, 0)
    same = g.sizes[tuple(pred.T) + (coords[:, nd],)] == g.sizes[tuple(coords.T)]
    return ~(has & same)


def _points(g: GammaPoset, mask: np.ndarray) -> frozenset[Element]:
    return frozenset(g.elements[i] for i in np.flatnonzero(mask))


def global_layer_points(g: GammaPoset, *, with_slices: bool = True) -> LayerPointSet:
    """Elements whose cluster is absent from every strictly smaller cell.

    With ``with_slices`` the per-axis layer points are computed as well, by
    actually slicing H (see :func:`slice_layer_points`).
    """
    if len(g) == 0:
        empty = frozenset()
        return LayerPointSet(g, empty, {i: empty for i in range(g.ndim)})
    mask = np.ones(len(g), dtype=bool)
    for axis in range(g.ndim):
        mask &= _first_on_axis(g, axis)
    pts = _points(g, mask)
    if g.ndim == 1:
        slices = {0: pts}
    elif with_slices:
        slices = {i: slice_layer_points(g, i) for i in range(g.ndim)}
    else:
        slices = {}
    return LayerPointSet(g, pts, slices)


def _anchors(g: GammaPoset, axis: int):
    return itertools.product(*(range(s) for i, s in enumerate(g.shape) if i != axis))


def _embed(anchor: Sequence[int], axis: int, e: Element) -> Element:
    cell = list(anchor)
    cell.insert(axis, e[0][0])
    return tuple(cell), e[1]


def slice_layer_points(g: GammaPoset, axis: int) -> frozenset[Element]:
    """Union over anchors of the layer points of the slice along ``axis``, re-embedded."""
    if g.ndim == 1:
        return global_layer_points(g).global_points
    out = set()
    for anchor in _anchors(g, axis):
        gs = GammaPoset(slice_at_cell(g.source, axis, anchor))
        for e in global_layer_points(gs).global_points:
            out.add(_embed(anchor, axis, e))
    return frozenset(out)


def slice_max_layer_point(g: GammaPoset, e: Element, axis: int) -> Element:
    """m_i: walk down ``axis`` while the cluster stays the same."""
    if e not in g:
        raise KeyError(f"{e} is not an element of Gamma(H)")
    while True:
        nxt = g.step_down(e, axis)
        if nxt is None:
            return e
        e = nxt


def max_layer_point(g: GammaPoset, e: Element, order: Sequence[int] | None = None) -> Element:
    """Compose the slice retractions in the given axis order (default 0, 1, ...).

    The result is a global layer point below ``e``; different orders may give
    different points of the same layer.
    """
    if order is None:
        order = range(g.ndim)
    order = tuple(order)
    if sorted(order) != list(range(g.ndim)):
        raise ValueError(f"order must be a permutation of 0..{g.ndim - 1}")
    for axis in order:
        e = slice_max_layer_point(g, e, axis)
    return e


def _branch_mask(g: GammaPoset) -> np.ndarray:
    H = g.source
    lab = H.labels
    n = H.n
    idx = np.arange(n)
    mask = np.zeros(len(g), dtype=bool)
    for i, (cell, l) in enumerate(g.elements):
        s = cell[0]
        if s == 0:
            mask[i] = True
            continue
        pred = lab[s - 1]
        roots = idx[pred == idx]
        count = int(np.count_nonzero(lab[s, roots] == l))
        mask[i] = count != 1
    return mask


def branch_points(g: GammaPoset) -> LayerPointSet:
    """Births and merges of a single-parameter clustering; growth is excluded."""
    if g.ndim != 1:
        raise ValueError("branch points are defined here for single-parameter clusterings; "
                         "use global_branch_points for several axes")
    pts = _points(g, _branch_mask(g)) if len(g) else frozenset()
    return LayerPointSet(g, pts, {0: pts}, kind="branch")


def slice_branch_points(g: GammaPoset, axis: int) -> frozenset[Element]:
    if g.ndim == 1:
        return branch_points(g).global_points
    out = set()
    for anchor in _anchors(g, axis):
        gs = GammaPoset(slice_at_cell(g.source, axis, anchor))
        for e in branch_points(gs).global_points:
            out.add(_embed(anchor, axis, e))
    return frozenset(out)


def global_branch_points(g: GammaPoset) -> frozenset[Element]:
    """Elements that are branch points of their slice along every axis."""
    sets = [slice_branch_points(g, axis) for axis in range(g.ndim)]
    return frozenset.intersection(*sets) if sets else frozenset()


def hasse_edges(g: GammaPoset, points: Iterable[Element]) -> list[tuple[Element, Element]]:
    """Covering relations of the sub-poset of Gamma(H) on ``points``."""
    pts = sorted(points)
    up = {a: [b for b in pts if b != a and g.leq(a, b)] for a in pts}
    edges = []
    for a in pts:
        above = up[a]
        for b in above:
            if not any(g.leq(c, b) for c in above if c != b):
                edges.append((a, b))
    return edges


def _kinds(e: Element, lp: LayerPointSet, extra: Mapping[str, frozenset]) -> list[str]:
    kinds = []
    if e in lp.global_points:
        kinds.append("global-layer" if lp.kind == "layer" else "branch")
    for axis in sorted(lp.slice_points):
        if e in lp.slice_points[axis]:
            kinds.append(f"slice-{lp.kind}-{axis + 1}")
    for name in sorted(extra):
        if e in extra[name]:
            kinds.append(name)
    return kinds


def layer_points_to_dict(lp: LayerPointSet, points: Iterable[Element] | None = None,
                         extra: Mapping[str, frozenset] | None = None) -> dict:
    g = lp.gamma
    extra = extra or {}
    pts = sorted(lp.global_points if points is None else points)
    return {
        "schema": "layerscope.layer_points/1",
        "variance": list(g.source.variance),
        "kind": lp.kind,
        "points": [
            {
                "cell": list(e[0]),
                "values": [format_value(x) for x in g.values(e)],
                "cluster": e[1],
                "members": sorted(g.cluster(e)),
                "kinds": _kinds(e, lp, extra),
            }
            for e in pts
        ],
    }


def layer_points_to_dot(lp: LayerPointSet, points: Iterable[Element] | None = None) -> str:
    pts = sorted(lp.global_points if points is None else points)
    return gamma_to_dot(lp.gamma, pts, hasse_edges(lp.gamma, pts), name="layer_points")
