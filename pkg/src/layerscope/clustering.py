"""Multiparameter hierarchical clusterings presented as step functions on a
finite grid, together with slices, truncation and the clustering order.

Axis conventions
----------------
Each axis ``i`` has a variance ``v_i`` in {+1, -1}: +1 orders the parameter
as the reals, -1 as the opposite reals. Internally each grid value ``x`` is
stored as the key ``v_i * x`` so that "smaller in the product order" always
means "smaller key", and a shift ``s + v*eps`` is always ``key + eps``.

A point ``x`` is governed by the grid cell of the largest keys ``<= key(x)``
on every axis. A point below the first key on some axis lies in the empty
region. Covariant axes are therefore right-continuous and contravariant axes
left-continuous in the real parameter.
"""
from __future__ import annotations

import itertools
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .degree_rips import SENTINEL, Clustering, critical_grid, degree_rips_labels
from .exact import as_exact, format_value
from .metric import FiniteMetricSpace

__all__ = [
    "ClusteringError",
    "StepClustering",
    "SliceSpec",
    "from_degree_rips",
    "lesnick_clustering",
    "slice_clustering",
    "slice_at_cell",
    "truncate_below",
    "lift_clustering",
    "clustering_leq",
]

Cell = tuple[int, ...]


class ClusteringError(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class StepClustering:
    """A v-hierarchical clustering of ``{0..n-1}`` given on a finite grid.

    ``axes[i]`` lists the critical values of axis ``i`` in increasing order of
    that axis (decreasing reals for a contravariant axis). ``labels`` has
    shape ``(*grid_shape, n)``; each entry is the least member of the point's
    cluster at that cell, or -1 if the point is in no cluster.
    """

    def __init__(self, variance: Sequence[int], axes: Sequence[Sequence], labels,
                 *, names: Sequence[str] | None = None, check: bool = True):
        variance = tuple(int(v) for v in variance)
        if not variance or any(v not in (1, -1) for v in variance):
            raise ClusteringError("variance must be a nonempty sequence over {+1, -1}")
        if len(axes) != len(variance):
            raise ClusteringError("one axis of critical values is needed per variance entry")
        keys = tuple(tuple(v * as_exact(x) for x in ax) for v, ax in zip(variance, axes))
        for i, ks in enumerate(keys):
            if not ks:
                raise ClusteringError(f"axis {i} has no critical values")
            if any(b <= a for a, b in zip(ks, ks[1:])):
                raise ClusteringError(f"axis {i} critical values are not strictly increasing "
                                      f"in the axis order")
        labels = np.array(labels, dtype=np.int32)
        shape = tuple(len(k) for k in keys)
        if labels.ndim != len(shape) + 1 or labels.shape[:-1] != shape:
            raise ClusteringError(f"label table has shape {labels.shape}, grid is {shape}")
        labels.setflags(write=False)
        self.variance = variance
        self._keys = keys
        self.labels = labels
        n = labels.shape[-1]
        self.names = tuple(names) if names is not None else tuple(str(i) for i in range(n))
        if check:
            self._check()

    # validation ----------------------------------------------------------------------

    def _check(self) -> None:
        lab = self.labels
        n = self.n
        idx = np.arange(n)
        valid = lab >= 0
        safe = np.where(valid, lab, 0)
        canon = np.take_along_axis(lab, safe, axis=-1)
        bad = valid & ((safe > idx) | (safe >= n) | (canon != safe))
        if bad.any():
            where = tuple(int(x) for x in np.argwhere(bad)[0])
            raise ClusteringError(f"non-canonical label at cell {where[:-1]}, point {where[-1]}",
                                  witness=where)
        for axis in range(self.ndim):
            lo = np.take(lab, range(self.shape[axis] - 1), axis=axis)
            hi = np.take(lab, range(1, self.shape[axis]), axis=axis)
            lo_safe = np.where(lo >= 0, lo, 0)
            hi_of_canon = np.take_along_axis(hi, lo_safe, axis=-1)
            broken = (lo >= 0) & ((hi < 0) | (hi != hi_of_canon))
            if broken.any():
                where = tuple(int(x) for x in np.argwhere(broken)[0])
                raise ClusteringError(
                    f"not order preserving between cell {where[:-1]} and its successor on "
                    f"axis {axis} (point {where[-1]})", witness=where)
        if (lab[(0,) * self.ndim] >= 0).any():
            raise ClusteringError("the minimal grid cell must carry the empty clustering")

    # shape -------------------------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.labels.shape[-1]

    @property
    def ndim(self) -> int:
        return len(self.variance)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.labels.shape[:-1]

    def keys(self, axis: int) -> tuple[Fraction, ...]:
        return self._keys[axis]

    def values(self, axis: int) -> tuple[Fraction, ...]:
        v = self.variance[axis]
        return tuple(v * k for k in self._keys[axis])

    def cell_values(self, cell: Cell) -> tuple[Fraction, ...]:
        return tuple(self.variance[i] * self._keys[i][c] for i, c in enumerate(cell))

    def cell_keys(self, cell: Cell) -> tuple[Fraction, ...]:
        return tuple(self._keys[i][c] for i, c in enumerate(cell))

    def cells(self) -> Iterator[Cell]:
        return itertools.product(*(range(s) for s in self.shape))

    # evaluation -------------------------------------------------------------------------

    def snap_keys(self, keys: Sequence[Fraction]) -> Cell | None:
        """Governing grid cell of a point given by keys; None in the empty region."""
        cell = []
        for i, k in enumerate(keys):
            j = bisect_right(self._keys[i], k) - 1
            if j < 0:
                return None
            cell.append(j)
        return tuple(cell)

    def snap(self, point: Sequence) -> Cell | None:
        return self.snap_keys([v * as_exact(x) for v, x in zip(self.variance, point)])

    def labels_at_keys(self, keys: Sequence[Fraction]) -> np.ndarray:
        cell = self.snap_keys(keys)
        if cell is None:
            return np.full(self.n, -1, dtype=np.int32)
        return self.labels[cell]

    def clustering(self, cell: Cell) -> Clustering:
        return Clustering.from_labels(self.labels[tuple(cell)])

    def at(self, *point) -> Clustering:
        """H(point) for a point given in real parameter values, via the step extension."""
        if len(point) != self.ndim:
            raise ValueError(f"expected {self.ndim} coordinates")
        return Clustering.from_labels(self.labels_at_keys(
            [v * as_exact(x) for v, x in zip(self.variance, point)]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepClustering):
            return NotImplemented
        return (self.variance == other.variance and self._keys == other._keys
                and np.array_equal(self.labels, other.labels))

    __hash__ = None

    def __repr__(self) -> str:
        return f"StepClustering(variance={self.variance}, shape={self.shape}, n={self.n})"

    # export --------------------------------------------------------------------------------

    def to_dict(self) -> dict:
        cells = []
        for cell in self.cells():
            cl = self.clustering(cell)
            if not len(cl):
                continue
            cells.append({
                "cell": list(cell),
                "values": [format_value(x) for x in self.cell_values(cell)],
                "clusters": [{"label": c[0], "members": list(c)} for c in cl],
            })
        return {
            "schema": "layerscope.step_clustering/1",
            "variance": list(self.variance),
            "axes": [[format_value(x) for x in self.values(i)] for i in range(self.ndim)],
            "names": list(self.names),
            "cells": cells,
        }


# --- constructors ----------------------------------------------------------------------------

def from_degree_rips(Z: FiniteMetricSpace, k_max: int | None = None) -> StepClustering:
    """The degree-Rips clustering L on R x R^op, for degrees ``0..k_max``.

    Axis 0 is the scale (sentinel -1, then the distinct distances); axis 1 is
    the degree listed ``k_max, ..., 0`` (increasing in the opposite order).
    For t > k_max the presented clustering is empty, which is exact when
    ``k_max = |Z| - 1``.
    """
    if k_max is None:
        k_max = Z.n - 1
    scale, degrees = critical_grid(Z, k_max)
    table = degree_rips_labels(Z, degrees)          # (k, level, n)
    body = np.transpose(table[::-1], (1, 0, 2))      # (level, k_max..0, n)
    empty = np.full((1, len(degrees), Z.n), -1, dtype=np.int32)
    labels = np.concatenate([empty, body], axis=0)
    return StepClustering((1, -1), (scale, degrees[::-1]), labels, names=Z.names)


def lesnick_clustering(Z: FiniteMetricSpace, k: int) -> StepClustering:
    """L_k Z: the single-parameter degree-Rips slice at fixed degree ``k``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    table = degree_rips_labels(Z, [k])[0]
    empty = np.full((1, Z.n), -1, dtype=np.int32)
    return StepClustering((1,), ((SENTINEL, *Z.levels),), np.concatenate([empty, table]),
                          names=Z.names)


@dataclass(frozen=True)
class SliceSpec:
    """Slice along ``axis`` (0-based) with the other axes fixed at ``anchor`` values."""

    axis: int
    anchor: tuple = ()


def slice_at_cell(H: StepClustering, axis: int, anchor_cell: Sequence[int]) -> StepClustering:
    if not 0 <= axis < H.ndim:
        raise ClusteringError(f"axis {axis} out of range")
    anchor_cell = tuple(int(a) for a in anchor_cell)
    if len(anchor_cell) != H.ndim - 1:
        raise ClusteringError(f"anchor needs {H.ndim - 1} entries")
    index = list(anchor_cell)
    index.insert(axis, slice(None))
    return StepClustering((H.variance[axis],), (H.values(axis),), H.labels[tuple(index)],
                          names=H.names, check=False)


def slice_clustering(H: StepClustering, spec: SliceSpec) -> StepClustering:
    """The slice of H along ``spec.axis`` through the grid point ``spec.anchor``."""
    others = [i for i in range(H.ndim) if i != spec.axis]
    if len(spec.anchor) != len(others):
        raise ClusteringError(f"anchor needs {len(others)} entries")
    cell = []
    for i, x in zip(others, spec.anchor):
        vals = H.values(i)
        x = as_exact(x)
        if x not in vals:
            raise ClusteringError(f"anchor value {format_value(x)} is not on the grid of axis {i}")
        cell.append(vals.index(x))
    return slice_at_cell(H, spec.axis, cell)


def truncate_below(H: StepClustering, c) -> StepClustering:
    """s -> H(s) for s >= c and the empty clustering below c (single covariant axis)."""
    c = as_exact(c)
    if H.ndim != 1 or H.variance != (1,):
        raise ClusteringError("truncation needs a single covariant axis")
    if c < 0:
        raise ClusteringError("truncation point must be nonnegative")
    vals = H.values(0)
    above = [i for i, x in enumerate(vals) if x > c]
    at_c = H.labels_at_keys([c])
    labels = [np.full(H.n, -1, dtype=np.int32), at_c] + [H.labels[i] for i in above]
    axis = [SENTINEL, c] + [vals[i] for i in above]
    return StepClustering((1,), (axis,), np.stack(labels), names=H.names)


def lift_clustering(H: StepClustering, indices: Sequence[int], n: int,
                    names: Sequence[str] | None = None) -> StepClustering:
    """Read a clustering of a subset (given by increasing ``indices``) as one of ``{0..n-1}``."""
    idx = np.asarray(indices, dtype=np.int32)
    if len(idx) != H.n:
        raise ClusteringError("one parent index is needed per ground point")
    if len(idx) > 1 and (np.diff(idx) <= 0).any():
        raise ClusteringError("parent indices must be strictly increasing")
    lab = np.full(H.shape + (n,), -1, dtype=np.int32)
    src = H.labels
    lab[..., idx] = np.where(src >= 0, idx[np.where(src >= 0, src, 0)], -1)
    return StepClustering(H.variance, [H.values(i) for i in range(H.ndim)], lab,
                          names=names, check=False)


def clustering_leq(A: Clustering, B: Clustering) -> bool:
    """A <= B: every cluster of A lies inside some cluster of B."""
    where = {z: c for c in B for z in c}
    for a in A:
        home = where.get(a[0])
        if home is None or not set(a) <= set(home):
            return False
    return True
