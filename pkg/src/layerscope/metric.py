"""Finite metric spaces, subsamples and the distance statistics used by the
stability checks (directional Hausdorff distance, density radius, phase
change numbers).

A :class:`FiniteMetricSpace` keeps its distinct distances as exact
fractions (``levels``) together with an integer ``rank`` matrix indexing
into them. All threshold tests ("is d(i, j) <= s") are done on ranks, so
repeated distances coincide exactly.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from os import PathLike
from typing import Iterable, Sequence

import numpy as np

from ._kernels import sweep_labels, vertex_births
from .exact import as_exact, is_float_like

__all__ = [
    "METRICS",
    "DEFAULT_QUANTUM",
    "MetricError",
    "FiniteMetricSpace",
    "Subsample",
    "PhaseChangeProfile",
    "load_metric_space",
    "read_matrix_csv",
    "read_points_csv",
    "phase_change_profile",
    "directional_hausdorff",
    "density_radius",
    "nearest_point_map",
    "farthest_point_subsample",
]

METRICS = ("euclidean", "manhattan", "chebyshev")

#: float-derived distances closer than this without being equal are rejected
DEFAULT_QUANTUM = Fraction(1, 10**12)


class MetricError(ValueError):
    """Invalid metric input. ``witness`` names the offending indices."""

    def __init__(self, message: str, *, kind: str, witness=None):
        super().__init__(message)
        self.kind = kind
        self.witness = witness

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self), "witness": self.witness}


class FiniteMetricSpace:
    """Points ``0..n-1`` (optionally named) with an exact distance matrix."""

    __slots__ = ("names", "levels", "rank", "exact")

    def __init__(self, names: Sequence[str], levels: Sequence[Fraction], rank: np.ndarray,
                 exact: bool = True):
        rank = np.array(rank, dtype=np.int32)
        rank.setflags(write=False)
        self.names = tuple(names)
        self.levels = tuple(levels)
        self.rank = rank
        self.exact = exact

    # construction ----------------------------------------------------------

    @classmethod
    def from_matrix(cls, matrix, names: Sequence[str] | None = None, *,
                    quantum=DEFAULT_QUANTUM) -> "FiniteMetricSpace":
        rows = [list(r) for r in matrix]
        inexact = any(is_float_like(x) for r in rows for x in r)
        try:
            entries = [[as_exact(x) for x in r] for r in rows]
        except (TypeError, ValueError) as exc:
            raise MetricError(str(exc), kind="parse") from exc
        return _validated(entries, names, exact=not inexact, quantum=as_exact(quantum))

    @classmethod
    def from_points(cls, points, metric: str = "euclidean", names: Sequence[str] | None = None,
                    *, quantum=DEFAULT_QUANTUM) -> "FiniteMetricSpace":
        if metric not in METRICS:
            raise MetricError(f"unknown metric {metric!r}; choose from {METRICS}", kind="metric")
        try:
            coords = [[as_exact(x) for x in p] for p in points]
        except (TypeError, ValueError) as exc:
            raise MetricError(str(exc), kind="parse") from exc
        if len({len(p) for p in coords}) > 1:
            raise MetricError("points have differing dimensions", kind="parse")
        n = len(coords)
        entries = [[Fraction(0)] * n for _ in range(n)]
        exact = True
        for i in range(n):
            for j in range(i + 1, n):
                diff = [abs(a - b) for a, b in zip(coords[i], coords[j])]
                if metric == "manhattan":
                    d = sum(diff, Fraction(0))
                elif metric == "chebyshev":
                    d = max(diff, default=Fraction(0))
                else:
                    d, ok = _exact_sqrt(sum((x * x for x in diff), Fraction(0)))
                    exact = exact and ok
                entries[i][j] = entries[j][i] = d
        return _validated(entries, names, exact=exact, quantum=as_exact(quantum))

    # access ------------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.names)

    @property
    def n(self) -> int:
        return len(self.names)

    def d(self, i: int, j: int) -> Fraction:
        return self.levels[self.rank[i, j]]

    def distance_matrix(self) -> np.ndarray:
        """Float copy of the distances, for display and plotting only."""
        return np.array([float(v) for v in self.levels])[self.rank]

    def level_index(self, s) -> int:
        """Index of the largest distance level ``<= s``; -1 if ``s < 0``."""
        return bisect_right(self.levels, as_exact(s)) - 1

    def restrict(self, indices: Iterable[int]) -> "FiniteMetricSpace":
        idx = np.asarray(list(indices), dtype=np.int64)
        sub = self.rank[np.ix_(idx, idx)]
        used = np.unique(sub)
        return FiniteMetricSpace(
            [self.names[i] for i in idx],
            [self.levels[u] for u in used],
            np.searchsorted(used, sub),
            self.exact,
        )

    def subsample(self, indices: Iterable[int]) -> "Subsample":
        return Subsample(self, tuple(indices))

    def __repr__(self) -> str:
        return f"FiniteMetricSpace(n={self.n}, levels={len(self.levels)})"


def _exact_sqrt(q: Fraction) -> tuple[Fraction, bool]:
    a, b = q.numerator, q.denominator
    ra, rb = math.isqrt(a), math.isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb), True
    return Fraction(math.sqrt(a / b)), False


def _validated(entries: list[list[Fraction]], names, *, exact: bool,
               quantum: Fraction) -> FiniteMetricSpace:
    n = len(entries)
    if n == 0:
        raise MetricError("empty metric space", kind="parse")
    if any(len(r) != n for r in entries):
        raise MetricError("distance matrix is not square", kind="parse")
    if names is None:
        names = [str(i) for i in range(n)]
    names = [str(x) for x in names]
    if len(names) != n:
        raise MetricError(f"{len(names)} labels for {n} points", kind="parse")
    seen: dict[str, int] = {}
    for i, name in enumerate(names):
        if name in seen:
            raise MetricError(f"duplicate point label {name!r}", kind="duplicate-label",
                              witness=[seen[name], i])
        seen[name] = i
    for i in range(n):
        for j in range(n):
            if entries[i][j] < 0:
                raise MetricError(f"negative entry at ({i}, {j})", kind="negative",
                                  witness=[i, j])
    for i in range(n):
        if entries[i][i] != 0:
            raise MetricError(f"nonzero diagonal entry at ({i}, {i})", kind="diagonal",
                              witness=[i, i])
    for i in range(n):
        for j in range(i + 1, n):
            if entries[i][j] != entries[j][i]:
                raise MetricError(f"asymmetric entries at ({i}, {j})", kind="asymmetric",
                                  witness=[i, j])

    levels = sorted({x for r in entries for x in r})
    where = {v: r for r, v in enumerate(levels)}
    rank = np.array([[where[x] for x in r] for r in entries], dtype=np.int32)

    if not exact:
        for a, b in zip(levels, levels[1:]):
            if b - a < quantum:
                raise MetricError(
                    f"distances {float(a)!r} and {float(b)!r} differ by less than the "
                    f"quantum {float(quantum)!r}", kind="quantum")
    _check_triangle(levels, rank, slack=Fraction(0) if exact else quantum)
    return FiniteMetricSpace(names, levels, rank, exact)


def _check_triangle(levels: list[Fraction], rank: np.ndarray, slack: Fraction) -> None:
    n = rank.shape[0]
    if n < 3:
        return
    denom = math.lcm(*(v.denominator for v in levels))
    top = levels[-1] * denom
    if slack == 0 and top < 2**60:
        scaled = np.array([int(v * denom) for v in levels], dtype=np.int64)[rank]
        best = None
        for j in range(n):
            bad = scaled[:, j][:, None] + scaled[j, :][None, :] < scaled
            if bad.any():
                i, k = map(int, np.argwhere(bad)[0])
                if best is None or (i, j, k) < best:
                    best = (i, j, k)
        if best is not None:
            _raise_triangle(best, levels, rank)
        return
    # float screen, exact confirmation of the survivors
    f = np.array([float(v) for v in levels])[rank]
    tol = 1e-9 * max(1.0, float(levels[-1])) + float(slack)
    best = None
    for j in range(n):
        cand = np.argwhere(f[:, j][:, None] + f[j, :][None, :] < f + tol)
        for i, k in cand:
            i, k = int(i), int(k)
            if i == j or k == j or i == k:
                continue
            lhs = levels[rank[i, k]]
            rhs = levels[rank[i, j]] + levels[rank[j, k]] + slack
            if lhs > rhs and (best is None or (i, j, k) < best):
                best = (i, j, k)
    if best is not None:
        _raise_triangle(best, levels, rank)


def _raise_triangle(triple, levels, rank):
    i, j, k = triple
    raise MetricError(
        f"triangle inequality fails: d({i},{k}) = {levels[rank[i, k]]} > "
        f"d({i},{j}) + d({j},{k}) = {levels[rank[i, j]] + levels[rank[j, k]]}",
        kind="triangle", witness=[i, j, k])


# --- file input ----------------------------------------------------------------

def _rows(source) -> list[list[str]]:
    if isinstance(source, (str, PathLike)) and not (isinstance(source, str) and "\n" in source):
        with open(source, newline="", encoding="utf-8") as fh:
            text = fh.read()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    rows = [[c.strip() for c in r] for r in csv.reader(io.StringIO(text))]
    return [r for r in rows if r and any(c for c in r) and not r[0].startswith("#")]


def _numeric(cell: str) -> bool:
    try:
        as_exact(cell)
    except (TypeError, ValueError):
        return False
    return True


def read_matrix_csv(source, *, quantum=DEFAULT_QUANTUM) -> FiniteMetricSpace:
    """Distance matrix CSV: a header row of labels, then one row per point.

    Rows may carry their label in a leading column. Entries are exact
    decimals or ``p/q`` fractions.
    """
    rows = _rows(source)
    if not rows:
        raise MetricError("empty distance matrix file", kind="parse")
    header = rows[0]
    if header and header[0] == "" and len(header) > 1:
        header = header[1:]
    n = len(header)
    body = rows[1:]
    if len(body) != n:
        raise MetricError(f"header has {n} labels but there are {len(body)} rows", kind="parse")
    matrix = []
    for i, r in enumerate(body):
        if len(r) == n + 1:
            if r[0] != header[i]:
                raise MetricError(f"row {i} label {r[0]!r} does not match header {header[i]!r}",
                                  kind="parse", witness=[i])
            r = r[1:]
        if len(r) != n:
            raise MetricError(f"row {i} has {len(r)} entries, expected {n}", kind="parse",
                              witness=[i])
        matrix.append(r)
    return FiniteMetricSpace.from_matrix(matrix, header, quantum=quantum)


def read_points_csv(source, metric: str = "euclidean", *,
                    quantum=DEFAULT_QUANTUM) -> FiniteMetricSpace:
    """Coordinate CSV with rows ``label, x1, ..., xd``; a non-numeric header is skipped."""
    rows = _rows(source)
    if rows and not all(_numeric(c) for c in rows[0][1:]):
        rows = rows[1:]
    if not rows:
        raise MetricError("no points in coordinate file", kind="parse")
    names = [r[0] for r in rows]
    return FiniteMetricSpace.from_points([r[1:] for r in rows], metric, names, quantum=quantum)


def load_metric_space(source, metric: str | None = None, *,
                      quantum=DEFAULT_QUANTUM) -> FiniteMetricSpace:
    """Read a distance matrix CSV, or a coordinate CSV when ``metric`` is given."""
    if metric is None:
        return read_matrix_csv(source, quantum=quantum)
    return read_points_csv(source, metric, quantum=quantum)


# --- subsamples ---------------------------------------------------------------------

@dataclass(frozen=True)
class Subsample:
    parent: FiniteMetricSpace
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if not idx:
            raise MetricError("subsample is empty", kind="subsample")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise MetricError("subsample indices must be strictly increasing", kind="subsample",
                              witness=list(idx))
        if idx[0] < 0 or idx[-1] >= self.parent.n:
            raise MetricError(f"subsample index out of range 0..{self.parent.n - 1}",
                              kind="subsample", witness=list(idx))

    def __len__(self) -> int:
        return len(self.indices)

    @cached_property
    def space(self) -> FiniteMetricSpace:
        return self.parent.restrict(self.indices)


def _as_subsample(Y: FiniteMetricSpace, X) -> Subsample:
    if isinstance(X, Subsample):
        if X.parent is not Y:
            raise ValueError("subsample belongs to a different parent space")
        return X
    return Subsample(Y, tuple(X))


def _as_space(X) -> FiniteMetricSpace:
    return X.space if isinstance(X, Subsample) else X


# --- statistics ------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseChangeProfile:
    """Sorted distinct distances ``s_0 = 0 < ... < s_U`` and the merge index ``M``."""

    values: tuple[Fraction, ...]
    merge_index: int

    def gaps(self, full: bool = False) -> tuple[Fraction, ...]:
        """``s_{i+1} - s_i`` for ``0 <= i < M`` (``i < U`` when ``full``)."""
        stop = len(self.values) - 1 if full else self.merge_index
        return tuple(self.values[i + 1] - self.values[i] for i in range(stop))

    def min_gap(self, full: bool = False) -> Fraction | None:
        g = self.gaps(full)
        return min(g) if g else None


def phase_change_profile(X) -> PhaseChangeProfile:
    X = _as_space(X)
    n_levels = len(X.levels)
    labels = sweep_labels(X.rank, vertex_births(X.rank, 0, n_levels), n_levels)
    merged = np.flatnonzero((labels == 0).all(axis=1))
    return PhaseChangeProfile(X.levels, int(merged[0]))


def directional_hausdorff(Y: FiniteMetricSpace, X) -> Fraction:
    """max over y in Y of the distance from y to its nearest point of X."""
    X = _as_subsample(Y, X)
    r = Y.rank[:, list(X.indices)].min(axis=1).max()
    return Y.levels[int(r)]


def density_radius(X, Y: FiniteMetricSpace, k: int) -> Fraction:
    """N_k(X, Y): least radius at which every x in X has k+1 points of Y (itself included) within it."""
    X = _as_subsample(Y, X)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k + 1 > Y.n:
        raise ValueError(f"insufficient points for {k} neighbours: |Y| = {Y.n}")
    rows = np.sort(Y.rank[list(X.indices), :], axis=1)
    return Y.levels[int(rows[:, k].max())]


def nearest_point_map(Y: FiniteMetricSpace, X) -> tuple[int, ...]:
    """For each point of Y, the Y-index of a nearest point of X (least index on ties)."""
    X = _as_subsample(Y, X)
    idx = np.asarray(X.indices)
    sub = Y.rank[:, idx]
    theta = idx[np.argmin(sub, axis=1)]
    for y in range(Y.n):
        hits = idx[sub[y] == 0]
        if len(hits) > 1:
            warnings.warn(
                f"point {y} is at distance 0 from sample points {hits.tolist()}; "
                f"theta({y}) = {int(theta[y])}", stacklevel=2)
    return tuple(int(t) for t in theta)


def farthest_point_subsample(Y: FiniteMetricSpace, count: int, seed: int = 0) -> Subsample:
    """Greedy farthest-point sample of ``count`` points from a seeded random start."""
    if not 1 <= count <= Y.n:
        raise MetricError(f"cannot take {count} of {Y.n} points", kind="subsample")
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(Y.n))]
    near = Y.rank[chosen[0]].astype(np.int64)
    near[chosen[0]] = -1
    while len(chosen) < count:
        nxt = int(np.argmax(near))
        chosen.append(nxt)
        near = np.minimum(near, Y.rank[nxt])
        near[chosen] = -1
    return Subsample(Y, tuple(sorted(chosen)))
