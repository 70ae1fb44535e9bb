"""Shifted cluster maps, interleavings and approximations of step
clusterings, and the diagrams they induce on layer points.

Shifted points generally fall between grid values. Every check is therefore
run on the common refinement of all grids involved, pulled back by the
shifts: between consecutive refinement values every clustering in the
diagram is constant, so checking the refinement points checks every real
parameter.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .clustering import StepClustering, lift_clustering
from .exact import as_exact, format_value
from .gamma import Element, GammaPoset, build_gamma
from .layer_points import global_layer_points, max_layer_point
from .metric import (FiniteMetricSpace, Subsample, _as_subsample, directional_hausdorff,
                     nearest_point_map)

__all__ = [
    "Failure",
    "ShiftedMap",
    "InterleavingWitness",
    "ApproximationWitness",
    "TriangleVerdict",
    "LayerDiagram",
    "induced_map",
    "check_interleaving",
    "gamma_square_failures",
    "build_approximation",
    "induced_layer_diagram",
]

Keys = tuple[Fraction, ...]


@dataclass(frozen=True)
class Failure:
    """Where a map fails to exist or a diagram fails to commute.

    ``values`` is the source parameter point, ``cell`` the source grid cell
    governing it, and ``snapped`` the grid cells the shifted points were
    resolved to along the way (None for the empty region).
    """

    stage: str
    values: tuple[Fraction, ...]
    cell: tuple[int, ...] | None
    cluster: tuple[int, ...]
    snapped: tuple = ()
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "point": [format_value(x) for x in self.values],
            "cell": list(self.cell) if self.cell is not None else None,
            "cluster": list(self.cluster),
            "snapped": [list(c) if c is not None else None for c in self.snapped],
            "detail": self.detail,
        }


def _shift_vector(shift, ndim: int) -> tuple[Fraction, ...]:
    if isinstance(shift, (list, tuple)):
        vec = tuple(as_exact(x) for x in shift)
    else:
        vec = (as_exact(shift),) * ndim
    if len(vec) != ndim:
        raise ValueError(f"shift needs {ndim} entries")
    if any(x < 0 for x in vec):
        raise ValueError("shifts must be nonnegative")
    return vec


def _add(keys: Keys, shift: Keys) -> Keys:
    return tuple(k + s for k, s in zip(keys, shift))


def _values(H: StepClustering, keys: Keys) -> tuple[Fraction, ...]:
    return tuple(v * k for v, k in zip(H.variance, keys))


@dataclass(frozen=True, eq=False)
class ShiftedMap:
    """The map S -> cluster of target(s + v*shift) containing f(S)."""

    source: StepClustering
    target: StepClustering
    ground_map: tuple[int, ...]
    shift: tuple[Fraction, ...]
    failure: Failure | None = None

    @property
    def exists(self) -> bool:
        return self.failure is None

    def image(self, keys: Keys, members) -> tuple[Keys, int | None]:
        """Target keys and label of the cluster containing f(members); None if there is none."""
        tk = _add(keys, self.shift)
        lab = self.target.labels_at_keys(tk)
        img = lab[np.asarray(self.ground_map)[np.asarray(list(members))]]
        if len(img) == 0 or img[0] < 0 or (img != img[0]).any():
            return tk, None
        return tk, int(img[0])

    def on_element(self, g_src: GammaPoset, e: Element) -> Element:
        """Image of a grid element, resolved to the governing grid element of the target."""
        tk, label = self.image(g_src.keys(e), g_src.cluster(e))
        if label is None:
            raise ValueError(f"map undefined at {e}")
        return self.target.snap_keys(tk), label


def _compatible(H: StepClustering, E: StepClustering) -> None:
    if H.variance != E.variance:
        raise ValueError(f"variance mismatch: {H.variance} vs {E.variance}")


def _refinement(axes_sets: Sequence[set]) -> list[list[Fraction]]:
    return [sorted(s) for s in axes_sets]


# a path step: (ground map or None for identity, shift, target clustering)
Step = tuple


def _path_points(start: StepClustering, paths: Sequence[Sequence[Step]]):
    nd = start.ndim
    sets = [set(start.keys(i)) for i in range(nd)]
    for path in paths:
        total = (Fraction(0),) * nd
        for _, shift, target in path:
            total = _add(total, shift)
            for i in range(nd):
                sets[i].update(k - total[i] for k in target.keys(i))
    lo = [start.keys(i)[0] for i in range(nd)]
    grid = [[k for k in sorted(s) if k >= lo[i]] for i, s in enumerate(sets)]
    return itertools.product(*grid)


def _follow(path: Sequence[Step], keys: Keys, members: np.ndarray):
    """Push a cluster along a path; returns (keys, label, snapped cells) or a failure index."""
    snapped = []
    for pos, (fmap, shift, target) in enumerate(path):
        keys = _add(keys, shift)
        snapped.append(target.snap_keys(keys))
        lab = target.labels_at_keys(keys)
        img = lab[members if fmap is None else np.asarray(fmap)[members]]
        if img[0] < 0 or (img != img[0]).any():
            return keys, None, tuple(snapped), pos
        label = int(img[0])
        members = np.flatnonzero(lab == label)
    return keys, label, tuple(snapped), None


def _clusters_at(H: StepClustering, keys: Keys):
    lab = H.labels_at_keys(keys)
    for l in np.unique(lab[lab >= 0]):
        yield int(l), np.flatnonzero(lab == l)


def _compare_paths(start: StepClustering, left: Sequence[Step], right: Sequence[Step],
                   stage: str) -> Failure | None:
    for keys in _path_points(start, [left, right]):
        for l, members in _clusters_at(start, keys):
            k1, a, snap1, bad1 = _follow(left, keys, members)
            k2, b, snap2, bad2 = _follow(right, keys, members)
            if bad1 is not None or bad2 is not None or a != b:
                detail = ("map undefined" if (bad1 is not None or bad2 is not None)
                          else f"composite gives cluster {a}, expected {b}")
                return Failure(stage, _values(start, keys), start.snap_keys(keys),
                               tuple(int(z) for z in members), snap1 + snap2, detail)
    return None


def induced_map(f: Sequence[int], eps, H: StepClustering, E: StepClustering) -> ShiftedMap:
    """The shifted map induced by a ground map, or a record of where it does not exist.

    Nonexistence is reported through ``ShiftedMap.failure`` rather than raised.
    """
    _compatible(H, E)
    f = tuple(int(x) for x in f)
    if len(f) != H.n or any(not 0 <= x < E.n for x in f):
        raise ValueError("ground map must send every source point to a target point")
    shift = _shift_vector(eps, H.ndim)
    fmap = np.asarray(f)
    for keys in _path_points(H, [[(f, shift, E)]]):
        for l, members in _clusters_at(H, keys):
            tk, label, snap, bad = _follow([(fmap, shift, E)], keys, members)
            if bad is not None:
                img = E.labels_at_keys(tk)[fmap[members]]
                why = ("image leaves every cluster" if (img < 0).any()
                       else "image split across clusters")
                fail = Failure("exists", _values(H, keys), H.snap_keys(keys),
                               tuple(int(z) for z in members), snap, why)
                return ShiftedMap(H, E, f, shift, fail)
    return ShiftedMap(H, E, f, shift, None)


@dataclass(frozen=True, eq=False)
class InterleavingWitness:
    H: StepClustering
    E: StepClustering
    f: ShiftedMap
    g: ShiftedMap
    failures: tuple[Failure, ...] = ()

    @property
    def exists(self) -> bool:
        return self.f.exists and self.g.exists

    @property
    def valid(self) -> bool:
        return self.exists and not self.failures

    @property
    def epsilon(self) -> tuple[Fraction, ...]:
        return self.f.shift

    @property
    def delta(self) -> tuple[Fraction, ...]:
        return self.g.shift

    def to_dict(self) -> dict:
        fails = [m.failure for m in (self.f, self.g) if m.failure is not None]
        return {
            "schema": "layerscope.interleaving/1",
            "epsilon": [format_value(x) for x in self.epsilon],
            "delta": [format_value(x) for x in self.delta],
            "exists": self.exists,
            "commutes": self.valid,
            "failures": [x.to_dict() for x in fails + list(self.failures)],
        }


def _paths(w_H, w_E, f: ShiftedMap, g: ShiftedMap):
    both = _add(f.shift, g.shift)
    fm, gm = np.asarray(f.ground_map), np.asarray(g.ground_map)
    return {
        "upper": (w_H, [(fm, f.shift, w_E), (gm, g.shift, w_H)], [(None, both, w_H)]),
        "lower": (w_E, [(gm, g.shift, w_H), (fm, f.shift, w_E)], [(None, both, w_E)]),
    }


def check_interleaving(H: StepClustering, E: StepClustering, f: ShiftedMap,
                       g: ShiftedMap) -> InterleavingWitness:
    """Verify g∘f = shift on H and f∘g = shift on E at every parameter."""
    _compatible(H, E)
    if f.source is not H or f.target is not E or g.source is not E or g.target is not H:
        raise ValueError("f must map H to E and g must map E to H")
    if not (f.exists and g.exists):
        return InterleavingWitness(H, E, f, g, ())
    failures = []
    for stage, (start, left, right) in _paths(H, E, f, g).items():
        fail = _compare_paths(start, left, right, stage)
        if fail is not None:
            failures.append(fail)
    return InterleavingWitness(H, E, f, g, tuple(failures))


def gamma_square_failures(w: InterleavingWitness) -> list[Failure]:
    """Check the induced diagram on Gamma: both triangles and the naturality squares."""
    if not w.exists:
        return [m.failure for m in (w.f, w.g) if m.failure is not None]
    H, E, f, g = w.H, w.E, w.f, w.g
    both = _add(f.shift, g.shift)
    fm, gm = np.asarray(f.ground_map), np.asarray(g.ground_map)
    checks = list(_paths(H, E, f, g).items()) + [
        ("square-f", (H, [(None, both, H), (fm, f.shift, E)], [(fm, f.shift, E), (None, both, E)])),
        ("square-g", (E, [(None, both, E), (gm, g.shift, H)], [(gm, g.shift, H), (None, both, H)])),
    ]
    out = []
    for stage, (start, left, right) in checks:
        fail = _compare_paths(start, left, right, stage)
        if fail is not None:
            out.append(fail)
    return out


# --- approximations ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ApproximationWitness:
    base: InterleavingWitness
    subsample: Subsample
    theta: tuple[int, ...]
    h_value: Fraction
    epsilon: Fraction
    delta: Fraction

    @property
    def valid(self) -> bool:
        return self.base.valid


def build_approximation(Y: FiniteMetricSpace, X, H: StepClustering, E: StepClustering,
                        eps, delta) -> ApproximationWitness:
    """Interleave (X, H) with (Y, E) through the inclusion and a nearest-point map.

    ``H`` may be given on X (one label column per sample point) or already
    on Y's indices.
    """
    X = _as_subsample(Y, X)
    eps_v = _shift_vector(eps, H.ndim)
    delta_v = _shift_vector(delta, H.ndim)
    if H.n == len(X) and H.n != Y.n:
        H = lift_clustering(H, X.indices, Y.n, names=Y.names)
    elif H.n != Y.n:
        raise ValueError("H must be a clustering of X or of Y")
    if E.n != Y.n:
        raise ValueError("E must be a clustering of Y")
    theta = nearest_point_map(Y, X)
    h = directional_hausdorff(Y, X)
    assert all(Y.d(y, t) <= h for y, t in enumerate(theta))
    inclusion = tuple(range(Y.n))
    fm = induced_map(inclusion, eps_v, H, E)
    gm = induced_map(theta, delta_v, E, H)
    w = check_interleaving(H, E, fm, gm)
    scalar = lambda v: v[0] if len(set(v)) == 1 else v  # noqa: E731
    return ApproximationWitness(w, X, theta, h, scalar(eps_v), scalar(delta_v))


# --- induced diagram on layer points ---------------------------------------------------------

@dataclass(frozen=True)
class TriangleVerdict:
    """``commutes`` (chain length 0), ``commutes-up-to-homotopy`` (1 or 2),
    ``not-verified`` (no chain of length <= 2 found) or ``fails`` (a map is missing)."""

    verdict: str
    chain_length: int | None = None
    witness: object = None
    monotone: bool = True

    @property
    def ok(self) -> bool:
        return self.verdict in ("commutes", "commutes-up-to-homotopy")


@dataclass(frozen=True, eq=False)
class LayerDiagram:
    witness: InterleavingWitness
    gamma_H: GammaPoset
    gamma_E: GammaPoset
    lambda_H: frozenset
    lambda_E: frozenset
    f_map: dict = field(default_factory=dict)
    g_map: dict = field(default_factory=dict)
    shift_H: dict = field(default_factory=dict)
    shift_E: dict = field(default_factory=dict)
    upper: TriangleVerdict = TriangleVerdict("fails")
    lower: TriangleVerdict = TriangleVerdict("fails")


def _leq_point(g: GammaPoset, e: Element, keys: Keys, members: frozenset) -> bool:
    return all(a <= b for a, b in zip(g.keys(e), keys)) and g.cluster(e) <= members


def _monotone(g: GammaPoset, pts, fn, g_out: GammaPoset) -> bool:
    pts = sorted(pts)
    return all(g_out.leq(fn[a], fn[b]) for a in pts for b in pts if a != b and g.leq(a, b))


def _triangle(g: GammaPoset, pts, A: dict, B: dict, total: Keys) -> TriangleVerdict:
    pts = sorted(pts)
    mono = _monotone(g, pts, A, g) and _monotone(g, pts, B, g)
    if all(A[e] == B[e] for e in pts):
        return TriangleVerdict("commutes", 0, None, mono)
    if all(g.leq(A[e], B[e]) for e in pts) or all(g.leq(B[e], A[e]) for e in pts):
        return TriangleVerdict("commutes-up-to-homotopy", 1, None, mono)
    # zigzag A <= Y >= B through the uncollapsed Gamma-level map Y = shift∘i
    H = g.source
    for e in pts:
        keys = _add(g.keys(e), total)
        lab = H.labels_at_keys(keys)
        members = frozenset(int(z) for z in np.flatnonzero(lab == lab[e[1]]))
        if not (_leq_point(g, A[e], keys, members) and _leq_point(g, B[e], keys, members)):
            return TriangleVerdict("not-verified", None, e, mono)
    return TriangleVerdict("commutes-up-to-homotopy", 2, None, mono)


def induced_layer_diagram(w: InterleavingWitness, order_H: Sequence[int] | None = None,
                          order_E: Sequence[int] | None = None) -> LayerDiagram:
    """The square on Λ(H), Λ(E) with maps m∘(shifted map)∘i and verdicts per triangle."""
    gH, gE = build_gamma(w.H), build_gamma(w.E)
    lH = global_layer_points(gH, with_slices=False).global_points
    lE = global_layer_points(gE, with_slices=False).global_points
    if not w.valid:
        first = ([m.failure for m in (w.f, w.g) if m.failure is not None] + list(w.failures))[0]
        bad = TriangleVerdict("fails", None, first, False)
        return LayerDiagram(w, gH, gE, lH, lE, upper=bad, lower=bad)

    mH = lambda e: max_layer_point(gH, e, order_H)  # noqa: E731
    mE = lambda e: max_layer_point(gE, e, order_E)  # noqa: E731
    both = _add(w.f.shift, w.g.shift)
    idH = ShiftedMap(w.H, w.H, tuple(range(w.H.n)), both)
    idE = ShiftedMap(w.E, w.E, tuple(range(w.E.n)), both)
    f_map = {e: mE(w.f.on_element(gH, e)) for e in lH}
    g_map = {e: mH(w.g.on_element(gE, e)) for e in lE}
    shift_H = {e: mH(idH.on_element(gH, e)) for e in lH}
    shift_E = {e: mE(idE.on_element(gE, e)) for e in lE}
    upper = _triangle(gH, lH, {e: g_map[f_map[e]] for e in lH}, shift_H, both)
    lower = _triangle(gE, lE, {e: f_map[g_map[e]] for e in lE}, shift_E, both)
    return LayerDiagram(w, gH, gE, lH, lE, f_map, g_map, shift_H, shift_E, upper, lower)
