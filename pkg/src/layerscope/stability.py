"""Executable stability checks for degree-Rips clusterings of a sample.

For a sample X of Y the checker builds the truncated single-linkage
clustering of X and the fixed-degree degree-Rips clustering of Y, interleaves
them through the inclusion and a nearest-point map, and verifies on layer
points that going up to Y and back down is the identity.

Outcomes: ``retract-verified`` (conditions hold and the identity was checked
element by element), ``conditions-unmet`` (no claim is made) and
``soundness-violation`` (conditions hold yet the check failed; this is
always a bug).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .clustering import lesnick_clustering, truncate_below
from .exact import as_exact, format_value
from .gamma import Element, GammaPoset
from .interleaving import ApproximationWitness, LayerDiagram, build_approximation, induced_layer_diagram
from .layer_points import global_layer_points
from .metric import (FiniteMetricSpace, Subsample, _as_subsample, density_radius,
                     directional_hausdorff, phase_change_profile)

__all__ = [
    "VERIFIED",
    "UNMET",
    "VIOLATION",
    "EXIT_CODES",
    "LayerRow",
    "StabilityReport",
    "check_main_theorem",
    "check_param_bounds",
    "check_smallparam",
    "check_truncation_iso",
    "check_k_positive_note",
]

VERIFIED = "retract-verified"
UNMET = "conditions-unmet"
VIOLATION = "soundness-violation"
EXIT_CODES = {VERIFIED: 0, UNMET: 1, VIOLATION: 3}


def _nonneg(name: str, x) -> Fraction:
    x = as_exact(x)
    if x < 0:
        raise ValueError(f"{name} must be nonnegative, got {format_value(x)}")
    return x


@dataclass(frozen=True)
class LayerRow:
    """One layer point e of the truncated sample clustering and its round trip."""

    point: Element
    up: Element          # i_eps(e) in the layer points of L_k Y
    down: Element        # theta_delta(i_eps(e))
    identity: bool
    bound: tuple[Fraction, bool] | None = None   # (t, lower <= t <= upper) when s > c


@dataclass(frozen=True, eq=False)
class StabilityReport:
    check: str
    Y: FiniteMetricSpace
    X: Subsample
    k: int
    c: Fraction
    eps: Fraction
    delta: Fraction
    h: Fraction
    n_k: Fraction
    gaps: tuple[Fraction, ...]
    conditions: dict[str, bool]
    outcome: str
    rows: tuple[LayerRow, ...] = ()
    witness: ApproximationWitness | None = None
    diagram: LayerDiagram | None = None
    notes: tuple[str, ...] = ()
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.outcome]

    @property
    def verified(self) -> bool:
        return self.outcome == VERIFIED

    def _element(self, g: GammaPoset, e: Element) -> dict:
        names = self.Y.names
        return {
            "scale": format_value(g.values(e)[0]),
            "cluster": [names[z] for z in sorted(g.cluster(e))],
        }

    def to_dict(self) -> dict:
        d = self.diagram
        rows = []
        for r in self.rows:
            row = {
                "point": self._element(d.gamma_H, r.point),
                "i_eps": self._element(d.gamma_E, r.up),
                "theta_delta": self._element(d.gamma_H, r.down),
                "identity": r.identity,
            }
            if r.bound is not None:
                s = d.gamma_H.values(r.point)[0]
                row["param_bound"] = {
                    "t": format_value(r.bound[0]),
                    "lower": format_value(s - 2 * self.h),
                    "upper": format_value(s + self.eps),
                    "ok": r.bound[1],
                }
            rows.append(row)
        out = {
            "schema": "layerscope.retract_check/1",
            "check": self.check,
            "inputs": {
                "n_Y": self.Y.n,
                "X": [self.Y.names[i] for i in self.X.indices],
                "k": self.k,
                "c": format_value(self.c),
                "eps": format_value(self.eps),
                "delta": format_value(self.delta),
            },
            "stats": {
                "h": format_value(self.h),
                "N_k": format_value(self.n_k),
                "gaps": [format_value(x) for x in self.gaps],
            },
            "conditions": dict(sorted(self.conditions.items())),
            "interleaving": self.witness.base.to_dict() if self.witness is not None else None,
            "triangles": (
                {"upper": d.upper.verdict, "lower": d.lower.verdict} if d is not None else None),
            "layer_points": rows,
            "outcome": self.outcome,
            "notes": list(self.notes),
        }
        if self.extra:
            out["details"] = self.extra
        return out


def _weak_gap(g: GammaPoset, points, total: Fraction) -> bool:
    pts = sorted(points)
    for a in pts:
        for b in pts:
            if a != b and g.leq(a, b) and not g.values(b)[0] - g.values(a)[0] > total:
                return False
    return True


def check_param_bounds(report: StabilityReport, element: Element) -> tuple[Fraction, bool]:
    """(t, s - 2h <= t <= s + eps) for the image (t, .) of a layer point (s, .) with s > c."""
    d = report.diagram
    if d is None:
        raise ValueError("the report carries no layer diagram")
    if element not in d.lambda_H:
        raise ValueError(f"{element} is not a layer point of the sample clustering")
    s = d.gamma_H.values(element)[0]
    if not s > report.c:
        raise ValueError("the bound applies to layer points above the truncation scale")
    t = d.gamma_E.values(d.f_map[element])[0]
    return t, s - 2 * report.h <= t <= s + report.eps


def check_main_theorem(Y: FiniteMetricSpace, X, k: int, c, eps, delta, *,
                       force_full_merge: bool = False) -> StabilityReport:
    """Check the hypotheses on (c, eps, delta) and verify the retract on layer points.

    The layer-point round trip and parameter bounds are tabulated whenever the
    interleaving is valid, whether or not the hypotheses hold.
    """
    X = _as_subsample(Y, X)
    c, eps, delta = _nonneg("c", c), _nonneg("eps", eps), _nonneg("delta", delta)
    if k < 0:
        raise ValueError("k must be nonnegative")
    h = directional_hausdorff(Y, X)
    n_k = density_radius(X, Y, k)
    gaps = phase_change_profile(X).gaps(full=force_full_merge)
    total = c + eps + delta

    H = truncate_below(lesnick_clustering(X.space, 0), c)
    E = lesnick_clustering(Y, k)
    w = build_approximation(Y, X, H, E, eps, delta)

    cond = {
        "delta_ge_2h": delta >= 2 * h,
        "eps_window": n_k - eps <= c <= delta,
        "gap": all(total < g for g in gaps),
    }
    lemma = cond["delta_ge_2h"] and cond["eps_window"]
    notes = []
    rows: list[LayerRow] = []
    diagram = None
    if w.valid:
        diagram = induced_layer_diagram(w.base)
        gH = diagram.gamma_H
        cond["weak_gap"] = _weak_gap(gH, diagram.lambda_H, eps + delta)
        for e in sorted(diagram.lambda_H):
            up = diagram.f_map[e]
            down = diagram.g_map[up]
            bound = None
            if gH.values(e)[0] > c:
                t = diagram.gamma_E.values(up)[0]
                s = gH.values(e)[0]
                bound = (t, s - 2 * h <= t <= s + eps)
            rows.append(LayerRow(e, up, down, down == e, bound))
    else:
        cond["weak_gap"] = False
        notes.append("no valid interleaving for these parameters")
        if lemma:
            notes.append("interleaving hypotheses hold but the interleaving failed")

    retract = bool(rows) and all(r.identity for r in rows)
    bounds_ok = all(r.bound[1] for r in rows if r.bound is not None)
    if cond["gap"] and not cond["weak_gap"] and w.valid:
        notes.append("gap condition holds but the weaker per-layer-point condition does not")
    theorem = lemma and (cond["gap"] or cond["weak_gap"])
    if lemma and not w.valid:
        outcome = VIOLATION
    elif lemma and not bounds_ok:
        outcome = VIOLATION
        notes.append("a layer point violates the parameter bounds")
    elif theorem:
        outcome = VERIFIED if retract else VIOLATION
    else:
        outcome = UNMET
        if retract:
            notes.append("the round trip is the identity here although no guarantee applies")
    return StabilityReport("main", Y, X, k, c, eps, delta, h, n_k, gaps, cond, outcome,
                           tuple(rows), w, diagram, tuple(notes))


def _replace(report: StabilityReport, **changes) -> StabilityReport:
    fields = dict(report.__dict__)
    fields.update(changes)
    return StabilityReport(**fields)


def check_smallparam(Y: FiniteMetricSpace, X, k: int, *,
                     force_full_merge: bool = False) -> StabilityReport:
    """Retract onto the untruncated sample clustering when N_k + 2h is below every gap.

    Runs eps = N_k, c = 0, delta = max(2h, N_k - eps) and additionally checks
    that the top triangle commutes exactly and the shift by eps + delta is the
    identity on layer points.
    """
    X = _as_subsample(Y, X)
    h = directional_hausdorff(Y, X)
    n_k = density_radius(X, Y, k)
    eps = n_k
    delta = max(2 * h, n_k - eps)
    report = check_main_theorem(Y, X, k, 0, eps, delta, force_full_merge=force_full_merge)
    small = all(n_k + 2 * h < g for g in report.gaps)
    cond = dict(report.conditions, smallparam=small)
    d = report.diagram
    if d is not None:
        cond["top_triangle_exact"] = d.upper.verdict == "commutes"
        cond["shift_is_identity"] = all(d.shift_H[e] == e for e in d.lambda_H)
    outcome = report.outcome
    if small:
        ok = (report.outcome == VERIFIED and cond.get("top_triangle_exact", False)
              and cond.get("shift_is_identity", False))
        outcome = VERIFIED if ok else VIOLATION
    elif outcome == VERIFIED:
        outcome = UNMET
    return _replace(report, check="smallparam", conditions=cond, outcome=outcome)


def _layer_clusters(g: GammaPoset, points) -> dict[frozenset, Element]:
    return {g.cluster(e): e for e in points}


def _poset_iso(gA: GammaPoset, gB: GammaPoset, mapping: dict) -> bool:
    """Bijective and order preserving and reflecting."""
    if len(set(mapping.values())) != len(mapping):
        return False
    pts = sorted(mapping)
    return all(gA.leq(a, b) == gB.leq(mapping[a], mapping[b]) for a in pts for b in pts)


def check_truncation_iso(X, c) -> StabilityReport:
    """Compare layer points of single linkage with and without truncation below c.

    For c below every gap the eps = 0, delta = c interleaving must commute
    exactly with i_0 an isomorphism; for c below the first positive scale the
    isomorphism is also checked directly by matching clusters.
    """
    Y = X.space if isinstance(X, Subsample) else X
    c = _nonneg("c", c)
    report = check_main_theorem(Y, tuple(range(Y.n)), 0, c, 0, c)
    s1 = Y.levels[1] if len(Y.levels) > 1 else None
    cond = {
        "below_all_gaps": all(c < g for g in report.gaps),
        "below_first_scale": s1 is None or c < s1,
    }
    extra: dict[str, Any] = {}
    ok = True
    d = report.diagram
    if cond["below_all_gaps"]:
        # the horizontal maps here are identities, not the shift by c
        exact = d is not None and all(d.g_map[d.f_map[e]] == e for e in d.lambda_H) and \
            all(d.f_map[d.g_map[e]] == e for e in d.lambda_E)
        iso = d is not None and set(d.f_map) == set(d.lambda_H) and \
            set(d.f_map.values()) == set(d.lambda_E) and _poset_iso(d.gamma_H, d.gamma_E, d.f_map)
        cond["triangles_exact"] = exact
        cond["i0_isomorphism"] = iso
        ok = ok and exact and iso

    full = GammaPoset(lesnick_clustering(Y, 0))
    trunc = GammaPoset(truncate_below(lesnick_clustering(Y, 0), c))
    lam_full = global_layer_points(full).global_points
    lam_trunc = global_layer_points(trunc).global_points
    by_full = _layer_clusters(full, lam_full)
    by_trunc = _layer_clusters(trunc, lam_trunc)
    if cond["below_first_scale"]:
        same = set(by_full) == set(by_trunc)
        direct = same and _poset_iso(trunc, full, {by_trunc[S]: by_full[S] for S in by_trunc})
        cond["direct_isomorphism"] = direct
        ok = ok and direct
    else:
        collapsed = sorted(by_full[S] for S in set(by_full) - set(by_trunc))
        extra["collapsed"] = [
            {"scale": format_value(full.values(e)[0]),
             "cluster": [Y.names[z] for z in sorted(full.cluster(e))]}
            for e in collapsed
        ]
    if c == 0:
        cond["identity"] = lam_full == lam_trunc
        ok = ok and cond["identity"]
    claimed = cond["below_all_gaps"] or cond["below_first_scale"]
    outcome = (VERIFIED if ok else VIOLATION) if claimed else UNMET
    return _replace(report, check="truncation", conditions=cond, outcome=outcome, extra=extra)


def check_k_positive_note(X, k: int, c, eps, delta) -> StabilityReport:
    """With Y = X and N_k(X, X) > 0, admissible parameters can never meet the gap condition."""
    Y = X.space if isinstance(X, Subsample) else X
    c, eps, delta = _nonneg("c", c), _nonneg("eps", eps), _nonneg("delta", delta)
    n_k = density_radius(tuple(range(Y.n)), Y, k)
    gaps = phase_change_profile(Y).gaps()
    s1 = Y.levels[1] if len(Y.levels) > 1 else None
    admissible = n_k - eps <= c <= delta
    premise = k > 0 and n_k > 0
    satisfiable = s1 is not None and c + eps + delta < s1
    cond = {
        "k_positive": k > 0,
        "N_k_positive": n_k > 0,
        "eps_window": admissible,
        "gap_satisfiable": satisfiable,
    }
    notes = []
    if k > 0 and n_k == 0:
        notes.append("duplicate points make N_k zero, so the obstruction does not apply")
    if premise and admissible:
        outcome = VIOLATION if satisfiable else VERIFIED
    else:
        outcome = UNMET
    return StabilityReport("xy-note", Y, Subsample(Y, tuple(range(Y.n))), k, c, eps, delta,
                           Fraction(0), n_k, gaps, cond, outcome, notes=tuple(notes),
                           extra={"s1": format_value(s1) if s1 is not None else None})
