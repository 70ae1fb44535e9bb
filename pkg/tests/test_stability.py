import json
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

import gen
import oracles
from layerscope.metric import FiniteMetricSpace
from layerscope.stability import (EXIT_CODES, UNMET, VERIFIED, VIOLATION, check_k_positive_note,
                                  check_main_theorem, check_param_bounds, check_smallparam,
                                  check_truncation_iso)


def line(*xs):
    return FiniteMetricSpace.from_points([[x] for x in xs])


WS = line(0, F(1, 2), 10, F(21, 2), 20, F(41, 2))


def test_condition_arithmetic_example():
    Y = line(0, 1, 3, F(31, 10))
    r = check_main_theorem(Y, (0, 1, 2), 1, 0, 1, F(1, 5))
    assert (r.h, r.n_k, r.gaps) == (F(1, 10), 1, (1, 1))
    assert r.conditions["delta_ge_2h"] and r.conditions["eps_window"]
    assert not r.conditions["gap"]
    assert r.outcome == UNMET and r.exit_code == 1


def test_trivial_retract():
    Z = line(0, 1, 3)
    r = check_main_theorem(Z, (0, 1, 2), 0, 0, 0, 0)
    assert r.outcome == VERIFIED
    assert r.rows and all(row.identity for row in r.rows)


def test_well_separated_retract_and_bounds():
    r = check_main_theorem(WS, (0, 2, 4), 1, 0, F(1, 2), 1)
    assert (r.h, r.n_k) == (F(1, 2), F(1, 2))
    assert r.outcome == VERIFIED and r.exit_code == 0
    d = r.diagram
    (e,) = [e for e in d.lambda_H if d.gamma_H.values(e) == (10,)]
    t, ok = check_param_bounds(r, e)
    assert ok and 9 <= t <= F(21, 2)
    low = next(e for e in d.lambda_H if d.gamma_H.values(e) == (0,))
    with pytest.raises(ValueError):
        check_param_bounds(r, low)


def test_bounds_collapse_when_x_equals_y():
    Z = line(0, 1, 3, 7)
    r = check_main_theorem(Z, (0, 1, 2, 3), 0, 0, 0, 0)
    for e in r.diagram.lambda_H:
        s = r.diagram.gamma_H.values(e)[0]
        if s > 0:
            assert check_param_bounds(r, e) == (s, True)


def test_smallparam():
    r = check_smallparam(WS, (0, 2, 4), 1)
    assert r.outcome == VERIFIED
    assert r.conditions["smallparam"] and r.conditions["top_triangle_exact"]
    assert r.conditions["shift_is_identity"]
    bad = check_smallparam(line(0, 1, 3), (0, 2), 1)
    assert bad.n_k + 2 * bad.h == 4 and not bad.conditions["smallparam"]
    assert bad.outcome == UNMET
    Z = line(0, 1, 3)
    same = check_smallparam(Z, (0, 1, 2), 0)
    assert same.outcome == VERIFIED
    d = same.diagram
    for table in (d.f_map, d.g_map, d.shift_H, d.shift_E):
        assert all(d.gamma_H.values(a) == d.gamma_E.values(b) and
                   d.gamma_H.cluster(a) == d.gamma_E.cluster(b) for a, b in table.items())


def test_truncation():
    Z = line(0, 1, 3)
    r = check_truncation_iso(Z, F(1, 2))
    assert r.outcome == VERIFIED
    assert r.conditions["direct_isomorphism"] and r.conditions["i0_isomorphism"]
    d = r.diagram
    births = sorted(d.gamma_H.values(e)[0] for e in d.lambda_H)
    assert births == [F(1, 2)] * 3 + [1, 2]
    assert check_truncation_iso(Z, 0).conditions["identity"]
    big = check_truncation_iso(Z, F(3, 2))
    assert big.outcome == UNMET
    assert big.extra["collapsed"] == [{"scale": "0", "cluster": ["0"]},
                                      {"scale": "0", "cluster": ["1"]}]


def test_k_positive_note():
    Z = line(0, 1, 3)
    r = check_k_positive_note(Z, 1, 0, 2, 0)
    assert r.n_k == 2
    assert r.outcome == VERIFIED and not r.conditions["gap_satisfiable"]
    assert check_k_positive_note(Z, 0, 0, 0, 0).outcome == UNMET
    dup = FiniteMetricSpace.from_matrix([[0, 0, 4, 4], [0, 0, 4, 4], [4, 4, 0, 0], [4, 4, 0, 0]])
    r = check_k_positive_note(dup, 1, 0, 0, 0)
    assert r.n_k == 0 and r.outcome == UNMET and r.notes


def test_errors_and_exit_codes():
    Z = line(0, 1, 3)
    with pytest.raises(ValueError):
        check_main_theorem(Z, (0, 1), 0, -1, 0, 0)
    with pytest.raises(ValueError):
        check_main_theorem(Z, (0, 1), 3, 0, 0, 0)
    assert EXIT_CODES == {VERIFIED: 0, UNMET: 1, VIOLATION: 3}


def test_report_json():
    r = check_main_theorem(WS, (0, 2, 4), 1, 0, F(1, 2), 1)
    d = r.to_dict()
    assert d["schema"] == "layerscope.retract_check/1"
    assert d["stats"] == {"h": "0.5", "N_k": "0.5", "gaps": ["10"]}
    assert d["outcome"] == VERIFIED
    row = next(x for x in d["layer_points"] if x["point"]["scale"] == "10")
    assert row["param_bound"]["ok"] and row["identity"]
    assert json.loads(json.dumps(d)) == d


@given(st.integers(0, 10**6))
def test_no_violation_and_gap_implies_weak_gap(seed):
    rng = np.random.default_rng(seed)
    Y, D, X = gen.random_pair(rng, 2, 7)
    k = int(rng.integers(0, min(3, Y.n - 1) + 1))
    h, n_k = oracles.hausdorff(D, X), oracles.density_radius(D, X, k)
    eps = F(int(rng.integers(0, 6)), 2)
    c = max(F(0), n_k - eps) + F(int(rng.integers(0, 3)), 2)
    delta = max(2 * h, c) + F(int(rng.integers(0, 2)), 2)
    r = check_main_theorem(Y, X, k, c, eps, delta)
    assert r.outcome != VIOLATION
    if r.conditions["gap"]:
        assert r.conditions["weak_gap"]
    for row in r.rows:
        if row.bound is not None:
            assert row.bound[1]


def test_weak_gap_alone_suffices():
    # two pairs merging at 5 and 6: the global gap is 1, comparable layer points differ by >= 5
    Y = line(0, 5, 100, 106)
    for eps, delta in [(2, 2), (0, 3), (1, 1)]:
        r = check_main_theorem(Y, (0, 1, 2, 3), 0, 0, eps, delta)
        assert r.gaps == (5, 1, 89)
        assert not r.conditions["gap"] and r.conditions["weak_gap"]
        assert r.outcome == VERIFIED


def test_force_full_merge_uses_every_gap():
    Z = line(0, 1, 3)
    assert check_main_theorem(Z, (0, 1, 2), 0, 0, 0, 0).gaps == (1, 1)
    assert check_main_theorem(Z, (0, 1, 2), 0, 0, 0, 0, force_full_merge=True).gaps == (1, 1, 1)
