import io
import warnings
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

import gen
import oracles
from layerscope.metric import (FiniteMetricSpace, MetricError, Subsample, density_radius,
                               directional_hausdorff, farthest_point_subsample,
                               load_metric_space, nearest_point_map, phase_change_profile,
                               read_matrix_csv, read_points_csv)


def line(*xs):
    return FiniteMetricSpace.from_points([[x] for x in xs])


def test_three_points():
    Z = line(0, 1, 3)
    assert Z.levels == (0, 1, 2, 3)
    assert Z.d(0, 2) == 3 and Z.d(2, 1) == 2
    assert Z.level_index(F(5, 2)) == 2 and Z.level_index(-1) == -1
    prof = phase_change_profile(Z)
    assert prof.merge_index == 2
    assert prof.gaps() == (1, 1) and prof.gaps(full=True) == (1, 1, 1)


def test_exact_euclidean_and_irrational():
    Z = FiniteMetricSpace.from_points([[0, 0], [3, 4], [1, 1]])
    assert Z.d(0, 1) == 5
    assert Z.exact is False
    assert float(Z.d(0, 2)) == pytest.approx(2 ** 0.5)


@pytest.mark.parametrize("matrix, kind, witness", [
    ([[0, 1], [2, 0]], "asymmetric", [0, 1]),
    ([[0, -1], [-1, 0]], "negative", [0, 1]),
    ([[1, 1], [1, 0]], "diagonal", [0, 0]),
    ([[0, 1, 5], [1, 0, 1], [5, 1, 0]], "triangle", [0, 1, 2]),
    ([[0, 1], [1, 0, 2]], "parse", None),
])
def test_invalid_matrices(matrix, kind, witness):
    with pytest.raises(MetricError) as info:
        FiniteMetricSpace.from_matrix(matrix)
    assert info.value.kind == kind
    if witness is not None:
        assert info.value.witness == witness
    assert info.value.to_dict()["error"] == kind


def test_quantum_rejects_near_ties():
    with pytest.raises(MetricError) as info:
        FiniteMetricSpace.from_matrix([[0.0, 1.0, 1.0 + 1e-14], [1.0, 0.0, 1.0],
                                       [1.0 + 1e-14, 1.0, 0.0]])
    assert info.value.kind == "quantum"


def test_duplicate_labels():
    with pytest.raises(MetricError) as info:
        FiniteMetricSpace.from_matrix([[0, 1], [1, 0]], names=["a", "a"])
    assert info.value.kind == "duplicate-label"


def test_csv_readers():
    Z = read_matrix_csv(io.StringIO(",a,b,c\na,0,1,3\nb,1,0,2\nc,3,2,0\n"))
    assert Z.names == ("a", "b", "c") and Z.d(0, 2) == 3
    Z2 = read_matrix_csv("a,b\n0,1/2\n1/2,0\n")
    assert Z2.d(0, 1) == F(1, 2)
    P = read_points_csv(io.StringIO("name,x,y\np,0,0\nq,1,1\n"), "manhattan")
    assert P.names == ("p", "q") and P.d(0, 1) == 2
    with pytest.raises(MetricError):
        read_matrix_csv(io.StringIO("a,b\n0,1\n"))


def test_load_metric_space(tmp_path):
    p = tmp_path / "pts.csv"
    p.write_text("a,0\nb,1\nc,3\n")
    assert load_metric_space(p, "euclidean").levels == (0, 1, 2, 3)
    m = tmp_path / "m.csv"
    m.write_text("a,b\n0,2\n2,0\n")
    assert load_metric_space(str(m)).d(0, 1) == 2


def test_restrict_reranks():
    Z = line(0, 1, 3)
    X = Z.restrict([0, 2])
    assert X.levels == (0, 3) and X.rank.tolist() == [[0, 1], [1, 0]]


@pytest.mark.parametrize("idx", [(), (1, 0), (0, 0), (0, 5), (-1,)])
def test_subsample_validation(idx):
    with pytest.raises(MetricError):
        Subsample(line(0, 1, 3), idx)


def test_statistics_worked_examples():
    Y = line(0, 1, 3)
    assert directional_hausdorff(Y, (0, 2)) == 1
    assert density_radius((0, 2), Y, 1) == 2
    assert density_radius((0, 1, 2), Y, 1) == 2
    Y2 = line(0, 1, 3, F(31, 10))
    assert directional_hausdorff(Y2, (0, 1, 2)) == F(1, 10)
    assert density_radius((0, 1, 2), Y2, 1) == 1
    with pytest.raises(ValueError):
        density_radius((0,), Y, 3)


@given(st.integers(0, 10**6))
def test_statistics_match_oracles(seed):
    rng = np.random.default_rng(seed)
    Y, D, X = gen.random_pair(rng, 2, 7)
    assert directional_hausdorff(Y, X) == oracles.hausdorff(D, X)
    for k in range(min(3, Y.n - 1) + 1):
        assert density_radius(X, Y, k) == oracles.density_radius(D, X, k)
    theta = nearest_point_map(Y, X)
    for y, t in enumerate(theta):
        assert t in X and D[y][t] == min(D[y][x] for x in X)
    DX = [[D[i][j] for j in X] for i in X]
    assert list(phase_change_profile(Y.restrict(X)).gaps()) == oracles.phase_gaps(DX)


def test_nearest_point_map_ties_and_warning():
    Y = line(0, 2, 1)
    assert nearest_point_map(Y, (0, 1)) == (0, 1, 0)
    D = FiniteMetricSpace.from_matrix([[0, 0, 1], [0, 0, 1], [1, 1, 0]])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert nearest_point_map(D, (0, 1)) == (0, 0, 0)
    assert caught


def test_farthest_point_subsample():
    Y = line(0, 1, 2, 10, 11, 20)
    a = farthest_point_subsample(Y, 3, seed=4)
    assert a == farthest_point_subsample(Y, 3, seed=4)
    assert len(set(a.indices)) == 3
    dup = FiniteMetricSpace.from_matrix([[0, 0, 1], [0, 0, 1], [1, 1, 0]])
    assert farthest_point_subsample(dup, 3, seed=0).indices == (0, 1, 2)
    with pytest.raises(MetricError):
        farthest_point_subsample(Y, 7)
