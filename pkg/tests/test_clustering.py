from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

import gen
from layerscope.clustering import (ClusteringError, SliceSpec, StepClustering, clustering_leq,
                                   from_degree_rips, lesnick_clustering, lift_clustering,
                                   slice_clustering, truncate_below)
from layerscope.degree_rips import SENTINEL, Clustering, clustering_at
from layerscope.metric import FiniteMetricSpace

Z3 = FiniteMetricSpace.from_points([[0], [1], [3]])


def C(*clusters):
    return Clustering(tuple(tuple(c) for c in clusters))


def test_from_degree_rips_cells():
    H = from_degree_rips(Z3, 1)
    assert H.variance == (1, -1)
    assert H.values(1) == (1, 0)
    assert H.at(1, 1) == C((0, 1))
    assert H.at(1, 0) == C((0, 1), (2,))
    assert H.at(3, 0) == C((0, 1, 2))
    for t in (0, 1):
        assert len(H.at(SENTINEL, t)) == 0
    assert len(H.at(3, 2)) == 0          # beyond k_max the presentation is empty


def test_slices_of_degree_rips():
    H = from_degree_rips(Z3)
    sl = slice_clustering(H, SliceSpec(0, (0,)))
    assert [sl.at(s) for s in (-1, 0, 1, 2)] == [
        C(), C((0,), (1,), (2,)), C((0, 1), (2,)), C((0, 1, 2))]
    assert sl == lesnick_clustering(Z3, 0)
    s2 = slice_clustering(H, SliceSpec(0, (2,)))
    assert [s2.at(s) for s in (1, 2, 3)] == [C(), C((1,)), C((0, 1, 2))]
    one = lesnick_clustering(Z3, 1)
    assert slice_clustering(one, SliceSpec(0, ())) == one
    with pytest.raises(ClusteringError):
        slice_clustering(H, SliceSpec(0, (F(1, 2),)))


def test_truncate_below():
    L0 = lesnick_clustering(Z3, 0)
    T = truncate_below(L0, F(3, 2))
    assert [T.at(s) for s in (1, F(3, 2), F(19, 10), 2, 7)] == [
        C(), C((0, 1), (2,)), C((0, 1), (2,)), C((0, 1, 2)), C((0, 1, 2))]
    T0 = truncate_below(L0, 0)
    assert all(T0.at(s) == L0.at(s) for s in (0, F(1, 2), 1, 2, 3))
    T9 = truncate_below(L0, 9)
    assert T9.at(8) == C() and T9.at(9) == C((0, 1, 2))
    with pytest.raises(ClusteringError):
        truncate_below(L0, -1)
    with pytest.raises(ClusteringError):
        truncate_below(from_degree_rips(Z3), 1)


def test_clustering_leq():
    assert clustering_leq(C((0,), (1,)), C((0, 1)))
    assert not clustering_leq(C((0, 1)), C((0,), (1,)))
    assert clustering_leq(C(), C((5,)))


def test_validation_rejects_bad_tables():
    good = np.array([[-1, -1], [0, 1], [0, 0]], dtype=np.int32)
    StepClustering((1,), ((0, 1, 2),), good)
    with pytest.raises(ClusteringError):        # not order preserving
        StepClustering((1,), ((0, 1, 2),), good[[0, 2, 1]])
    with pytest.raises(ClusteringError):        # minimal cell not empty
        StepClustering((1,), ((0, 1, 2),), good[[1, 1, 2]])
    with pytest.raises(ClusteringError):        # label is not the least member
        StepClustering((1,), ((0, 1, 2),), np.array([[-1, -1], [1, 1], [1, 1]]))
    with pytest.raises(ClusteringError):        # axis values out of order
        StepClustering((1,), ((0, 2, 1),), good)


def test_contravariant_step_extension():
    H = from_degree_rips(Z3)
    # degree axis is constant on (k-1, k]
    assert H.at(1, F(1, 2)) == H.at(1, 1)
    assert H.at(F(3, 2), F(1, 10)) == H.at(1, 1)


def test_lift_and_to_dict():
    X = Z3.restrict([0, 2])
    L = lift_clustering(lesnick_clustering(X, 0), [0, 2], 3, names=Z3.names)
    assert L.at(0) == C((0,), (2,)) and L.at(3) == C((0, 2))
    d = lesnick_clustering(Z3, 0).to_dict()
    assert d["schema"] == "layerscope.step_clustering/1"
    assert d["axes"] == [["-1", "0", "1", "2", "3"]]


@given(st.integers(0, 10**6))
def test_order_preserving_and_matches_pointwise(seed):
    rng = np.random.default_rng(seed)
    Z, _ = gen.random_space(rng, 1, 7)
    H = from_degree_rips(Z)
    cells = list(H.cells())
    for a in cells:
        for b in cells:
            if all(x <= y for x, y in zip(a, b)):
                assert clustering_leq(H.clustering(a), H.clustering(b))
    for cell in cells:
        s, t = H.cell_values(cell)
        assert H.clustering(cell) == clustering_at(Z, s, t)
    k = int(rng.integers(0, Z.n))
    sl = slice_clustering(H, SliceSpec(0, (k,)))
    assert sl == lesnick_clustering(Z, k)
