import math
from itertools import permutations

import numpy as np
import pytest

from src.metrics.hungarian import hungarian
from src.metrics.scores import acc, contingency_table, nmi
from src.utils.errors import NumericalError, ShapeError


def _brute_force_assignment(cost):
    m = cost.shape[0]
    best, best_perm = None, None
    for perm in permutations(range(m)):
        total = sum(cost[i, perm[i]] for i in range(m))
        if best is None or total < best:
            best, best_perm = total, perm
    return np.array(best_perm), best


def _brute_force_acc(y, l):
    classes, clusters = np.unique(y), np.unique(l)
    m = max(classes.size, clusters.size)
    counts = np.zeros((m, m))
    for a, b in zip(y, l):
        counts[np.searchsorted(classes, a), np.searchsorted(clusters, b)] += 1
    return max(sum(counts[perm[j], j] for j in range(m)) for perm in permutations(range(m))) / len(y)


def _nmi_oracle(y, l):
    n = len(y)
    joint, py, pl = {}, {}, {}
    for a, b in zip(y, l):
        joint[(a, b)] = joint.get((a, b), 0) + 1
        py[a] = py.get(a, 0) + 1
        pl[b] = pl.get(b, 0) + 1
    mutual = sum(c / n * math.log((c / n) / ((py[a] / n) * (pl[b] / n))) for (a, b), c in joint.items())
    hy = -sum(c / n * math.log(c / n) for c in py.values())
    hl = -sum(c / n * math.log(c / n) for c in pl.values())
    return 0.0 if max(hy, hl) == 0 else mutual / max(hy, hl)


# -- hungarian --------------------------------------------------------------------

def test_identity_favoring_cost():
    cost = np.ones((4, 4)) - np.eye(4)
    assignment, total = hungarian(cost)
    np.testing.assert_array_equal(assignment, np.arange(4))
    assert total == 0.0


def test_small_example():
    assignment, total = hungarian(np.array([[1.0, 2.0], [2.0, 1.0]]))
    np.testing.assert_array_equal(assignment, [0, 1])
    assert total == 2.0


def test_all_equal_cost_gives_identity():
    assignment, _ = hungarian(np.full((5, 5), 3.0))
    np.testing.assert_array_equal(assignment, np.arange(5))


def test_integer_costs_match_lexicographic_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(200):
        m = int(rng.integers(1, 7))
        cost = rng.integers(0, 4, size=(m, m)).astype(np.float64)
        expected, optimum = _brute_force_assignment(cost)
        assignment, total = hungarian(cost)
        assert total == optimum
        np.testing.assert_array_equal(assignment, expected)


def test_float_costs_reach_the_optimum():
    rng = np.random.default_rng(1)
    for _ in range(100):
        m = int(rng.integers(1, 8))
        cost = rng.normal(size=(m, m))
        _, optimum = _brute_force_assignment(cost)
        assignment, total = hungarian(cost)
        assert sorted(assignment.tolist()) == list(range(m))
        assert total == pytest.approx(optimum, abs=1e-9)


def test_rectangular_cost_is_padded():
    assignment, total = hungarian(np.array([[5.0, 1.0, 3.0], [2.0, 4.0, 6.0]]))
    assert assignment.shape == (3,)
    np.testing.assert_array_equal(assignment[:2], [1, 0])
    assert total == 3.0


def test_nan_cost_rejected():
    with pytest.raises(NumericalError):
        hungarian(np.array([[np.nan, 1.0], [1.0, 0.0]]))


def test_vector_cost_rejected():
    with pytest.raises(ShapeError):
        hungarian(np.ones(3))


# -- ACC ------------------------------------------------------------------------------

def test_acc_relabelled_perfect_clustering():
    assert acc([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0


def test_acc_partial_match():
    assert acc([0, 0, 1, 1], [0, 0, 0, 1]) == 0.75


def test_acc_more_clusters_than_classes():
    assert acc([0, 0, 0, 0], [0, 1, 2, 3]) == 0.25


def test_acc_matches_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(200):
        n = int(rng.integers(1, 20))
        y = rng.integers(0, int(rng.integers(1, 5)), size=n)
        l = rng.integers(0, int(rng.integers(1, 5)), size=n)
        assert acc(y, l) == pytest.approx(_brute_force_acc(y, l), abs=1e-12)


def test_acc_is_invariant_to_relabelling():
    rng = np.random.default_rng(3)
    y = rng.integers(0, 4, size=50)
    l = rng.integers(0, 4, size=50)
    relabel = np.array([7, 2, 9, 0])
    assert acc(y, relabel[l]) == acc(y, l)
    assert 0.0 <= acc(y, l) <= 1.0


def test_contingency_table_counts():
    table = contingency_table([0, 0, 1], [5, 3, 3])
    np.testing.assert_array_equal(table.counts, [[1, 1], [1, 0]])
    np.testing.assert_array_equal(table.predicted_clusters, [3, 5])
    assert table.n == 3


# -- NMI -----------------------------------------------------------------------------

def test_nmi_identical_partitions():
    y = np.random.default_rng(4).integers(0, 5, size=40)
    assert nmi(y, y) == pytest.approx(1.0, abs=1e-12)


def test_nmi_independent_partitions():
    assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == 0.0


def test_nmi_matches_direct_evaluation():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(2, 30))
        y = rng.integers(0, 4, size=n)
        l = rng.integers(0, 4, size=n)
        assert nmi(y, l) == pytest.approx(_nmi_oracle(y, l), abs=1e-10)


def test_nmi_symmetric_and_bounded():
    rng = np.random.default_rng(6)
    for _ in range(50):
        y = rng.integers(0, 3, size=25)
        l = rng.integers(0, 5, size=25)
        value = nmi(y, l)
        assert value == pytest.approx(nmi(l, y), abs=1e-12)
        assert 0.0 <= value <= 1.0


def test_nmi_of_constant_partitions_is_zero():
    assert nmi([1, 1, 1], [4, 4, 4]) == 0.0
    assert nmi([0, 0, 1, 1], [2, 2, 2, 2]) == 0.0


@pytest.mark.parametrize("metric", [acc, nmi])
def test_length_mismatch(metric):
    with pytest.raises(ShapeError):
        metric([0, 1, 1], [0, 1])


@pytest.mark.parametrize("metric", [acc, nmi])
def test_empty_labels(metric):
    with pytest.raises(ShapeError):
        metric([], [])
