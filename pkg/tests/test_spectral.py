import numpy as np
import pandas as pd
import pytest

from src.clustering.eigen import eigensolve_symmetric, fix_signs, jacobi_eigensolve
from src.clustering.kmeans import kmeans, lloyd, kmeans_plus_plus
from src.clustering.spectral import (
    affinity_from_Z,
    dump_embedding,
    normalized_laplacian,
    spectral_cluster,
)
from src.metrics.scores import acc
from src.utils.errors import ConfigError, NumericalError, ShapeError


def _block_affinity(sizes):
    n = sum(sizes)
    S = np.zeros((n, n))
    labels = np.repeat(np.arange(len(sizes)), sizes)
    start = 0
    for size in sizes:
        S[start:start + size, start:start + size] = 1.0
        start += size
    np.fill_diagonal(S, 0.0)
    return S, labels


def _gaussian_affinity(points, sigma=1.0):
    diff = points[:, None, :] - points[None, :, :]
    S = np.exp(-(diff * diff).sum(axis=2) / (2 * sigma * sigma))
    np.fill_diagonal(S, 0.0)
    return S


def _three_blobs(seed=0, per_cluster=15):
    rng = np.random.default_rng(seed)
    centers = 10.0 * np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    labels = np.repeat(np.arange(3), per_cluster)
    return centers[labels] + rng.normal(scale=0.5, size=(labels.size, 2)), labels


def _random_symmetric(rng, n):
    A = rng.normal(size=(n, n))
    return 0.5 * (A + A.T)


# -- affinity and Laplacian ---------------------------------------------------------

def test_affinity_from_Z_example():
    S = affinity_from_Z(np.array([[0.0, 2.0], [-4.0, 0.0]]))
    np.testing.assert_array_equal(S, [[0.0, 3.0], [3.0, 0.0]])


def test_affinity_is_exactly_symmetric_and_non_negative():
    rng = np.random.default_rng(0)
    for _ in range(50):
        S = affinity_from_Z(rng.normal(size=(7, 7)))
        assert np.array_equal(S, S.T)
        assert (S >= 0).all()


def test_affinity_rejects_non_square():
    with pytest.raises(ShapeError):
        affinity_from_Z(np.ones((2, 3)))


def test_laplacian_spectrum_lies_in_zero_two():
    rng = np.random.default_rng(1)
    for n in (3, 8, 20):
        S = affinity_from_Z(rng.uniform(size=(n, n)))
        np.fill_diagonal(S, 0.0)
        values = np.linalg.eigvalsh(normalized_laplacian(S))
        assert values.min() >= -1e-8
        assert values.max() <= 2.0 + 1e-8


def test_isolated_row_is_identity_row():
    S, _ = _block_affinity([2, 2])
    S = np.pad(S, ((0, 1), (0, 1)))
    L = normalized_laplacian(S)
    np.testing.assert_array_equal(L[-1], np.eye(5)[-1])


# -- spectral clustering ------------------------------------------------------------

@pytest.mark.parametrize("c", [2, 3, 4])
def test_block_diagonal_components_are_recovered(c):
    S, labels = _block_affinity([4] * c)
    result = spectral_cluster(S, c, seed=0, restarts=5)
    assert acc(labels, result.labels) == 1.0
    np.testing.assert_allclose(result.eigenvalues, np.zeros(c), atol=1e-10)


def test_unequal_blocks_are_recovered():
    S, labels = _block_affinity([3, 6, 4])
    assert acc(labels, spectral_cluster(S, 3, restarts=5).labels) == 1.0


def test_single_cluster_structure_still_splits():
    S = np.ones((10, 10)) - np.eye(10)
    first = spectral_cluster(S, 2, seed=3, restarts=5)
    second = spectral_cluster(S, 2, seed=3, restarts=5)
    assert set(first.labels.tolist()) == {0, 1}
    assert np.array_equal(first.labels, second.labels)


def test_separated_gaussian_blobs():
    points, labels = _three_blobs()
    result = spectral_cluster(_gaussian_affinity(points), 3, seed=0)
    assert acc(labels, result.labels) == 1.0


def test_sample_permutation_keeps_the_partition():
    points, labels = _three_blobs(seed=2)
    S = _gaussian_affinity(points)
    order = np.random.default_rng(2).permutation(labels.size)
    base = spectral_cluster(S, 3, restarts=10).labels
    permuted = spectral_cluster(S[np.ix_(order, order)], 3, restarts=10).labels
    restored = np.empty_like(permuted)
    restored[order] = permuted
    assert acc(base, restored) == 1.0


def test_isolated_samples_join_a_cluster():
    S, labels = _block_affinity([4, 4])
    S = np.pad(S, ((0, 1), (0, 1)))
    result = spectral_cluster(S, 2, restarts=5)
    assert result.labels.shape == (9,)
    assert acc(labels, result.labels[:8]) == 1.0
    assert result.labels[8] in (0, 1)


def test_embedding_rows_are_unit_length():
    points, _ = _three_blobs(seed=4)
    embedding = spectral_cluster(_gaussian_affinity(points), 3, restarts=3).embedding
    np.testing.assert_allclose(np.linalg.norm(embedding, axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("k", [1, 6])
def test_cluster_count_out_of_range(k):
    with pytest.raises(ConfigError):
        spectral_cluster(np.ones((5, 5)) - np.eye(5), k)


def test_unknown_eigensolver():
    with pytest.raises(ConfigError):
        spectral_cluster(np.ones((4, 4)) - np.eye(4), 2, eigensolver="lanczos")


def test_jacobi_backend_agrees_with_default():
    points, labels = _three_blobs(seed=5, per_cluster=8)
    S = _gaussian_affinity(points)
    assert acc(labels, spectral_cluster(S, 3, restarts=5, eigensolver="jacobi").labels) == 1.0


def test_dump_embedding(tmp_path):
    S, _ = _block_affinity([3, 3])
    result = spectral_cluster(S, 2, restarts=2)
    embedding_path, eigen_path = dump_embedding(result.eigenvalues, result.embedding, tmp_path / "embedding.csv")
    frame = pd.read_csv(embedding_path, index_col="sample")
    assert list(frame.columns) == ["e0", "e1"]
    np.testing.assert_array_equal(frame.to_numpy(), result.embedding)
    assert len(pd.read_csv(eigen_path)) == 2


# -- eigensolvers -----------------------------------------------------------------

@pytest.mark.parametrize("solver", [eigensolve_symmetric, jacobi_eigensolve])
def test_diagonal_matrix(solver):
    values, vectors = solver(np.diag([3.0, 1.0, 2.0]), 2)
    np.testing.assert_allclose(values, [1.0, 2.0], atol=1e-14)
    np.testing.assert_allclose(np.abs(vectors), np.eye(3)[:, [1, 2]], atol=1e-14)


@pytest.mark.parametrize("solver", [eigensolve_symmetric, jacobi_eigensolve])
def test_identity_matrix(solver):
    values, vectors = solver(np.eye(4), 4)
    np.testing.assert_allclose(values, np.ones(4), atol=1e-14)
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(4), atol=1e-12)


@pytest.mark.parametrize("n", [2, 5, 16, 64])
def test_residuals_and_cross_check(n):
    rng = np.random.default_rng(n)
    M = _random_symmetric(rng, n)
    k = min(n, 4)
    reference = eigensolve_symmetric(M, k)
    jacobi = jacobi_eigensolve(M, k)
    for values, vectors in (reference, jacobi):
        residual = M @ vectors - vectors * values[None, :]
        assert np.abs(residual).max() <= 1e-8 * max(1.0, np.abs(M).max())
        np.testing.assert_allclose(vectors.T @ vectors, np.eye(k), atol=1e-10)
    np.testing.assert_allclose(jacobi.values, reference.values, atol=1e-9)
    np.testing.assert_allclose(jacobi.vectors, reference.vectors, atol=1e-7)


def test_sign_convention():
    rng = np.random.default_rng(7)
    _, vectors = eigensolve_symmetric(_random_symmetric(rng, 6), 6)
    for column in vectors.T:
        first = column[np.flatnonzero(np.abs(column) > 1e-12)[0]]
        assert first > 0
    np.testing.assert_array_equal(fix_signs(-vectors), vectors)


def test_asymmetric_matrix_rejected():
    with pytest.raises(ShapeError):
        eigensolve_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]), 1)


def test_non_finite_matrix_rejected():
    with pytest.raises(NumericalError):
        jacobi_eigensolve(np.array([[np.nan, 0.0], [0.0, 1.0]]), 1)


@pytest.mark.parametrize("k", [0, 3])
def test_eigenpair_count_checked(k):
    with pytest.raises(ConfigError):
        eigensolve_symmetric(np.eye(2), k)


# -- k-means -------------------------------------------------------------------------

def test_lloyd_trace_is_non_increasing():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(60, 3))
    for seed in range(10):
        centers = kmeans_plus_plus(X, 4, np.random.default_rng(seed))
        _, _, inertia, trace = lloyd(X, centers)
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
        assert inertia == trace[-1]


def test_kmeans_is_deterministic_and_best_of_restarts():
    X = np.random.default_rng(9).normal(size=(40, 2))
    a = kmeans(X, 3, seed=11, restarts=8)
    b = kmeans(X, 3, seed=11, restarts=8)
    assert np.array_equal(a.labels, b.labels)
    assert a.restart == b.restart
    assert a.inertia <= kmeans(X, 3, seed=11, restarts=1).inertia


def test_kmeans_separates_obvious_groups():
    X = np.array([[0.0], [0.1], [10.0], [10.1]])
    result = kmeans(X, 2, seed=0, restarts=3)
    assert result.labels[0] == result.labels[1] != result.labels[2] == result.labels[3]
    assert result.inertia == pytest.approx(0.01, abs=1e-12)


@pytest.mark.parametrize("kwargs", [{"k": 0}, {"k": 5}, {"k": 2, "restarts": 0}])
def test_kmeans_argument_checks(kwargs):
    with pytest.raises(ConfigError):
        kmeans(np.zeros((4, 2)), **kwargs)
