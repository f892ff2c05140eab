import math

import numpy as np
import pytest

from src.data.masks import PairingMask
from src.nn.autodiff import Tensor
from src.nn.networks import build_parameter_set
from src.objectives.losses import (
    Hyperparameters,
    LossTerms,
    contrastive_loss,
    entropy_regularization,
    feature_alignment_loss,
    gather_observed,
    probability_alignment_loss,
    reconstruction_loss,
    self_expression_loss,
    total_loss,
)
from src.objectives.objective import TrainingInputs, fusion_coefficients, objective
from src.utils.errors import ConfigError, LossInputError, ShapeError
from tests.conftest import make_dataset


def _views(*arrays):
    return [Tensor(np.asarray(a, dtype=np.float64)) for a in arrays]


# -- contrastive ----------------------------------------------------------------

def test_contrastive_orthogonal_negatives():
    e1, e2 = [1.0, 0.0], [0.0, 1.0]
    latents = _views([e1, e2], [e1, e2])
    Q, sample_ids, _ = gather_observed(latents, np.ones((2, 2), dtype=bool))
    value = contrastive_loss(Q, sample_ids, tau=1.0).item()
    assert value == pytest.approx(-math.log(math.e / (math.e + 2)), abs=1e-12)
    assert value == pytest.approx(0.5514, abs=1e-4)


def test_contrastive_identical_vectors_reduces_to_counting():
    latents = _views(np.ones((3, 2)), np.ones((3, 2)))
    Q, sample_ids, _ = gather_observed(latents, np.ones((3, 2), dtype=bool))
    # one positive among five other rows
    assert contrastive_loss(Q, sample_ids, tau=0.5).item() == pytest.approx(math.log(5), abs=1e-12)


def test_contrastive_scale_invariance():
    rng = np.random.default_rng(0)
    Q = rng.normal(size=(6, 3))
    ids = np.array([0, 1, 2, 0, 1, 2])
    scaled = Q * rng.uniform(0.1, 10.0, size=(6, 1))
    assert abs(contrastive_loss(Tensor(Q), ids).item() - contrastive_loss(Tensor(scaled), ids).item()) < 1e-9


def test_contrastive_reordering_invariance():
    rng = np.random.default_rng(1)
    Q = rng.normal(size=(6, 3))
    ids = np.array([0, 1, 2, 0, 1, 2])
    order = rng.permutation(6)
    assert contrastive_loss(Tensor(Q), ids).item() == pytest.approx(
        contrastive_loss(Tensor(Q[order]), ids[order]).item(), abs=1e-12
    )


def test_contrastive_rows_without_positive_are_negatives_only():
    ids = np.array([0, 0, 1])
    Q = Tensor([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    # anchors 0 and 1 see each other (logit 1) and row 2 (logit 0)
    expected = -(1.0 - math.log(math.e + 1.0))
    assert contrastive_loss(Q, ids, tau=1.0).item() == pytest.approx(expected, abs=1e-12)


def test_contrastive_zero_vector_reports_index():
    with pytest.raises(LossInputError, match="index 1"):
        contrastive_loss(Tensor([[1.0, 0.0], [0.0, 0.0]]), [0, 0])


def test_contrastive_rejects_bad_tau():
    with pytest.raises(ConfigError):
        contrastive_loss(Tensor(np.eye(2)), [0, 0], tau=0.0)


def test_gather_observed_skips_unobserved_rows():
    latents = _views(np.arange(6.0).reshape(3, 2), -np.arange(6.0).reshape(3, 2))
    observed = np.array([[True, True], [True, False], [False, True]])
    Q, sample_ids, view_ids = gather_observed(latents, observed)
    np.testing.assert_array_equal(sample_ids, [0, 1, 0, 2])
    np.testing.assert_array_equal(view_ids, [0, 0, 1, 1])
    assert Q.shape == (4, 2)


# -- self-expression ----------------------------------------------------------

def test_self_expression_zero_Z_is_frobenius():
    H = np.random.default_rng(2).normal(size=(4, 3))
    value = self_expression_loss(Tensor(H), Tensor(np.zeros((4, 4))), 0.5).item()
    assert value == pytest.approx((H ** 2).sum(), abs=1e-12)


def test_self_expression_exact_for_duplicate_rows():
    H = np.array([[1.0, 2.0], [1.0, 2.0]])
    Z = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert self_expression_loss(Tensor(H), Tensor(Z), 0.0).item() == 0.0


def test_self_expression_matches_dense_evaluation():
    rng = np.random.default_rng(3)
    H = rng.normal(size=(4, 3))
    Z = rng.normal(size=(4, 4))
    np.fill_diagonal(Z, 0.0)
    expected = np.linalg.norm(H - Z @ H) ** 2 + 0.001 * np.linalg.norm(Z, axis=0).sum()
    assert self_expression_loss(Tensor(H), Tensor(Z), 0.001).item() == pytest.approx(expected, rel=1e-12)


def test_self_expression_rejects_nonzero_diagonal():
    with pytest.raises(LossInputError):
        self_expression_loss(Tensor(np.ones((2, 2))), Tensor(np.eye(2)), 0.1)


def test_self_expression_rejects_wrong_shape():
    with pytest.raises(ShapeError):
        self_expression_loss(Tensor(np.ones((3, 2))), Tensor(np.zeros((2, 2))), 0.1)


# -- reconstruction -----------------------------------------------------------

def test_reconstruction_perfect_is_zero():
    X = np.random.default_rng(4).normal(size=(3, 2))
    assert reconstruction_loss([X], [Tensor(X)], np.ones((3, 1), dtype=bool)).item() == 0.0


def test_reconstruction_single_sample():
    assert reconstruction_loss([np.array([[1.0, 2.0]])], [Tensor([[0.0, 0.0]])], np.ones((1, 1), dtype=bool)).item() == 5.0


def test_reconstruction_ignores_hidden_rows():
    X = [np.zeros((2, 2)), np.zeros((2, 3))]
    mask = PairingMask(np.array([[True, True], [True, False]]))
    base = reconstruction_loss(X, [Tensor(np.ones((2, 2))), Tensor(np.ones((2, 3)))], mask).item()
    perturbed = np.ones((2, 3))
    perturbed[1] = 100.0
    assert reconstruction_loss(X, [Tensor(np.ones((2, 2))), Tensor(perturbed)], mask).item() == base


def test_reconstruction_shape_mismatch():
    with pytest.raises(ShapeError):
        reconstruction_loss([np.zeros((2, 2))], [Tensor(np.zeros((2, 3)))], np.ones((2, 1), dtype=bool))


# -- feature alignment ----------------------------------------------------------

def test_feature_alignment_orthogonal_samples():
    features = _views(np.eye(2), np.eye(2))
    # per ordered pair: -(1/2)*2 + 0
    assert feature_alignment_loss(features, np.ones((2, 2), dtype=bool)).item() == pytest.approx(-2.0, abs=1e-12)


def test_feature_alignment_constant_unit_vector():
    n = 4
    features = _views(np.tile([0.6, 0.8], (n, 1)), np.tile([0.6, 0.8], (n, 1)))
    expected = 2 * (-1.0 + (n - 1) / 2.0)
    assert feature_alignment_loss(features, np.ones((n, 2), dtype=bool)).item() == pytest.approx(expected, abs=1e-12)


def test_feature_alignment_matches_double_sum():
    rng = np.random.default_rng(5)
    A, B = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    observed = np.ones((5, 2), dtype=bool)
    observed[2, 1] = False
    rows = [0, 1, 3, 4]
    fa = A[rows] / np.linalg.norm(A[rows], axis=1, keepdims=True)
    fb = B[rows] / np.linalg.norm(B[rows], axis=1, keepdims=True)
    expected = 0.0
    for P, R in ((fa, fb), (fb, fa)):
        n_t = len(rows)
        expected -= sum(P[i] @ R[i] for i in range(n_t)) / n_t
        expected += sum(P[i] @ R[j] for i in range(n_t) for j in range(n_t) if i != j) / (2 * n_t)
    value = feature_alignment_loss(_views(A, B), observed).item()
    assert value == pytest.approx(expected, abs=1e-12)


def test_feature_alignment_permutation_invariance():
    rng = np.random.default_rng(6)
    A, B = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    order = rng.permutation(5)
    mask = np.ones((5, 2), dtype=bool)
    assert feature_alignment_loss(_views(A, B), mask).item() == pytest.approx(
        feature_alignment_loss(_views(A[order], B[order]), mask).item(), abs=1e-12
    )


def test_feature_alignment_needs_two_co_observed_samples():
    observed = np.array([[True, True], [True, False], [False, True]])
    with pytest.raises(LossInputError):
        feature_alignment_loss(_views(np.ones((3, 2)), np.ones((3, 2))), observed)


# -- probability alignment ----------------------------------------------------

def test_probability_alignment_identical_is_zero():
    Q = np.random.default_rng(7).dirichlet(np.ones(3), size=4)
    assert probability_alignment_loss(_views(Q, Q), np.ones((4, 2), dtype=bool)).item() == 0.0


def test_probability_alignment_hand_value():
    eps = 1e-12
    p, q = np.array([1.0, 0.0]), np.array([0.5, 0.5])

    def kl(a, b):
        return sum(x * math.log(max(x, eps) / max(y, eps)) for x, y in zip(a, b) if x > 0)

    expected = 0.5 * (kl(p, q) + kl(q, p))
    value = probability_alignment_loss(_views([p], [q]), np.ones((1, 2), dtype=bool)).item()
    assert value == pytest.approx(expected, rel=1e-12)


def test_probability_alignment_symmetric_in_views():
    rng = np.random.default_rng(8)
    A, B = rng.dirichlet(np.ones(3), size=5), rng.dirichlet(np.ones(3), size=5)
    mask = np.ones((5, 2), dtype=bool)
    forward = probability_alignment_loss(_views(A, B), mask).item()
    assert forward > 0
    assert forward == pytest.approx(probability_alignment_loss(_views(B, A), mask).item(), abs=1e-15)


def test_probability_alignment_rejects_non_distribution():
    with pytest.raises(LossInputError):
        probability_alignment_loss(_views([[0.7, 0.7]], [[0.5, 0.5]]), np.ones((1, 2), dtype=bool))


# -- entropy --------------------------------------------------------------------

@pytest.mark.parametrize("K", [2, 3, 5])
def test_entropy_uniform_is_minus_log_k(K):
    Q = np.full((4, K), 1.0 / K)
    assert entropy_regularization(_views(Q, Q)).item() == pytest.approx(-2 * math.log(K), abs=1e-12)


def test_entropy_one_hot_is_zero():
    Q = np.tile([1.0, 0.0, 0.0], (4, 1))
    assert entropy_regularization(_views(Q)).item() == 0.0


def test_entropy_closed_form():
    Q = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert entropy_regularization(_views(Q)).item() == pytest.approx(-1.0397, abs=1e-4)


def test_entropy_only_counts_observed_rows():
    Q = np.array([[1.0, 0.0], [0.0, 1.0]])
    observed = np.array([[True], [False]])
    assert entropy_regularization(_views(Q), observed).item() == 0.0


def test_entropy_bounds_over_random_distributions():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        K = int(rng.integers(2, 6))
        Q = rng.dirichlet(np.full(K, rng.uniform(0.1, 3.0)), size=int(rng.integers(1, 8)))
        value = entropy_regularization(_views(Q)).item()
        assert -math.log(K) - 1e-12 <= value <= 0.0


# -- combination ----------------------------------------------------------------

def _terms(rng):
    return LossTerms(*(Tensor(float(x)) for x in rng.uniform(0.1, 2.0, size=6)))


def test_all_lambdas_zero_leaves_reconstruction():
    terms = _terms(np.random.default_rng(10))
    breakdown = total_loss(terms, Hyperparameters(lambda1=0.0, lambda2=0.0, lambda3=0.0))
    assert breakdown.total == breakdown.re


def test_default_total_is_weighted_sum():
    terms = _terms(np.random.default_rng(11))
    hp = Hyperparameters()
    b = total_loss(terms, hp)
    expected = b.re + hp.lambda1 * b.se + hp.lambda2 * b.mcl + hp.lambda3 * (b.F + b.R)
    assert abs(b.total - expected) < 1e-9
    with_c = total_loss(terms, hp, include_probability_alignment=True)
    assert abs(with_c.total - (expected + hp.lambda3 * b.C)) < 1e-9


def test_total_is_linear_in_lambda2():
    terms = _terms(np.random.default_rng(12))
    base = total_loss(terms, Hyperparameters(lambda2=0.3))
    doubled = total_loss(terms, Hyperparameters(lambda2=0.6))
    assert doubled.total - base.total == pytest.approx(0.3 * base.mcl, abs=1e-12)


@pytest.mark.parametrize(
    "kwargs", [{"tau": 0.0}, {"alpha": -1.0}, {"lambda1": -0.1}, {"n_clusters": 1}, {"latent_dim": 0}]
)
def test_hyperparameters_validate(kwargs):
    with pytest.raises(ConfigError):
        Hyperparameters(**kwargs)


def test_latent_dim_defaults_to_cluster_count():
    assert Hyperparameters(n_clusters=4).k == 4
    assert Hyperparameters(n_clusters=4, latent_dim=7).k == 7


# -- objective assembly -----------------------------------------------------------

def test_fusion_coefficients_renormalize_over_present_views():
    present = np.array([[True, True], [True, False], [False, True]])
    coefficients = fusion_coefficients(present, [0.25, 0.75])
    np.testing.assert_allclose(coefficients, [[0.25, 0.75], [1.0, 0.0], [0.0, 1.0]])


def test_fusion_coefficients_fall_back_to_mean_on_underflow():
    present = np.array([[True, False, True]])
    np.testing.assert_allclose(fusion_coefficients(present, [0.0, 1.0, 0.0]), [[0.5, 0.0, 0.5]])


def test_single_view_objective_has_no_cross_view_terms():
    rng = np.random.default_rng(13)
    dataset = make_dataset(rng.uniform(size=(5, 3)))
    inputs = TrainingInputs.from_dataset(dataset, PairingMask.complete(5, 1))
    params = build_parameter_set([3], latent_dim=2, n_clusters=2, seed=0)
    breakdown = objective(params, inputs, Tensor(np.zeros((5, 5))), Hyperparameters(), [1.0])
    assert breakdown.mcl == breakdown.F == breakdown.C == 0.0
    assert breakdown.re > 0


def test_objective_breakdown_matches_invariant():
    rng = np.random.default_rng(14)
    dataset = make_dataset(rng.uniform(size=(6, 3)), rng.uniform(size=(6, 2)))
    observed = np.ones((6, 2), dtype=bool)
    observed[0, 1] = False
    inputs = TrainingInputs.from_dataset(dataset, PairingMask(observed))
    params = build_parameter_set([3, 2], latent_dim=2, n_clusters=2, seed=1)
    hp = Hyperparameters(lambda1=0.5, lambda2=0.25, lambda3=2.0)
    b = objective(params, inputs, Tensor(np.zeros((6, 6))), hp, [0.5, 0.5])
    expected = b.re + hp.lambda1 * b.se + hp.lambda2 * b.mcl + hp.lambda3 * (b.F + b.R)
    assert abs(b.total - expected) < 1e-9
    assert set(b.as_dict()) == {"re", "se", "mcl", "F", "C", "R", "total"}
