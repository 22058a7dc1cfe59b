import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from perceptor.errors import InputError, NumericalError
from perceptor.stats import (ActivationSet, ReadoutPerceptron, SumSamples, avg_correlation,
                             compute_sums, estimate_moments, fit_ridge, one_hot,
                             regularize_psd)


def naive_sums(x, w):
    out = np.zeros((len(x), len(w)))
    for m in range(len(x)):
        for i in range(len(w)):
            acc = 0.0
            for k in range(x.shape[1]):
                acc += x[m, k] * w[i, k]
            out[m, i] = acc
    return out


def test_identity_dot():
    acts = ActivationSet(np.array([[3.0, 5.0]]), [0], 2)
    sums = compute_sums(acts, ReadoutPerceptron(np.eye(2)))
    np.testing.assert_array_equal(sums.per_class[0], [[3.0, 5.0]])
    assert sums.per_class[1].size == 0


def test_unit_filters_cosine():
    r = ReadoutPerceptron(np.eye(2), similarity="cosine")
    np.testing.assert_allclose(r.sums(np.array([[3.0, 4.0]])), [[0.6, 0.8]])


def test_sums_match_double_loop():
    rng = np.random.default_rng(1)
    w = rng.normal(size=(3, 10))
    x = rng.normal(size=(100, 10))
    labels = rng.integers(0, 3, 100)
    sums = compute_sums(ActivationSet(x, labels, 3), ReadoutPerceptron(w))
    ref = naive_sums(x, w)
    for i in range(3):
        np.testing.assert_allclose(sums.per_class[i], ref[labels == i], atol=1e-12)


def test_bias_added_in_dot_only():
    w = np.eye(2)
    b = np.array([1.0, -1.0])
    x = np.array([[3.0, 4.0]])
    np.testing.assert_allclose(ReadoutPerceptron(w, b).sums(x), [[4.0, 3.0]])
    np.testing.assert_allclose(ReadoutPerceptron(w, b, "cosine").sums(x), [[0.6, 0.8]])


def test_hand_moments():
    sums = SumSamples((np.array([[0.0, 0.0], [2.0, 2.0]]), np.array([[1.0, 0.0], [0.0, 1.0]])))
    st_ = estimate_moments(sums)
    np.testing.assert_allclose(st_.mu[0], [1, 1])
    np.testing.assert_allclose(st_.sigma[0], [np.sqrt(2), np.sqrt(2)])
    np.testing.assert_allclose(st_.cov[0], [[2, 2], [2, 2]], rtol=1e-9)
    np.testing.assert_allclose(st_.priors, [0.5, 0.5])


def test_constant_rows_zero_sigma():
    st_ = estimate_moments(SumSamples((np.full((10, 2), 5.0), np.array([[0, 1.0], [1, 0]]))))
    np.testing.assert_array_equal(st_.mu[0], [5, 5])
    np.testing.assert_array_equal(st_.sigma[0], [0, 0])


def test_law_of_large_numbers():
    rng = np.random.default_rng(0)
    st_ = estimate_moments(SumSamples((rng.normal(size=(10_000, 2)), rng.normal(size=(10, 2)))))
    assert np.all(np.abs(st_.mu[0]) < 0.05)
    assert np.all(np.abs(st_.sigma[0] - 1) < 0.05)


def test_priors_modes():
    sums = SumSamples((np.zeros((3, 2)), np.ones((1, 2))))
    np.testing.assert_allclose(estimate_moments(sums).priors, [0.75, 0.25])
    np.testing.assert_allclose(estimate_moments(sums, "uniform").priors, [0.5, 0.5])
    np.testing.assert_allclose(estimate_moments(sums, [0.1, 0.9]).priors, [0.1, 0.9])
    with pytest.raises(InputError):
        estimate_moments(sums, [0.5, 0.6])


def test_single_sample_class_has_no_spread():
    st_ = estimate_moments(SumSamples((np.zeros((3, 2)) + [[0], [1], [2]], np.ones((1, 2)))))
    assert np.all(np.isnan(st_.sigma[1]))
    assert not st_.has_cov(1)
    assert st_.has_cov(0)


def _stats_from_covs(covs):
    rng = np.random.default_rng(0)
    parts = [rng.multivariate_normal(np.zeros(len(c)), c, size=200_000) for c in covs]
    return estimate_moments(SumSamples(tuple(parts)))


def test_avg_correlation_examples():
    from perceptor.stats import MomentStats
    cov = np.array([[[1, 0.5], [0.5, 1]]])
    ms = MomentStats(np.zeros((1, 2)), np.ones((1, 2)), cov, [1.0], [10])
    assert avg_correlation(ms) == pytest.approx(0.5)
    diag = MomentStats(np.zeros((1, 3)), np.ones((1, 3)), np.eye(3)[None] * 2, [1.0], [10])
    assert avg_correlation(diag) == pytest.approx(0.0)


def test_avg_correlation_double_loop():
    from perceptor.stats import MomentStats
    rng = np.random.default_rng(3)
    covs = []
    for _ in range(2):
        a = rng.normal(size=(4, 4))
        covs.append(a @ a.T + 0.1 * np.eye(4))
    covs = np.array(covs)
    ms = MomentStats(np.zeros((2, 4)), np.sqrt(np.diagonal(covs, axis1=1, axis2=2)), covs,
                     [0.5, 0.5], [10, 10])
    total, count = 0.0, 0
    for c in covs:
        for j in range(4):
            for k in range(4):
                if j != k:
                    total += c[j, k] / np.sqrt(c[j, j] * c[k, k])
                    count += 1
    assert avg_correlation(ms) == pytest.approx(total / count, abs=1e-12)


def test_regularize_psd_adds_jitter_to_singular():
    cov = np.array([[1.0, 1.0], [1.0, 1.0]])
    reg, eps = regularize_psd(cov)
    assert eps == pytest.approx(1e-10)
    np.linalg.cholesky(reg)
    reg2, eps2 = regularize_psd(np.eye(2))
    assert eps2 == 0 and np.array_equal(reg2, np.eye(2))


def test_ridge_identity_and_shrinkage():
    np.testing.assert_allclose(fit_ridge(np.eye(5), np.eye(5), 0.0), np.eye(5), atol=1e-12)
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, size=(50, 5))
    y = one_hot(rng.integers(0, 3, 50), 3)
    assert np.linalg.norm(fit_ridge(x, y, 1e12)) < 1e-6


def test_ridge_is_a_local_minimum():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(40, 6))
    y = one_hot(rng.integers(0, 3, 40), 3)
    lam = 0.3
    w = fit_ridge(x, y, lam)

    def loss(w_):
        return np.sum((x @ w_.T - y) ** 2) + lam * np.sum(w_ ** 2)

    base = loss(w)
    for _ in range(20):
        assert loss(w + 1e-4 * rng.normal(size=w.shape)) >= base


def test_ridge_singular_raises():
    with pytest.raises(NumericalError):
        fit_ridge(np.zeros((4, 3)), np.ones((4, 2)), 0.0)


@pytest.mark.parametrize("bad", [
    dict(vectors=np.ones(3), labels=[0, 0, 0], n_classes=1),
    dict(vectors=np.ones((3, 2)), labels=[0, 1], n_classes=2),
    dict(vectors=np.ones((2, 2)), labels=[0, 2], n_classes=2),
    dict(vectors=np.array([[np.nan, 1.0]]), labels=[0], n_classes=1),
])
def test_activation_validation(bad):
    with pytest.raises(InputError):
        ActivationSet(**bad)


def test_readout_validation():
    with pytest.raises(InputError):
        ReadoutPerceptron(np.ones((1, 3)))
    with pytest.raises(InputError):
        ReadoutPerceptron(np.zeros((2, 3)), similarity="cosine")
    with pytest.raises(InputError):
        ReadoutPerceptron(np.ones((2, 3)), bias=np.ones(3))


finite = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(arrays(float, (6, 4), elements=finite), arrays(float, (3, 4), elements=finite),
       st.floats(0.1, 10))
def test_dot_linear_cosine_scale_free(x, w, alpha):
    dot = ReadoutPerceptron(w)
    np.testing.assert_allclose(dot.sums(alpha * x), alpha * dot.sums(x), rtol=1e-9, atol=1e-9)
    if np.all(np.linalg.norm(w, axis=1) > 1e-3) and np.all(np.linalg.norm(x, axis=1) > 1e-3):
        cos = ReadoutPerceptron(w, similarity="cosine")
        np.testing.assert_allclose(cos.sums(alpha * x), cos.sums(x), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(arrays(float, (8, 3), elements=finite), st.randoms())
def test_moments_permutation_invariant_and_psd(rows, rnd):
    other = np.arange(6.0).reshape(2, 3)
    a = estimate_moments(SumSamples((rows, other)))
    perm = list(range(8))
    rnd.shuffle(perm)
    b = estimate_moments(SumSamples((rows[perm], other)))
    np.testing.assert_allclose(a.mu, b.mu, atol=1e-12)
    np.testing.assert_allclose(a.sigma, b.sigma, atol=1e-9)
    for i in range(2):
        assert np.linalg.eigvalsh(a.cov[i]).min() >= -1e-9
        raw = a.cov[i] - a.jitter[i] * np.eye(3)
        np.testing.assert_allclose(np.diag(raw), a.sigma[i] ** 2, rtol=1e-9, atol=1e-12)
