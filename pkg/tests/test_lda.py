import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import BruteLDA
from wavespec import ArgumentError, EstimationError, fit_lda, log_likelihood, log_likelihoods, posterior


def blobs(rng, n_c, n_e, p, sep=3.0):
    centres = rng.standard_normal((n_c, p)) * sep
    X = np.concatenate([c + rng.standard_normal((n_e, p)) for c in centres])
    y = np.repeat(np.arange(n_c), n_e)
    return X, y


def test_two_class_direction():
    rng = np.random.default_rng(0)
    X = np.concatenate([rng.standard_normal((200, 2)), rng.standard_normal((200, 2)) + [10, 0]])
    y = np.repeat([0, 1], 200)
    m = fit_lda(X, y)
    v = m.vectors[:, 0] / np.linalg.norm(m.vectors[:, 0])
    assert abs(abs(v[0]) - 1) < 0.02
    assert m.n_vectors == 1


def test_identical_means_ratio_zero():
    rng = np.random.default_rng(1)
    base = rng.standard_normal((10, 3))
    base -= base.mean(axis=0)
    X = np.concatenate([base, base, base])
    y = np.repeat([0, 1, 2], 10)
    assert np.all(fit_lda(X, y).ratios < 1e-10)


def test_vectors_normalized_and_ordered():
    rng = np.random.default_rng(2)
    X, y = blobs(rng, 4, 15, 5)
    m = fit_lda(X, y)
    assert m.n_vectors == 3
    assert np.all(np.diff(m.ratios) <= 1e-12)
    np.testing.assert_allclose(m.within_cov, np.eye(3), atol=1e-10)
    big = np.argmax(np.abs(m.vectors), axis=0)
    assert np.all(m.vectors[big, np.arange(3)] > 0)


def test_projected_statistics_against_direct():
    rng = np.random.default_rng(3)
    X, y = blobs(rng, 4, 12, 6)
    m = fit_lda(X, y)
    Z = X @ m.vectors
    for n in (1, 2, 3):
        means = np.array([Z[y == c, :n].mean(axis=0) for c in range(4)])
        W = sum(np.outer(r - means[c], r - means[c]) for r, c in zip(Z[:, :n], y)) / (len(y) - 4)
        np.testing.assert_allclose(m.means[:, :n], means, atol=1e-8)
        np.testing.assert_allclose(m.within_cov[:n, :n], W, atol=1e-8)


def test_density_at_mean_1d():
    rng = np.random.default_rng(4)
    X, y = blobs(rng, 2, 20, 3)
    m = fit_lda(X, y)
    x = X[y == 0].mean(axis=0)
    s2 = m.within_cov[0, 0]
    assert log_likelihood(m, x, 0, 1) == pytest.approx(-0.5 * np.log(2 * np.pi * s2), abs=1e-10)


def test_translation_invariance():
    rng = np.random.default_rng(5)
    X, y = blobs(rng, 3, 10, 4)
    x = rng.standard_normal(4)
    shift = rng.standard_normal(4) * 5
    a = log_likelihoods(fit_lda(X, y), x, 2)
    b = log_likelihoods(fit_lda(X + shift, y), x + shift, 2)
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_posterior_examples():
    rng = np.random.default_rng(6)
    X = np.concatenate([rng.standard_normal((30, 2)) + [k * 50.0, 0] for k in range(3)])
    y = np.repeat([0, 1, 2], 30)
    m = fit_lda(X, y)
    assert posterior(m, X[y == 0].mean(axis=0), 2)[0] > 0.999
    # midpoint between two mirrored classes
    base = rng.standard_normal((20, 2))
    base -= base.mean(axis=0)
    X2 = np.concatenate([base + [-3, 0], -base + [3, 0]])
    m2 = fit_lda(X2, np.repeat([0, 1], 20))
    np.testing.assert_allclose(posterior(m2, np.zeros(2), 1), [0.5, 0.5], atol=1e-10)
    P = posterior(m, X[:5], 2)
    assert P.shape == (5, 3)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)


def test_posterior_overflow_safe():
    rng = np.random.default_rng(7)
    X, y = blobs(rng, 3, 10, 2)
    p = posterior(fit_lda(X, y), np.array([1e6, -1e6]), 2)
    assert np.all(np.isfinite(p)) and p.sum() == pytest.approx(1.0)


def test_errors():
    rng = np.random.default_rng(8)
    X, y = blobs(rng, 3, 5, 2)
    with pytest.raises(EstimationError):
        fit_lda(X, np.zeros(len(X)))
    with pytest.raises(EstimationError):
        fit_lda(X[:3], np.array([0, 1, 2]))
    with pytest.raises(ArgumentError):
        log_likelihoods(fit_lda(X, y), X[0], 3)
    with pytest.raises(ArgumentError):
        fit_lda(X, y[:-1])


def test_rank_deficient_within_scatter():
    # rows summing to zero, like standardized spectra: S_W loses one rank
    rng = np.random.default_rng(9)
    X, y = blobs(rng, 5, 10, 6)
    X = X - X.mean(axis=1, keepdims=True)
    m = fit_lda(X, y)
    assert m.n_vectors == 4
    assert np.all(np.isfinite(m.vectors)) and np.abs(m.vectors).max() < 1e3
    assert np.all(np.linalg.eigvalsh(m.within_cov) > 0.5)


def test_leave_class_out_fit():
    rng = np.random.default_rng(10)
    X, y = blobs(rng, 4, 10, 4)
    m = fit_lda(X, y, fit_classes=[0, 1, 2])
    brute = BruteLDA(X, y, fit_classes=[0, 1, 2])
    assert m.n_vectors == 2 and m.means.shape == (4, 2)
    for x in X[::7]:
        np.testing.assert_allclose(log_likelihoods(m, x, 2)[0], brute.loglik(x, 2), atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    p=st.integers(1, 3),
    n_c=st.integers(2, 3),
    n_e=st.integers(2, 4),
)
def test_oracle_equivalence(seed, p, n_c, n_e):
    assume(n_c * (n_e - 1) > p)
    rng = np.random.default_rng(seed)
    X, y = blobs(rng, n_c, n_e, p, sep=1.0)
    m = fit_lda(X, y)
    brute = BruteLDA(X, y)
    x = rng.standard_normal(p)
    for n in range(1, m.n_vectors + 1):
        np.testing.assert_allclose(log_likelihoods(m, x, n)[0], brute.loglik(x, n), atol=1e-8, rtol=1e-10)
        np.testing.assert_allclose(posterior(m, x, n), brute.posterior(x, n), atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_affine_equivariance(seed):
    rng = np.random.default_rng(seed)
    X, y = blobs(rng, 3, 8, 3)
    A = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    assume(abs(np.linalg.det(A)) > 0.5)
    b = rng.standard_normal(3)
    T = rng.standard_normal((4, 3))
    p0 = posterior(fit_lda(X, y), T, 2)
    p1 = posterior(fit_lda(X @ A.T + b, y), T @ A.T + b, 2)
    np.testing.assert_allclose(p0, p1, atol=1e-8)
    assert np.array_equal(p0.argmax(axis=1), p1.argmax(axis=1))
