import inspect

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import BruteLDA, brute_cross_validation
from wavespec import (
    ArgumentError,
    ClassedDataset,
    DegenerateInputError,
    ValidationError,
    attribution,
    cross_validate,
    scores,
)
from wavespec.verify import holdout_indices, max_nvec

HAND_LL = np.array([[-1.0, -5.0], [-5.0, -1.0]])  # [i, k] = log p(m_k | C_i)
HAND_OBS = np.array([-2.0, -2.0])


def test_hand_scores():
    s = scores(HAND_LL, HAND_OBS)
    assert s.s_ref == -5.0 and s.s_perf.tolist() == [-1.0] and s.s_obs == -2.0
    assert s.skill_perf.tolist() == [0.8]
    assert s.skill_obs == 0.6


def test_equal_table_zero_skill():
    s = scores(np.full((3, 4, 4), -2.5), np.full((3, 4), -2.5))
    assert np.all(s.skill_perf == 0) and s.skill_obs == 0


def test_zero_reference_score():
    with pytest.raises(DegenerateInputError):
        scores(np.zeros((2, 2)), HAND_OBS)


def test_obs_table_forms_agree():
    rng = np.random.default_rng(0)
    lm = -rng.random((4, 3, 3))
    lo = -rng.random((4, 3, 3))
    a = scores(lm, lo)
    b = scores(lm, lo[:, np.arange(3), np.arange(3)])
    assert a.s_obs == b.s_obs


def dataset(rng, n_c, n_e, p, sep=3.0, spread=1.0):
    centres = rng.standard_normal((n_c, p)) * sep
    members = centres[:, None, :] + spread * rng.standard_normal((n_c, n_e, p))
    obs = centres + spread * rng.standard_normal((n_c, p))
    return ClassedDataset(members=members, observations=obs)


def test_dataset_validation():
    with pytest.raises(ValidationError):
        ClassedDataset(np.zeros((1, 3, 2)), np.zeros((1, 2)))
    with pytest.raises(ValidationError):
        ClassedDataset(np.zeros((2, 3, 2)), np.zeros((2, 3)))
    with pytest.raises(ValidationError):
        ClassedDataset(np.full((2, 3, 2), np.inf), np.zeros((2, 2)))
    rng = np.random.default_rng(0)
    with pytest.raises(ValidationError):
        cross_validate(dataset(rng, 3, 2, 2), n_samples=2)


def test_default_samples():
    assert inspect.signature(cross_validate).parameters["n_samples"].default == 50
    assert inspect.signature(attribution).parameters["n_samples"].default == 50


def test_small_instance_end_to_end():
    members = np.array(
        [
            [[0.0, 0.0], [1.0, 0.5], [0.3, -1.0]],
            [[4.0, 1.0], [5.0, 2.5], [3.5, 1.5]],
        ]
    )
    obs = np.array([[0.5, 0.0], [4.2, 1.8]])
    data = ClassedDataset(members=members, observations=obs)
    rep = cross_validate(data, n_samples=1, nvecs=[1], seed=11)
    held = rep.holdout
    llm, llo, s_ref, s_perf, s_obs = brute_cross_validation(members, obs, held, 1)
    np.testing.assert_allclose(rep.loglik_members[:, 0], llm, atol=1e-10)
    np.testing.assert_allclose(rep.loglik_obs[:, 0, np.arange(2), np.arange(2)], llo, atol=1e-10)
    s = rep.scores[1]
    assert s.s_ref == pytest.approx(s_ref, abs=1e-10)
    assert s.s_perf == pytest.approx(s_perf, abs=1e-10)
    assert s.s_obs == pytest.approx(s_obs, abs=1e-10)


def test_holdouts():
    h = holdout_indices(50, 14, 20, seed=3)
    assert h.shape == (50, 14) and h.min() >= 0 and h.max() < 20
    np.testing.assert_array_equal(h, holdout_indices(50, 14, 20, seed=3))
    assert len({tuple(r) for r in h}) == 50
    # prefix stability: more samples do not change earlier draws
    np.testing.assert_array_equal(holdout_indices(10, 14, 20, seed=3), h[:10])


def test_cross_validate_deterministic():
    rng = np.random.default_rng(1)
    data = dataset(rng, 4, 6, 3)
    a = cross_validate(data, n_samples=5, seed=9)
    b = cross_validate(data, n_samples=5, seed=9)
    np.testing.assert_array_equal(a.loglik_members, b.loglik_members)
    np.testing.assert_array_equal(a.loglik_obs, b.loglik_obs)
    assert a.nvecs == (1, 2, 3)
    P = a.posteriors(1)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-10)
    assert np.all(np.isfinite(a.loglik_members))


def test_nvec_bounds():
    rng = np.random.default_rng(2)
    data = dataset(rng, 3, 5, 4)
    assert max_nvec(data) == 2 and max_nvec(data, leave_class_out=True) == 1
    with pytest.raises(ArgumentError):
        cross_validate(data, n_samples=2, nvecs=[3])
    with pytest.raises(ArgumentError):
        attribution(data, n_samples=2, nvecs=[2], leave_class_out=True)


def test_attribution_normalized_and_consistent():
    rng = np.random.default_rng(3)
    data = dataset(rng, 4, 6, 3, sep=2.0)
    rep = cross_validate(data, n_samples=4, seed=5)
    att = attribution(data, n_samples=4, seed=5)
    for arr in (att.members, att.observations):
        np.testing.assert_allclose(arr.sum(axis=1), 1.0, atol=1e-10)
    # standard attribution posteriors come from the same likelihood tables
    for n in range(len(att.nvecs)):
        np.testing.assert_allclose(rep.posteriors(n).mean(axis=0), att.members[n], atol=1e-12)
        diag = rep.posteriors(n)[:, np.arange(4), np.arange(4)].mean(axis=1)
        np.testing.assert_allclose(att.correct_members[:, n], diag, atol=1e-12)


def test_identical_classes_chance_level():
    rng = np.random.default_rng(4)
    n_c = 4
    members = rng.standard_normal((n_c, 30, 3))
    obs = rng.standard_normal((n_c, 3))
    att = attribution(ClassedDataset(members, obs), n_samples=30, seed=0)
    assert abs(att.mean_correct()[-1] - 1 / n_c) < 0.1


def test_separated_classes():
    rng = np.random.default_rng(5)
    data = dataset(rng, 5, 8, 4, sep=0.0, spread=1.0)
    members = data.members + 15.0 * np.arange(5)[:, None, None] * np.eye(4)[0]
    members[:, :, 1] += 15.0 * (np.arange(5) % 2)[:, None]
    obs = members.mean(axis=1)
    att = attribution(ClassedDataset(members, obs), n_samples=10, seed=1)
    assert np.all(att.mean_correct() > 0.99)


def test_leave_class_out_against_brute():
    rng = np.random.default_rng(6)
    data = dataset(rng, 4, 5, 3, sep=2.0)
    att = attribution(data, n_samples=2, nvecs=[1, 2], seed=7, leave_class_out=True)
    held = holdout_indices(2, 4, 5, 7)
    expect = np.zeros((2, 4, 4))
    for b in range(2):
        keep = np.ones((4, 5), bool)
        keep[np.arange(4), held[b]] = False
        X = data.members[keep]
        y = np.repeat(np.arange(4), 4)
        for k in range(4):
            brute = BruteLDA(X, y, fit_classes=[c for c in range(4) if c != k])
            for n in (1, 2):
                expect[n - 1, :, k] += brute.posterior(data.members[k, held[b][k]], n) / 2
    np.testing.assert_allclose(att.members, expect, atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.integers(1, 3), n_c=st.integers(2, 3), n_e=st.integers(3, 4))
def test_cross_validation_oracle(seed, p, n_c, n_e):
    assume(n_c * (n_e - 2) > p)
    rng = np.random.default_rng(seed)
    data = dataset(rng, n_c, n_e, p, sep=1.5)
    n = min(n_c - 1, p)
    rep = cross_validate(data, n_samples=3, nvecs=[n], seed=seed % 1000)
    llm, llo, s_ref, s_perf, s_obs = brute_cross_validation(data.members, data.observations, rep.holdout, n)
    np.testing.assert_allclose(rep.loglik_members[:, 0], llm, atol=1e-8, rtol=1e-10)
    s = rep.scores[n]
    assert s.s_ref == pytest.approx(s_ref, abs=1e-8, rel=1e-10)
    np.testing.assert_allclose(s.s_perf, s_perf, atol=1e-8, rtol=1e-10)
    assert s.s_obs == pytest.approx(s_obs, abs=1e-8, rel=1e-10)
