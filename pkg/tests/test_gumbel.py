import numpy as np
import pytest

from icfmdp import (Assumptions, Mdp, ObservedPath, build_gumbel_cfmdp, gumbel_cf_probs,
                    gumbel_posterior_sample, transition_row_bounds)
from helpers import make_random_mdp, random_observed, random_path


def test_posterior_argmax_consistency(rng):
    for trial in range(200):
        n = int(rng.integers(2, 6))
        row = rng.dirichlet(np.ones(n))
        if trial % 2:  # rows with zero-probability outcomes
            row[rng.integers(n)] = 0.0
            row = row / row.sum()
        observed = int(rng.choice(n, p=row))
        sample = gumbel_posterior_sample(row, observed, seed=trial)
        scores = np.where(row > 0, np.log(np.where(row > 0, row, 1.0)) + sample.noise, -np.inf)
        assert int(np.argmax(scores)) == observed


def test_posterior_rejects_zero_probability_outcome():
    with pytest.raises(ValueError):
        gumbel_posterior_sample(np.array([0.5, 0.5, 0.0]), 2, seed=0)


def test_deterministic_row_replays_observed():
    row = np.array([0.0, 1.0, 0.0])
    probs = gumbel_cf_probs(Mdp(3, 1, np.tile(row, (3, 1, 1)), np.zeros((3, 1)),
                                np.array([1.0, 0, 0])),
                            (0, 0, 1), (1, 0), num_samples=500, seed=1)
    assert np.array_equal(probs, row)


def test_uniform_row_replay_is_exact(rng):
    row = np.full(3, 1.0 / 3.0)
    hits = 0
    n = 2000
    for i in range(n):
        sample = gumbel_posterior_sample(row, 1, seed=i)
        hits += int(np.argmax(np.log(row) + sample.noise) == 1)
    assert hits == n


def test_toy_counterfactual_probabilities(toy, toy_obs):
    probs = gumbel_cf_probs(toy, toy_obs, (1, 0), num_samples=100_000, seed=11)
    assert probs[0] == pytest.approx(0.35, abs=0.02)
    assert probs[1] == 0.0
    assert probs[2] == pytest.approx(0.65, abs=0.02)
    assert probs.sum() == 1.0


def test_observed_pair_is_exact_delta_for_any_sample_count(toy, toy_obs):
    for n in (1, 3, 50):
        probs = gumbel_cf_probs(toy, toy_obs, (0, 0), num_samples=n, seed=5)
        assert np.array_equal(probs, [0.0, 1.0, 0.0])


def test_identical_row_gives_delta(rng):
    # a different pair whose row equals the observed row preserves the argmax
    t = np.zeros((2, 2, 2))
    t[0, 0] = [0.3, 0.7]
    t[0, 1] = [0.3, 0.7]
    t[1, :] = [0.5, 0.5]
    m = Mdp(2, 2, t, np.zeros((2, 2)), np.array([1.0, 0.0]))
    probs = gumbel_cf_probs(m, (0, 0, 1), (0, 1), num_samples=400, seed=2)
    assert np.array_equal(probs, [0.0, 1.0])


def test_estimates_lie_inside_stability_bounds(rng):
    # Gumbel-max satisfies counterfactual stability, so its probabilities must fall
    # inside the stability-only intervals up to Monte-Carlo slack.
    n_samples = 4000
    for trial in range(8):
        m = make_random_mdp(rng, int(rng.integers(2, 5)), int(rng.integers(1, 3)),
                            sparse=bool(trial % 2))
        obs = random_observed(m, rng)
        for s in range(m.num_states):
            for a in range(m.num_actions):
                probs = gumbel_cf_probs(m, obs, (s, a), n_samples, seed=trial)
                lb, ub = transition_row_bounds(m, obs, (s, a), Assumptions.CS)
                slack = 3.0 * np.sqrt(probs * (1.0 - probs) / n_samples)
                assert np.all(probs >= lb - slack - 1e-12)
                assert np.all(probs <= ub + slack + 1e-12)


def test_build_gumbel_cfmdp_deterministic_mdp():
    t = np.zeros((2, 1, 2))
    t[0, 0, 1] = t[1, 0, 0] = 1.0
    m = Mdp(2, 1, t, np.zeros((2, 1)), np.array([1.0, 0.0]))
    path = ObservedPath((0, 1, 0), (0, 0))
    cf = build_gumbel_cfmdp(m, path, num_samples=50, seed=0)
    assert np.array_equal(cf.transition, np.broadcast_to(t, cf.transition.shape))


def test_build_gumbel_cfmdp_seeded_and_stochastic(toy, rng):
    path = random_path(toy, rng, 3)
    a = build_gumbel_cfmdp(toy, path, num_samples=300, seed=7)
    b = build_gumbel_cfmdp(toy, path, num_samples=300, seed=7)
    c = build_gumbel_cfmdp(toy, path, num_samples=300, seed=8)
    assert np.array_equal(a.transition, b.transition)
    assert not np.array_equal(a.transition, c.transition)
    assert np.abs(a.transition.sum(axis=3) - 1.0).max() == 0.0


def test_sample_count_validated(toy, toy_obs):
    with pytest.raises(ValueError):
        gumbel_cf_probs(toy, toy_obs, (1, 0), num_samples=0, seed=0)
