"""Welch t-test and the simulated TVLA campaign."""

import numpy as np
import pytest

from rsmask.leakage import GroupStats, TTestReport, tvla_campaign, welch_from_stats, welch_t


def test_identical_sets_give_zero_t():
    a = np.random.default_rng(0).normal(0, 1, (50, 8))
    rep = welch_t(a, a.copy())
    assert np.allclose(rep.t, 0)
    assert not rep.leaky


def test_degenerate_zero_variance_is_flagged():
    a = np.array([[0.0], [0.0]])
    b = np.array([[1.0], [1.0]])
    rep = welch_t(a, b)
    assert rep.degenerate[0]
    assert rep.t[0] == 0.0


def test_requires_two_traces_each():
    with pytest.raises(ValueError):
        welch_t(np.zeros((1, 4)), np.zeros((5, 4)))


def test_same_distribution_stays_under_threshold():
    rng = np.random.default_rng(1)
    a = rng.normal(0, 1, (100_000, 30))
    b = rng.normal(0, 1, (100_000, 30))
    rep = welch_t(a, b)
    assert rep.max_abs_t < 4.5


def test_swapping_sets_negates_t():
    rng = np.random.default_rng(2)
    a = rng.normal(0.0, 1, (500, 6))
    b = rng.normal(0.3, 1, (500, 6))
    r1 = welch_t(a, b)
    r2 = welch_t(b, a)
    assert np.allclose(r1.t, -r2.t)


def test_group_stats_merge_matches_direct():
    rng = np.random.default_rng(3)
    a1 = rng.normal(0, 1, (400, 5))
    a2 = rng.normal(0, 1, (600, 5))
    b = rng.normal(0.1, 1, (1000, 5))
    whole_a = GroupStats(5)
    whole_a.add(np.vstack([a1, a2]))
    merged_a = GroupStats(5)
    part = GroupStats(5)
    merged_a.add(a1)
    part.add(a2)
    merged_a.merge(part)
    gb = GroupStats(5)
    gb.add(b)
    assert np.allclose(
        welch_from_stats(whole_a, gb).t, welch_from_stats(merged_a, gb).t
    )


KEY = bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c")


def test_tvla_unprotected_leaks_and_masked_does_not():
    leaky = tvla_campaign("unprotected", KEY, n_traces=12_000, sigma=1.0, master_seed=5)
    assert leaky.max_abs_t > 4.5
    quiet = tvla_campaign("rsmask", KEY, n_traces=12_000, sigma=1.0, master_seed=5)
    assert quiet.max_abs_t < 4.5
    assert len(quiet.t) == 111  # 10 rounds x (10 sbox stages + linear) + round 0


def test_tvla_huge_noise_hides_everything():
    rep = tvla_campaign("unprotected", KEY, n_traces=4000, sigma=1e6, master_seed=6)
    assert rep.max_abs_t < 4.5


def test_tvla_fixed_vs_random_mode():
    rep = tvla_campaign(
        "unprotected", KEY, n_traces=12_000, sigma=1.0,
        partition="fixed-vs-random", master_seed=7,
    )
    assert rep.max_abs_t > 4.5
    with pytest.raises(ValueError):
        tvla_campaign("unprotected", KEY, 100, partition="nope")


def test_tvla_deterministic():
    a = tvla_campaign("ti", KEY, n_traces=3000, sigma=1.0, master_seed=8)
    b = tvla_campaign("ti", KEY, n_traces=3000, sigma=1.0, master_seed=8)
    assert np.array_equal(a.t, b.t)
