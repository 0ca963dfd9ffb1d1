"""Share splitting, remasking and the 3-share multipliers."""

import numpy as np
import pytest
from scipy import stats

from rsmask import gf
from rsmask.masking import (
    combine,
    masked_gf16_mul,
    masked_mul_single_share,
    noncompleteness_index_sets,
    remask,
    reshare_2to3,
    split,
    zero_sum,
)
from rsmask.nodes import Tap
from rsmask.rng import MASKS, Rng


class ZeroFeed:
    """All-zero randomness, for degenerate-path checks."""

    def bytes(self, shape):
        return np.zeros(shape, dtype=np.uint8)

    nibbles = bytes
    bits = bytes


def test_split_combine_round_trip():
    rng = np.random.default_rng(0)
    for d in (1, 2, 3):
        x = rng.integers(0, 256, 1000, dtype=np.uint8)
        shares = split(x, d, rng)
        assert len(shares) == d + 1
        assert np.array_equal(combine(shares), x)


def test_split_with_zero_masks_is_trivial():
    class ZeroGen:
        def integers(self, *a, **k):
            return np.zeros(k.get("size", a[-1]), dtype=np.uint8)

    shares = split(np.uint8(0xAB), 2, ZeroGen())
    assert shares[0] == 0 and shares[1] == 0 and shares[2] == 0xAB


def test_split_rejects_order_zero():
    with pytest.raises(ValueError):
        split(np.uint8(1), 0, np.random.default_rng(0))


def test_two_of_three_shares_jointly_uniform():
    # joint distribution of two shares of a fixed secret, 10^6 draws
    rng = np.random.default_rng(7)
    x = np.full(1_000_000, 0x5A, dtype=np.uint8)
    s = split(x, 2, rng)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        joint = s[i].astype(np.uint32) * 256 + s[j]
        counts = np.bincount(joint, minlength=65536)
        assert stats.chisquare(counts).pvalue > 0.001


def test_remask_preserves_combine_and_refreshes():
    feed = Rng(3).spawn(MASKS)
    rng = np.random.default_rng(1)
    x = rng.integers(0, 256, 5000, dtype=np.uint8)
    shares = split(x, 2, rng)
    fresh = remask(shares, feed)
    assert np.array_equal(combine(fresh), x)
    assert any(not np.array_equal(a, b) for a, b in zip(shares, fresh))


def test_remask_with_zero_randomness_is_identity():
    shares = [np.uint8(1), np.uint8(2), np.uint8(3)]
    out = remask(shares, ZeroFeed())
    assert [int(v) for v in out] == [1, 2, 3]


def test_remask_share_marginals_uniform():
    feed = Rng(9).spawn(MASKS)
    x = np.zeros(1_000_000, dtype=np.uint8)
    shares = remask([x, x, x], feed)
    for s in shares[:2]:
        assert stats.chisquare(np.bincount(s, minlength=256)).pvalue > 0.001


def test_zero_sum_is_zero_sum():
    feed = Rng(5).spawn(MASKS)
    for width in (1, 4, 8):
        zs = zero_sum(3, (2000,), feed, width=width)
        assert not np.any(zs[0] ^ zs[1] ^ zs[2])


def test_masked_gf16_mul_matches_table():
    feed = Rng(11).spawn(MASKS)
    rng = np.random.default_rng(11)
    n = 10_000
    a = rng.integers(0, 16, n, dtype=np.uint8)
    b = rng.integers(0, 16, n, dtype=np.uint8)
    a_sh = [v & 0xF for v in split(a, 2, rng)]
    b_sh = [v & 0xF for v in split(b, 2, rng)]
    out = masked_gf16_mul(a_sh, b_sh, feed, Tap(), "m", 1)
    assert np.array_equal(combine(out), gf.G16_MUL[a, b])


def test_masked_gf16_mul_zero_and_unity():
    feed = Rng(13).spawn(MASKS)
    rng = np.random.default_rng(13)
    b = rng.integers(0, 16, 4096, dtype=np.uint8)
    b_sh = [v & 0xF for v in split(b, 2, rng)]
    zero_sh = [v & 0xF for v in split(np.zeros_like(b), 2, rng)]
    unity_sh = [v & 0xF for v in split(np.full_like(b, gf.UNITY16), 2, rng)]
    assert not np.any(combine(masked_gf16_mul(zero_sh, b_sh, feed, Tap(), "m", 1)))
    assert np.array_equal(
        combine(masked_gf16_mul(unity_sh, b_sh, feed, Tap(), "m", 1)), b
    )


def test_masked_mul_single_share():
    rng = np.random.default_rng(17)
    a = rng.integers(0, 16, 4096, dtype=np.uint8)
    a_sh = [v & 0xF for v in split(a, 2, rng)]
    assert not np.any(combine(masked_mul_single_share(a_sh, np.uint8(0), Tap(), "m", 1)))
    assert np.array_equal(
        combine(masked_mul_single_share(a_sh, np.uint8(gf.UNITY16), Tap(), "m", 1)), a
    )
    r = rng.integers(0, 16, 4096, dtype=np.uint8)
    out = masked_mul_single_share(a_sh, r, Tap(), "m", 1)
    assert np.array_equal(combine(out), gf.G16_MUL[a, r])


def test_reshare_2to3_uniform_and_correct():
    feed = Rng(23).spawn(MASKS)
    x = np.full(200_000, 0x3C, dtype=np.uint8)
    m = feed.bytes(x.shape)
    three = reshare_2to3([x ^ m, m], feed)
    assert np.array_equal(combine(three), x)
    for s in three:
        assert stats.chisquare(np.bincount(s, minlength=256)).pvalue > 0.001


def test_noncompleteness_static():
    for i, (a_idx, b_idx) in enumerate(noncompleteness_index_sets()):
        assert i not in a_idx
        assert i not in b_idx
        assert len(a_idx) <= 2 and len(b_idx) <= 2


def test_masked_mul_deterministic_under_seed():
    rng = np.random.default_rng(2)
    a_sh = [rng.integers(0, 16, 64, dtype=np.uint8) for _ in range(3)]
    b_sh = [rng.integers(0, 16, 64, dtype=np.uint8) for _ in range(3)]
    o1 = masked_gf16_mul(a_sh, b_sh, Rng(4).spawn(MASKS), Tap(), "m", 1)
    o2 = masked_gf16_mul(a_sh, b_sh, Rng(4).spawn(MASKS), Tap(), "m", 1)
    assert all(np.array_equal(x, y) for x, y in zip(o1, o2))
