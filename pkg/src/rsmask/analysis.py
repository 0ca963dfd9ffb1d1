"""Statistical attack engine: SEI, key rankings, exact mutual information.

Key ranking conventions
-----------------------
SEI is invariant under any fixed permutation of the scored variable, in
particular under XOR with an unknown constant.  Two consequences shape the
rankings here:

* Reconstructing a round-9 value through InvMixColumns leaves an unknown
  XOR constant from round key 9; it can be ignored.
* A pure single-byte inversion of the final round maps every key guess to
  a fixed permutation of the same variable, so all 256 guesses tie exactly
  and carry no signal.  ``last_round_values`` is provided for completeness
  and for the no-signal sanity tests; real campaigns fault round 9 and
  rank through the column reconstruction (``round9_values``), guessing one
  byte of K10 with the other three bytes of the column treated as known
  evaluation inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .gf import INV_SBOX, MUL9, MUL11, MUL13, MUL14, SBOX


class AnalysisError(ValueError):
    pass


@dataclass
class Histogram256:
    """Counts of an 8-bit variable."""

    counts: np.ndarray
    n: int

    @classmethod
    def from_values(cls, values) -> "Histogram256":
        values = np.asarray(values)
        counts = np.bincount(values.ravel(), minlength=256).astype(np.int64)
        return cls(counts=counts, n=int(counts.sum()))


@dataclass
class SeiResult:
    sei: float
    n: int


def sei(h: Histogram256) -> SeiResult:
    """Square Euclidean Imbalance of a 256-bin histogram."""
    if h.n <= 0:
        raise AnalysisError("empty histogram")
    p = h.counts / h.n
    return SeiResult(sei=float(np.sum((p - 1.0 / 256.0) ** 2)), n=h.n)


def sei_of_values(values) -> float:
    return sei(Histogram256.from_values(values)).sei


def sei_uniform_envelope(n: int, factor: float = 5.0) -> float:
    """High-probability bound on the empirical SEI of a uniform sampler."""
    return factor * 255.0 / (256.0 * n)


def chi2_uniform_pvalue(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    return float(stats.chisquare(counts).pvalue)


@dataclass
class KeyRanking:
    """Per-candidate SEI scores with a deterministic ranking."""

    scores: np.ndarray  # (256,)
    true_key: int | None = None

    @property
    def order(self) -> np.ndarray:
        # descending score, ties broken by lower key value
        return np.lexsort((np.arange(256), -self.scores))

    def rank_of(self, key: int | None = None) -> int:
        key = self.true_key if key is None else key
        if key is None:
            raise AnalysisError("no key to rank")
        return int(np.nonzero(self.order == key)[0][0]) + 1

    def best(self) -> int:
        return int(self.order[0])

    def max_wrong_sei(self, key: int | None = None) -> float:
        key = self.true_key if key is None else key
        mask = np.ones(256, dtype=bool)
        mask[key] = False
        return float(self.scores[mask].max())


def rank_keys(values_by_key, true_key=None, min_samples: int = 16) -> KeyRanking:
    """Score 256 candidates by the SEI of their reconstructed values."""
    scores = np.empty(256, dtype=np.float64)
    for k in range(256):
        vals = values_by_key(k) if callable(values_by_key) else values_by_key[k]
        vals = np.asarray(vals)
        if vals.size < min_samples:
            raise AnalysisError(
                f"{vals.size} samples < required minimum {min_samples}"
            )
        scores[k] = sei_of_values(vals)
    return KeyRanking(scores=scores, true_key=true_key)


# ---------------------------------------------------------------------------
# reconstructions


def last_round_values(ct_bytes):
    """values_by_key for the literal single-byte final-round inversion."""
    ct_bytes = np.asarray(ct_bytes, dtype=np.uint8)

    def values(k):
        return INV_SBOX[ct_bytes ^ np.uint8(k)]

    return values


def sifa_rank(ct_bytes, true_key=None, min_samples: int = 16) -> KeyRanking:
    """SEI ranking of InvSbox(c ^ k) on one ciphertext byte position.

    All 256 candidates are exact permutations of each other under this
    reconstruction, so the scores tie; see the module docstring.
    """
    return rank_keys(last_round_values(ct_bytes), true_key, min_samples)


def round9_values(cts, k10, fault_byte: int):
    """values_by_key reconstructing the round-9 S-box output of one byte.

    ``cts`` is a (16, N) ciphertext array, ``k10`` the last round key.  The
    faulted byte's post-ShiftRows position fixes the MixColumns column; the
    guess varies the K10 byte aligned with that position while the other
    three bytes of the column stay at their true values.  The reconstruction
    equals the round-9 S-box output XOR an unknown round-9 constant.
    """
    from .aes import INV_SHIFT_ROWS

    cts = np.asarray(cts, dtype=np.uint8)
    k10 = np.asarray(k10, dtype=np.uint8)
    p2 = int(INV_SHIFT_ROWS[fault_byte])
    col, row = p2 // 4, p2 % 4
    positions = [4 * col + ((row + i) % 4) for i in range(4)]  # row-th InvMC row order
    ct_pos = [int(INV_SHIFT_ROWS[j]) for j in positions]
    coefs = (MUL14, MUL11, MUL13, MUL9)
    fixed = [INV_SBOX[cts[q] ^ k10[q]] for q in ct_pos]
    rest = coefs[1][fixed[1]] ^ coefs[2][fixed[2]] ^ coefs[3][fixed[3]]
    guess_ct = cts[ct_pos[0]]

    def values(k):
        return coefs[0][INV_SBOX[guess_ct ^ np.uint8(k)]] ^ rest

    return values, int(k10[ct_pos[0]])


def sifa_rank_round9(cts, k10, fault_byte: int, min_samples: int = 16) -> KeyRanking:
    values, true_guess = round9_values(cts, k10, fault_byte)
    return rank_keys(values, true_key=true_guess, min_samples=min_samples)


def differential_values(ct_correct, ct_faulty):
    c = np.asarray(ct_correct, dtype=np.uint8)
    cf = np.asarray(ct_faulty, dtype=np.uint8)

    def values(k):
        return INV_SBOX[c ^ np.uint8(k)] ^ INV_SBOX[cf ^ np.uint8(k)]

    return values


def differential_rank(ct_correct, ct_faulty, true_key=None, min_pairs: int = 16) -> KeyRanking:
    """SEI ranking of InvSbox(c^k) ^ InvSbox(c*^k) on effective-fault pairs."""
    c = np.asarray(ct_correct)
    if c.size < min_pairs:
        raise AnalysisError(f"{c.size} pairs < required minimum {min_pairs}")
    return rank_keys(differential_values(ct_correct, ct_faulty), true_key, min_pairs)


# ---------------------------------------------------------------------------
# exact information-theoretic checks


def mutual_information_exact(joint) -> float:
    """Shannon mutual information in bits of a 256x256 probability table."""
    joint = np.asarray(joint, dtype=np.float64)
    if joint.shape != (256, 256):
        raise AnalysisError("joint table must be 256x256")
    if np.any(joint < 0):
        raise AnalysisError("negative probability entries")
    total = joint.sum()
    if abs(total - 1.0) > 1e-9:
        raise AnalysisError(f"joint table sums to {total}, not 1")
    px = joint.sum(axis=1, keepdims=True)
    pz = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    ratio = np.where(mask, joint / (px * pz + (px * pz == 0)), 1.0)
    return float(np.sum(joint[mask] * np.log2(ratio[mask])))


def masked_joint(p_x, p_r) -> np.ndarray:
    """Exact joint of (X, Z = X ^ R) for independent X, R."""
    p_x = np.asarray(p_x, dtype=np.float64)
    p_r = np.asarray(p_r, dtype=np.float64)
    xs = np.arange(256)
    return p_x[:, None] * p_r[xs[:, None] ^ xs[None, :]]


def stuck_coupling_delta(k: int, stuck_mask: int = 0xFE) -> np.ndarray:
    """Exact pmf of InvS(S(w)^k) ^ InvS(S(w*)^k) under a stuck-at-0 fault.

    w* clears the bits outside ``stuck_mask``; pairs are conditioned on the
    fault being effective (w* != w), the corpus a differential attacker
    actually collects.  At k=0 the difference is the constant cleared bit.
    """
    w = np.arange(256, dtype=np.uint8)
    wf = w & np.uint8(stuck_mask)
    keep = wf != w
    y1 = SBOX[w[keep]]
    y2 = SBOX[wf[keep]]
    delta = INV_SBOX[y1 ^ np.uint8(k)] ^ INV_SBOX[y2 ^ np.uint8(k)]
    return np.bincount(delta, minlength=256) / float(keep.sum())


@dataclass
class TheoremReport:
    mi_uniform_mask: float
    mi_biased_masks: list
    delta_sei_true: float
    delta_sei_wrong_max: float
    mi_pair_uniform_delta: float
    mi_pair_biased_delta: float

    def passed(self, mi_zero_tol: float = 1e-12, mi_bias_floor: float = 1e-3,
               delta_ratio: float = 10.0) -> bool:
        return (
            self.mi_uniform_mask < mi_zero_tol
            and all(m >= mi_bias_floor for m in self.mi_biased_masks)
            and self.delta_sei_true > delta_ratio * self.delta_sei_wrong_max
            and self.mi_pair_uniform_delta < mi_zero_tol
            and self.mi_pair_biased_delta >= mi_bias_floor
        )

    def to_json(self) -> dict:
        return {
            "mi_uniform_mask_bits": self.mi_uniform_mask,
            "mi_biased_masks_bits": self.mi_biased_masks,
            "delta_sei_true_key": self.delta_sei_true,
            "delta_sei_wrong_max": self.delta_sei_wrong_max,
            "mi_pair_uniform_delta_bits": self.mi_pair_uniform_delta,
            "mi_pair_biased_delta_bits": self.mi_pair_biased_delta,
        }


def theorem_checks() -> TheoremReport:
    """Exact-distribution verification of the masking and key-separation claims.

    (a) MI(X ^ R; X) for uniform X: zero iff R uniform; three biased mask
        distributions must show measurable information.
    (b) The stuck-at coupling through the inverse S-box: the difference
        distribution is massively biased at the true key and stays within a
        small SEI envelope for all 255 wrong keys (exact pmfs, no sampling).
    (c) The pair form: MI(X1; X1 ^ D) is zero for a uniform independent
        difference and positive for the biased difference of (b).
    """
    uniform = np.full(256, 1.0 / 256.0)
    mi_u = mutual_information_exact(masked_joint(uniform, uniform))

    biased = []
    const0 = np.zeros(256)
    const0[0] = 1.0
    biased.append(const0)
    half = np.zeros(256)
    half[np.arange(256) & 1 == 0] = 1.0 / 128.0
    biased.append(half)
    tilt = np.full(256, 0.5 / 255.0)
    tilt[0] = 0.5
    biased.append(tilt)
    mi_b = [mutual_information_exact(masked_joint(uniform, p)) for p in biased]

    seis = np.array(
        [float(np.sum((stuck_coupling_delta(k) - 1 / 256.0) ** 2)) for k in range(256)]
    )
    delta_true = float(seis[0])
    delta_wrong = float(seis[1:].max())

    delta_biased = stuck_coupling_delta(0)
    mi_pair_uniform = mutual_information_exact(masked_joint(uniform, uniform))
    mi_pair_biased = mutual_information_exact(masked_joint(uniform, delta_biased))

    return TheoremReport(
        mi_uniform_mask=mi_u,
        mi_biased_masks=mi_b,
        delta_sei_true=delta_true,
        delta_sei_wrong_max=delta_wrong,
        mi_pair_uniform_delta=mi_pair_uniform,
        mi_pair_biased_delta=mi_pair_biased,
    )
