"""Share splitting, remasking, and 3-share threshold multipliers.

The nonlinear primitives follow the classic 3-share product decomposition:
output share i collects exactly the cross terms that involve no share i of
either operand, so every component function misses one share of each input
(first-order non-completeness).  Component outputs are refreshed with a
fresh zero-sum vector before they are registered.

All functions are elementwise over numpy arrays; a "shared" value is a
tuple/list of share arrays of equal shape.
"""

from __future__ import annotations

import numpy as np

from .gf import G4_MUL, G4_SCALE_N, G4_SQ, G16_MUL, UNITY16, hi_nib, lo_nib, nib_pair
from .nodes import Tap

# Term placement of the 3-share multiplier: component i uses operand share
# pairs TERMS[i], none of which mention index i.
TERMS = (
    ((1, 1), (1, 2), (2, 1)),
    ((2, 2), (2, 0), (0, 2)),
    ((0, 0), (0, 1), (1, 0)),
)


def split(x, d: int, rng: np.random.Generator):
    """Split ``x`` into d+1 shares whose XOR is x (d >= 1)."""
    if d < 1:
        raise ValueError("masking order d must be >= 1")
    x = np.asarray(x, dtype=np.uint8)
    shares = [rng.integers(0, 256, size=x.shape, dtype=np.uint8) for _ in range(d)]
    last = x.copy()
    for s in shares:
        last ^= s
    shares.append(last)
    return shares


def combine(shares):
    acc = np.asarray(shares[0]).copy()
    for s in shares[1:]:
        acc = acc ^ s
    return acc


def zero_sum(n_shares: int, shape, feed, width: int = 8):
    """Fresh vector of n_shares values XORing to zero."""
    draws = [feed.bytes(shape) if width == 8 else
             (feed.nibbles(shape) if width == 4 else feed.bits(shape))
             for _ in range(n_shares - 1)]
    last = draws[0].copy()
    for d in draws[1:]:
        last = last ^ d
    return draws + [last]


def remask(shares, feed, width: int = 8):
    """Refresh a sharing with a fresh zero-sum vector; combine is preserved."""
    zs = zero_sum(len(shares), np.shape(shares[0]), feed, width)
    return [s ^ z for s, z in zip(shares, zs)]


def reshare_2to3(two_shares, feed):
    """Expand a 2-share value into a uniform 3-share TI sharing."""
    m0 = feed.bytes(np.shape(two_shares[0]))
    m1 = feed.bytes(np.shape(two_shares[0]))
    return [two_shares[0] ^ m0, two_shares[1] ^ m1, m0 ^ m1]


def _mul_term(table, a, b, tap: Tap, prefix: str, stage: int, width: int):
    """One operand-share product, with its GF(2^2) internals nameable."""
    if width == 4 and tap.wants(prefix):
        a1, a0 = (a >> 2) & np.uint8(3), a & np.uint8(3)
        b1, b0 = (b >> 2) & np.uint8(3), b & np.uint8(3)
        qhh = tap.val(prefix + ".qhh", G4_MUL[a1, b1], stage, width=2)
        qll = tap.val(prefix + ".qll", G4_MUL[a0, b0], stage, width=2)
        qx = tap.val(prefix + ".qx", G4_MUL[a1 ^ a0, b1 ^ b0], stage, width=2)
        nt = G4_SCALE_N[qx]
        out = ((nt ^ qhh) << 2) | (nt ^ qll)
    else:
        out = table[a, b]
    return tap.val(prefix + ".out", out, stage, width=width)


def masked_mul(a_sh, b_sh, feed, tap: Tap, prefix: str, stage: int, width: int = 4):
    """3-share TI multiplication (GF(2^4) for width 4, GF(2^2) for width 2).

    Returns the remasked output shares; the caller registers them.
    """
    table = G16_MUL if width == 4 else G4_MUL
    comps = []
    for i, pairs in enumerate(TERMS):
        acc = None
        for j, k in pairs:
            t = _mul_term(table, a_sh[j], b_sh[k], tap, f"{prefix}.m{j}{k}", stage, width)
            acc = t if acc is None else acc ^ t
        comps.append(tap.val(f"{prefix}.c{i}", acc, stage, width=width))
    zs = zero_sum(3, np.shape(comps[0]), feed, width=width)
    return [c ^ z for c, z in zip(comps, zs)]


def masked_gf16_mul(a_sh, b_sh, feed, tap: Tap, prefix: str, stage: int):
    """TI GF(2^4) multiplier: combine(out) = combine(a) x combine(b)."""
    return masked_mul(a_sh, b_sh, feed, tap, prefix, stage, width=4)


def masked_and_bits(a_sh, b_sh, feed, tap: Tap, prefix: str, stage: int):
    """TI AND over bit shares (used by the zero-test tree)."""
    comps = []
    for i, pairs in enumerate(TERMS):
        acc = None
        for j, k in pairs:
            t = tap.val(f"{prefix}.m{j}{k}", a_sh[j] & b_sh[k], stage, width=1)
            acc = t if acc is None else acc ^ t
        comps.append(tap.val(f"{prefix}.c{i}", acc, stage, width=1))
    zs = zero_sum(3, np.shape(comps[0]), feed, width=1)
    return [c ^ z for c, z in zip(comps, zs)]


def masked_mul_single_share(a_sh, r, tap: Tap, prefix: str, stage: int):
    """Multiply a shared GF(2^4) value by a single-share factor, per share."""
    out = []
    for i, a in enumerate(a_sh):
        out.append(tap.val(f"{prefix}.s{i}", G16_MUL[a, r], stage, width=4))
    return out


def noncompleteness_index_sets():
    """Operand-share indices used by each component (for the static check)."""
    return [
        (sorted({j for j, _ in pairs}), sorted({k for _, k in pairs}))
        for pairs in TERMS
    ]
