"""AES-128 with pluggable S-box model.

State layout is FIPS-197 flat order: byte i sits at row i%4, column i//4.
Linear layers act per share; the mask share of the rsmask/infective models
rides through ShiftRows/MixColumns like any other share and is excluded
from AddRoundKey, so data0 ^ data1 ^ mask_share equals the reference state
at every round boundary of a fault-free run.

Round keys are expanded unmasked once (trusted setup) and split into two
fresh Boolean shares per trace; the key schedule's own S-box instances are
out of the modeled fault surface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .faults import FaultSpec, resolve
from .gf import G256_MUL, INV_SBOX, MUL2, MUL3, SBOX
from .nodes import DOMAIN_KEY, DOMAIN_RS, LeakAccum, Tap
from .sbox import (
    MODELS,
    STAGES,
    catalog,
    infective_output,
    sbox_infective,
    sbox_rsmask,
    sbox_ti,
    sbox_unprotected,
)

RCON = (0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36)

# out[i] = in[SHIFT_ROWS[i]]
SHIFT_ROWS = np.array([(i % 4) + 4 * ((i // 4 + i % 4) % 4) for i in range(16)], dtype=np.intp)
INV_SHIFT_ROWS = np.argsort(SHIFT_ROWS)


def expand_key(key) -> np.ndarray:
    """FIPS-197 key schedule; returns an (11, 16) uint8 array."""
    key = np.asarray(bytearray(key), dtype=np.uint8)
    if key.shape != (16,):
        raise ValueError("key must be 16 bytes")
    words = [key[4 * i: 4 * i + 4].copy() for i in range(4)]
    for i in range(4, 44):
        tmp = words[i - 1].copy()
        if i % 4 == 0:
            tmp = np.roll(tmp, -1)
            tmp = SBOX[tmp]
            tmp[0] ^= RCON[i // 4 - 1]
        words.append(words[i - 4] ^ tmp)
    return np.stack([np.concatenate(words[4 * r: 4 * r + 4]) for r in range(11)])


@dataclass
class RoundKeys:
    """Expanded key plus its per-trace 2-share splitting."""

    combined: np.ndarray  # (11, 16)

    @classmethod
    def from_key(cls, key) -> "RoundKeys":
        return cls(expand_key(key))

    def share(self, feed):
        """Fresh 2-share split; mask share of keys is implicitly zero."""
        m = feed.bytes(self.combined.shape)
        return self.combined ^ m, m


def mix_columns(state: np.ndarray) -> np.ndarray:
    """MixColumns on a (16, ...) array, flat FIPS layout."""
    out = np.empty_like(state)
    for c in range(4):
        s0, s1, s2, s3 = (state[4 * c + r] for r in range(4))
        out[4 * c + 0] = MUL2[s0] ^ MUL3[s1] ^ s2 ^ s3
        out[4 * c + 1] = s0 ^ MUL2[s1] ^ MUL3[s2] ^ s3
        out[4 * c + 2] = s0 ^ s1 ^ MUL2[s2] ^ MUL3[s3]
        out[4 * c + 3] = MUL3[s0] ^ s1 ^ s2 ^ MUL2[s3]
    return out


def shift_rows(state: np.ndarray) -> np.ndarray:
    return state[SHIFT_ROWS]


def reference_encrypt(pt: np.ndarray, rk: np.ndarray) -> np.ndarray:
    """Vectorized reference AES-128 on a (16, ...) plaintext array."""
    state = pt ^ rk[0].reshape(16, *([1] * (pt.ndim - 1)))
    for r in range(1, 11):
        state = SBOX[state]
        state = shift_rows(state)
        if r < 10:
            state = mix_columns(state)
        state = state ^ rk[r].reshape(16, *([1] * (pt.ndim - 1)))
    return state


def reference_round_states(pt: np.ndarray, rk: np.ndarray):
    """Per-round S-box input states of the reference cipher.

    Returns a list indexed by round r (1..10) of the state entering that
    round's SubBytes; used by the campaign fast path and as ground truth.
    """
    shape_tail = [1] * (pt.ndim - 1)
    state = pt ^ rk[0].reshape(16, *shape_tail)
    states = [None]
    for r in range(1, 11):
        states.append(state.copy())
        state = SBOX[state]
        state = shift_rows(state)
        if r < 10:
            state = mix_columns(state)
        state = state ^ rk[r].reshape(16, *shape_tail)
    return states, state


def reference_finish(sb_out: np.ndarray, rk: np.ndarray, r: int, post_sr_xor=None):
    """Finish the cipher given round r's SubBytes output (16, ...) array."""
    shape_tail = [1] * (sb_out.ndim - 1)
    state = shift_rows(sb_out)
    if post_sr_xor is not None:
        state = state ^ post_sr_xor
    if r < 10:
        state = mix_columns(state)
    state = state ^ rk[r].reshape(16, *shape_tail)
    for rr in range(r + 1, 11):
        state = SBOX[state]
        state = shift_rows(state)
        if rr < 10:
            state = mix_columns(state)
        state = state ^ rk[rr].reshape(16, *shape_tail)
    return state


# ---------------------------------------------------------------------------
# masked encryption


@dataclass
class TraceRecord:
    """One encryption: ciphertext, fault effectiveness, optional leakage.

    JSON-lines field order: pt, ct, effective, leak.
    """

    pt: bytes
    ct: bytes
    effective: bool
    leak: np.ndarray | None = None

    def to_json_line(self) -> str:
        doc = {
            "pt": self.pt.hex(),
            "ct": self.ct.hex(),
            "effective": self.effective,
        }
        if self.leak is not None:
            doc["leak"] = [round(float(v), 6) for v in self.leak]
        return json.dumps(doc, separators=(",", ":"))


class BatchResult:
    def __init__(self, ct, effective, leak_matrix=None, tap=None):
        self.ct = ct
        self.effective = effective
        self.leak_matrix = leak_matrix
        self.tap = tap


def _ark(shares, rk_r, key_feed, tap: Tap, stage: int, rs=None):
    """AddRoundKey on data shares with a fresh 2-share round key."""
    m = key_feed.bytes(np.shape(shares[0]))
    k0 = rk_r.reshape(16, *([1] * (np.ndim(shares[0]) - 1))) ^ m
    out = list(shares)
    if len(shares) == 1:
        out[0] = tap.reg("ark.d0", shares[0] ^ k0 ^ m, stage, domain=DOMAIN_KEY)
    else:
        out[0] = tap.reg("ark.d0", shares[0] ^ k0, stage, domain=DOMAIN_KEY)
        out[1] = tap.reg("ark.d1", shares[1] ^ m, stage, domain=DOMAIN_KEY)
        for i in range(2, len(shares)):
            out[i] = shares[i]
    if rs is not None:
        rs = tap.reg("ark.rs", rs, stage, domain=DOMAIN_RS)
    return out, rs


def encrypt_batch(
    pt: np.ndarray,
    key,
    model: str = "rsmask",
    fault_specs=(),
    master_seed: int = 0,
    chunk: int = 0,
    leak: bool = False,
    tap_watch=(),
) -> BatchResult:
    """Encrypt a (16, N) plaintext batch under the chosen S-box model.

    Fault effectiveness is judged against the reference ciphertext of the
    same plaintext, which a fault-free masked run equals for any masks.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    pt = np.asarray(pt, dtype=np.uint8)
    n = pt.shape[-1]
    rk = expand_key(key)
    cat = catalog(model)
    resolved = resolve(fault_specs, cat, master_seed, n, chunk)

    rng = rngmod.Rng(master_seed, chunk)
    feed = rng.spawn(rngmod.MASKS, chunk)
    key_feed = rng.spawn(rngmod.KEYSHARES, chunk)

    leak_acc = LeakAccum(n) if leak else None
    tap = Tap(faults=resolved, leak=leak_acc, watch=tap_watch)
    tap.set_bytes(np.arange(16, dtype=np.uint8).reshape(16, 1))
    lin_stage = STAGES[model] + 1

    if model == "unprotected":
        shares, rs = [pt.copy()], None
    elif model == "ti":
        m0, m1 = feed.bytes(pt.shape), feed.bytes(pt.shape)
        shares, rs = [pt ^ m0 ^ m1, m0, m1], None
    else:
        rs = feed.bytes(pt.shape)
        m = feed.bytes(pt.shape)
        shares = [pt ^ m ^ rs, m]

    tap.set_round(0)
    shares, rs = _ark(shares, rk[0], key_feed, tap, lin_stage, rs)

    for r in range(1, 11):
        tap.set_round(r)
        if model == "unprotected":
            sb = [sbox_unprotected(shares[0], tap)]
            new_rs = None
        elif model == "ti":
            sb = sbox_ti(shares, feed, tap)
            new_rs = None
        elif model == "rsmask":
            o0, o1, new_rs = sbox_rsmask(shares[0], shares[1], rs, feed, tap)
            sb = [o0, o1]
        else:  # infective
            (z1, z0), e_sh, _ = sbox_infective(shares[0], shares[1], rs, feed, tap)
            z1 = [shift_rows(v) for v in z1]
            z0 = [shift_rows(v) for v in z0]
            e_sh = [shift_rows(v) for v in e_sh]
            rs_sr = shift_rows(rs)
            infect = feed.bytes(pt.shape)
            e_col = [
                np.concatenate(
                    [np.broadcast_to(
                        e[4 * c] ^ e[4 * c + 1] ^ e[4 * c + 2] ^ e[4 * c + 3],
                        (4,) + e.shape[1:],
                    ) for c in range(4)],
                    axis=0,
                )
                for e in e_sh
            ]
            o0, o1, new_rs = infective_output(z1, z0, e_col, infect, rs_sr, tap)
            # already shifted; skip the shared shift below
            shares = [o0, o1]
            rs = new_rs
            if r < 10:
                shares = [
                    tap.reg(f"lin.d{i}", mix_columns(s), lin_stage) for i, s in enumerate(shares)
                ]
                rs = tap.reg("lin.rs", mix_columns(rs), lin_stage, domain=DOMAIN_RS)
            shares, rs = _ark(shares, rk[r], key_feed, tap, lin_stage, rs)
            continue

        sb = [shift_rows(v) for v in sb]
        if new_rs is not None:
            rs = shift_rows(new_rs)
        if r < 10:
            sb = [tap.reg(f"lin.d{i}", mix_columns(s), lin_stage) for i, s in enumerate(sb)]
            if rs is not None:
                rs = tap.reg("lin.rs", mix_columns(rs), lin_stage, domain=DOMAIN_RS)
        shares, rs = _ark(sb, rk[r], key_feed, tap, lin_stage, rs)

    ct = shares[0].copy()
    for s in shares[1:]:
        ct = ct ^ s
    if rs is not None:
        ct = ct ^ rs

    ref = reference_encrypt(pt, rk)
    effective = np.any(ct != ref, axis=0)
    leak_matrix = leak_acc.matrix() if leak_acc is not None else None
    return BatchResult(ct=ct, effective=effective, leak_matrix=leak_matrix, tap=tap)


def encrypt(pt, keys: RoundKeys | bytes, model: str, campaign, rng: rngmod.Rng) -> TraceRecord:
    """Single-trace wrapper producing a TraceRecord."""
    if isinstance(keys, RoundKeys):
        key16 = _key_from_roundkeys(keys)
    else:
        key16 = bytes(keys)
    pt_arr = np.asarray(bytearray(pt), dtype=np.uint8).reshape(16, 1)
    res = encrypt_batch(
        pt_arr, key16, model=model, fault_specs=list(campaign), master_seed=rng.seed,
        chunk=rng.counter,
    )
    return TraceRecord(
        pt=bytes(pt),
        ct=bytes(res.ct[:, 0].tolist()),
        effective=bool(res.effective[0]),
    )


def _key_from_roundkeys(keys: RoundKeys) -> bytes:
    return bytes(keys.combined[0].tolist())


def write_trace_jsonl(records, path):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(rec.to_json_line() + "\n")
