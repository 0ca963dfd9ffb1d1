"""Command-line front end.

Subcommands: verify | sifa | tvla | distribution | infective | nodes.
Exit codes: 0 success, 1 check/attack-expectation failure, 2 config error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .campaign import (
    CampaignConfig,
    ConfigError,
    run_distribution,
    run_infective,
    run_sifa,
    run_tvla,
)
from .faults import FaultConfigError
from .sbox import MODELS, catalog


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rsmask",
        description="Fault and leakage laboratory for RS-masked AES S-box datapaths",
    )
    p.add_argument("--version", action="version", version=f"rsmask {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="campaign config JSON")
        sp.add_argument("--seed", type=int, help="master seed (u64)")
        sp.add_argument("--traces", type=int, help="trace budget")
        sp.add_argument("--workers", type=int, help="worker pool size")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--model", choices=MODELS, help="S-box model")
        sp.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    common(sub.add_parser("verify", help="run the built-in oracle suites"))
    common(sub.add_parser("sifa", help="ineffective-fault key-recovery campaign"))
    common(sub.add_parser("tvla", help="simulated leakage assessment"))
    common(sub.add_parser("distribution", help="faulty/correct value histograms"))
    common(sub.add_parser("infective", help="differential evaluation incl. infective"))
    np_ = sub.add_parser("nodes", help="dump the fault-node catalog of a model")
    np_.add_argument("--model", choices=MODELS, default="rsmask")
    np_.add_argument("--out", help="write JSON here instead of stdout")
    return p


def _load_config(args) -> CampaignConfig:
    cfg = CampaignConfig.load(args.config) if args.config else CampaignConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.traces is not None:
        cfg.traces = args.traces
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out is not None:
        cfg.out = args.out
    if args.model is not None:
        cfg.model = args.model
    if args.no_figures:
        cfg.figures = False
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# verify


def _suite_gf():
    from .gf import (
        FROM_TOWER,
        G256_MUL,
        SBOX,
        TO_TOWER,
        TOWER_INV,
        AFFINE,
        gf256_mul_poly,
    )

    if not np.array_equal(FROM_TOWER[TO_TOWER], np.arange(256)):
        return "basis round-trip broken"
    a = np.repeat(np.arange(256, dtype=np.uint8), 256)
    b = np.tile(np.arange(256, dtype=np.uint8), 256)
    poly = np.array(
        [gf256_mul_poly(int(x), int(y)) for x, y in zip(a[::257], b[::257])],
        dtype=np.uint8,
    )
    # full 65536 cross-check through the tower
    poly_full = np.zeros(65536, dtype=np.uint8)
    for x in range(256):
        ax = np.uint8(x)
        row = G256_MUL[TO_TOWER[ax], TO_TOWER[np.arange(256, dtype=np.uint8)]]
        poly_full[x * 256:(x + 1) * 256] = FROM_TOWER[row]
    ref = np.zeros(65536, dtype=np.uint8)
    for x in range(256):
        ref[x * 256:(x + 1) * 256] = [gf256_mul_poly(x, y) for y in range(256)]
    if not np.array_equal(poly_full, ref):
        return "tower multiplication does not commute with the basis change"
    sbox_via_tower = AFFINE[FROM_TOWER[TOWER_INV[TO_TOWER[np.arange(256)]]]]
    if not np.array_equal(sbox_via_tower, SBOX):
        return "tower inverter does not reproduce the reference S-box"
    del poly
    return None


def _suite_models():
    from .gf import SBOX
    from .nodes import Tap
    from .rng import MASKS, Rng
    from .sbox import sbox_rsmask, sbox_ti, sbox_unprotected

    x = np.tile(np.arange(256, dtype=np.uint8), 8)
    tap = Tap()
    if not np.array_equal(sbox_unprotected(x, tap), SBOX[x]):
        return "unprotected model mismatch"
    for seed in range(3):
        feed = Rng(seed).spawn(MASKS)
        m0, m1 = feed.bytes(x.shape), feed.bytes(x.shape)
        o = sbox_ti([x ^ m0 ^ m1, m0, m1], feed, Tap())
        if not np.array_equal(o[0] ^ o[1] ^ o[2], SBOX[x]):
            return f"ti model mismatch at seed {seed}"
    # exhaustive (value, mask share) sweep
    v = np.repeat(np.arange(256, dtype=np.uint8), 256)
    r = np.tile(np.arange(256, dtype=np.uint8), 256)
    feed = Rng(1).spawn(MASKS)
    m = feed.bytes(v.shape)
    o0, o1, rs_out = sbox_rsmask(v ^ m ^ r, m, r, feed, Tap())
    if not np.array_equal(o0 ^ o1 ^ rs_out, SBOX[v]):
        return "rsmask model mismatch over the exhaustive (value, mask) sweep"
    return None


def _suite_aes():
    from .aes import expand_key, reference_encrypt

    key = bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c")
    pt = bytes.fromhex("3243f6a8885a308d313198a2e0370734")
    want = bytes.fromhex("3925841d02dc09fbdc118597196a0b32")
    ct = reference_encrypt(
        np.frombuffer(pt, dtype=np.uint8).reshape(16, 1), expand_key(key)
    )[:, 0]
    if bytes(ct.tolist()) != want:
        return "FIPS-197 Appendix B vector failed"
    rk = expand_key(bytes(16))
    if bytes(rk[1][:4].tolist()) != bytes.fromhex("62636363"):
        return "all-zero key schedule vector failed"
    return None


def _suite_theorems():
    from .analysis import theorem_checks

    rep = theorem_checks()
    if not rep.passed():
        return f"theorem oracle failed: {rep.to_json()}"
    return None


def _suite_determinism(cfg: CampaignConfig):
    import os
    import tempfile
    import dataclasses

    from .campaign import run_sifa

    digests = []
    with tempfile.TemporaryDirectory() as tmp:
        for i in range(2):
            sub = dataclasses.replace(
                cfg, out=os.path.join(tmp, f"run{i}"), figures=False,
                target_ineffective=400, model="ti",
            )
            run_sifa(sub)
            blob = b""
            for name in sorted(os.listdir(sub.out)):
                with open(os.path.join(sub.out, name), "rb") as fh:
                    blob += name.encode() + fh.read()
            digests.append(blob)
    if digests[0] != digests[1]:
        return "identical seed+config produced different artifacts"
    return None


def cmd_verify(cfg: CampaignConfig) -> int:
    suites = [
        ("gf-tower", _suite_gf),
        ("sbox-models", _suite_models),
        ("aes-vectors", _suite_aes),
        ("theorem-oracles", _suite_theorems),
        ("determinism", lambda: _suite_determinism(cfg)),
    ]
    failures = 0
    for name, fn in suites:
        err = fn()
        if err is None:
            print(f"PASS {name}")
        else:
            failures += 1
            print(f"FAIL {name}: {err}")
    return 0 if failures == 0 else 1


def cmd_nodes(args) -> int:
    doc = catalog(args.model).to_json()
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "nodes":
            return cmd_nodes(args)
        cfg = _load_config(args)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "sifa":
            summary = run_sifa(cfg)
        elif args.command == "tvla":
            summary = run_tvla(cfg)
        elif args.command == "distribution":
            summary = run_distribution(cfg)
        elif args.command == "infective":
            summary = run_infective(cfg)
        else:  # pragma: no cover
            raise ConfigError(f"unknown command {args.command}")
        print(json.dumps(summary, indent=2, sort_keys=True))
        return 0
    except (ConfigError, FaultConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
