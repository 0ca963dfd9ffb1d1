"""Campaign orchestration: corpus generation, attacks, artifact emission.

Fault campaigns use a hybrid evaluation: rounds without an active fault run
through the reference cipher (a fault-free masked evaluation equals it for
every mask draw, which the correctness suite checks exhaustively), while the
faulted byte of the faulted round runs through the full bit-accurate masked
datapath with fresh uniform shares.  Fault effectiveness compares the
resulting ciphertext against the reference ciphertext of the same trace.

Artifacts are CSV files plus a summary JSON; every file embeds the tool
version, the config hash and the master seed, and a re-run with the same
config and seed is byte-identical.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import rng as rngmod
from .aes import (
    INV_SHIFT_ROWS,
    expand_key,
    reference_finish,
    reference_round_states,
)
from .analysis import (
    KeyRanking,
    chi2_uniform_pvalue,
    differential_rank,
    rank_keys,
    round9_values,
    sei_of_values,
)
from .faults import (
    FaultConfigError,
    FaultSpec,
    default_fault,
    differential_default_fault,
    resolve,
)
from .gf import AFFINE, FROM_TOWER, G256_MUL, SBOX, nib_pair
from .leakage import tvla_campaign
from .nodes import Tap
from .sbox import catalog, rs_forward_map, sbox_infective, sbox_ti, sbox_unprotected
from .rng import RandFeed, Rng


class ConfigError(ValueError):
    pass


DEFAULT_KEY_HEX = "2b7e151628aed2a6abf7158809cf4f3c"


def _parse_key(value) -> bytes:
    try:
        key = bytes.fromhex(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key must be 32 hex chars: {exc}") from exc
    if len(key) != 16:
        raise ConfigError("key must be 16 bytes")
    return key


@dataclass
class CampaignConfig:
    """Shared campaign inputs; commands add their own knobs."""

    model: str = "rsmask"
    key: str = DEFAULT_KEY_HEX
    seed: int = 1
    faults: list | None = None  # None: each command picks its default fault
    traces: int | None = None
    out: str = "out"
    workers: int = 1
    figures: bool = True

    # command-specific knobs (validated by each runner)
    target_ineffective: int | None = None
    target_pairs: int | None = None
    sigma: float = 1.0
    partition: str = "sbox-bit"
    compare_model: str | None = None
    checkpoint_start: int = 250

    _KNOWN = {
        "model", "key", "seed", "faults", "traces", "out", "workers", "figures",
        "target_ineffective", "target_pairs", "sigma", "partition",
        "compare_model", "checkpoint_start",
    }

    @classmethod
    def from_dict(cls, doc: dict) -> "CampaignConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(doc) - cls._KNOWN
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        for k, v in doc.items():
            if k == "faults":
                if v is None:
                    continue
                if not isinstance(v, list):
                    raise ConfigError("faults must be a list")
                try:
                    cfg.faults = [FaultSpec.from_json(d) for d in v]
                except FaultConfigError as exc:
                    raise ConfigError(str(exc)) from exc
            else:
                setattr(cfg, k, v)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "CampaignConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def validate(self):
        from .sbox import MODELS

        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        _parse_key(self.key)
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        cat = catalog(self.model)
        try:
            for spec in self.faults or ():
                spec.validate(cat)
        except FaultConfigError as exc:
            raise ConfigError(str(exc)) from exc
        if self.compare_model is not None and self.compare_model not in MODELS:
            raise ConfigError(f"unknown compare_model {self.compare_model!r}")

    def key_bytes(self) -> bytes:
        return _parse_key(self.key)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["faults"] = None if self.faults is None else [f.to_json() for f in self.faults]
        return d

    def data_dict(self) -> dict:
        """Config subset that can change the data (no paths or pool sizes)."""
        d = self.to_dict()
        for volatile in ("out", "workers", "figures"):
            d.pop(volatile, None)
        return d

    def hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.data_dict(), sort_keys=True).encode()
        ).hexdigest()[:16]


# ---------------------------------------------------------------------------
# corpus generation


@dataclass
class FaultCorpus:
    """Collected traces of one fault campaign."""

    fault_round: int
    fault_byte: int
    n_traces: int = 0
    ineff_ct: np.ndarray | None = None        # (16, M) ciphertexts, fault ineffective
    ineff_true_out: np.ndarray | None = None  # true S-box output of the attacked byte
    ineff_true_in: np.ndarray | None = None
    eff_ct: np.ndarray | None = None          # (16, K) faulty ciphertexts
    eff_ref_ct: np.ndarray | None = None      # matching fault-free ciphertexts
    eff_faulty_out: np.ndarray | None = None  # faulty S-box output value
    eff_true_out: np.ndarray | None = None
    truncated: bool = False

    @property
    def n_ineffective(self) -> int:
        return 0 if self.ineff_ct is None else self.ineff_ct.shape[1]

    @property
    def n_effective(self) -> int:
        return 0 if self.eff_ct is None else self.eff_ct.shape[1]


def _masked_sbox_value(model, x, seed, chunk, resolved, fault_round):
    """Bit-accurate evaluation of one byte's S-box under faults.

    Returns (value, extras); value is the unmasked S-box output byte.
    """
    feed = Rng(seed).spawn(rngmod.MASKS, chunk)
    tap = Tap(faults=resolved)
    tap.set_round(fault_round)
    # single-byte evaluation: byte gating happens against the spec byte_pos
    tap.set_bytes(int(resolved[0].byte_pos) if resolved else 0)
    x = np.asarray(x, dtype=np.uint8)

    if model == "unprotected":
        return sbox_unprotected(x, tap), None
    if model == "ti":
        m0, m1 = feed.bytes(x.shape), feed.bytes(x.shape)
        o = sbox_ti([x ^ m0 ^ m1, m0, m1], feed, tap)
        return o[0] ^ o[1] ^ o[2], None
    rs = feed.bytes(x.shape)
    m = feed.bytes(x.shape)
    d0, d1 = x ^ m ^ rs, m
    if model == "rsmask":
        (z1, z0), _, aux = rs_forward_map(d0, d1, rs, feed, tap)
        zp = nib_pair(z1[0] ^ z1[1] ^ z1[2], z0[0] ^ z0[1] ^ z0[2])
        return AFFINE[FROM_TOWER[zp ^ aux["r_t"]]], None
    # infective: return the pre-infection value and the combined error byte
    (z1, z0), e_sh, r_t = sbox_infective(d0, d1, rs, feed, tap)
    zp = nib_pair(z1[0] ^ z1[1] ^ z1[2], z0[0] ^ z0[1] ^ z0[2])
    e = e_sh[0] ^ e_sh[1] ^ e_sh[2]
    return AFFINE[FROM_TOWER[zp ^ r_t]], e


def _campaign_chunk(cfg: CampaignConfig, fault_round: int, fault_byte: int,
                    chunk: int, n: int) -> dict:
    """Evaluate one trace chunk; pure in (config, chunk index)."""
    rk = expand_key(cfg.key_bytes())
    cat = catalog(cfg.model)
    pt_gen = rngmod.substream(cfg.seed, rngmod.PLAINTEXT, chunk)
    pt = pt_gen.integers(0, 256, size=(16, n), dtype=np.uint8)
    states, ref_ct = reference_round_states(pt, rk)
    sb_in = states[fault_round]
    resolved = resolve(cfg.faults, cat, cfg.seed, n, chunk)

    x = sb_in[fault_byte]
    value, err = _masked_sbox_value(cfg.model, x, cfg.seed, chunk, resolved, fault_round)
    sb_out = SBOX[sb_in].copy()
    sb_out[fault_byte] = value
    reported = value
    post_sr_xor = None
    if cfg.model == "infective":
        # infect the post-ShiftRows column of the faulted byte
        p2 = int(INV_SHIFT_ROWS[fault_byte])
        col = p2 // 4
        inf_gen = Rng(cfg.seed).spawn(rngmod.MASKS, (1 << 16) | chunk)
        post_sr_xor = np.zeros_like(sb_out)
        for i in range(4):
            pos = 4 * col + i
            r_i = inf_gen.bytes(n)
            delta_t = G256_MUL[err, r_i]
            post_sr_xor[pos] = AFFINE[FROM_TOWER[delta_t]] ^ np.uint8(0x63)
        reported = value ^ post_sr_xor[p2]

    ct = reference_finish(sb_out, rk, fault_round, post_sr_xor=post_sr_xor)
    effective = np.any(ct != ref_ct, axis=0)
    true_out = SBOX[x]
    ineff = ~effective
    return {
        "n": n,
        "ict": ct[:, ineff], "ito": true_out[ineff], "iti": x[ineff],
        "ect": ct[:, effective], "erct": ref_ct[:, effective],
        "efo": reported[effective], "eto": true_out[effective],
    }


def _campaign_chunk_task(cfg_dict, fault_round, fault_byte, chunk, n):
    return _campaign_chunk(CampaignConfig.from_dict(cfg_dict), fault_round,
                           fault_byte, chunk, n)


def run_fault_campaign(
    cfg: CampaignConfig,
    target_ineffective: int | None = None,
    target_effective: int | None = None,
    max_traces: int = 50_000_000,
    chunk_traces: int = 100_000,
) -> FaultCorpus:
    """Generate a fault corpus for a single-byte, single-round campaign.

    Chunks are keyed by their index, so results are identical for any
    worker count and merge order.
    """
    if not cfg.faults:
        raise ConfigError("fault campaign needs at least one FaultSpec")
    rounds = {f.round for f in cfg.faults}
    bytes_ = {f.byte_pos for f in cfg.faults}
    if len(rounds) != 1 or len(bytes_) != 1:
        raise ConfigError("fault campaign expects one faulted round and byte")
    fault_round, fault_byte = rounds.pop(), bytes_.pop()
    if cfg.traces is not None:
        max_traces = cfg.traces

    corpus = FaultCorpus(fault_round=fault_round, fault_byte=fault_byte)
    parts: dict = {k: [] for k in ("ict", "ito", "iti", "ect", "erct", "efo", "eto")}
    pool = None
    if cfg.workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        pool = ProcessPoolExecutor(max_workers=cfg.workers)

    def targets_met() -> bool:
        if target_ineffective is None and target_effective is None:
            return False
        got_i = sum(a.shape[-1] for a in parts["ict"])
        got_e = sum(a.shape[-1] for a in parts["ect"])
        return (target_ineffective is None or got_i >= target_ineffective) and (
            target_effective is None or got_e >= target_effective
        )

    chunk = 0
    try:
        while corpus.n_traces < max_traces and not targets_met():
            wave = []
            while len(wave) < max(cfg.workers, 1) and corpus.n_traces + sum(
                w[1] for w in wave
            ) < max_traces:
                n = min(chunk_traces, max_traces - corpus.n_traces - sum(w[1] for w in wave))
                wave.append((chunk, n))
                chunk += 1
            if pool is None:
                results = [
                    _campaign_chunk(cfg, fault_round, fault_byte, c, n) for c, n in wave
                ]
            else:
                futs = [
                    pool.submit(_campaign_chunk_task, cfg.to_dict(), fault_round,
                                fault_byte, c, n)
                    for c, n in wave
                ]
                results = [f.result() for f in futs]
            for res in results:
                corpus.n_traces += res.pop("n")
                for k, v in res.items():
                    parts[k].append(v)
    except KeyboardInterrupt:
        corpus.truncated = True
    finally:
        if pool is not None:
            pool.shutdown()

    corpus.ineff_ct = np.concatenate(parts["ict"], axis=1)
    corpus.ineff_true_out = np.concatenate(parts["ito"])
    corpus.ineff_true_in = np.concatenate(parts["iti"])
    corpus.eff_ct = np.concatenate(parts["ect"], axis=1)
    corpus.eff_ref_ct = np.concatenate(parts["erct"], axis=1)
    corpus.eff_faulty_out = np.concatenate(parts["efo"])
    corpus.eff_true_out = np.concatenate(parts["eto"])
    if target_ineffective is not None:
        corpus.ineff_ct = corpus.ineff_ct[:, :target_ineffective]
        corpus.ineff_true_out = corpus.ineff_true_out[:target_ineffective]
        corpus.ineff_true_in = corpus.ineff_true_in[:target_ineffective]
    if target_effective is not None:
        corpus.eff_ct = corpus.eff_ct[:, :target_effective]
        corpus.eff_ref_ct = corpus.eff_ref_ct[:, :target_effective]
        corpus.eff_faulty_out = corpus.eff_faulty_out[:target_effective]
        corpus.eff_true_out = corpus.eff_true_out[:target_effective]
    return corpus


# ---------------------------------------------------------------------------
# attacks over corpora


def geometric_checkpoints(n: int, start: int = 250):
    pts = []
    c = start
    while c < n:
        pts.append(c)
        c *= 2
    pts.append(n)
    return pts


def sifa_sei_curve(corpus: FaultCorpus, k10, checkpoints) -> list:
    """(n, sei_correct, sei_max_wrong, rank) rows over growing prefixes."""
    values_fn, true_guess = round9_values(corpus.ineff_ct, k10, corpus.fault_byte)
    all_vals = np.stack([values_fn(k) for k in range(256)])
    rows = []
    counts = np.zeros((256, 256), dtype=np.int64)
    prev = 0
    for cp in checkpoints:
        seg = all_vals[:, prev:cp]
        for k in range(256):
            counts[k] += np.bincount(seg[k], minlength=256)
        prev = cp
        p = counts / cp
        seis = np.sum((p - 1 / 256.0) ** 2, axis=1)
        rank = KeyRanking(scores=seis, true_key=true_guess).rank_of()
        wrong = np.delete(seis, true_guess)
        rows.append((cp, float(seis[true_guess]), float(wrong.max()), rank))
    return rows


def sustained_rank1_crossover(curve_rows) -> float:
    """Smallest checkpoint from which the true key stays rank 1; inf if none."""
    crossover = np.inf
    for n, _, _, rank in curve_rows:
        if rank == 1:
            crossover = min(crossover, n)
        else:
            crossover = np.inf
    return crossover


def sifa_ranking(corpus: FaultCorpus, k10) -> KeyRanking:
    values_fn, true_guess = round9_values(corpus.ineff_ct, k10, corpus.fault_byte)
    return rank_keys(values_fn, true_key=true_guess)


def differential_corpus_rank(corpus: FaultCorpus, k10) -> KeyRanking:
    """Differential ranking at the faulted byte's ciphertext position."""
    if corpus.fault_round != 10:
        raise ConfigError("differential ranking expects a final-round fault")
    q = int(INV_SHIFT_ROWS[corpus.fault_byte])
    return differential_rank(
        corpus.eff_ref_ct[q], corpus.eff_ct[q], true_key=int(np.asarray(k10)[q])
    )


# ---------------------------------------------------------------------------
# artifact emission


def _meta_lines(cfg: CampaignConfig) -> list:
    return [
        f"# tool=rsmask {__version__}",
        f"# config_hash={cfg.hash()}",
        f"# seed={cfg.seed}",
    ]


def write_csv(path, cfg: CampaignConfig, header: str, rows):
    with open(path, "w") as fh:
        for line in _meta_lines(cfg):
            fh.write(line + "\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def write_summary(path, cfg: CampaignConfig, payload: dict):
    doc = {
        "tool": f"rsmask {__version__}",
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "config": cfg.data_dict(),
    }
    doc.update(payload)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(cfg: CampaignConfig) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


# ---------------------------------------------------------------------------
# command runners


def _with_faults(cfg: CampaignConfig, factory) -> CampaignConfig:
    if cfg.faults:
        return cfg
    return dataclasses.replace(cfg, faults=[factory()])


def run_sifa(cfg: CampaignConfig) -> dict:
    out = _outdir(cfg)
    cfg = _with_faults(cfg, default_fault)
    target = cfg.target_ineffective or 10_000
    corpus = run_fault_campaign(cfg, target_ineffective=target)
    k10 = expand_key(cfg.key_bytes())[10]

    checkpoints = geometric_checkpoints(corpus.n_ineffective, cfg.checkpoint_start)
    curve = sifa_sei_curve(corpus, k10, checkpoints)
    ranking = sifa_ranking(corpus, k10)

    write_csv(
        os.path.join(out, "sei_curve.csv"), cfg,
        "n,sei_correct,sei_max_wrong,true_key_rank",
        [(n, f"{a:.10e}", f"{b:.10e}", rank) for n, a, b, rank in curve],
    )
    write_csv(
        os.path.join(out, "key_ranking.csv"), cfg,
        "key,sei",
        [(k, f"{ranking.scores[k]:.10e}") for k in range(256)],
    )
    hist_corr = np.bincount(corpus.ineff_true_out, minlength=256)
    hist_fault = np.bincount(corpus.eff_faulty_out, minlength=256)
    write_csv(
        os.path.join(out, "histograms.csv"), cfg,
        "value,count_correct_ineffective,count_faulty_effective",
        [(v, int(hist_corr[v]), int(hist_fault[v])) for v in range(256)],
    )

    summary = {
        "command": "sifa",
        "traces_run": corpus.n_traces,
        "ineffective": corpus.n_ineffective,
        "true_key_guess": ranking.true_key,
        "true_key_rank": ranking.rank_of(),
        "recovered": ranking.rank_of() == 1,
        "sei_correct": float(ranking.scores[ranking.true_key]),
        "sei_max_wrong": ranking.max_wrong_sei(),
        "truncated": corpus.truncated,
    }
    write_summary(os.path.join(out, "summary.json"), cfg, summary)
    if cfg.figures:
        from . import plots

        plots.sei_curve_png(os.path.join(out, "sei_curve.png"), curve)
        plots.histogram_png(
            os.path.join(out, "histograms.png"),
            {"correct (ineffective)": hist_corr, "faulty (effective)": hist_fault},
        )
    return summary


def run_distribution(cfg: CampaignConfig, samples: int | None = None) -> dict:
    out = _outdir(cfg)
    cfg = _with_faults(cfg, default_fault)
    target = samples or cfg.target_ineffective or 100_000
    corpus = run_fault_campaign(cfg, target_ineffective=target, target_effective=target)

    hist_corr = np.bincount(corpus.ineff_true_out[:target], minlength=256)
    hist_fault = np.bincount(corpus.eff_faulty_out[:target], minlength=256)
    p_corr = chi2_uniform_pvalue(hist_corr)
    p_fault = chi2_uniform_pvalue(hist_fault)

    write_csv(
        os.path.join(out, "histograms.csv"), cfg,
        "value,count_correct_ineffective,count_faulty_effective",
        [(v, int(hist_corr[v]), int(hist_fault[v])) for v in range(256)],
    )
    summary = {
        "command": "distribution",
        "model": cfg.model,
        "samples_per_histogram": int(target),
        "chi2_p_correct_ineffective": p_corr,
        "chi2_p_faulty": p_fault,
        "sei_correct_ineffective": sei_of_values(corpus.ineff_true_out[:target]),
        "sei_faulty": sei_of_values(corpus.eff_faulty_out[:target]),
        "truncated": corpus.truncated,
    }
    write_summary(os.path.join(out, "summary.json"), cfg, summary)
    if cfg.figures:
        from . import plots

        plots.histogram_png(
            os.path.join(out, "histograms.png"),
            {"correct (ineffective)": hist_corr, "faulty (effective)": hist_fault},
        )
    return summary


def run_infective(cfg: CampaignConfig) -> dict:
    """Differential evaluation: plain rsmask versus the infective variant."""
    out = _outdir(cfg)
    cfg = _with_faults(cfg, differential_default_fault)
    for spec in cfg.faults:
        if spec.round != 10:
            raise ConfigError("differential evaluation expects final-round faults")
    pairs = cfg.target_pairs or 50_000
    results = {}
    for model in ("rsmask", cfg.compare_model or "infective"):
        sub = dataclasses.replace(cfg, model=model)
        corpus = run_fault_campaign(sub, target_effective=pairs)
        q = int(INV_SHIFT_ROWS[corpus.fault_byte])
        k10 = expand_key(cfg.key_bytes())[10]
        ranking = differential_rank(
            corpus.eff_ref_ct[q], corpus.eff_ct[q], true_key=int(k10[q])
        )
        results[model] = {
            "pairs": corpus.n_effective,
            "true_key_rank": ranking.rank_of(),
            "recovered": ranking.rank_of() == 1,
            "sei_correct": float(ranking.scores[ranking.true_key]),
            "sei_max_wrong": ranking.max_wrong_sei(),
        }
        write_csv(
            os.path.join(out, f"differential_ranking_{model}.csv"), cfg,
            "key,sei",
            [(k, f"{ranking.scores[k]:.10e}") for k in range(256)],
        )
    summary = {"command": "infective", **results}
    write_summary(os.path.join(out, "summary.json"), cfg, summary)
    return summary


def run_tvla(cfg: CampaignConfig) -> dict:
    out = _outdir(cfg)
    n = cfg.traces or 100_000
    report = tvla_campaign(
        model=cfg.model,
        key=cfg.key_bytes(),
        n_traces=n,
        sigma=cfg.sigma,
        partition=cfg.partition,
        master_seed=cfg.seed,
    )
    write_csv(
        os.path.join(out, "tvla_t.csv"), cfg,
        "sample,round,stage,t",
        [
            (i, rk[0], rk[1], f"{report.t[i]:.6f}")
            for i, rk in enumerate(report.sample_keys)
        ],
    )
    summary = {"command": "tvla", "model": cfg.model, "traces": n, **report.to_json()}
    write_summary(os.path.join(out, "summary.json"), cfg, summary)
    if cfg.figures:
        from . import plots

        plots.ttest_png(os.path.join(out, "tvla_t.png"), report.t)
    return summary
