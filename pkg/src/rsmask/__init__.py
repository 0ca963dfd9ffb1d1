"""rsmask: a bit-accurate fault and leakage laboratory for masked AES S-boxes.

Models unprotected, TI-masked, RS-masked and infective RS-masked S-box
datapaths at the internal-node level, injects faults into named nodes, and
runs ineffective-fault, differential and TVLA analyses end to end.
"""

__version__ = "0.1.0"

from .aes import RoundKeys, TraceRecord, encrypt, encrypt_batch, expand_key
from .analysis import (
    Histogram256,
    KeyRanking,
    SeiResult,
    differential_rank,
    mutual_information_exact,
    sei,
    sifa_rank,
    theorem_checks,
)
from .faults import FaultSpec, default_fault
from .leakage import TTestReport, tvla_campaign, welch_t
from .masking import combine, masked_gf16_mul, masked_mul_single_share, remask, split
from .rng import Rng
from .sbox import (
    MODELS,
    catalog,
    compute_f,
    rs_forward_map,
    sbox_infective,
    sbox_rsmask,
    sbox_ti,
    sbox_unprotected,
)

__all__ = [
    "__version__",
    "RoundKeys",
    "TraceRecord",
    "encrypt",
    "encrypt_batch",
    "expand_key",
    "Histogram256",
    "KeyRanking",
    "SeiResult",
    "differential_rank",
    "mutual_information_exact",
    "sei",
    "sifa_rank",
    "theorem_checks",
    "FaultSpec",
    "default_fault",
    "TTestReport",
    "tvla_campaign",
    "welch_t",
    "combine",
    "masked_gf16_mul",
    "masked_mul_single_share",
    "remask",
    "split",
    "Rng",
    "MODELS",
    "catalog",
    "compute_f",
    "rs_forward_map",
    "sbox_infective",
    "sbox_rsmask",
    "sbox_ti",
    "sbox_unprotected",
]
