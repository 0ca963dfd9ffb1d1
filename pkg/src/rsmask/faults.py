"""Declarative fault injection into named datapath nodes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .nodes import NodeCatalog, ResolvedFault, apply_fault

KINDS = ("stuck-at-0", "stuck-at-1", "bit-flip", "random-replace")

# Share 0 of the y-operand route into the high-nibble output multiplier of
# the inverter.  A stuck-at here biases fault ineffectiveness through the
# raw data nibble in the TI model while the RS-mapped operand keeps the
# same probability input-independent.
DEFAULT_NODE = "inv.mul_hi.op_y.s0"
DEFAULT_FAULT_ROUND = 9

# Share 0 of the S-box input register: a bit-flip here shifts the evaluated
# byte by a constant, the classic differential-fault shape.  The infective
# model sees it as a mismatch against its own input register copies.
DIFFERENTIAL_NODE = "pipe.s1.x.s0"


@dataclass(frozen=True)
class FaultSpec:
    """One fault: a node, a corruption kind, and an activation scope."""

    node_id: str
    kind: str
    round: int = DEFAULT_FAULT_ROUND
    byte_pos: int = 0
    stage: int = -1  # -1: take the node's pipeline stage from the catalog
    probability: float = 1.0
    flip_mask: int = 0

    def validate(self, catalog: NodeCatalog) -> "FaultSpec":
        if self.kind not in KINDS:
            raise FaultConfigError(f"unknown fault kind {self.kind!r}")
        if self.node_id not in catalog:
            raise FaultConfigError(
                f"node {self.node_id!r} not in the {catalog.model!r} catalog"
            )
        if not (0.0 <= self.probability <= 1.0):
            raise FaultConfigError("probability must be in [0, 1]")
        node_stage = catalog[self.node_id].stage
        if self.stage not in (-1, node_stage):
            raise FaultConfigError(
                f"node {self.node_id!r} lives at stage {node_stage}, spec says {self.stage}"
            )
        if not (0 <= self.byte_pos < 16):
            raise FaultConfigError("byte_pos must be in 0..15")
        if self.kind == "bit-flip" and not (0 < self.flip_mask < 256):
            raise FaultConfigError("bit-flip needs a nonzero flip_mask below 256")
        return self

    def to_json(self) -> dict:
        return {
            "node_id": self.node_id,
            "kind": self.kind,
            "round": self.round,
            "byte_pos": self.byte_pos,
            "stage": self.stage,
            "probability": self.probability,
            "flip_mask": self.flip_mask,
        }

    @classmethod
    def from_json(cls, d: dict) -> "FaultSpec":
        known = {"node_id", "kind", "round", "byte_pos", "stage", "probability", "flip_mask"}
        extra = set(d) - known
        if extra:
            raise FaultConfigError(f"unknown FaultSpec fields: {sorted(extra)}")
        if "node_id" not in d or "kind" not in d:
            raise FaultConfigError("FaultSpec needs node_id and kind")
        return cls(**d)


class FaultConfigError(ValueError):
    pass


def apply(value, spec: FaultSpec, rng: np.random.Generator, width: int = 8):
    """Apply one active fault to a node value (vectorized over arrays).

    The caller has already decided the spec is active for the current
    (round, byte, stage); this only performs the value corruption.
    """
    value = np.asarray(value, dtype=np.uint8)
    rf = ResolvedFault(
        node_id=spec.node_id,
        kind=spec.kind,
        round=spec.round,
        byte_pos=spec.byte_pos,
        flip_mask=spec.flip_mask,
        repl=rng.integers(0, 256, size=value.shape, dtype=np.uint8)
        if spec.kind == "random-replace"
        else None,
    )
    active = np.ones(value.shape, dtype=bool)
    return apply_fault(value, rf, width, active)


def resolve(specs, catalog: NodeCatalog, master_seed: int, n_traces: int, chunk: int = 0):
    """Bind FaultSpecs to a trace batch: activation coins and replacements."""
    resolved = []
    for i, spec in enumerate(specs):
        spec.validate(catalog)
        gen = rngmod.substream(master_seed, rngmod.FAULT, (chunk << 8) | i)
        coin = None
        if spec.probability < 1.0:
            coin = gen.random(n_traces) < spec.probability
        repl = None
        if spec.kind == "random-replace":
            repl = gen.integers(0, 256, size=n_traces, dtype=np.uint8)
        resolved.append(
            ResolvedFault(
                node_id=spec.node_id,
                kind=spec.kind,
                round=spec.round,
                byte_pos=spec.byte_pos,
                flip_mask=spec.flip_mask,
                coin=coin,
                repl=repl,
            )
        )
    return resolved


def default_fault(byte_pos: int = 0, round_: int = DEFAULT_FAULT_ROUND) -> FaultSpec:
    return FaultSpec(node_id=DEFAULT_NODE, kind="stuck-at-0", round=round_, byte_pos=byte_pos)


def differential_default_fault(byte_pos: int = 0, round_: int = 10) -> FaultSpec:
    return FaultSpec(
        node_id=DIFFERENTIAL_NODE, kind="bit-flip", flip_mask=0x01,
        round=round_, byte_pos=byte_pos,
    )


def load_campaign_file(path) -> tuple[list[FaultSpec], dict]:
    """Read a campaign JSON file: fault list plus trace count and seed."""
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "faults" not in doc:
        raise FaultConfigError("campaign file must be an object with a 'faults' list")
    specs = [FaultSpec.from_json(d) for d in doc["faults"]]
    meta = {k: v for k, v in doc.items() if k != "faults"}
    return specs, meta
