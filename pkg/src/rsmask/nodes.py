"""Named-node recording: fault hooks, leakage accumulation, node catalogs.

Every value produced inside a datapath passes through a Tap under a stable
hierarchical node id (e.g. ``inv.norm.mul.m12.qx``).  The tap is where
faults are injected, where register writes contribute Hamming weight to the
leakage trace, and where node values are captured for distribution tests.

Node ids are unique within a model; pipeline copies of the same logical
value carry their stage in the id.  ``reg`` nodes are register writes
(leak-contributing), ``wire`` nodes are combinational outputs and
per-consumer operand routes (faultable, no leakage contribution).

Array convention: the trace axis is the last axis; a byte-vectorized value
has shape (16, N) and share-indexed values are passed share by share.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf import POPCOUNT

DOMAIN_DATA = "data"
DOMAIN_RS = "rs"
DOMAIN_KEY = "key"
DOMAIN_AUX = "aux"


@dataclass(frozen=True)
class NodeInfo:
    name: str
    stage: int
    width: int
    domain: str
    kind: str  # "reg" or "wire"


class NodeCatalog:
    """All faultable nodes of one model, as discovered by a dry run."""

    def __init__(self, model: str, nodes: dict):
        self.model = model
        self.nodes = nodes

    def __contains__(self, name):
        return name in self.nodes

    def __getitem__(self, name) -> NodeInfo:
        return self.nodes[name]

    def names(self):
        return sorted(self.nodes)

    def to_json(self):
        return {
            "model": self.model,
            "nodes": [
                {
                    "id": n.name,
                    "stage": n.stage,
                    "width": n.width,
                    "domain": n.domain,
                    "kind": n.kind,
                }
                for _, n in sorted(self.nodes.items())
            ],
        }


@dataclass
class ResolvedFault:
    """A FaultSpec bound to one evaluation batch."""

    node_id: str
    kind: str
    round: int
    byte_pos: int
    flip_mask: int = 0
    coin: np.ndarray | None = None  # per-trace activation, None means always
    repl: np.ndarray | None = None  # per-trace replacement values


def _width_mask(width: int) -> int:
    return (1 << width) - 1


def apply_fault(value, rf: ResolvedFault, width: int, active):
    """Return value with the fault applied where ``active`` is true."""
    if rf.kind == "stuck-at-0":
        faulted = np.zeros_like(value)
    elif rf.kind == "stuck-at-1":
        faulted = np.full_like(value, _width_mask(width))
    elif rf.kind == "bit-flip":
        faulted = value ^ np.uint8(rf.flip_mask & _width_mask(width))
    elif rf.kind == "random-replace":
        faulted = (rf.repl & np.uint8(_width_mask(width))).astype(value.dtype)
        faulted = np.broadcast_to(faulted, value.shape)
    else:
        raise ValueError(f"unknown fault kind {rf.kind!r}")
    return np.where(active, faulted, value)


class LeakAccum:
    """Per-(round, stage) Hamming-weight accumulator over a trace batch."""

    def __init__(self, n_traces: int):
        self.n = n_traces
        self.samples: dict = {}

    def add(self, rnd: int, stage: int, value):
        hw = POPCOUNT[value]
        while hw.ndim > 1:
            hw = hw.sum(axis=0, dtype=np.int64)
        key = (rnd, stage)
        acc = self.samples.get(key)
        if acc is None:
            self.samples[key] = hw.astype(np.int64)
        else:
            acc += hw

    def matrix(self) -> np.ndarray:
        """Traces-by-samples HW matrix, samples ordered by (round, stage)."""
        keys = sorted(self.samples)
        if not keys:
            return np.zeros((self.n, 0), dtype=np.int64)
        return np.stack([self.samples[k] for k in keys], axis=-1)

    def sample_keys(self):
        return sorted(self.samples)


class Tap:
    """Fault/record/leakage hook threaded through a datapath evaluation."""

    def __init__(self, faults=(), leak: LeakAccum | None = None, watch=(), catalog=None):
        self.faults: dict = {}
        for rf in faults:
            self.faults.setdefault(rf.node_id, []).append(rf)
        self.leak = leak
        self.watch = set(watch)
        self.recorded: dict = {}
        self.catalog = catalog  # dict collecting NodeInfo during a dry run
        self.round = 0
        self.byte_ids = None  # array broadcastable against values, or scalar
        self._want_prefixes = set()
        for name in list(self.faults) + list(self.watch):
            parts = name.split(".")
            for i in range(1, len(parts) + 1):
                self._want_prefixes.add(".".join(parts[:i]))
        self._any = bool(self.faults) or bool(self.watch) or catalog is not None

    def set_round(self, rnd: int):
        self.round = rnd

    def set_bytes(self, byte_ids):
        """Byte-position labels; shape must broadcast against node values."""
        self.byte_ids = byte_ids

    def wants(self, prefix: str) -> bool:
        return self.catalog is not None or prefix in self._want_prefixes

    def _slow(self, name, value, stage, width, domain, kind):
        if self.catalog is not None and name not in self.catalog:
            self.catalog[name] = NodeInfo(name, stage, width, domain, kind)
        for rf in self.faults.get(name, ()):
            if rf.round != self.round:
                continue
            active = True if self.byte_ids is None else (self.byte_ids == rf.byte_pos)
            if rf.coin is not None:
                active = active & rf.coin
            if active is True:
                active = np.ones(np.shape(value), dtype=bool)
            value = apply_fault(np.asarray(value), rf, width, active)
        if name in self.watch:
            self.recorded[name] = np.array(value, copy=True)
        return value

    def val(self, name, value, stage, width=8, domain=DOMAIN_DATA):
        """A combinational node (multiplier/adder output, operand route)."""
        if self._any:
            value = self._slow(name, value, stage, width, domain, "wire")
        return value

    def reg(self, name, value, stage, width=8, domain=DOMAIN_DATA):
        """A register write: faultable and visible to the leakage model."""
        if self._any:
            value = self._slow(name, value, stage, width, domain, "reg")
        if self.leak is not None:
            self.leak.add(self.round, stage, value)
        return value


def build_catalog(model: str, dry_run) -> NodeCatalog:
    """Run ``dry_run(tap)`` once with a cataloging tap and collect the nodes."""
    collected: dict = {}
    tap = Tap(catalog=collected)
    dry_run(tap)
    return NodeCatalog(model, collected)
