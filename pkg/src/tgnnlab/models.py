"""Model descriptions: node-state schemas, rule identifiers, feature inputs.

A ModelSpec fixes everything the message-passing engine needs: the graph,
the per-node state schema, the message/readout rules, the temporal mode,
and the constant slot values. Specs are immutable; the engine never
mutates them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigurationError
from .graphs import Graph


class MsgRule(Enum):
    GATED_RECEIVE = "gated_receive"
    MAX_COMBINATION = "max_combination"


class ReadoutRule(Enum):
    MAXGATE_V = "maxgate_v"
    NESTEDMAX_E = "nestedmax_e"
    SPLIT_A = "split_a"


class TemporalMode(Enum):
    TGNN = "tgnn"  # hidden output feeds back into the next step
    GNN = "gnn"    # memoryless: previous hidden output forced to zero


@dataclass(frozen=True)
class Schema:
    """Ordered node-state slot layout. `constant_slots` never change value."""

    name: str
    slots: tuple[str, ...]
    constant_slots: tuple[str, ...]

    def index(self, slot: str) -> int:
        return self.slots.index(slot)


GV6 = Schema(
    "GV6",
    ("hr", "ht", "hs", "hz", "ho_plus", "ho_minus"),
    ("hs", "hz"),
)

GE11 = Schema(
    "GE11",
    (
        "hr", "ht", "hs", "hz", "hl",
        "hrl_plus", "hrl_minus", "hrt_plus", "hrt_minus", "hlt_plus", "hlt_minus",
    ),
    ("hs", "hz"),
)

GA7 = Schema(
    "GA7",
    ("hr", "ht", "hs", "hz", "ho", "ho_plus", "ho_minus"),
    ("hs", "hz", "ho"),
)

SCHEMAS = {s.name: s for s in (GV6, GE11, GA7)}


@dataclass(frozen=True)
class FeatureSequence:
    """Scalar node features over steps t=1..T; values[t-1][i-1] is node i at t."""

    values: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if len(self.values) == 0:
            raise ConfigurationError("feature sequence needs at least one step")
        widths = {len(row) for row in self.values}
        if len(widths) != 1:
            raise ConfigurationError(f"ragged feature rows: widths {sorted(widths)}")

    @property
    def T(self) -> int:
        return len(self.values)

    @property
    def n(self) -> int:
        return len(self.values[0])

    def at(self, t: int, i: int):
        return self.values[t - 1][i - 1]

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    @classmethod
    def from_rows(cls, rows) -> "FeatureSequence":
        return cls(tuple(tuple(float(v) for v in row) for row in rows))

    @classmethod
    def from_array(cls, arr) -> "FeatureSequence":
        return cls.from_rows(np.asarray(arr, dtype=np.float64).tolist())


@dataclass(frozen=True)
class ModelSpec:
    """Complete recipe for one hand-constructed model."""

    name: str
    graph: Graph
    schema: Schema
    msg_rule: MsgRule
    readout_rule: ReadoutRule
    temporal_mode: TemporalMode
    constants: dict[str, tuple[float, ...]]
    k_s: float
    k_z: float
    layers: int = 2

    def __post_init__(self) -> None:
        if self.k_s <= 0 or self.k_z <= 0:
            raise ConfigurationError(
                f"thresholds must be positive, got k_s={self.k_s}, k_z={self.k_z}"
            )
        if self.layers < 1:
            raise ConfigurationError(f"layers must be >= 1, got {self.layers}")
        if set(self.constants) != set(self.schema.constant_slots):
            raise ConfigurationError(
                f"constants {sorted(self.constants)} do not match schema "
                f"{self.schema.name} constant slots {sorted(self.schema.constant_slots)}"
            )
        fixed = {}
        for slot, vals in self.constants.items():
            if len(vals) != self.graph.n:
                raise ConfigurationError(
                    f"constant slot {slot} has {len(vals)} values for n={self.graph.n}"
                )
            fixed[slot] = tuple(float(v) for v in vals)
        object.__setattr__(self, "constants", fixed)

    @property
    def n(self) -> int:
        return self.graph.n

    def constant(self, slot: str, i: int) -> float:
        return self.constants[slot][i - 1]

    def bound(self) -> float:
        """Largest input magnitude the gating analysis covers."""
        return min(self.k_s, self.k_z)
