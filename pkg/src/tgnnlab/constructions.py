"""Factory for the six hand-constructed models and their paired twins.

Families:
  GV: square graph (4-node cycle), GV6 states, gated-receive messages,
      max-gate readout. The pair differs only in which nodes are silenced.
  GE: 3-node line, GE11 states, gated-receive messages, nested-max
      readout. The wide twin reports both inner nodes, the narrow one
      only node 2's input.
  GA: 3-node line, GA7 states. The first twin reuses the GV rules; the
      second uses max-combination messages with the split readout and
      keeps its temporal memory on node 3 instead of node 1.

Model id strings: phi1v, phi2v, phi1e, phi2e, phi1a, phi2a, optionally
with a "-gnn" suffix for the memoryless variants (GA has none).
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError, UnsupportedVariantError
from .graphs import make_line_graph, make_square_graph
from .models import GA7, GE11, GV6, ModelSpec, MsgRule, ReadoutRule, TemporalMode

FAMILIES = ("GV", "GE", "GA")

DEFAULT_K_S = 10.0
DEFAULT_K_Z = 10.0


@dataclass(frozen=True)
class ModelId:
    family: str
    which: int  # 1 or 2
    temporal: TemporalMode = TemporalMode.TGNN

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise UnsupportedVariantError(f"unknown family {self.family!r}")
        if self.which not in (1, 2):
            raise UnsupportedVariantError(f"pair index must be 1 or 2, got {self.which}")
        if self.family == "GA" and self.temporal is TemporalMode.GNN:
            raise UnsupportedVariantError("the GA family has no memoryless variant")

    def __str__(self) -> str:
        s = f"phi{self.which}{self.family[1].lower()}"
        if self.temporal is TemporalMode.GNN:
            s += "-gnn"
        return s


def parse_model_id(s: str) -> ModelId:
    base, sep, suffix = s.partition("-")
    if sep and suffix != "gnn":
        raise UnsupportedVariantError(f"unknown model id {s!r}")
    temporal = TemporalMode.GNN if sep else TemporalMode.TGNN
    fam_letter = base[-1:] if len(base) == 5 and base.startswith("phi") else ""
    families = {"v": "GV", "e": "GE", "a": "GA"}
    if fam_letter not in families or base[3] not in "12":
        raise UnsupportedVariantError(f"unknown model id {s!r}")
    return ModelId(families[fam_letter], int(base[3]), temporal)


MODEL_ID_STRINGS = (
    "phi1v", "phi2v", "phi1e", "phi2e", "phi1a", "phi2a",
    "phi1v-gnn", "phi2v-gnn", "phi1e-gnn", "phi2e-gnn",
)

# per-node constant rows, expressed as multiples of (k_s, k_z)
_CONSTANTS = {
    ("GV", 1): {"hs": (1, 0, 0, 1), "hz": (0, 1, 1, 1)},
    ("GV", 2): {"hs": (1, 1, 0, 0), "hz": (0, 1, 1, 1)},
    ("GE", 1): {"hs": (1, 0, 0), "hz": (0, 1, 1)},
    ("GE", 2): {"hs": (1, 0, 1), "hz": (0, 1, 1)},
    ("GA", 1): {"hs": (1, 0, 0), "hz": (0, 1, 1), "ho": (0, 0, 0)},
    ("GA", 2): {"hs": (1, 0, 0), "hz": (1, 1, 0), "ho": (0, 1, 1)},
}

_RECIPE = {
    "GV": (make_square_graph, GV6, MsgRule.GATED_RECEIVE, ReadoutRule.MAXGATE_V),
    "GE": (lambda: make_line_graph(3), GE11, MsgRule.GATED_RECEIVE, ReadoutRule.NESTEDMAX_E),
    "GA": (lambda: make_line_graph(3), GA7, None, None),  # rules depend on the twin
}


def build(model_id: ModelId | str, k_s: float = DEFAULT_K_S,
          k_z: float = DEFAULT_K_Z) -> ModelSpec:
    mid = parse_model_id(model_id) if isinstance(model_id, str) else model_id
    if k_s <= 0 or k_z <= 0:
        raise ConfigurationError(f"thresholds must be positive, got k_s={k_s}, k_z={k_z}")
    make_graph, schema, msg_rule, readout = _RECIPE[mid.family]
    if mid.family == "GA":
        if mid.which == 1:
            msg_rule, readout = MsgRule.GATED_RECEIVE, ReadoutRule.MAXGATE_V
        else:
            msg_rule, readout = MsgRule.MAX_COMBINATION, ReadoutRule.SPLIT_A
    scale = {"hs": k_s, "hz": k_z, "ho": k_z}
    constants = {
        slot: tuple(m * scale[slot] for m in row)
        for slot, row in _CONSTANTS[(mid.family, mid.which)].items()
    }
    return ModelSpec(
        name=str(mid),
        graph=make_graph(),
        schema=schema,
        msg_rule=msg_rule,
        readout_rule=readout,
        temporal_mode=mid.temporal,
        constants=constants,
        k_s=float(k_s),
        k_z=float(k_z),
    )


def paired(model_id: ModelId | str) -> ModelId:
    """The other member of the bounded-equivalent pair."""
    mid = parse_model_id(model_id) if isinstance(model_id, str) else model_id
    return ModelId(mid.family, 3 - mid.which, mid.temporal)


def bound_K(spec: ModelSpec) -> float:
    return spec.bound()
