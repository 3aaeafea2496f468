"""Single-node message, update, and readout rules.

Every formula here is a composition of additions, subtractions, pairwise
maxima, and ReLU, so the same code runs exactly in float and Fraction
arithmetic. Combination expressions (the MAX_COMBINATION message and the
gated readouts) are evaluated in their pairwise-max form; the averaged
ReLU-split form is identical in real arithmetic but rounds in floats,
and the checks downstream demand tolerance-0 agreement with running-max
oracles. The split slots (ho_plus/ho_minus and the ha family) are still
maintained per the update equations so traces expose them.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigurationError
from ..models import GA7, GE11, GV6, ModelSpec, MsgRule, ReadoutRule


def relu(x):
    return x if x > 0 else type(x)(0)


@dataclass(frozen=True)
class NodeState:
    """Immutable slot vector for one node at one layer."""

    schema: object
    values: tuple

    def __getattr__(self, name):
        try:
            return self.values[self.schema.slots.index(name)]
        except ValueError:
            raise AttributeError(name) from None

    def as_dict(self) -> dict:
        return dict(zip(self.schema.slots, self.values))

    def replace(self, **updates) -> "NodeState":
        d = self.as_dict()
        d.update(updates)
        return NodeState(self.schema, tuple(d[s] for s in self.schema.slots))


def init_hidden(spec: ModelSpec, i: int, x_i, h_prev_i) -> NodeState:
    """Layer-0 state for node i: current input, previous hidden output, constants."""
    zero = type(x_i)(0)
    base = {slot: zero for slot in spec.schema.slots}
    base["hr"] = x_i
    base["ht"] = h_prev_i
    for slot in spec.schema.constant_slots:
        base[slot] = type(x_i)(spec.constant(slot, i))
    if spec.schema is GA7 and spec.msg_rule is MsgRule.MAX_COMBINATION:
        # split of (input - previous hidden) so the first-layer combination
        # already equals max{x, h_prev}
        base["ho_plus"] = relu(x_i - h_prev_i)
        base["ho_minus"] = relu(h_prev_i - x_i)
    return NodeState(spec.schema, tuple(base[s] for s in spec.schema.slots))


def msg_value(spec: ModelSpec, st: NodeState):
    """Message a node sends to every unmasked neighbour (sender-only rule)."""
    if spec.msg_rule is MsgRule.GATED_RECEIVE:
        return relu(st.hr - st.hs)
    if spec.msg_rule is MsgRule.MAX_COMBINATION:
        return relu(max(st.hr, st.ht) - st.hs)
    raise ConfigurationError(f"unknown message rule {spec.msg_rule}")


def upd_state(spec: ModelSpec, st: NodeState, a) -> NodeState:
    """Post-aggregation slot update; `a` is the summed incoming message."""
    schema = spec.schema
    hr_prev = st.hr
    ht_prev = st.ht
    up = {
        "hr": relu(a),
        "ht": relu(ht_prev),
        "hs": relu(st.hs),
        "hz": relu(st.hz),
    }
    if schema is GV6 or schema is GA7:
        up["ho_plus"] = relu(a - ht_prev)
        up["ho_minus"] = relu(ht_prev - a)
        if schema is GA7:
            up["ho"] = relu(st.ho)
    elif schema is GE11:
        up["hl"] = relu(hr_prev)
        up["hrl_plus"] = relu(a - hr_prev)
        up["hrl_minus"] = relu(hr_prev - a)
        up["hrt_plus"] = relu(a - ht_prev)
        up["hrt_minus"] = relu(ht_prev - a)
        up["hlt_plus"] = relu(hr_prev - ht_prev)
        up["hlt_minus"] = relu(ht_prev - hr_prev)
    else:
        raise ConfigurationError(f"unknown schema {schema}")
    return NodeState(schema, tuple(up[s] for s in schema.slots))


def readout_node(spec: ModelSpec, st: NodeState):
    """Final-layer readout for one node.

    Returns (hidden_output, y) where y is None unless the rule produces a
    separate output signal (SPLIT_A); otherwise the model output at the
    last step is the hidden output itself.
    """
    if spec.readout_rule is ReadoutRule.MAXGATE_V:
        return relu(max(st.hr, st.ht) - st.hz), None
    if spec.readout_rule is ReadoutRule.NESTEDMAX_E:
        tau = max(max(st.hr, st.hl), st.ht)
        return relu(tau - st.hz), None
    if spec.readout_rule is ReadoutRule.SPLIT_A:
        return relu(st.hr - st.hz), relu(st.hr - st.ho)
    raise ConfigurationError(f"unknown readout rule {spec.readout_rule}")
