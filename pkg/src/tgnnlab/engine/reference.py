"""Reference evaluator: full traces, any scalar type.

This is the readable implementation the fast kernels are checked against.
It records every message, aggregation, and slot value. With exact=True
all arithmetic runs in fractions.Fraction, which settles any doubt about
float rounding (inputs are converted via Fraction(float), i.e. the exact
binary value).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import ConfigurationError
from ..graphs import EMPTY_MASK, EdgeMask, apply_mask
from ..models import FeatureSequence, ModelSpec, ReadoutRule, TemporalMode
from .ops import NodeState, init_hidden, msg_value, readout_node, upd_state


@dataclass
class Trace:
    """Everything one forward run computed.

    Indexing helpers take 1-indexed nodes, steps t=1..T, and layers l=1..L
    (states additionally expose layer 0). Messages are stored for every
    directed base-graph edge; masked edges hold exact zeros.
    """

    spec: ModelSpec
    X: FeatureSequence
    mask: EdgeMask
    messages: list  # [t-1][l-1] -> {(i, j): value}
    agg: list       # [t-1][l-1] -> [value per node]
    states: list    # [t-1][l] -> [NodeState per node], l = 0..L
    hidden: list    # [t] -> [value per node], t = 0..T (hidden[0] is zero)
    Y: tuple

    @property
    def T(self) -> int:
        return self.X.T

    @property
    def n(self) -> int:
        return self.spec.n

    def m(self, t: int, l: int, i: int, j: int):
        return self.messages[t - 1][l - 1].get((i, j), 0.0)

    def a(self, t: int, l: int, i: int):
        return self.agg[t - 1][l - 1][i - 1]

    def h(self, t: int, l: int, i: int) -> NodeState:
        return self.states[t - 1][l][i - 1]

    def H(self, t: int, i: int):
        return self.hidden[t][i - 1]

    def to_json_dict(self) -> dict:
        def num(v):
            return str(v) if isinstance(v, Fraction) else float(v)

        n = self.n
        msgs = []
        for ti, per_layer in enumerate(self.messages):
            for li, mdict in enumerate(per_layer):
                rows = [[num(mdict.get((i, j), 0.0)) for j in range(1, n + 1)]
                        for i in range(1, n + 1)]
                msgs.append({"t": ti + 1, "l": li + 1, "values": rows})
        states = []
        for ti, per_layer in enumerate(self.states):
            for l, row in enumerate(per_layer):
                states.append({
                    "t": ti + 1,
                    "l": l,
                    "nodes": [{k: num(v) for k, v in st.as_dict().items()} for st in row],
                })
        return {
            "model": self.spec.name,
            "T": self.T,
            "n": n,
            "layers": self.spec.layers,
            "mask": self.mask.to_json_list(),
            "X": [[num(v) for v in row] for row in self.X.values],
            "messages": msgs,
            "aggregates": [
                {"t": ti + 1, "l": li + 1, "values": [num(v) for v in row]}
                for ti, per_layer in enumerate(self.agg)
                for li, row in enumerate(per_layer)
            ],
            "states": states,
            "hidden": [[num(v) for v in row] for row in self.hidden],
            "Y": [num(v) for v in self.Y],
        }


def forward(spec: ModelSpec, X: FeatureSequence, mask: EdgeMask = EMPTY_MASK,
            exact: bool = False):
    """Run the model over X; returns (Y, Trace)."""
    if X.n != spec.n:
        raise ConfigurationError(f"input has n={X.n}, model graph has n={spec.n}")
    mask.validate(spec.graph)
    n = spec.n
    live = apply_mask(spec.graph, mask)
    live_neighbors = [live.neighbors(i) for i in range(1, n + 1)]
    base_edges = [(i, j) for i, j in spec.graph.sorted_edges()]

    def conv(v):
        return Fraction(v) if exact else float(v)

    zero = conv(0.0)
    h_prev = [zero] * n
    hidden = [list(h_prev)]
    all_msgs, all_agg, all_states = [], [], []
    y_split = None

    for t in range(1, X.T + 1):
        states = [init_hidden(spec, i, conv(X.at(t, i)), h_prev[i - 1])
                  for i in range(1, n + 1)]
        per_layer_states = [list(states)]
        per_layer_msgs, per_layer_agg = [], []
        for _ in range(spec.layers):
            sent = [msg_value(spec, states[i - 1]) for i in range(1, n + 1)]
            mdict = {}
            for i, j in base_edges:
                masked = (i, j) in mask.removed
                mdict[(i, j)] = zero if masked else sent[i - 1]
                mdict[(j, i)] = zero if masked else sent[j - 1]
            agg = []
            for i in range(1, n + 1):
                a = zero
                for j in live_neighbors[i - 1]:
                    a = a + sent[j - 1]
                agg.append(a)
            states = [upd_state(spec, states[i - 1], agg[i - 1]) for i in range(1, n + 1)]
            per_layer_msgs.append(mdict)
            per_layer_agg.append(agg)
            per_layer_states.append(list(states))
        h_t, y_t = [], []
        for i in range(1, n + 1):
            h_i, y_i = readout_node(spec, states[i - 1])
            h_t.append(h_i)
            y_t.append(h_i if y_i is None else y_i)
        hidden.append(h_t)
        if spec.readout_rule is ReadoutRule.SPLIT_A:
            y_split = y_t
        h_prev = h_t if spec.temporal_mode is TemporalMode.TGNN else [zero] * n
        all_msgs.append(per_layer_msgs)
        all_agg.append(per_layer_agg)
        all_states.append(per_layer_states)

    Y = tuple(y_split) if y_split is not None else tuple(hidden[-1])
    trace = Trace(spec=spec, X=X, mask=mask, messages=all_msgs, agg=all_agg,
                  states=all_states, hidden=hidden, Y=Y)
    return Y, trace
