"""Forward evaluation: reference tracer plus two batch backends.

`forward` (from .reference) is the readable evaluator that records full
traces and supports exact rational arithmetic. `run_batch` is the hot
path: it dispatches to the compiled Cython kernel when built, otherwise
to the numpy fallback. Both backends are bitwise identical; set
TGNNLAB_PYTHON_KERNEL=1 to force the fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from ..graphs import EMPTY_MASK, EdgeMask, apply_mask
from ..models import FeatureSequence, ModelSpec, MsgRule, ReadoutRule, TemporalMode
from . import fallback
from .ops import NodeState, init_hidden, msg_value, readout_node, relu, upd_state
from .reference import Trace, forward

try:
    from . import _core
except ImportError:  # extension not built; numpy fallback takes over
    _core = None

_MSG_CODE = {MsgRule.GATED_RECEIVE: 0, MsgRule.MAX_COMBINATION: 1}
_READOUT_CODE = {
    ReadoutRule.MAXGATE_V: 0,
    ReadoutRule.NESTEDMAX_E: 1,
    ReadoutRule.SPLIT_A: 2,
}
_TEMPORAL_CODE = {TemporalMode.TGNN: 0, TemporalMode.GNN: 1}


def compiled_available() -> bool:
    return _core is not None


def active_backend() -> str:
    if _core is None or os.environ.get("TGNNLAB_PYTHON_KERNEL"):
        return "python"
    return "compiled"


@dataclass(frozen=True)
class KernelModel:
    """ModelSpec plus mask lowered to plain arrays for the batch kernels."""

    n: int
    msg_rule: int
    readout: int
    temporal: int
    hs: np.ndarray
    hz: np.ndarray
    ho: np.ndarray
    adj: np.ndarray
    neighbors: tuple[tuple[int, ...], ...]


def compile_kernel_model(spec: ModelSpec, mask: EdgeMask = EMPTY_MASK) -> KernelModel:
    if spec.layers != 2:
        raise ConfigurationError("batch kernels are specialized to 2 layers")
    mask.validate(spec.graph)
    live = apply_mask(spec.graph, mask)
    n = spec.n
    ho = spec.constants.get("ho", (0.0,) * n)
    return KernelModel(
        n=n,
        msg_rule=_MSG_CODE[spec.msg_rule],
        readout=_READOUT_CODE[spec.readout_rule],
        temporal=_TEMPORAL_CODE[spec.temporal_mode],
        hs=np.array(spec.constants["hs"], dtype=np.float64),
        hz=np.array(spec.constants["hz"], dtype=np.float64),
        ho=np.array(ho, dtype=np.float64),
        adj=np.ascontiguousarray(live.adjacency()),
        neighbors=tuple(tuple(j - 1 for j in live.neighbors(i)) for i in range(1, n + 1)),
    )


def run_batch(km: KernelModel, X: np.ndarray, with_messages: bool = False,
              backend: str | None = None):
    """Evaluate a (B, T, n) float64 batch; returns (Y, H, M or None)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 3 or X.shape[2] != km.n:
        raise ConfigurationError(f"batch shape {X.shape} does not match n={km.n}")
    which = backend if backend is not None else active_backend()
    if which == "compiled":
        if _core is None:
            raise ConfigurationError("compiled backend requested but not built")
        B, T, n = X.shape
        Y = np.empty((B, n))
        H = np.empty((B, T, n))
        M = np.zeros((B, T, 2, n, n)) if with_messages else np.zeros((0, 0, 0, 0, 0))
        _core.run_batch(km.msg_rule, km.readout, km.temporal, km.hs, km.hz, km.ho,
                        km.adj, X, Y, H, M, with_messages)
        return Y, H, (M if with_messages else None)
    if which != "python":
        raise ConfigurationError(f"unknown backend {which!r}")
    return fallback.run_batch(km, X, with_messages)


class ForwardOracle:
    """Black-box forward access for explainers: outputs only, no trace."""

    def __init__(self, spec: ModelSpec):
        self._spec = spec
        self._kms: dict = {}

    @property
    def n(self) -> int:
        return self._spec.n

    @property
    def graph(self):
        return self._spec.graph

    @property
    def model_name(self) -> str:
        return self._spec.name

    def _km(self, mask: EdgeMask) -> KernelModel:
        key = mask.sorted_edges()
        if key not in self._kms:
            self._kms[key] = compile_kernel_model(self._spec, mask)
        return self._kms[key]

    def batch(self, X: np.ndarray, mask: EdgeMask = EMPTY_MASK) -> np.ndarray:
        Y, _, _ = run_batch(self._km(mask), np.asarray(X, dtype=np.float64))
        return Y

    def __call__(self, X, mask: EdgeMask = EMPTY_MASK) -> tuple[float, ...]:
        arr = X.array() if isinstance(X, FeatureSequence) else np.asarray(X, dtype=np.float64)
        return tuple(self.batch(arr[None, :, :], mask)[0].tolist())


__all__ = [
    "ForwardOracle", "KernelModel", "NodeState", "Trace",
    "active_backend", "compile_kernel_model", "compiled_available",
    "forward", "init_hidden", "msg_value", "readout_node", "relu",
    "run_batch", "upd_state",
]
