"""tgnnlab: hand-constructed temporal GNN pairs, their transparent dynamic
Bayesian network counterparts, and the verification/explainer toolkit that
demonstrates where perturbation-based explanations go blind.
"""
from .constructions import MODEL_ID_STRINGS, ModelId, build, bound_K, paired, parse_model_id
from .engine import ForwardOracle, Trace, active_backend, compiled_available, forward
from .graphs import (
    EMPTY_MASK,
    EdgeMask,
    Graph,
    apply_mask,
    enumerate_masks,
    make_line_graph,
    make_square_graph,
)
from .models import FeatureSequence, ModelSpec, MsgRule, ReadoutRule, TemporalMode

__version__ = "0.1.0"

__all__ = [
    "EMPTY_MASK", "EdgeMask", "FeatureSequence", "ForwardOracle", "Graph",
    "MODEL_ID_STRINGS", "ModelId", "ModelSpec", "MsgRule", "ReadoutRule",
    "TemporalMode", "Trace", "active_backend", "apply_mask", "bound_K",
    "build", "compiled_available", "enumerate_masks", "forward",
    "make_line_graph", "make_square_graph", "paired", "parse_model_id",
    "__version__",
]
