from __future__ import annotations

import numpy as np
import pytest

from tgnnlab.constructions import build
from tgnnlab.models import FeatureSequence


def running_max_output(family: str, X: FeatureSequence, memoryless: bool = False):
    """Independent task oracle: expected output vector, computed directly
    from the input sequence (never through the message-passing engine).

    family: which node inputs feed node 1's running max.
      gv       -> node 3 of the square graph
      ge_full  -> nodes 2 and 3 of the line
      ge_node2 -> node 2 of the line
      ga       -> node 3 of the line
    All other nodes output 0. Memoryless variants see only the final step.
    """
    sources = {"gv": (3,), "ge_full": (2, 3), "ge_node2": (2,), "ga": (3,)}[family]
    steps = [X.T] if memoryless else range(1, X.T + 1)
    best = 0.0
    for t in steps:
        for i in sources:
            best = max(best, X.at(t, i))
    return tuple([best] + [0.0] * (X.n - 1))


@pytest.fixture(scope="session")
def specs():
    return {name: build(name) for name in
            ("phi1v", "phi2v", "phi1e", "phi2e", "phi1a", "phi2a")}


def rand_bounded(rng: np.random.Generator, T: int, n: int, K: float = 10.0) -> FeatureSequence:
    return FeatureSequence.from_array(rng.uniform(-K, K, size=(T, n)))
