"""Pure-Python batch evaluator, vectorized over the batch axis with numpy.

Operation-for-operation mirror of the compiled kernel: same pairwise max
forms, same ascending-neighbour aggregation order, so results are bitwise
identical to the compiled backend on any IEEE-754 double platform.
"""
from __future__ import annotations

import numpy as np


def run_batch(km, X: np.ndarray, with_messages: bool = False):
    """Evaluate a (B, T, n) input batch; returns (Y, H, M or None)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    B, T, n = X.shape
    L = 2
    Y = np.empty((B, n))
    H = np.empty((B, T, n))
    M = np.zeros((B, T, L, n, n)) if with_messages else None
    adjf = km.adj.astype(np.float64)
    hs, hz, ho = km.hs, km.hz, km.ho
    ht = np.zeros((B, n))

    def messages(layer_hr):
        if km.msg_rule == 0:
            return np.maximum(layer_hr - hs, 0.0)
        return np.maximum(np.maximum(layer_hr, ht) - hs, 0.0)

    def aggregate(mv):
        a = np.zeros((B, n))
        for j in range(n):
            for i in km.neighbors[j]:
                a[:, j] += mv[:, i]
        return a

    for t in range(T):
        hr0 = X[:, t, :]
        mv = messages(hr0)
        if with_messages:
            M[:, t, 0] = mv[:, :, None] * adjf[None, :, :]
        hr1 = aggregate(mv)
        mv = messages(hr1)
        if with_messages:
            M[:, t, 1] = mv[:, :, None] * adjf[None, :, :]
        hr2 = aggregate(mv)
        if km.readout == 0:
            h = np.maximum(np.maximum(hr2, ht) - hz, 0.0)
        elif km.readout == 1:
            h = np.maximum(np.maximum(np.maximum(hr2, hr1), ht) - hz, 0.0)
        else:
            h = np.maximum(hr2 - hz, 0.0)
        H[:, t] = h
        if t == T - 1:
            Y[:] = np.maximum(hr2 - ho, 0.0) if km.readout == 2 else h
        ht = h if km.temporal == 0 else np.zeros((B, n))
    return Y, H, M
