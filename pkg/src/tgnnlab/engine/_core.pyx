# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch evaluator.

Mirrors tgnnlab.engine.fallback operation for operation (same pairwise
max forms, same ascending-neighbour aggregation order) so outputs are
bitwise identical across backends.
"""

DEF MAX_NODES = 16


cdef inline double _relu(double x) nogil:
    return x if x > 0.0 else 0.0


cdef inline double _pmax(double a, double b) nogil:
    return a if a > b else b


def run_batch(int msg_rule, int readout, int temporal,
              double[::1] hs, double[::1] hz, double[::1] ho,
              signed char[:, ::1] adj,
              double[:, :, ::1] X,
              double[:, ::1] Y, double[:, :, ::1] H,
              double[:, :, :, :, ::1] M, bint with_messages):
    cdef Py_ssize_t B = X.shape[0]
    cdef Py_ssize_t T = X.shape[1]
    cdef Py_ssize_t n = X.shape[2]
    cdef Py_ssize_t b, t, i, j
    cdef double hr0[MAX_NODES]
    cdef double hr1[MAX_NODES]
    cdef double hr2[MAX_NODES]
    cdef double ht[MAX_NODES]
    cdef double mv[MAX_NODES]
    cdef double acc

    if n > MAX_NODES:
        raise ValueError(f"kernel supports at most {MAX_NODES} nodes, got {n}")

    with nogil:
        for b in range(B):
            for i in range(n):
                ht[i] = 0.0
            for t in range(T):
                for i in range(n):
                    hr0[i] = X[b, t, i]

                for i in range(n):
                    if msg_rule == 0:
                        mv[i] = _relu(hr0[i] - hs[i])
                    else:
                        mv[i] = _relu(_pmax(hr0[i], ht[i]) - hs[i])
                if with_messages:
                    for i in range(n):
                        for j in range(n):
                            M[b, t, 0, i, j] = mv[i] if adj[i, j] else 0.0
                for j in range(n):
                    acc = 0.0
                    for i in range(n):
                        if adj[i, j]:
                            acc = acc + mv[i]
                    hr1[j] = acc

                for i in range(n):
                    if msg_rule == 0:
                        mv[i] = _relu(hr1[i] - hs[i])
                    else:
                        mv[i] = _relu(_pmax(hr1[i], ht[i]) - hs[i])
                if with_messages:
                    for i in range(n):
                        for j in range(n):
                            M[b, t, 1, i, j] = mv[i] if adj[i, j] else 0.0
                for j in range(n):
                    acc = 0.0
                    for i in range(n):
                        if adj[i, j]:
                            acc = acc + mv[i]
                    hr2[j] = acc

                for i in range(n):
                    if readout == 0:
                        H[b, t, i] = _relu(_pmax(hr2[i], ht[i]) - hz[i])
                    elif readout == 1:
                        H[b, t, i] = _relu(_pmax(_pmax(hr2[i], hr1[i]), ht[i]) - hz[i])
                    else:
                        H[b, t, i] = _relu(hr2[i] - hz[i])
                if t == T - 1:
                    for i in range(n):
                        if readout == 2:
                            Y[b, i] = _relu(hr2[i] - ho[i])
                        else:
                            Y[b, i] = H[b, t, i]
                for i in range(n):
                    ht[i] = H[b, t, i] if temporal == 0 else 0.0
    return None
