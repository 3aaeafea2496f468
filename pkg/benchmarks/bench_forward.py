"""Forward-pass throughput: compiled kernel vs numpy fallback vs reference.

Runs a fixed seeded workload through each backend, checks they agree
bitwise, and prints rows/second. The reference evaluator is timed on a
scaled-down slice (it is a readable per-row interpreter, not a batch
engine).

    python3 benchmarks/bench_forward.py [--trials N] [--T N] [--repeat N]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from tgnnlab.constructions import build
from tgnnlab.engine import compile_kernel_model, compiled_available, run_batch
from tgnnlab.engine.reference import forward
from tgnnlab.models import FeatureSequence

MODELS = ("phi1v", "phi2v", "phi1e", "phi2e", "phi1a", "phi2a", "phi1v-gnn")
REFERENCE_ROWS = 200


def time_backend(km, X, backend, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        Y, _, _ = run_batch(km, X, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return Y, best


def time_reference(spec, X, repeat):
    rows = [FeatureSequence.from_array(X[b]) for b in range(X.shape[0])]
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = [forward(spec, r)[0] for r in rows]
        best = min(best, time.perf_counter() - t0)
    return np.asarray(out), best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--T", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not compiled_available():
        print("note: compiled extension not built; timing fallback only")
    print(f"workload: {args.trials} rows, T={args.T}, best of {args.repeat}")
    header = f"{'model':<10s} {'backend':<9s} {'ms':>9s} {'rows/s':>12s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))

    for name in MODELS:
        spec = build(name)
        km = compile_kernel_model(spec)
        rng = np.random.default_rng(args.seed)
        X = rng.uniform(-spec.bound(), spec.bound(), (args.trials, args.T, spec.n))

        Yp, t_py = time_backend(km, X, "python", args.repeat)
        results = [("python", t_py, args.trials)]
        if compiled_available():
            Yc, t_c = time_backend(km, X, "compiled", args.repeat)
            if not np.array_equal(Yc, Yp):
                raise SystemExit(f"{name}: backends disagree")
            results.insert(0, ("compiled", t_c, args.trials))
        Yr, t_ref = time_reference(spec, X[:REFERENCE_ROWS], args.repeat)
        if not np.array_equal(Yr, Yp[:REFERENCE_ROWS]):
            raise SystemExit(f"{name}: reference disagrees with kernels")
        results.append(("reference", t_ref, REFERENCE_ROWS))

        base = next(t / n for b, t, n in results if b == "python")
        for backend, t, n in results:
            per_row = t / n
            print(f"{name:<10s} {backend:<9s} {t * 1e3:>9.2f} {n / t:>12.0f} "
                  f"{base / per_row:>7.2g}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
