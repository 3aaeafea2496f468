"""Two-slice dynamic Bayesian network structures and the functional
consistency/minimality checks that relate them to the models.

A Dbn has undirected within-step edges (`intra`) and directed step-to-step
edges (`inter`, self-pairs allowed). The variable associated with node i at
step t is that node's *bundle*: every message it sends at step t (both
layers, every base-graph neighbour; masked edges contribute fixed zeros),
its hidden output H[t][i], and for split-readout models also its Y
contribution at the final step.

Consistency is checked functionally: around `trials` random bounded base
inputs, each input coordinate is swept over a grid spanning [-K, K] while
everything else is held fixed. A violation is a bundle that changes
bitwise although all of its claimed determinants (the node's own input at
t, intra-neighbour bundles at t, inter-parent bundles at t-1) are bitwise
unchanged. Minimality additionally demands that every single-edge removal
breaks consistency. Sweep evidence depends only on the model, so it is
cached per process and shared across all candidate structures.
"""
from __future__ import annotations

import time
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .constructions import ModelId, parse_model_id
from .engine import compile_kernel_model, run_batch
from .engine.reference import Trace
from .errors import ConfigurationError, IncomparableError, InvalidSizeError
from .graphs import _normalize_edge
from .models import ModelSpec, ReadoutRule, TemporalMode
from .report import Status, VerificationReport


@dataclass(frozen=True)
class Dbn:
    n: int
    intra: frozenset[tuple[int, int]]
    inter: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        norm = frozenset(_normalize_edge(i, j) for i, j in self.intra)
        object.__setattr__(self, "intra", norm)
        object.__setattr__(
            self, "inter", frozenset((int(p), int(i)) for p, i in self.inter)
        )
        for i, j in norm:
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise InvalidSizeError(f"intra edge ({i}, {j}) outside 1..{self.n}")
        for p, i in self.inter:
            if not (1 <= p <= self.n and 1 <= i <= self.n):
                raise InvalidSizeError(f"inter edge ({p}, {i}) outside 1..{self.n}")

    def edge_count(self) -> int:
        return len(self.intra) + len(self.inter)

    def intra_neighbors(self, i: int) -> tuple[int, ...]:
        out = [b if a == i else a for a, b in self.intra if i in (a, b)]
        return tuple(sorted(out))

    def inter_parents(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(p for p, q in self.inter if q == i))

    def without_intra(self, edge: tuple[int, int]) -> "Dbn":
        return Dbn(self.n, self.intra - {_normalize_edge(*edge)}, self.inter)

    def without_inter(self, edge: tuple[int, int]) -> "Dbn":
        return Dbn(self.n, self.intra, self.inter - {edge})

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "intra": [list(e) for e in sorted(self.intra)],
            "inter": [list(e) for e in sorted(self.inter)],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Dbn":
        return cls(
            int(d["n"]),
            frozenset((int(i), int(j)) for i, j in d["intra"]),
            frozenset((int(i), int(j)) for i, j in d["inter"]),
        )


def dbn_equal(a: Dbn, b: Dbn) -> bool:
    if a.n != b.n:
        raise IncomparableError(f"cannot compare structures on {a.n} and {b.n} nodes")
    return a.intra == b.intra and a.inter == b.inter


# ------------------------------------------------------------- transparent

_TRANSPARENT = {
    ("GV", 1): ((4, {(3, 2), (2, 1)}, {(1, 1)}), "B1v"),
    ("GV", 2): ((4, {(3, 4), (4, 1)}, {(1, 1)}), "B2v"),
    ("GE", 1): ((3, {(3, 2), (2, 1)}, {(1, 1)}), "B1e"),
    ("GE", 2): ((3, {(2, 1)}, {(1, 1)}), "B2e"),
    ("GA", 1): ((3, {(3, 2), (2, 1)}, {(1, 1)}), "B1a"),
    ("GA", 2): ((3, {(3, 2), (2, 1)}, {(3, 3)}), "B2a"),
}


def transparent_dbn(model_id: ModelId | str) -> Dbn:
    """The exact dependency structure of the named hand-constructed model."""
    mid = parse_model_id(model_id) if isinstance(model_id, str) else model_id
    (n, intra, inter), _ = _TRANSPARENT[(mid.family, mid.which)]
    if mid.temporal is TemporalMode.GNN:
        inter = set()
    return Dbn(n, frozenset(intra), frozenset(inter))


def transparent_name(model_id: ModelId | str) -> str:
    mid = parse_model_id(model_id) if isinstance(model_id, str) else model_id
    _, name = _TRANSPARENT[(mid.family, mid.which)]
    if mid.temporal is TemporalMode.GNN:
        name += "-gnn"
    return name


@dataclass(frozen=True)
class UnrolledDbn:
    """Flat network over (node, step) variables for a fixed horizon."""

    variables: tuple[tuple[int, int], ...]
    intra_edges: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    inter_edges: tuple[tuple[tuple[int, int], tuple[int, int]], ...]

    def edge_count(self) -> int:
        return len(self.intra_edges) + len(self.inter_edges)


def unroll(d: Dbn, T: int) -> UnrolledDbn:
    if T < 1:
        raise InvalidSizeError(f"horizon must be >= 1, got {T}")
    variables = tuple((i, t) for t in range(1, T + 1) for i in range(1, d.n + 1))
    intra = tuple(((i, t), (j, t)) for t in range(1, T + 1) for i, j in sorted(d.intra))
    inter = tuple(((p, t), (q, t + 1)) for t in range(1, T) for p, q in sorted(d.inter))
    return UnrolledDbn(variables, intra, inter)


# ----------------------------------------------------------------- bundles

@dataclass(frozen=True)
class VariableBundle:
    node: int
    t: int
    values: tuple


def bundle_labels(spec: ModelSpec, node: int, final_step: bool) -> tuple[str, ...]:
    labels = [
        f"m[l={l}]->{j}"
        for l in range(1, spec.layers + 1)
        for j in spec.graph.neighbors(node)
    ]
    labels.append("H")
    if final_step and spec.readout_rule is ReadoutRule.SPLIT_A:
        labels.append("Y")
    return tuple(labels)


def extract_bundles(trace: Trace) -> dict[tuple[int, int], VariableBundle]:
    """Per-(node, step) bundle values from a reference trace. Layout is fixed
    per model: masked-edge messages appear as exact zeros."""
    spec = trace.spec
    split = spec.readout_rule is ReadoutRule.SPLIT_A
    out = {}
    for t in range(1, trace.T + 1):
        for i in range(1, spec.n + 1):
            vals = [
                trace.m(t, l, i, j)
                for l in range(1, spec.layers + 1)
                for j in spec.graph.neighbors(i)
            ]
            vals.append(trace.H(t, i))
            if split and t == trace.T:
                vals.append(trace.Y[i - 1])
            out[(i, t)] = VariableBundle(i, t, tuple(vals))
    return out


# ------------------------------------------------------------ sweep evidence

DEFAULT_GRID_POINTS = 17


@dataclass
class SweepEvidence:
    """Bitwise bundle-change table for single-coordinate sweeps.

    changed[b, c, g, t, i] says whether node i's bundle at step t differed
    from the base run when coordinate c of base point b was set to grid[g].
    """

    model_name: str
    T: int
    n: int
    trials: int
    seed: int
    grid: np.ndarray
    bases: np.ndarray
    coords: tuple[tuple[int, int], ...]
    changed: np.ndarray


_EVIDENCE_CACHE: OrderedDict = OrderedDict()
_EVIDENCE_CACHE_MAX = 12


def sweep_evidence(spec: ModelSpec, trials: int, T: int = 2, seed: int = 0,
                   grid_points: int = DEFAULT_GRID_POINTS,
                   base_sampler=None) -> SweepEvidence:
    key = (spec.name, spec.k_s, spec.k_z, trials, T, seed, grid_points,
           base_sampler is None)
    if base_sampler is None and key in _EVIDENCE_CACHE:
        _EVIDENCE_CACHE.move_to_end(key)
        return _EVIDENCE_CACHE[key]

    n = spec.n
    K = spec.bound()
    if base_sampler is None:
        rng = np.random.default_rng(seed)
        bases = rng.uniform(-K, K, size=(trials, T, n))
    else:
        bases = np.asarray(base_sampler(trials), dtype=np.float64)
        if bases.shape != (trials, T, n):
            raise ConfigurationError(
                f"base sampler produced shape {bases.shape}, wanted {(trials, T, n)}"
            )
    grid = np.linspace(-K, K, grid_points)
    coords = tuple((t, i) for t in range(T) for i in range(n))
    nc, G = len(coords), grid_points
    km = compile_kernel_model(spec)
    split = spec.readout_rule is ReadoutRule.SPLIT_A

    changed = np.empty((trials, nc, G, T, n), dtype=bool)
    chunk = max(1, 2 ** 22 // max(1, nc * G * T * n * 8))
    for lo in range(0, trials, chunk):
        hi = min(trials, lo + chunk)
        Xb = bases[lo:hi]
        C = hi - lo
        Y0, H0, M0 = run_batch(km, Xb, with_messages=True)
        Xv = np.broadcast_to(Xb[:, None, None], (C, nc, G, T, n)).copy()
        for ci, (tt, ii) in enumerate(coords):
            Xv[:, ci, :, tt, ii] = grid[None, :]
        Yv, Hv, Mv = run_batch(km, Xv.reshape(C * nc * G, T, n), with_messages=True)
        mdiff = (Mv.reshape(C, nc, G, T, 2, n, n) != M0[:, None, None]).any(axis=(4, 6))
        hdiff = Hv.reshape(C, nc, G, T, n) != H0[:, None, None]
        ch = mdiff | hdiff
        if split:
            ch[:, :, :, T - 1, :] |= Yv.reshape(C, nc, G, n) != Y0[:, None, None]
        changed[lo:hi] = ch

    ev = SweepEvidence(model_name=spec.name, T=T, n=n, trials=trials, seed=seed,
                       grid=grid, bases=bases, coords=coords, changed=changed)
    if base_sampler is None:
        _EVIDENCE_CACHE[key] = ev
        while len(_EVIDENCE_CACHE) > _EVIDENCE_CACHE_MAX:
            _EVIDENCE_CACHE.popitem(last=False)
    return ev


def _violation_table(ev: SweepEvidence, d: Dbn) -> np.ndarray:
    """Boolean table of consistency violations, same shape as ev.changed."""
    if d.n != ev.n:
        raise IncomparableError(f"structure has n={d.n}, evidence has n={ev.n}")
    n, T = ev.n, ev.T
    A = np.zeros((n, n), dtype=np.uint8)
    for i, j in d.intra:
        A[i - 1, j - 1] = A[j - 1, i - 1] = 1
    P = np.zeros((n, n), dtype=np.uint8)
    for p, i in d.inter:
        P[p - 1, i - 1] = 1
    ch = ev.changed
    chu = ch.astype(np.uint8)
    nb = (chu @ A) > 0
    par = (chu @ P) > 0
    par_prev = np.zeros_like(par)
    par_prev[..., 1:, :] = par[..., :-1, :]
    own = np.zeros((len(ev.coords), T, n), dtype=bool)
    for ci, (tt, ii) in enumerate(ev.coords):
        own[ci, tt, ii] = True
    det = own[None, :, None] | nb | par_prev
    return ch & ~det


def _first_violations(ev: SweepEvidence, viol: np.ndarray, limit: int = 3) -> list:
    out = []
    for b, ci, g, t, i in np.argwhere(viol)[:limit]:
        tt, ii = ev.coords[ci]
        x_alt = ev.bases[b].copy()
        x_alt[tt, ii] = ev.grid[g]
        out.append({
            "X": ev.bases[b].tolist(),
            "X_swept": x_alt.tolist(),
            "swept_coordinate": [int(tt) + 1, int(ii) + 1],
            "variable": [int(i) + 1, int(t) + 1],
        })
    return out


def check_consistency(d: Dbn, spec: ModelSpec, trials: int = 10000, T: int = 2,
                      seed: int = 0, grid_points: int = DEFAULT_GRID_POINTS,
                      base_sampler=None, check_id: str | None = None) -> VerificationReport:
    """PASS iff no sweep exposes a bundle change unexplained by `d`."""
    cid = check_id or f"consistency[{spec.name}]"
    start = time.perf_counter()
    if trials <= 0:
        return VerificationReport(
            check_id=cid, status=Status.INCONCLUSIVE, trials=0, max_discrepancy=0.0,
            seed=seed, notes=["no base points sampled"],
            runtime_ms=(time.perf_counter() - start) * 1e3)
    ev = sweep_evidence(spec, trials, T, seed, grid_points, base_sampler)
    viol = _violation_table(ev, d)
    count = int(viol.sum())
    report = VerificationReport(
        check_id=cid,
        status=Status.PASS if count == 0 else Status.FAIL,
        trials=trials,
        max_discrepancy=0.0,
        seed=seed,
        counterexamples=_first_violations(ev, viol),
        notes=[] if count == 0 else [f"unexplained bundle changes: {count}"],
        params={"model": spec.name, "T": T, "grid_points": grid_points,
                "structure": d.to_json_dict()},
        runtime_ms=(time.perf_counter() - start) * 1e3,
    )
    return report


def check_minimality(d: Dbn, spec: ModelSpec, trials: int = 10000, T: int = 2,
                     seed: int = 0, grid_points: int = DEFAULT_GRID_POINTS,
                     check_id: str | None = None) -> VerificationReport:
    """PASS iff removing any single edge from `d` breaks consistency."""
    cid = check_id or f"minimality[{spec.name}]"
    start = time.perf_counter()
    if trials <= 0:
        return VerificationReport(
            check_id=cid, status=Status.INCONCLUSIVE, trials=0, max_discrepancy=0.0,
            seed=seed, notes=["no base points sampled"],
            runtime_ms=(time.perf_counter() - start) * 1e3)
    ev = sweep_evidence(spec, trials, T, seed, grid_points)
    redundant = []
    for edge in sorted(d.intra):
        if not _violation_table(ev, d.without_intra(edge)).any():
            redundant.append(("intra", edge))
    for edge in sorted(d.inter):
        if not _violation_table(ev, d.without_inter(edge)).any():
            redundant.append(("inter", edge))
    report = VerificationReport(
        check_id=cid,
        status=Status.PASS if not redundant else Status.FAIL,
        trials=trials,
        max_discrepancy=0.0,
        seed=seed,
        notes=[f"removable without breaking consistency: {kind} {edge}"
               for kind, edge in redundant],
        params={"model": spec.name, "T": T, "grid_points": grid_points,
                "structure": d.to_json_dict()},
        runtime_ms=(time.perf_counter() - start) * 1e3,
    )
    return report
