"""Perturbation sets: bounded input/edge interventions plus the model's
responses, in a canonical order so two sets can be compared bitwise.

Three classes:
  node:          vary node inputs, keep every edge (masks all empty).
  edge:          one shared input, every subset of edges knocked out.
  node-and-edge: full product of sampled inputs and all edge subsets.

Records are sorted by a byte key built from the mask and the big-endian
float64 image of the input, so a set's on-disk form and its comparison
order never depend on generation order.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .engine import ForwardOracle
from .errors import ConfigurationError, IncomparableError, InvalidSetError
from .graphs import EMPTY_MASK, EdgeMask, enumerate_masks
from .models import ModelSpec

FORMAT_NAME = "tgnnlab-perturbations"


class PerturbationClass(Enum):
    NODE = "node"
    EDGE = "edge"
    NODE_AND_EDGE = "node-and-edge"


def parse_class(s: str) -> PerturbationClass:
    for c in PerturbationClass:
        if c.value == s:
            return c
    raise InvalidSetError(f"unknown perturbation class {s!r}")


# ---------------------------------------------------------------- sampling

def sample_bounded(rng: np.random.Generator, trials: int, T: int, n: int,
                   K: float, constraint: str | None = None,
                   low: float | None = None) -> np.ndarray:
    """(trials, T, n) inputs, uniform on [low, K] (low defaults to -K).

    constraint="x2_gt_x3" resamples the (node 2, node 3) pair at every step
    until node 2 is strictly larger, which is uniform on that half-space.
    """
    if trials < 0:
        raise ConfigurationError(f"trials must be >= 0, got {trials}")
    lo = -K if low is None else low
    if lo >= K:
        raise ConfigurationError(f"empty sample range [{lo}, {K}]")
    X = rng.uniform(lo, K, size=(trials, T, n))
    if constraint is None:
        return X
    if constraint != "x2_gt_x3":
        raise ConfigurationError(f"unknown constraint {constraint!r}")
    if n < 3:
        raise ConfigurationError("constraint x2_gt_x3 needs at least 3 nodes")
    bad = ~(X[:, :, 1] > X[:, :, 2])
    while bad.any():
        cnt = int(bad.sum())
        X[:, :, 1][bad] = rng.uniform(lo, K, size=cnt)
        X[:, :, 2][bad] = rng.uniform(lo, K, size=cnt)
        bad = ~(X[:, :, 1] > X[:, :, 2])
    return X


# ----------------------------------------------------------------- records

@dataclass(frozen=True)
class PerturbationRecord:
    X: tuple[tuple[float, ...], ...]
    mask: EdgeMask
    Y: tuple[float, ...]

    def x_array(self) -> np.ndarray:
        return np.asarray(self.X, dtype=np.float64)


def _record_key(rec: PerturbationRecord) -> tuple[bytes, bytes]:
    mask_bytes = b"".join(struct.pack(">II", i, j) for i, j in rec.mask.sorted_edges())
    x_bytes = np.asarray(rec.X, dtype=">f8").tobytes()
    return (mask_bytes, x_bytes)


@dataclass(frozen=True)
class PerturbationSet:
    kind: PerturbationClass
    model: str
    K: float
    seed: int
    records: tuple[PerturbationRecord, ...]

    @property
    def T(self) -> int:
        return len(self.records[0].X) if self.records else 0

    @property
    def n(self) -> int:
        return len(self.records[0].X[0]) if self.records else 0


def validate_set(ps: PerturbationSet) -> None:
    """Enforce the shape invariants of each perturbation class."""
    if not ps.records:
        raise InvalidSetError("a perturbation set cannot be empty")
    shapes = {(len(r.X), len(r.X[0])) for r in ps.records}
    if len(shapes) != 1:
        raise InvalidSetError(f"records have mixed input shapes {sorted(shapes)}")
    xs = {r.X for r in ps.records}
    masks = {r.mask.removed for r in ps.records}
    if ps.kind is PerturbationClass.NODE:
        if masks != {frozenset()}:
            raise InvalidSetError("node-class records must keep every edge")
    elif ps.kind is PerturbationClass.EDGE:
        if len(xs) != 1:
            raise InvalidSetError("edge-class records must share one input")
        if len(masks) != len(ps.records):
            raise InvalidSetError("edge-class records must have distinct masks")
    else:
        combos = {(r.X, r.mask.removed) for r in ps.records}
        if len(combos) != len(ps.records) or len(xs) * len(masks) != len(ps.records):
            raise InvalidSetError(
                "node-and-edge records must form a full input-by-mask product"
            )


def build_set(spec: ModelSpec, kind: PerturbationClass | str, trials: int = 100,
              T: int = 2, seed: int = 0, constraint: str | None = None) -> PerturbationSet:
    """Sample a perturbation set of the given class and record the model's
    responses. edge-class sets take exactly one sampled input (trials=1)."""
    if isinstance(kind, str):
        kind = parse_class(kind)
    if trials < 1:
        raise InvalidSetError(f"trials must be >= 1, got {trials}")
    if kind is PerturbationClass.EDGE and trials != 1:
        raise InvalidSetError("edge-class sets use a single shared input; set trials=1")
    oracle = ForwardOracle(spec)
    K = spec.bound()
    rng = np.random.default_rng(seed)
    X = sample_bounded(rng, trials, T, spec.n, K, constraint)
    if kind is PerturbationClass.NODE:
        mask_list = [EMPTY_MASK]
    else:
        mask_list = list(enumerate_masks(spec.graph))
    records = []
    for mask in mask_list:
        Y = oracle.batch(X, mask)
        for b in range(trials):
            records.append(PerturbationRecord(
                X=tuple(tuple(row) for row in X[b].tolist()),
                mask=mask,
                Y=tuple(Y[b].tolist()),
            ))
    records.sort(key=_record_key)
    ps = PerturbationSet(kind=kind, model=spec.name, K=K, seed=seed,
                         records=tuple(records))
    validate_set(ps)
    return ps


# -------------------------------------------------------------- comparison

def response_gap(a: PerturbationSet, b: PerturbationSet) -> float:
    """Largest per-output absolute response difference over matched records.
    The two sets must describe the same perturbations."""
    if a.kind is not b.kind:
        raise IncomparableError(f"class mismatch: {a.kind.value} vs {b.kind.value}")
    if len(a.records) != len(b.records):
        raise IncomparableError(
            f"record count mismatch: {len(a.records)} vs {len(b.records)}"
        )
    gap = 0.0
    for ra, rb in zip(a.records, b.records):
        if ra.X != rb.X or ra.mask.removed != rb.mask.removed:
            raise IncomparableError("sets contain different perturbations")
        if len(ra.Y) != len(rb.Y):
            raise IncomparableError("responses have different widths")
        gap = max(gap, max(abs(x - y) for x, y in zip(ra.Y, rb.Y)) if ra.Y else 0.0)
    return gap


def sets_equal(a: PerturbationSet, b: PerturbationSet, tolerance: float = 0.0) -> bool:
    return response_gap(a, b) <= tolerance


# --------------------------------------------------------------------- io

def save_set(ps: PerturbationSet, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        header = {
            "format": FORMAT_NAME,
            "class": ps.kind.value,
            "model": ps.model,
            "K": ps.K,
            "seed": ps.seed,
            "count": len(ps.records),
        }
        f.write(json.dumps(header, sort_keys=True) + "\n")
        for r in ps.records:
            row = {
                "X": [list(t) for t in r.X],
                "mask": r.mask.to_json_list(),
                "Y": list(r.Y),
            }
            f.write(json.dumps(row, sort_keys=True) + "\n")


def load_set(path) -> PerturbationSet:
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln for ln in f.read().splitlines() if ln.strip()]
    if not lines:
        raise InvalidSetError(f"{path}: empty file")
    header = json.loads(lines[0])
    if header.get("format") != FORMAT_NAME:
        raise InvalidSetError(f"{path}: not a {FORMAT_NAME} file")
    records = []
    for ln in lines[1:]:
        row = json.loads(ln)
        records.append(PerturbationRecord(
            X=tuple(tuple(float(v) for v in t) for t in row["X"]),
            mask=EdgeMask.from_json_list(row["mask"]),
            Y=tuple(float(v) for v in row["Y"]),
        ))
    if len(records) != int(header["count"]):
        raise InvalidSetError(
            f"{path}: header promises {header['count']} records, found {len(records)}"
        )
    ps = PerturbationSet(
        kind=parse_class(header["class"]),
        model=str(header["model"]),
        K=float(header["K"]),
        seed=int(header["seed"]),
        records=tuple(records),
    )
    validate_set(ps)
    return ps
