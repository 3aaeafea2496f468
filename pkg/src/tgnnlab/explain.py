"""Black-box explainers. Everything here sees the model only through a
ForwardOracle (inputs in, outputs out) plus recorded perturbation evidence;
no internal state, messages, or constants are consulted.

That restriction is the point: two models with identical input/output
behaviour produce bitwise-identical scores and selections here, whatever
their internals look like.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dbn import Dbn
from .engine import ForwardOracle
from .errors import ConfigurationError, EmptyEvidenceError
from .graphs import EdgeMask
from .perturb import PerturbationRecord, PerturbationSet


def _records(evidence) -> tuple[PerturbationRecord, ...]:
    recs = evidence.records if isinstance(evidence, PerturbationSet) else tuple(evidence)
    if not recs:
        raise EmptyEvidenceError("explainers need at least one evidence record")
    return recs


def _by_mask(recs):
    """Group record indices by mask so each group is one batched oracle call."""
    groups: dict = {}
    for idx, r in enumerate(recs):
        groups.setdefault(r.mask, []).append(idx)
    return groups


def occlusion_node_scores(oracle: ForwardOracle, evidence) -> dict[int, float]:
    """Mean L1 output shift when one node's inputs are zeroed, per node.

    Each record is re-evaluated under its own edge mask with node i's input
    column forced to zero at every step; the score for i is the mean over
    records of |Y(X) - Y(X with node i silenced)|_1.
    """
    recs = _records(evidence)
    n = oracle.n
    totals = np.zeros(n)
    for mask, idxs in _by_mask(recs).items():
        X = np.stack([recs[k].x_array() for k in idxs])
        Y0 = np.asarray([recs[k].Y for k in idxs])
        for i in range(n):
            Xz = X.copy()
            Xz[:, :, i] = 0.0
            Yi = oracle.batch(Xz, mask)
            totals[i] += float(np.abs(Yi - Y0).sum())
    count = len(recs)
    return {i + 1: totals[i] / count for i in range(n)}


def occlusion_edge_scores(oracle: ForwardOracle, evidence) -> dict[tuple[int, int], float]:
    """Mean L1 output shift when one base-graph edge is additionally removed.

    Records whose mask already removes the edge contribute zero for it."""
    recs = _records(evidence)
    edges = oracle.graph.sorted_edges()
    totals = {e: 0.0 for e in edges}
    for mask, idxs in _by_mask(recs).items():
        X = np.stack([recs[k].x_array() for k in idxs])
        Y0 = np.asarray([recs[k].Y for k in idxs])
        for e in edges:
            if e in mask.removed:
                continue
            wider = EdgeMask(mask.removed | {e})
            Ye = oracle.batch(X, wider)
            totals[e] += float(np.abs(Ye - Y0).sum())
    count = len(recs)
    return {e: totals[e] / count for e in edges}


def node_sensitivity(evidence) -> dict[int, float]:
    """Observational dependence of the node-1 output on each node's inputs.

    Records are split at the median of node j's time-averaged input; the
    statistic is the absolute difference of the two groups' mean Y1 (zero
    when every summary lands on one side)."""
    recs = _records(evidence)
    X = np.stack([r.x_array() for r in recs])
    y1 = np.asarray([r.Y[0] for r in recs])
    out = {}
    summaries = X.mean(axis=1)
    for j in range(X.shape[2]):
        u = summaries[:, j]
        above = u > np.median(u)
        if not above.any() or above.all():
            out[j + 1] = 0.0
        else:
            out[j + 1] = abs(float(y1[above].mean()) - float(y1[~above].mean()))
    return out


def select_dbn(evidence, candidates: dict[str, Dbn]) -> tuple[str, dict[str, float]]:
    """Pick the candidate structure that best fits observational evidence.

    A candidate pays, for every node with no direct edge into node 1
    (neither intra neighbour nor step-to-step parent), that node's
    sensitivity statistic. Lowest total wins; ties break on the name.
    """
    if not candidates:
        raise ConfigurationError("select_dbn needs at least one candidate")
    sens = node_sensitivity(evidence)
    n = len(sens)
    for name, d in candidates.items():
        if d.n != n:
            raise ConfigurationError(
                f"candidate {name!r} has n={d.n}, evidence has n={n}"
            )
    penalties = {}
    for name in sorted(candidates):
        d = candidates[name]
        direct = set(d.intra_neighbors(1)) | set(d.inter_parents(1)) | {1}
        penalties[name] = sum(sens[j] for j in sorted(sens) if j not in direct)
    best = min(penalties, key=lambda name: (penalties[name], name))
    return best, penalties


def fidelity(oracle: ForwardOracle, evidence, keep: set[int] | frozenset[int],
             eps: float = 0.0) -> float:
    """Fraction of records whose output moves when every input outside
    `keep` is zeroed. 0.0 means the kept nodes fully account for the
    behaviour on this evidence."""
    recs = _records(evidence)
    keep = {int(i) for i in keep}
    bad = [i for i in keep if not (1 <= i <= oracle.n)]
    if bad:
        raise ConfigurationError(f"kept nodes {sorted(bad)} outside 1..{oracle.n}")
    drop = [i for i in range(oracle.n) if (i + 1) not in keep]
    changed = 0
    for mask, idxs in _by_mask(recs).items():
        X = np.stack([recs[k].x_array() for k in idxs])
        Y0 = np.asarray([recs[k].Y for k in idxs])
        Xz = X.copy()
        Xz[:, :, drop] = 0.0
        Yk = oracle.batch(Xz, mask)
        changed += int((np.abs(Yk - Y0).sum(axis=1) > eps).sum())
    return changed / len(recs)


# ------------------------------------------------------------- explanations

EXPLANATION_KINDS = ("node", "edge", "dbn")


@dataclass(frozen=True)
class Explanation:
    kind: str
    model: str
    evidence_count: int
    node_scores: dict[int, float] = field(default_factory=dict)
    edge_scores: dict[tuple[int, int], float] = field(default_factory=dict)
    chosen_dbn: str | None = None
    dbn_penalties: dict[str, float] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        # The serialized form carries no model identity: paired models given
        # matching evidence must produce byte-identical explanation files.
        out: dict = {
            "kind": self.kind,
            "evidence_count": self.evidence_count,
        }
        if self.kind == "node":
            out["node_scores"] = {str(i): v for i, v in sorted(self.node_scores.items())}
        elif self.kind == "edge":
            out["edge_scores"] = {
                f"{i}-{j}": v for (i, j), v in sorted(self.edge_scores.items())
            }
        else:
            out["chosen_dbn"] = self.chosen_dbn
            out["penalties"] = dict(sorted(self.dbn_penalties.items()))
        return out


def explain(oracle: ForwardOracle, evidence, kind: str,
            candidates: dict[str, Dbn] | None = None) -> Explanation:
    """Run one black-box explainer over perturbation evidence."""
    recs = _records(evidence)
    if kind == "node":
        return Explanation(kind, oracle.model_name, len(recs),
                           node_scores=occlusion_node_scores(oracle, recs))
    if kind == "edge":
        return Explanation(kind, oracle.model_name, len(recs),
                           edge_scores=occlusion_edge_scores(oracle, recs))
    if kind == "dbn":
        if not candidates:
            raise ConfigurationError("dbn explanations need candidate structures")
        best, penalties = select_dbn(recs, candidates)
        return Explanation(kind, oracle.model_name, len(recs),
                           chosen_dbn=best, dbn_penalties=penalties)
    raise ConfigurationError(
        f"unknown explanation kind {kind!r}; expected one of {EXPLANATION_KINDS}"
    )
