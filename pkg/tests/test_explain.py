"""Black-box explainer behaviour: occlusion scores, structure selection,
fidelity, and the indistinguishability of behaviourally identical models."""
from __future__ import annotations

import pytest

from tgnnlab.constructions import build
from tgnnlab.dbn import transparent_dbn, transparent_name
from tgnnlab.engine import ForwardOracle
from tgnnlab.errors import ConfigurationError, EmptyEvidenceError
from tgnnlab.explain import (
    Explanation,
    explain,
    fidelity,
    node_sensitivity,
    occlusion_edge_scores,
    occlusion_node_scores,
    select_dbn,
)
from tgnnlab.perturb import build_set


def evidence_for(name, kind="node", trials=150, seed=0, constraint=None, T=2):
    spec = build(name)
    t = 1 if kind == "edge" else trials
    return ForwardOracle(spec), build_set(spec, kind, trials=t, T=T, seed=seed,
                                          constraint=constraint)


def candidates_for(fam):
    return {
        transparent_name(f"phi1{fam}"): transparent_dbn(f"phi1{fam}"),
        transparent_name(f"phi2{fam}"): transparent_dbn(f"phi2{fam}"),
    }


# ------------------------------------------------------------- node scores

def test_node_scores_isolate_the_driving_node():
    oracle, ev = evidence_for("phi1v")
    scores = occlusion_node_scores(oracle, ev)
    assert set(scores) == {1, 2, 3, 4}
    assert scores[3] > 0.0
    assert scores[1] == scores[2] == scores[4] == 0.0


def test_node_scores_wide_line_model():
    oracle, ev = evidence_for("phi1e")
    scores = occlusion_node_scores(oracle, ev)
    assert scores[2] > 0.0 and scores[3] > 0.0
    assert scores[1] == 0.0


def test_node_scores_narrow_line_model():
    oracle, ev = evidence_for("phi2e")
    scores = occlusion_node_scores(oracle, ev)
    assert scores[2] > 0.0
    assert scores[3] == 0.0


# ------------------------------------------------------------- edge scores

def test_edge_scores_follow_the_information_path():
    oracle, ev = evidence_for("phi1e")
    scores = occlusion_edge_scores(oracle, ev)
    assert set(scores) == {(1, 2), (2, 3)}
    assert scores[(1, 2)] > 0.0
    assert scores[(2, 3)] > 0.0


def test_edge_scores_respect_existing_masks():
    oracle, ev = evidence_for("phi1e", kind="edge", seed=2)
    scores = occlusion_edge_scores(oracle, ev)
    assert set(scores) == {(1, 2), (2, 3)}


def test_edge_scores_identical_across_pair_on_constrained_evidence():
    o1, e1 = evidence_for("phi1e", constraint="x2_gt_x3", seed=1)
    o2, e2 = evidence_for("phi2e", constraint="x2_gt_x3", seed=1)
    assert occlusion_edge_scores(o1, e1) == occlusion_edge_scores(o2, e2)


def test_edge_scores_distinguish_pair_without_constraint():
    o1, e1 = evidence_for("phi1e", seed=1)
    o2, e2 = evidence_for("phi2e", seed=1)
    s1, s2 = occlusion_edge_scores(o1, e1), occlusion_edge_scores(o2, e2)
    assert s1[(2, 3)] > 0.0
    assert s2[(2, 3)] == 0.0


# -------------------------------------------------------- structure choice

def test_sensitivity_statistic_shape():
    _, ev = evidence_for("phi1e")
    sens = node_sensitivity(ev)
    assert set(sens) == {1, 2, 3}
    assert all(v >= 0.0 for v in sens.values())


def test_select_dbn_is_deterministic_and_pair_blind():
    cands = candidates_for("v")
    _, e1 = evidence_for("phi1v", trials=300, seed=3)
    _, e2 = evidence_for("phi2v", trials=300, seed=3)
    best1, pen1 = select_dbn(e1, cands)
    best2, pen2 = select_dbn(e2, cands)
    assert best1 == best2
    assert pen1 == pen2
    assert set(pen1) == {"B1v", "B2v"}


def test_select_dbn_breaks_ties_lexicographically():
    cands = candidates_for("e")
    _, ev = evidence_for("phi1e", trials=100, seed=0)
    best, pen = select_dbn(ev, cands)
    # Both line structures reach node 1 through node 2 only, so the
    # penalties coincide and the name decides.
    assert pen["B1e"] == pen["B2e"]
    assert best == "B1e"


def test_select_dbn_validates_candidates():
    _, ev = evidence_for("phi1e")
    with pytest.raises(ConfigurationError):
        select_dbn(ev, {})
    with pytest.raises(ConfigurationError):
        select_dbn(ev, {"bad": transparent_dbn("phi1v")})


# ---------------------------------------------------------------- fidelity

def test_fidelity_of_true_support_is_zero():
    oracle, ev = evidence_for("phi1v", trials=200, seed=5)
    assert fidelity(oracle, ev, {3}) == 0.0


def test_fidelity_of_wrong_support_is_positive():
    oracle, ev = evidence_for("phi1v", trials=200, seed=5)
    assert fidelity(oracle, ev, {2}) > 0.0


def test_fidelity_threshold():
    oracle, ev = evidence_for("phi1v", trials=50, seed=5)
    assert fidelity(oracle, ev, {2}, eps=100.0) == 0.0


def test_fidelity_validates_nodes():
    oracle, ev = evidence_for("phi1v", trials=5)
    with pytest.raises(ConfigurationError):
        fidelity(oracle, ev, {5})


# ------------------------------------------------------------ explanations

def test_explain_node_kind():
    oracle, ev = evidence_for("phi2v", trials=40)
    ex = explain(oracle, ev, "node")
    assert ex.kind == "node"
    assert ex.model == "phi2v"
    assert ex.evidence_count == 40
    d = ex.to_json_dict()
    assert set(d["node_scores"]) == {"1", "2", "3", "4"}


def test_explain_edge_kind_json():
    oracle, ev = evidence_for("phi1e", trials=30)
    d = explain(oracle, ev, "edge").to_json_dict()
    assert set(d["edge_scores"]) == {"1-2", "2-3"}


def test_explain_dbn_kind():
    oracle, ev = evidence_for("phi1a", trials=60)
    ex = explain(oracle, ev, "dbn", candidates=candidates_for("a"))
    assert ex.chosen_dbn in {"B1a", "B2a"}
    d = ex.to_json_dict()
    assert d["chosen_dbn"] == ex.chosen_dbn
    assert set(d["penalties"]) == {"B1a", "B2a"}


def test_explain_rejects_bad_kind_and_missing_candidates():
    oracle, ev = evidence_for("phi1v", trials=5)
    with pytest.raises(ConfigurationError):
        explain(oracle, ev, "shap")
    with pytest.raises(ConfigurationError):
        explain(oracle, ev, "dbn")


def test_empty_evidence_raises():
    oracle, _ = evidence_for("phi1v", trials=5)
    with pytest.raises(EmptyEvidenceError):
        occlusion_node_scores(oracle, [])
    with pytest.raises(EmptyEvidenceError):
        explain(oracle, [], "node")
    with pytest.raises(EmptyEvidenceError):
        node_sensitivity([])


def test_explanations_identical_across_behavioural_twins():
    # The full black-box pipeline cannot tell the paired models apart.
    o1, e1 = evidence_for("phi1a", kind="node-and-edge", trials=40, seed=7, T=3)
    o2, e2 = evidence_for("phi2a", kind="node-and-edge", trials=40, seed=7, T=3)
    assert occlusion_node_scores(o1, e1) == occlusion_node_scores(o2, e2)
    assert occlusion_edge_scores(o1, e1) == occlusion_edge_scores(o2, e2)
    cands = candidates_for("a")
    assert select_dbn(e1, cands) == select_dbn(e2, cands)
