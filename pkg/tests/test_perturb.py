"""Perturbation sampling, set invariants, canonical ordering, and file io."""
from __future__ import annotations

import json

import numpy as np
import pytest

from tgnnlab.constructions import build
from tgnnlab.errors import ConfigurationError, IncomparableError, InvalidSetError
from tgnnlab.graphs import EMPTY_MASK, EdgeMask
from tgnnlab.perturb import (
    PerturbationClass,
    PerturbationRecord,
    PerturbationSet,
    build_set,
    load_set,
    parse_class,
    response_gap,
    sample_bounded,
    save_set,
    sets_equal,
    validate_set,
)


def test_parse_class():
    assert parse_class("node") is PerturbationClass.NODE
    assert parse_class("edge") is PerturbationClass.EDGE
    assert parse_class("node-and-edge") is PerturbationClass.NODE_AND_EDGE
    with pytest.raises(InvalidSetError):
        parse_class("nodes")


# ---------------------------------------------------------------- sampling

def test_sample_bounded_shape_and_range():
    rng = np.random.default_rng(7)
    X = sample_bounded(rng, 50, 3, 4, 10.0)
    assert X.shape == (50, 3, 4)
    assert float(X.min()) >= -10.0 and float(X.max()) <= 10.0


def test_sample_bounded_is_seed_deterministic():
    a = sample_bounded(np.random.default_rng(3), 20, 2, 3, 10.0)
    b = sample_bounded(np.random.default_rng(3), 20, 2, 3, 10.0)
    assert np.array_equal(a, b)


def test_sample_bounded_constraint_holds_everywhere():
    rng = np.random.default_rng(11)
    X = sample_bounded(rng, 200, 4, 3, 10.0, constraint="x2_gt_x3")
    assert (X[:, :, 1] > X[:, :, 2]).all()
    assert float(X.min()) >= -10.0


def test_sample_bounded_low_tail():
    rng = np.random.default_rng(5)
    X = sample_bounded(rng, 400, 2, 3, 10.0, low=-100.0)
    assert float(X.min()) < -10.0
    assert float(X.max()) <= 10.0


def test_sample_bounded_rejects_bad_arguments():
    rng = np.random.default_rng(0)
    with pytest.raises(ConfigurationError):
        sample_bounded(rng, 10, 2, 3, 10.0, constraint="x3_gt_x2")
    with pytest.raises(ConfigurationError):
        sample_bounded(rng, 10, 2, 2, 10.0, constraint="x2_gt_x3")
    with pytest.raises(ConfigurationError):
        sample_bounded(rng, 10, 2, 3, 10.0, low=10.0)
    with pytest.raises(ConfigurationError):
        sample_bounded(rng, -1, 2, 3, 10.0)


# ------------------------------------------------------------ set building

def test_build_node_set():
    spec = build("phi1v")
    ps = build_set(spec, "node", trials=20, T=2, seed=1)
    assert ps.kind is PerturbationClass.NODE
    assert ps.model == "phi1v"
    assert ps.K == 10.0
    assert len(ps.records) == 20
    assert all(r.mask.removed == frozenset() for r in ps.records)
    assert ps.T == 2 and ps.n == 4


def test_build_edge_set():
    spec = build("phi1e")
    ps = build_set(spec, "edge", trials=1, seed=3)
    assert len(ps.records) == 4
    assert len({r.X for r in ps.records}) == 1
    assert len({r.mask.removed for r in ps.records}) == 4


def test_build_edge_set_rejects_multiple_inputs():
    with pytest.raises(InvalidSetError):
        build_set(build("phi1e"), "edge", trials=2)


def test_build_product_set():
    spec = build("phi1a")
    ps = build_set(spec, "node-and-edge", trials=5, seed=2)
    assert len(ps.records) == 5 * 4
    assert len({r.X for r in ps.records}) == 5
    assert len({r.mask.removed for r in ps.records}) == 4


def test_build_set_is_deterministic():
    spec = build("phi2v")
    a = build_set(spec, "node", trials=10, seed=9)
    b = build_set(spec, "node", trials=10, seed=9)
    assert a == b


def test_records_are_canonically_ordered():
    spec = build("phi1a")
    ps = build_set(spec, "node-and-edge", trials=4, seed=0)
    from tgnnlab.perturb import _record_key
    keys = [_record_key(r) for r in ps.records]
    assert keys == sorted(keys)


def test_responses_match_direct_evaluation():
    from tgnnlab.engine import ForwardOracle
    spec = build("phi1v")
    ps = build_set(spec, "node", trials=5, seed=4)
    oracle = ForwardOracle(spec)
    for r in ps.records:
        assert r.Y == oracle(r.x_array(), r.mask)


# ----------------------------------------------------------- invariants

def _rec(X, mask=EMPTY_MASK, Y=(0.0, 0.0, 0.0)):
    return PerturbationRecord(X=X, mask=mask, Y=Y)


def test_validate_rejects_empty_set():
    ps = PerturbationSet(PerturbationClass.NODE, "m", 10.0, 0, ())
    with pytest.raises(InvalidSetError):
        validate_set(ps)


def test_validate_rejects_masked_node_class():
    ps = PerturbationSet(PerturbationClass.NODE, "m", 10.0, 0, (
        _rec(((1.0, 2.0, 3.0),), EdgeMask(frozenset({(1, 2)}))),
    ))
    with pytest.raises(InvalidSetError):
        validate_set(ps)


def test_validate_rejects_multi_input_edge_class():
    ps = PerturbationSet(PerturbationClass.EDGE, "m", 10.0, 0, (
        _rec(((1.0, 2.0, 3.0),)),
        _rec(((4.0, 5.0, 6.0),), EdgeMask(frozenset({(1, 2)}))),
    ))
    with pytest.raises(InvalidSetError):
        validate_set(ps)


def test_validate_rejects_broken_product():
    ps = PerturbationSet(PerturbationClass.NODE_AND_EDGE, "m", 10.0, 0, (
        _rec(((1.0, 2.0, 3.0),)),
        _rec(((4.0, 5.0, 6.0),), EdgeMask(frozenset({(1, 2)}))),
    ))
    with pytest.raises(InvalidSetError):
        validate_set(ps)


# ------------------------------------------------------------- comparison

def test_paired_square_models_agree_on_node_sets():
    a = build_set(build("phi1v"), "node", trials=200, T=3, seed=0)
    b = build_set(build("phi2v"), "node", trials=200, T=3, seed=0)
    assert response_gap(a, b) == 0.0
    assert sets_equal(a, b)


def test_paired_line_models_agree_under_constraint():
    for seed in range(5):
        a = build_set(build("phi1e"), "edge", trials=1, T=3, seed=seed,
                      constraint="x2_gt_x3")
        b = build_set(build("phi2e"), "edge", trials=1, T=3, seed=seed,
                      constraint="x2_gt_x3")
        assert sets_equal(a, b)


def test_paired_line_models_differ_without_constraint():
    a = build_set(build("phi1e"), "node", trials=100, T=2, seed=0)
    b = build_set(build("phi2e"), "node", trials=100, T=2, seed=0)
    assert response_gap(a, b) > 0.0
    assert not sets_equal(a, b)


def test_paired_chain_models_agree_on_product_sets():
    a = build_set(build("phi1a"), "node-and-edge", trials=50, T=3, seed=0)
    b = build_set(build("phi2a"), "node-and-edge", trials=50, T=3, seed=0)
    assert sets_equal(a, b)


def test_comparison_requires_same_class():
    a = build_set(build("phi1e"), "node", trials=4, seed=0)
    b = build_set(build("phi1e"), "edge", trials=1, seed=0)
    with pytest.raises(IncomparableError):
        sets_equal(a, b)


def test_comparison_requires_same_perturbations():
    a = build_set(build("phi1e"), "node", trials=4, seed=0)
    b = build_set(build("phi1e"), "node", trials=4, seed=1)
    with pytest.raises(IncomparableError):
        sets_equal(a, b)
    c = build_set(build("phi1e"), "node", trials=5, seed=0)
    with pytest.raises(IncomparableError):
        sets_equal(a, c)


def test_tolerance_widens_equality():
    a = build_set(build("phi1e"), "node", trials=50, seed=0)
    b = build_set(build("phi2e"), "node", trials=50, seed=0)
    gap = response_gap(a, b)
    assert gap > 0.0
    assert sets_equal(a, b, tolerance=gap)
    assert not sets_equal(a, b, tolerance=gap * 0.999)


# --------------------------------------------------------------------- io

def test_save_load_roundtrip(tmp_path):
    spec = build("phi2a")
    ps = build_set(spec, "node-and-edge", trials=6, T=2, seed=8)
    path = tmp_path / "set.jsonl"
    save_set(ps, path)
    again = load_set(path)
    assert again == ps


def test_saved_file_shape(tmp_path):
    ps = build_set(build("phi1e"), "edge", trials=1, seed=0)
    path = tmp_path / "set.jsonl"
    save_set(ps, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 1 + len(ps.records)
    header = json.loads(lines[0])
    assert header["format"] == "tgnnlab-perturbations"
    assert header["class"] == "edge"
    assert header["model"] == "phi1e"
    assert header["count"] == 4


def test_save_is_byte_deterministic(tmp_path):
    ps = build_set(build("phi1v"), "node", trials=10, seed=5)
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_set(ps, p1)
    save_set(ps, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_rejects_foreign_files(tmp_path):
    p = tmp_path / "x.jsonl"
    p.write_text('{"format": "something-else"}\n')
    with pytest.raises(InvalidSetError):
        load_set(p)
    p.write_text("")
    with pytest.raises(InvalidSetError):
        load_set(p)


def test_load_rejects_count_mismatch(tmp_path):
    ps = build_set(build("phi1e"), "node", trials=3, seed=0)
    path = tmp_path / "set.jsonl"
    save_set(ps, path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(InvalidSetError):
        load_set(path)
