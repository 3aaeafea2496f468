from __future__ import annotations

import json
import subprocess
import sys

import pytest

from tgnnlab.cli import main

T3_INPUT = {"T": 2, "n": 4, "X": [[1, 2, 3, 4], [5, 6, 7, 8]], "mask": []}


def write_json(path, payload):
    path.write_text(json.dumps(payload) + "\n")
    return str(path)


# ------------------------------------------------------------------- trace

def test_trace_writes_full_trace(tmp_path):
    inp = write_json(tmp_path / "in.json", T3_INPUT)
    out = tmp_path / "tr.json"
    assert main(["trace", "--model", "phi1v", "--input", inp, "-o", str(out)]) == 0
    tr = json.loads(out.read_text())
    assert tr["model"] == "phi1v"
    assert tr["Y"] == [7.0, 0.0, 0.0, 0.0]
    assert tr["hidden"][1] == [3.0, 0.0, 0.0, 0.0]
    assert tr["T"] == 2 and tr["n"] == 4
    assert {s["l"] for s in tr["states"]} == {0, 1, 2}
    assert {m["t"] for m in tr["messages"]} == {1, 2}


def test_trace_stdout_and_memoryless(tmp_path, capsys):
    inp = write_json(tmp_path / "in.json",
                     {"X": [[1, 2, 3, 4], [0, 0, 0, 0]]})
    assert main(["trace", "--model", "phi1v-gnn", "--input", inp]) == 0
    tr = json.loads(capsys.readouterr().out)
    # temporal feedback severed: the step-1 maximum is forgotten
    assert tr["Y"] == [0.0, 0.0, 0.0, 0.0]
    assert tr["hidden"][1] == [3.0, 0.0, 0.0, 0.0]


def test_trace_honors_mask(tmp_path, capsys):
    payload = dict(T3_INPUT, mask=[[2, 3]])
    inp = write_json(tmp_path / "in.json", payload)
    assert main(["trace", "--model", "phi1v", "--input", inp]) == 0
    tr = json.loads(capsys.readouterr().out)
    assert tr["mask"] == [[2, 3]]
    for block in tr["messages"]:
        assert block["values"][1][2] == 0.0
        assert block["values"][2][1] == 0.0


@pytest.mark.parametrize("argv", [
    ["trace", "--model", "phi1v", "--input", "does-not-exist.json"],
    ["trace", "--model", "phi9z", "--input", "IGNORED"],
])
def test_trace_usage_errors(tmp_path, argv, capsys):
    if argv[-1] == "IGNORED":
        argv = argv[:-1] + [write_json(tmp_path / "in.json", T3_INPUT)]
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_trace_rejects_mismatched_header(tmp_path, capsys):
    inp = write_json(tmp_path / "in.json", dict(T3_INPUT, n=3))
    assert main(["trace", "--model", "phi1v", "--input", inp]) == 2
    inp = write_json(tmp_path / "in2.json", dict(T3_INPUT, T=5))
    assert main(["trace", "--model", "phi1v", "--input", inp]) == 2
    inp = write_json(tmp_path / "in3.json", dict(T3_INPUT, mask=[[1, 3]]))
    assert main(["trace", "--model", "phi1v", "--input", inp]) == 2
    assert capsys.readouterr().err.count("error:") == 3


# ------------------------------------------------------------------ verify

def test_verify_pass_writes_json_report(tmp_path, capsys):
    out = tmp_path / "rep.json"
    rc = main(["verify", "lemma3", "lemma5", "--trials", "150", "-o", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "[PASS] lemma3" in stdout and "[PASS] lemma5" in stdout
    assert "result: 2 checks, 2 PASS, 0 FAIL, 0 INCONCLUSIVE" in stdout
    payload = json.loads(out.read_text())
    assert payload["suite"] == "tgnnlab-verify"
    assert [r["check_id"] for r in payload["reports"]] == ["lemma3", "lemma5"]
    assert all(r["runtime_ms"] is None for r in payload["reports"])


def test_verify_csv_report(tmp_path):
    out = tmp_path / "rep.csv"
    rc = main(["verify", "tasks", "--trials", "100", "-o", str(out),
               "--format", "csv"])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("check_id,status,")
    assert lines[1].startswith("tasks,PASS,100,")


def test_verify_nonpass_exit_code(capsys):
    rc = main(["verify", "tightness", "--trials", "50",
               "--bound-multiplier", "1.0"])
    assert rc == 1
    assert "INCONCLUSIVE" in capsys.readouterr().out


def test_verify_unknown_check(capsys):
    assert main(["verify", "lemma9"]) == 2
    assert main(["verify", "all", "lemma2"]) == 2
    assert capsys.readouterr().err.count("error:") == 2


def test_verify_grid_step(capsys):
    rc = main(["verify", "lemma2", "--grid-step", "10", "--trials", "20"])
    assert rc == 0
    assert "grid: 3^8" in capsys.readouterr().out
    assert main(["verify", "lemma2", "--grid-step", "-1"]) == 2
    assert main(["verify", "lemma2", "--grid-step", "25"]) == 2


def test_verify_tightness_family_flag(capsys):
    rc = main(["verify", "tightness", "--family", "ga", "--trials", "50"])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "phi1a/phi2a: witness" in stdout
    assert "phi1v" not in stdout
    assert "witness:" in stdout


def test_verify_deterministic_stdout_and_file(tmp_path, capsys):
    def run(name):
        out = tmp_path / name
        rc = main(["verify", "lemma3", "trace-tables", "--trials", "120",
                   "-o", str(out)])
        return rc, capsys.readouterr().out, out.read_bytes()

    rc1, out1, file1 = run("a.json")
    rc2, out2, file2 = run("b.json")
    assert rc1 == rc2 == 0
    assert out1 == out2
    assert file1 == file2


def test_verify_timings_are_opt_in(tmp_path, capsys):
    rc = main(["verify", "lemma5", "--trials", "60", "--timings"])
    assert rc == 0
    assert "runtime_ms=" in capsys.readouterr().out


def test_verify_jobs_matches_serial(capsys):
    rc = main(["verify", "lemma3", "tasks", "--trials", "80"])
    serial = capsys.readouterr().out
    assert rc == 0
    rc = main(["verify", "lemma3", "tasks", "--trials", "80", "--jobs", "2"])
    parallel = capsys.readouterr().out
    assert rc == 0
    assert serial == parallel


# ----------------------------------------------------------------- perturb

def test_perturb_writes_jsonl(tmp_path, capsys):
    out = tmp_path / "p.jsonl"
    rc = main(["perturb", "--model", "phi1v", "--class", "node",
               "--trials", "25", "-o", str(out)])
    assert rc == 0
    assert "wrote 25 records" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    header = json.loads(lines[0])
    assert header["format"] == "tgnnlab-perturbations"
    assert header["class"] == "node" and header["model"] == "phi1v"
    assert header["count"] == 25 and len(lines) == 26


def test_perturb_edge_default_is_single_input(tmp_path):
    out1, out2 = tmp_path / "p1.jsonl", tmp_path / "p2.jsonl"
    for model, out in (("phi1e", out1), ("phi2e", out2)):
        rc = main(["perturb", "--model", model, "--class", "edge",
                   "--constraint", "x2gtx3", "-o", str(out)])
        assert rc == 0
    rows1 = [json.loads(l) for l in out1.read_text().splitlines()[1:]]
    rows2 = [json.loads(l) for l in out2.read_text().splitlines()[1:]]
    assert len(rows1) == 4
    assert [r["Y"] for r in rows1] == [r["Y"] for r in rows2]
    assert [r["mask"] for r in rows1] == [r["mask"] for r in rows2]


def test_perturb_edge_rejects_multiple_inputs(tmp_path, capsys):
    rc = main(["perturb", "--model", "phi1e", "--class", "edge",
               "--trials", "3", "-o", str(tmp_path / "p.jsonl")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


# ----------------------------------------------------------------- explain

def test_explain_reads_perturb_output(tmp_path, capsys):
    ev = tmp_path / "p.jsonl"
    assert main(["perturb", "--model", "phi1v", "--class", "node",
                 "--trials", "40", "-o", str(ev)]) == 0
    capsys.readouterr()
    out = tmp_path / "e.json"
    rc = main(["explain", "--model", "phi1v", "--class", "node",
               "--evidence", str(ev), "-o", str(out)])
    assert rc == 0
    exp = json.loads(out.read_text())
    assert exp["kind"] == "node" and exp["evidence_count"] == 40
    assert exp["node_scores"]["3"] > 0.0
    assert exp["node_scores"]["1"] == 0.0
    assert "model" not in exp


def test_explain_generated_evidence_pair_identity(tmp_path):
    files = []
    for model in ("phi1v", "phi2v"):
        out = tmp_path / f"{model}.json"
        rc = main(["explain", "--model", model, "--class", "node",
                   "-o", str(out)])
        assert rc == 0
        files.append(out.read_bytes())
    assert files[0] == files[1]


def test_explain_dbn_pair_identity(tmp_path):
    files = []
    for model in ("phi1e", "phi2e"):
        out = tmp_path / f"{model}.json"
        rc = main(["explain", "--model", model, "--class", "dbn",
                   "--constraint", "x2gtx3", "-o", str(out)])
        assert rc == 0
        files.append(json.loads(out.read_text()))
    assert files[0] == files[1]
    assert files[0]["chosen_dbn"] in {"B1e", "B2e"}
    assert set(files[0]["penalties"]) == {"B1e", "B2e"}


def test_explain_empty_evidence(tmp_path, capsys):
    ev = tmp_path / "empty.jsonl"
    ev.write_text(json.dumps({
        "format": "tgnnlab-perturbations", "class": "node",
        "model": "phi1v", "K": 10.0, "seed": 0, "count": 0}) + "\n")
    rc = main(["explain", "--model", "phi1v", "--class", "node",
               "--evidence", str(ev)])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


# --------------------------------------------------------------- plumbing

def test_output_dir_env_var(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("TGNNLAB_OUT", str(tmp_path))
    rc = main(["explain", "--model", "phi1e", "--class", "edge",
               "-o", "rel.json"])
    assert rc == 0
    assert (tmp_path / "rel.json").exists()
    absolute = tmp_path / "abs.json"
    rc = main(["explain", "--model", "phi1e", "--class", "edge",
               "-o", str(absolute)])
    assert rc == 0
    assert absolute.exists()


def test_invalid_class_choice_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["perturb", "--model", "phi1v", "--class", "bogus", "-o", "x"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "tgnnlab", "verify", "lemma5",
         "--trials", "50"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "[PASS] lemma5" in proc.stdout
