"""Command-line interface.

Subcommands:
  trace    run one forward pass and export the full trace as JSON
  verify   run verification checks and print one line per check
  perturb  generate a perturbation-response set as JSONL
  explain  run a black-box explainer over perturbation evidence

Exit codes: 0 on success (verify: every requested check PASS), 1 when a
check finishes in any other status, 2 for usage, configuration, or input
errors.

Output is byte-identical across runs with the same command, flags, and
seed; wall-clock timings are printed and serialized only with --timings.
If the TGNNLAB_OUT environment variable is set, relative output paths are
created inside that directory.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .constructions import build, parse_model_id
from .dbn import transparent_dbn, transparent_name
from .engine import ForwardOracle
from .engine.reference import forward
from .explain import EXPLANATION_KINDS, explain
from .graphs import EdgeMask
from .models import FeatureSequence
from .perturb import PerturbationClass, build_set, load_set, save_set
from .report import Status, reports_to_csv, reports_to_json
from .verify import resolve_check_ids, run_check

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

# --trials left unset picks a class-appropriate evidence size: the edge
# class is a single shared input by definition.
DEFAULT_EVIDENCE_TRIALS = {"node": 100, "edge": 1, "node-and-edge": 100}


def _out_path(path: str | None) -> str | None:
    if path is None:
        return None
    base = os.environ.get("TGNNLAB_OUT")
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _normalize_constraint(value: str | None) -> str | None:
    if value is None:
        return None
    return {"x2gtx3": "x2_gt_x3"}.get(value, value)


# ------------------------------------------------------------------- trace

def cmd_trace(args) -> int:
    spec = build(args.model, args.k_s, args.k_z)
    with open(args.input) as fh:
        payload = json.load(fh)
    rows = payload["X"]
    seq = FeatureSequence.from_rows(rows)
    if "n" in payload and payload["n"] != seq.n:
        raise ValueError(f"input declares n={payload['n']} but X rows have "
                         f"{seq.n} entries")
    if "T" in payload and payload["T"] != seq.T:
        raise ValueError(f"input declares T={payload['T']} but X has "
                         f"{seq.T} rows")
    mask = EdgeMask.from_json_list(payload.get("mask", []))
    mask.validate(spec.graph)
    _, trace = forward(spec, seq, mask)
    text = json.dumps(trace.to_json_dict(), indent=2, sort_keys=True) + "\n"
    _write_text(_out_path(args.output), text)
    return EXIT_PASS


# ------------------------------------------------------------------ verify

def _check_kwargs(cid: str, args) -> dict:
    kw = dict(trials=args.trials, T=args.T, seed=args.seed,
              k_s=args.k_s, k_z=args.k_z, exact_audit=args.exact_audit)
    if cid.startswith("lemma2") and args.grid_step is not None:
        K = min(args.k_s, args.k_z)
        if not 0 < args.grid_step <= 2 * K:
            raise ValueError(f"grid step must lie in (0, {2 * K:g}]")
        kw["grid_points"] = int(round(2 * K / args.grid_step)) + 1
    if cid == "tightness":
        if args.family is not None:
            kw["family"] = args.family
        if args.bound_multiplier is not None:
            kw["bound_multiplier"] = args.bound_multiplier
    return kw


def _print_report(r, timings: bool) -> None:
    line = (f"[{r.status.value}] {r.check_id:<16s} trials={r.trials} "
            f"max_discrepancy={r.max_discrepancy:g} seed={r.seed}")
    if timings and r.runtime_ms is not None:
        line += f" runtime_ms={r.runtime_ms:.1f}"
    print(line)
    for note in r.notes:
        print(f"    note: {note}")
    label = "witness" if r.status is Status.PASS else "counterexample"
    for cx in r.counterexamples[:5]:
        print(f"    {label}: {json.dumps(cx, sort_keys=True)}")


def cmd_verify(args) -> int:
    ids = resolve_check_ids(args.checks)
    per_check = {cid: _check_kwargs(cid, args) for cid in ids}
    if args.jobs > 1 and len(ids) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {cid: pool.submit(run_check, cid, **per_check[cid])
                       for cid in ids}
            reports = [futures[cid].result() for cid in ids]
    else:
        reports = [run_check(cid, **per_check[cid]) for cid in ids]
    for r in reports:
        _print_report(r, args.timings)
    counts = {s: sum(1 for r in reports if r.status is s) for s in Status}
    print(f"result: {len(reports)} checks, {counts[Status.PASS]} PASS, "
          f"{counts[Status.FAIL]} FAIL, "
          f"{counts[Status.INCONCLUSIVE]} INCONCLUSIVE")
    if args.output:
        path = _out_path(args.output)
        if args.format == "csv":
            text = reports_to_csv(reports, include_runtime=args.timings)
        else:
            text = reports_to_json(reports, seed=args.seed,
                                   include_runtime=args.timings)
        _write_text(path, text)
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


# ----------------------------------------------------------------- perturb

def cmd_perturb(args) -> int:
    spec = build(args.model, args.k_s, args.k_z)
    trials = args.trials
    if trials is None:
        trials = DEFAULT_EVIDENCE_TRIALS[args.cls]
    ps = build_set(spec, args.cls, trials=trials, T=args.T, seed=args.seed,
                   constraint=_normalize_constraint(args.constraint))
    save_set(ps, _out_path(args.output))
    print(f"wrote {len(ps.records)} records ({args.cls} class, seed {args.seed})")
    return EXIT_PASS


# ----------------------------------------------------------------- explain

def _generated_evidence(spec, kind: str, args):
    """Default evidence when no JSONL file is supplied: the perturbation
    class the requested explainer is licensed for; dbn selection uses the
    model family's own class."""
    if kind == "node":
        cls = "node"
    elif kind == "edge":
        cls = "edge"
    else:
        fam = parse_model_id(spec.name).family
        cls = {"GV": "node", "GE": "edge", "GA": "node-and-edge"}[fam]
    trials = args.trials
    if trials is None:
        trials = DEFAULT_EVIDENCE_TRIALS[cls]
    return build_set(spec, cls, trials=trials, T=args.T, seed=args.seed,
                     constraint=_normalize_constraint(args.constraint))


def cmd_explain(args) -> int:
    spec = build(args.model, args.k_s, args.k_z)
    oracle = ForwardOracle(spec)
    if args.evidence is not None:
        evidence = load_set(args.evidence)
    else:
        evidence = _generated_evidence(spec, args.cls, args)
    candidates = None
    if args.cls == "dbn":
        mid = parse_model_id(spec.name)
        sfx = "-gnn" if spec.name.endswith("-gnn") else ""
        fam = mid.family[-1].lower()
        pair = (f"phi1{fam}{sfx}", f"phi2{fam}{sfx}")
        candidates = {transparent_name(m): transparent_dbn(m) for m in pair}
    result = explain(oracle, evidence, args.cls, candidates)
    text = json.dumps(result.to_json_dict(), indent=2, sort_keys=True) + "\n"
    _write_text(_out_path(args.output), text)
    return EXIT_PASS


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tgnnlab",
        description="Build the paired models, trace them, generate "
                    "perturbation evidence, run explainers, and verify "
                    "the equivalence and structure claims.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_constants(p):
        p.add_argument("--k-s", type=float, default=10.0,
                       help="sender gate constant (default 10)")
        p.add_argument("--k-z", type=float, default=10.0,
                       help="readout gate constant (default 10)")

    def add_sampling(p):
        p.add_argument("--seed", type=int, default=0,
                       help="RNG seed (default 0)")
        p.add_argument("--trials", type=int, default=None,
                       help="sample count; each command or check has a "
                            "documented default")
        p.add_argument("--T", type=int, default=2,
                       help="number of time steps (default 2)")

    p = sub.add_parser("trace", help="run one forward pass, export the trace")
    p.add_argument("--model", required=True,
                   help="model id, e.g. phi1v, phi2a, phi1e-gnn")
    p.add_argument("--input", required=True,
                   help="JSON file: {\"T\", \"n\", \"X\", \"mask\"}")
    p.add_argument("-o", "--output", default=None,
                   help="trace JSON path (default stdout)")
    add_constants(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("verify", help="run verification checks")
    p.add_argument("checks", nargs="+", metavar="CHECK",
                   help="check ids, or 'all'")
    p.add_argument("-o", "--output", default=None,
                   help="write the report here as well")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="report file format (default json)")
    p.add_argument("--grid-step", type=float, default=None,
                   help="grid spacing for the square-pair grid sweep")
    p.add_argument("--family", choices=("gv", "ga"), default=None,
                   help="restrict the tightness search to one family")
    p.add_argument("--bound-multiplier", type=float, default=None,
                   help="tightness search radius as a multiple of K")
    p.add_argument("--exact-audit", type=int, default=0, metavar="N",
                   help="re-check N rows per model in exact rational "
                        "arithmetic")
    p.add_argument("--jobs", type=int, default=1,
                   help="run checks in up to this many processes")
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock timings (breaks byte-for-byte "
                        "reproducibility)")
    add_constants(p)
    add_sampling(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("perturb", help="generate a perturbation-response set")
    p.add_argument("--model", required=True)
    p.add_argument("--class", dest="cls", required=True,
                   choices=tuple(c.value for c in PerturbationClass))
    p.add_argument("--constraint", default=None,
                   help="input constraint, e.g. x2gtx3")
    p.add_argument("-o", "--output", required=True,
                   help="JSONL output path")
    add_constants(p)
    add_sampling(p)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("explain", help="run a black-box explainer")
    p.add_argument("--model", required=True)
    p.add_argument("--class", dest="cls", required=True,
                   choices=EXPLANATION_KINDS)
    p.add_argument("--evidence", default=None,
                   help="perturbation JSONL; generated when omitted")
    p.add_argument("--constraint", default=None,
                   help="constraint for generated evidence")
    p.add_argument("-o", "--output", default=None,
                   help="explanation JSON path (default stdout)")
    add_constants(p)
    add_sampling(p)
    p.set_defaults(func=cmd_explain)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
