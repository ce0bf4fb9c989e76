"""``lim``: batch front end writing key-sorted JSON reports to stdout.

Exit codes: 0 success or all consistent, 1 some inconsistency (or a failed
check), 2 usage or data error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from typing import Any, Sequence

from . import consistency as cons
from .core import (
    Dataset,
    LinMeansError,
    dataset_from_json,
    dataset_to_json,
    float_mode,
    format_number,
    format_vector,
    parse_dataset,
    parse_number,
    validate_dataset,
)

SCHEMA = "limreport/1"
MODEL_NAMES = {"glm": cons.GLM, "glm-star": cons.GLM_STAR, "llm": cons.LLM}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--float", dest="float_mode", action="store_true",
                   help="floating-point arithmetic with tolerance 1e-9")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: $LIM_JOBS or 1)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="lim", description="Linear-in-means consistency and identification.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("validate", parents=[common], help="check a dataset file")
    p.add_argument("file")

    p = sub.add_parser("test", parents=[common], help="test agents against a model")
    p.add_argument("--model", required=True, choices=["glm", "glm-star", "llm", "ulm", "ulm-shock"])
    p.add_argument("--agent", action="append", default=[])
    p.add_argument("--no-certificates", action="store_true")
    p.add_argument("file")

    p = sub.add_parser("identify", parents=[common], help="identify an agent's parameters")
    p.add_argument("--agent", required=True)
    p.add_argument("--what", required=True, choices=["ideal", "influence", "luce"])
    p.add_argument("--model", default="glm", choices=["glm", "glm-star"])
    p.add_argument("file")

    p = sub.add_parser("predict", parents=[common], help="predict choices in an unobserved group")
    p.add_argument("--profiles", required=True)
    p.add_argument("--group", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate equilibrium data")
    p.add_argument("--spec", required=True)
    p.add_argument("--groups", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")

    p = sub.add_parser("oracle", parents=[common], help="brute-force cross-checks")
    p.add_argument("kind", choices=["glm", "hull"])
    p.add_argument("--agent", action="append", default=[])
    p.add_argument("--resolution", type=int, default=20)
    p.add_argument("--weight-resolution", type=int, default=20)
    p.add_argument("file")

    p = sub.add_parser("verify-cert", parents=[common], help="re-check a report's evidence")
    p.add_argument("report")
    return parser


# --------------------------------------------------------------------------
# JSON helpers


def _num(x):
    return format_number(x)


def _vec(v):
    return format_vector(v)


def _map(m):
    return {str(k): _num(x) for k, x in m.items()}


def _read(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _load_dataset(path: str, inputs: dict, floating: bool) -> Dataset:
    data = _read(path)
    inputs[path] = _sha(data)
    d = parse_dataset(data)
    return d.to_float() if floating else d


def verdict_record(v: cons.ConsistencyVerdict, model_name: str) -> dict:
    rec: dict[str, Any] = {"agent": v.agent, "model": model_name, "consistent": v.consistent}
    if v.witness is not None:
        rec["witness"] = {"v": _vec(v.witness.v),
                          "pis": {g: _map(row) for g, row in v.witness.pis.items()}}
        if v.witness.w is not None:
            rec["witness"]["w"] = _map(v.witness.w)
    if v.certificate is not None:
        rec["certificate"] = {"bet": {g: _vec(b) for g, b in v.certificate.payouts.items()},
                              "margin": _num(v.margin)}
    if v.certificate_unsupported:
        rec["certificate"] = None
        rec["note"] = "certificates are defined on the simplex only"
    return rec


def _test_worker(args):
    doc, agent, model, certificates, floating = args
    d = dataset_from_json(doc)
    ctx = float_mode() if floating else nullcontext()
    with ctx:
        if floating:
            d = d.to_float()
        v = cons.run_test(d, agent, model, certificates)
        return verdict_record(v, {m: k for k, m in MODEL_NAMES.items()}[model])


def _jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    try:
        return max(1, int(os.environ.get("LIM_JOBS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# commands


def cmd_validate(args, inputs):
    data = _read(args.file)
    inputs[args.file] = _sha(data)
    d = parse_dataset(data, validate=False)
    diags = validate_dataset(d)
    return [{"diagnostics": diags, "valid": not diags}], (2 if diags else 0), {}


def cmd_test(args, inputs):
    data = _read(args.file)
    inputs[args.file] = _sha(data)
    d = parse_dataset(data)
    extra = {"dataset": dataset_to_json(d)}
    if args.model in ("ulm", "ulm-shock"):
        work = d.to_float() if args.float_mode else d
        ctx = float_mode() if args.float_mode else nullcontext()
        with ctx:
            rec = _ulm_record(work) if args.model == "ulm" else _shock_record(work)
        return [rec], (0 if rec["consistent"] else 1), extra
    model = MODEL_NAMES[args.model]
    agents = args.agent or [a for a in d.agents if d.groups_of(a)]
    for a in agents:
        if a not in d.agents:
            raise LinMeansError(f"unknown agent {a}")
        if not d.groups_of(a):
            raise LinMeansError(f"agent {a} appears in no group")
    doc = dataset_to_json(d)
    tasks = [(doc, a, model, not args.no_certificates, args.float_mode) for a in agents]
    jobs = _jobs(args)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_test_worker, tasks))
    else:
        records = [_test_worker(t) for t in tasks]
    records.sort(key=lambda r: r["agent"])
    code = 0 if all(r["consistent"] for r in records) else 1
    return records, code, extra


def _ulm_record(d):
    from .ulm import test_ulm

    v = test_ulm(d)
    rec: dict[str, Any] = {"model": "ulm", "consistent": v.consistent}
    if v.consistent:
        rec["v"] = {a: _vec(x) for a, x in v.v.items()}
    else:
        rec["failed_axioms"] = list(v.failed_axioms)
        rec["diagnosis"] = (["implied ideal point differs across groups"] if v.mismatches else []) + \
                           (["implied ideal point leaves the simplex"] if v.outside_simplex else [])
        rec["mismatches"] = [list(m) for m in v.mismatches]
        rec["outside_simplex"] = [list(m) for m in v.outside_simplex]
    return rec


def _shock_record(d):
    from .ulm import decompose_with_shocks

    res = decompose_with_shocks(d)
    rec: dict[str, Any] = {"model": "ulm-shock", "consistent": res.ok}
    if res.ok:
        dec = res.decomposition
        rec["v"] = {a: _vec(x) for a, x in dec.v.items()}
        rec["shocks"] = {g: _vec(x) for g, x in dec.shocks.items()}
        rec["components"] = [list(c) for c in dec.components]
    else:
        viol = res.violation
        rec["violation"] = {"group": viol["group"], "from": viol["from"], "to": viol["to"]}
    return rec


def cmd_identify(args, inputs):
    from .core import InconsistentData
    from .identify import point_identify_ideal, recover_influence, recover_luce_weights

    d = _load_dataset(args.file, inputs, args.float_mode)
    model = MODEL_NAMES[args.model]
    try:
        ident = point_identify_ideal(d, args.agent, model)
    except InconsistentData as exc:
        rec = {"agent": args.agent, "identified": False, "error": str(exc)}
        if exc.verdict is not None:
            rec["verdict"] = verdict_record(exc.verdict, args.model)
        return [rec], 1, {"dataset": dataset_to_json(d)}
    rec: dict[str, Any] = {"agent": args.agent, "model": args.model, "dim": ident.dim,
                           "point_identified": ident.is_point}
    if ident.is_point:
        rec["point"] = _vec(ident.point)
    else:
        rec["interior_point"] = _vec(ident.witness)
    if ident.vertices is not None:
        rec["vertices"] = [_vec(v) for v in ident.vertices]
    v = ident.witness
    if args.what == "influence":
        rows = {}
        for o in d.groups_of(args.agent):
            label = d.group_label(o.group)
            res = recover_influence(v, o.choices, args.agent, model, label)
            rows[label] = {"status": res.status,
                           "weights": _map(res.row.weights) if res.row is not None else None}
        rec["influence"] = rows
    elif args.what == "luce":
        if not ident.is_point:
            rec["luce"] = None
            rec["note"] = "ideal point is not point identified"
        else:
            try:
                luce = recover_luce_weights(d, args.agent, v)
            except InconsistentData as exc:
                rec["luce"] = None
                rec["error"] = str(exc)
                return [rec], 1, {}
            rec["luce"] = {"complete": luce.complete, "w": _map(luce.profile.w),
                           "missing": list(luce.missing)}
    return [rec], 0, {}


def cmd_predict(args, inputs):
    from .identify import LuceProfile, predict_group

    data = _read(args.profiles)
    inputs[args.profiles] = _sha(data)
    doc = json.loads(data)
    doc = doc.get("profiles", doc)
    profiles = {}
    for agent, p in doc.items():
        profiles[agent] = LuceProfile(agent, tuple(parse_number(x) for x in p["v"]),
                                      {k: parse_number(x) for k, x in p["w"].items()})
    group = [g.strip() for g in args.group.split(",") if g.strip()]
    out = predict_group(profiles, group)
    return [{"agent": a, "prediction": _vec(p)} for a, p in sorted(out.items())], 0, {}


def cmd_simulate(args, inputs):
    from .simulate import generate_dataset, parse_spec

    spec_data = _read(args.spec)
    groups_data = _read(args.groups)
    inputs[args.spec] = _sha(spec_data)
    inputs[args.groups] = _sha(groups_data)
    spec = parse_spec(spec_data)
    gdoc = json.loads(groups_data)
    ideals = gdoc.get("ideals", "random")
    if isinstance(ideals, dict):
        ideals = {a: (x if isinstance(x, str) else [parse_number(y) for y in x]) for a, x in ideals.items()}
    truth = generate_dataset(spec, ideals, gdoc["groups"], seed=args.seed,
                             alternatives=gdoc.get("alternatives"), grid=int(gdoc.get("grid", 20)))
    doc = truth.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc["dataset"], fh, sort_keys=True, indent=2)
            fh.write("\n")
    return [doc], 0, {}


def cmd_oracle(args, inputs):
    from .geometry import hull_polytope, member
    from .oracle import GridSpec, grid_glm_oracle, hull_membership_oracle

    if args.kind == "hull":
        data = _read(args.file)
        inputs[args.file] = _sha(data)
        doc = json.loads(data)
        queries = doc["queries"] if "queries" in doc else [doc]
        records, code = [], 0
        for q in queries:
            point = tuple(parse_number(x) for x in q["point"])
            hull = [tuple(parse_number(x) for x in p) for p in q["hull"]]
            brute = hull_membership_oracle(point, hull)
            lp_says = member(hull_polytope(hull), point)
            records.append({"point": _vec(point), "oracle": brute, "lp": lp_says, "agree": brute == lp_says})
            if brute != lp_says:
                code = 1
        return records, code, {}
    d = _load_dataset(args.file, inputs, False)
    grid = GridSpec(args.resolution, args.weight_resolution)
    agents = args.agent or [a for a in d.agents if d.groups_of(a)]
    records, code = [], 0
    for a in agents:
        res = grid_glm_oracle(d, a, grid)
        lp_consistent = cons.test_glm(d, a, certificates=False).consistent
        agree = lp_consistent or not res.found
        rec = {"agent": a, "found": res.found, "lp_consistent": lp_consistent, "agree": agree}
        if res.found:
            rec["v"] = _vec(res.v)
            rec["weights"] = {g: _map(w) for g, w in res.weights.items()}
        records.append(rec)
        if not res.found or not agree:
            code = 1
    return records, code, {}


def cmd_verify_cert(args, inputs):
    data = _read(args.report)
    inputs[args.report] = _sha(data)
    report = json.loads(data)
    if "dataset" not in report:
        raise LinMeansError("report does not embed its dataset")
    d = dataset_from_json(report["dataset"])
    records, code = [], 0
    for rec in report.get("per_agent", []):
        model = MODEL_NAMES.get(rec.get("model"))
        if model is None:
            continue
        agent = rec["agent"]
        if rec.get("certificate"):
            cert = rec["certificate"]
            bet = cons.Bet({g: tuple(parse_number(x) for x in b) for g, b in cert["bet"].items()})
            ok = cons.verify_bet(d, agent, model, bet, parse_number(cert["margin"]))
            kind = "certificate"
        elif rec.get("witness"):
            wit = rec["witness"]
            w = {k: parse_number(x) for k, x in wit["w"].items()} if "w" in wit else None
            witness = cons.Witness(tuple(parse_number(x) for x in wit["v"]),
                                   {g: {k: parse_number(x) for k, x in row.items()}
                                    for g, row in wit["pis"].items()}, w)
            ok = cons.verify_witness(d, agent, model, witness)
            kind = "witness"
        else:
            ok, kind = False, "none"
        records.append({"agent": agent, "model": rec["model"], "evidence": kind, "verified": ok})
        if not ok:
            code = 1
    return records, code, {}


COMMANDS = {
    "validate": cmd_validate,
    "test": cmd_test,
    "identify": cmd_identify,
    "predict": cmd_predict,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "verify-cert": cmd_verify_cert,
}


def run(argv: Sequence[str]) -> tuple[dict, int]:
    start = time.perf_counter()
    inputs: dict[str, str] = {}
    command = argv[0] if argv else ""
    extra: dict = {}
    try:
        args = build_parser().parse_args(list(argv))
        command = args.command
        records, code, extra = COMMANDS[command](args, inputs)
    except UsageError as exc:
        records, code = [{"error": f"usage: {exc}"}], 2
    except (LinMeansError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        records, code = [{"error": f"{type(exc).__name__}: {exc}"}], 2
    report = {
        "schema": SCHEMA,
        "command": command,
        "inputs": inputs,
        "per_agent": records,
        "exit_code": code,
        "timing_ms": round((time.perf_counter() - start) * 1000, 3),
    }
    report.update(extra)
    return report, code


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if argv and argv[0] in ("-h", "--help"):
        build_parser().print_help()
        return 0
    report, code = run(argv)
    if code == 2:
        print(report["per_agent"][0].get("error", "error"), file=sys.stderr)
    sys.stdout.write(dumps(report) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
