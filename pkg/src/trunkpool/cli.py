"""Command-line front end.

Subcommands: block, pareto, bargain, qed, simulate, invert-erlang.
Every result is written to stdout as one JSON record per line, with
numbers carrying 17 significant digits so downstream tools can recover
the exact doubles.  Sweep tables can be emitted as CSV instead
(``--out csv``); the accompanying summary then rides along as
``#``-prefixed comment lines.

Exit status: 0 on success, 2 on input validation problems, 3 on numeric
failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .erlang import erlang_b, invert_erlang_b
from .errors import DomainError, NumericError, ScenarioError, TrunkpoolError
from .exact import SharingModel, SharingPoint, blocking
from .pareto import blocking_normalized, compute_frontier, sweep_xy
from .scenario import Scenario, load_scenario

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

_CONCEPT_NAMES = ("nbs", "ksbs", "es", "us", "lognbs", "logksbs", "loges")


def _format_float(value: float) -> str:
    if value != value or value in (float("inf"), float("-inf")):
        raise NumericError(f"non-finite value in output: {value}")
    return format(value, ".17g")


def _json_encode(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _format_float(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        inner = ", ".join(f"{json.dumps(k)}: {_json_encode(v)}" for k, v in value.items())
        return "{" + inner + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_json_encode(v) for v in value) + "]"
    raise TypeError(f"cannot encode {type(value)}")


def _emit_jsonl(record: dict, out) -> None:
    out.write(_json_encode(record) + "\n")


def _flatten(record: dict, prefix="") -> dict:
    flat = {}
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, prefix=f"{name}."))
        else:
            flat[name] = value
    return flat


def _emit_csv(rows: list[dict], out) -> None:
    flats = [_flatten(r) for r in rows]
    fields: list[str] = []
    for flat in flats:
        for key in flat:
            if key not in fields:
                fields.append(key)
    writer = csv.DictWriter(out, fieldnames=fields)
    writer.writeheader()
    for flat in flats:
        writer.writerow({k: (_format_float(v) if isinstance(v, float) else v)
                         for k, v in flat.items()})


def _emit(records: list[dict], args, out, summary: dict | None = None) -> None:
    if args.out == "csv":
        if summary is not None:
            for key, value in _flatten(summary).items():
                rendered = _format_float(value) if isinstance(value, float) else value
                out.write(f"# {key} = {rendered}\n")
        _emit_csv(records, out)
    else:
        if summary is not None:
            _emit_jsonl(summary, out)
        for record in records:
            _emit_jsonl(record, out)


def _point_record(pt: SharingPoint) -> dict:
    if pt.model is SharingModel.PROBABILISTIC:
        return {"model": "prob", "x1": pt.share1, "x2": pt.share2}
    return {"model": "bo", "k1": pt.share1, "k2": pt.share2}


def _resolve_model(args, scenario: Scenario, default=None) -> SharingModel | None:
    if getattr(args, "model", None):
        return SharingModel.PROBABILISTIC if args.model == "prob" else SharingModel.BOUNDED_OVERFLOW
    if scenario.model is not None:
        return scenario.model
    if scenario.point is not None:
        return scenario.point.model
    return default


def _require_point(scenario: Scenario, args) -> SharingPoint:
    if scenario.point is None:
        raise ScenarioError("point: this command needs a sharing point in the scenario file")
    model = _resolve_model(args, scenario)
    if model is not None and scenario.point.model is not model:
        raise ScenarioError(
            f"point: scenario point is '{scenario.point.model.value}' but the "
            f"requested model is '{model.value}'")
    return scenario.point


def cmd_block(args, out) -> int:
    scenario = load_scenario(args.scenario)
    pt = _require_point(scenario, args)
    res = blocking(scenario.system, pt)
    _emit([{"command": "block", "point": _point_record(pt),
            "b1": res.b1, "b2": res.b2, "b_overall": res.b_overall}], args, out)
    return EXIT_OK


def cmd_pareto(args, out) -> int:
    scenario = load_scenario(args.scenario)
    model = _resolve_model(args, scenario, default=SharingModel.BOUNDED_OVERFLOW)
    frontier = compute_frontier(scenario.system, model, tol=args.tol)
    t_lo, t_hi = frontier.t_interval()
    summary = {
        "command": "pareto",
        "model": model.value,
        "case": frontier.case.name,
        "thresholds": {"low": frontier.thresholds[0], "high": frontier.thresholds[1]},
        "standalone_b1": frontier.standalone[0],
        "standalone_b2": frontier.standalone[1],
        "pooled_blocking": frontier.pooled,
        "t_interval": [t_lo, t_hi],
    }
    rows = []
    for t in np.linspace(0.0, 2.0, args.samples):
        x1, x2 = sweep_xy(float(t))
        res = blocking_normalized(scenario.system, model, x1, x2)
        rows.append({"t": float(t), "x1": x1, "x2": x2,
                     "b1": res.b1, "b2": res.b2, "b_overall": res.b_overall})
    _emit(rows, args, out, summary=summary)
    return EXIT_OK


def cmd_bargain(args, out) -> int:
    from .bargaining import Concept, solve

    scenario = load_scenario(args.scenario)
    model = _resolve_model(args, scenario, default=SharingModel.BOUNDED_OVERFLOW)
    names = [c.strip().lower() for c in args.concepts.split(",") if c.strip()]
    for name in names:
        if name not in _CONCEPT_NAMES:
            raise ScenarioError(
                f"concepts: unknown concept '{name}' "
                f"(choose from {', '.join(_CONCEPT_NAMES)})")
    records = []
    for name in names:
        outcome = solve(scenario.system, model, Concept(name))
        x1, x2 = outcome.point.normalized(scenario.system)
        records.append({
            "command": "bargain",
            "concept": name,
            "model": model.value,
            "share1": outcome.point.share1,
            "share2": outcome.point.share2,
            "x1": x1,
            "x2": x2,
            "b1": outcome.blocking.b1,
            "b2": outcome.blocking.b2,
            "b_overall": outcome.blocking.b_overall,
            "iterations": outcome.iterations,
            "residual": outcome.residual,
            "near_ties": len(outcome.near_ties),
            "numeric_fallback": outcome.numeric_fallback,
        })
    _emit(records, args, out)
    return EXIT_OK


def cmd_qed(args, out) -> int:
    from .qed import map_finite_to_qed, qed_blocking

    scenario = load_scenario(args.scenario)
    pt = scenario.point
    if pt is None or pt.model is not SharingModel.BOUNDED_OVERFLOW:
        raise ScenarioError(
            "point: the QED approximation applies to the bounded-overflow "
            "model; give a point with k1/k2 fields")
    params = map_finite_to_qed(scenario.system, pt.share1, pt.share2)
    b1_approx, b2_approx = qed_blocking(params)
    record = {
        "command": "qed",
        "alpha1": params.alpha1, "alpha2": params.alpha2,
        "beta1": params.beta1, "beta2": params.beta2,
        "gamma1": params.gamma1, "gamma2": params.gamma2,
        "n_scale": params.n_scale,
        "b1_approx": b1_approx, "b2_approx": b2_approx,
        "b1_exact": None, "b2_exact": None,
        "ratio1": None, "ratio2": None,
    }
    if scenario.system.total_servers <= args.exact_limit:
        res = blocking(scenario.system, pt)
        record.update(b1_exact=res.b1, b2_exact=res.b2,
                      ratio1=res.b1 / b1_approx, ratio2=res.b2 / b2_approx)
    _emit([record], args, out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    from .simulate import SimConfig, simulate

    scenario = load_scenario(args.scenario)
    pt = _require_point(scenario, args)
    cfg = scenario.sim if scenario.sim is not None else SimConfig()
    if args.seed is not None:
        cfg = SimConfig(seed=args.seed,
                        warmup_arrivals=cfg.warmup_arrivals,
                        measured_arrivals=cfg.measured_arrivals,
                        replications=cfg.replications,
                        holding1=cfg.holding1, holding2=cfg.holding2)
    res = simulate(scenario.system, pt, cfg)
    _emit([{
        "command": "simulate",
        "point": _point_record(pt),
        "seed": cfg.seed,
        "replications": cfg.replications,
        "measured_arrivals": cfg.measured_arrivals,
        "b1": res.b1, "b2": res.b2, "b_overall": res.b_overall,
        "ci99_b1": res.ci99_b1, "ci99_b2": res.ci99_b2,
        "ci99_overall": res.ci99_overall,
        "events": res.events,
        "wall_time_s": res.wall_time_s,
    }], args, out)
    return EXIT_OK


def cmd_invert_erlang(args, out) -> int:
    load = invert_erlang_b(args.servers, args.target)
    _emit([{
        "command": "invert-erlang",
        "servers": args.servers,
        "target": args.target,
        "load": load,
        "achieved": erlang_b(args.servers, load),
    }], args, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trunkpool",
        description="Blocking probabilities, Pareto frontiers, and bargaining "
                    "solutions for two partially pooled Erlang-B loss systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True,
                           help="path to a scenario JSON file")
        p.add_argument("--model", choices=("prob", "bo"),
                       help="sharing model (overrides the scenario)")
        p.add_argument("--out", choices=("jsonl", "csv"), default="jsonl",
                       help="output format (default jsonl)")
        p.add_argument("--tol", type=float, default=1e-9,
                       help="frontier bisection tolerance (default 1e-9)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario's simulation seed")

    p = sub.add_parser("block", help="exact blocking at a sharing point")
    common(p)
    p.set_defaults(func=cmd_block)

    p = sub.add_parser("pareto", help="frontier thresholds plus a sweep table")
    common(p)
    p.add_argument("--samples", type=int, default=101,
                   help="number of sweep rows over t in [0, 2] (default 101)")
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("bargain", help="bargaining solutions on the frontier")
    common(p)
    p.add_argument("--concepts", default="nbs,ksbs,es,us",
                   help="comma-separated list from: " + ",".join(_CONCEPT_NAMES))
    p.set_defaults(func=cmd_bargain)

    p = sub.add_parser("qed", help="large-system approximation at a sharing point")
    common(p)
    p.add_argument("--exact-limit", type=int, default=100_000,
                   help="compute the exact comparison when n1+n2 is at most "
                        "this (default 100000)")
    p.set_defaults(func=cmd_qed)

    p = sub.add_parser("simulate", help="discrete-event simulation estimate")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("invert-erlang", help="offered load for a target blocking")
    common(p, scenario=False)
    p.add_argument("--servers", type=int, required=True)
    p.add_argument("--target", type=float, required=True)
    p.set_defaults(func=cmd_invert_erlang)

    return parser


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (ScenarioError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
