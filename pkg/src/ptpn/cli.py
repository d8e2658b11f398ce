"""Command-line front end: validate, simulate, abstract, check, optimize.

Exit codes: 0 success / yes, 1 no, 2 unknown or inexact, 64 usage error,
65 net parse error, 70 invalid input data (bad trace step, marking not in
δ-form). JSON reports carry the same data as the human-readable output,
with all rationals rendered exactly as ``p/q``.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .model import PTPN
from .netformat import NetFormatError, format_rational, parse_net, parse_rational
from .regions import abstract, region_to_literal, region_to_json
from .semantics import (
    Delay,
    ReplayError,
    format_trace,
    is_delta_computation,
    is_delta_form,
    is_detailed_delay,
    parse_marking,
    parse_trace,
    run,
    storage_rate,
)
from .solver import (
    Query,
    SearchBounds,
    Verdict,
    Witness,
    cost_optimal,
    cost_threshold,
    replay_witness,
)

EXIT_OK = 0
EXIT_NO = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_PARSE = 65
EXIT_DATA = 70

DEFAULT_DELTA = Fraction(1, 1000)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"bad config line {raw!r}")
        values[key.strip()] = value.strip()
    return values


def _build_parser() -> _Parser:
    parser = _Parser(prog="ptpn", description=__doc__)
    parser.add_argument("--config", help="key=value config file (flags override)")
    parser.add_argument("--output", choices=["human", "json"], default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _Parser) -> None:
        p.add_argument("net", help="net description file")
        p.add_argument("--delta", default=None, help="rational in (0, 1/5)")
        p.add_argument("--max-depth", type=int, default=None)
        p.add_argument("--max-tokens", type=int, default=None)
        p.add_argument("--max-configs", type=int, default=None)
        # also accepted after the subcommand; SUPPRESS keeps the top-level
        # value when the flag is absent here
        p.add_argument("--output", choices=["human", "json"], default=argparse.SUPPRESS)

    common(sub.add_parser("validate", help="parse a net and echo its canonical form"))

    p = sub.add_parser("simulate", help="replay a JSONL trace with exact costs")
    common(p)
    p.add_argument("trace", help="trace file (JSON lines)")

    p = sub.add_parser("abstract", help="region of a marking")
    common(p)
    p.add_argument("marking", help="marking literal, e.g. 'red:0, blue:7/2'")

    p = sub.add_parser("check", help="decide the cost-threshold problem")
    common(p)
    p.add_argument("--from", dest="p_init", required=True)
    p.add_argument("--to", dest="p_fin", required=True)
    p.add_argument("--threshold", type=int, required=True)

    p = sub.add_parser("optimize", help="compute the optimal coverability cost")
    common(p)
    p.add_argument("--from", dest="p_init", required=True)
    p.add_argument("--to", dest="p_fin", required=True)
    return parser


def _settings(args, config: dict[str, str]):
    def pick(flag, key, cast):
        if flag is not None:
            return flag
        if key in config:
            return cast(config[key])
        return None

    delta = pick(parse_rational(args.delta) if args.delta else None, "delta", parse_rational)
    if delta is None:
        delta = DEFAULT_DELTA
    if not 0 < delta < Fraction(1, 5):
        raise ValueError(f"delta must be in (0, 1/5), got {delta}")

    def setting(flag, key, default):
        value = pick(flag, key, int)
        return default if value is None else value

    bounds = SearchBounds(
        max_depth=setting(args.max_depth, "max_depth", 64),
        max_tokens=setting(args.max_tokens, "max_tokens", 32),
        max_configs=setting(args.max_configs, "max_configs", 100_000),
    )
    output = args.output or config.get("output", "human")
    return delta, bounds, output


def _emit(report: dict, output: str) -> None:
    if output == "json":
        print(json.dumps(report, indent=2))
        return
    for key, value in report.items():
        if isinstance(value, list):
            print(f"{key}:")
            for item in value:
                print(f"  {item}")
        else:
            print(f"{key}: {value}")


def _read_net(path: str) -> PTPN:
    return parse_net(Path(path).read_text())


def _witness_labels(net: PTPN, witness: Witness) -> list[str]:
    out = []
    for step in witness.steps:
        label = step.label
        if label[0] == "fire":
            out.append(f"fire {net.transitions[label[1]].name}")
        else:
            out.append(label[0])
    return out


def cmd_validate(net: PTPN, args, delta, bounds, output) -> int:
    from .netformat import serialize_net

    report = {
        "cmax": net.cmax,
        "places": len(net.places),
        "transitions": len(net.transitions),
        "storage_costs": {p.name: p.cost for p in net.places},
        "firing_costs": {t.name: t.cost for t in net.transitions},
        "canonical": serialize_net(net).rstrip("\n").splitlines(),
    }
    if output == "human":
        print(f"cmax={net.cmax}, {len(net.places)} places, {len(net.transitions)} transitions")
        print(serialize_net(net), end="")
        return EXIT_OK
    _emit(report, output)
    return EXIT_OK


def cmd_simulate(net: PTPN, args, delta, bounds, output) -> int:
    computation = parse_trace(net, Path(args.trace).read_text())
    try:
        result = run(net, computation)
    except ReplayError as exc:
        _emit({"error": str(exc), "step": exc.index, "reason": exc.reason}, output)
        return EXIT_DATA
    report = {
        "steps": len(computation.steps),
        "step_costs": [format_rational(c) for c in result.step_costs],
        "total_cost": format_rational(result.total_cost),
        "guard_warnings": [f"step {i}: {msg}" for i, msg in result.guard_violations],
    }
    if args.delta is not None:
        report["delta"] = format_rational(delta)
        report["delta_form"] = is_delta_computation(net, computation, delta)
        marking = computation.initial
        detailed = []
        for step in computation.steps:
            if isinstance(step, Delay):
                detailed.append(is_detailed_delay(marking, step.d))
                marking = marking.aged(step.d)
            else:
                marking = marking.remove(step.consumed).add(step.produced)
        report["detailed_delays"] = detailed
    _emit(report, output)
    return EXIT_OK


def cmd_abstract(net: PTPN, args, delta, bounds, output) -> int:
    marking = parse_marking(net, args.marking)
    if not is_delta_form(marking, delta):
        _emit(
            {"error": f"marking is not in delta-form for delta={format_rational(delta)}"},
            output,
        )
        return EXIT_DATA
    region = abstract(net, marking, delta)
    _emit(
        {
            "delta": format_rational(delta),
            "region": region_to_literal(net, region),
            "region_json": region_to_json(net, region),
        },
        output,
    )
    return EXIT_OK


def _verdict_report(net: PTPN, verdict: Verdict, threshold: int) -> dict:
    return {
        "verdict": verdict.kind,
        "threshold": threshold,
        "iterations": [
            {"k": k, "V": v_size, "U": u_size} for k, v_size, u_size in verdict.iterations
        ],
        "exhausted_bounds": list(verdict.exhausted),
    }


def cmd_check(net: PTPN, args, delta, bounds, output) -> int:
    query = Query(net, net.place_named(args.p_init).id, net.place_named(args.p_fin).id, args.threshold)
    verdict = cost_threshold(query, bounds)
    report = _verdict_report(net, verdict, args.threshold)
    if verdict.is_yes:
        assert verdict.witness is not None
        report["witness"] = _witness_labels(net, verdict.witness)
        computation, cost = replay_witness(net, verdict.witness, query, delta)
        timed = sum(1 for s in computation.steps if isinstance(s, Delay))
        rates = [0]
        marking = computation.initial
        for step in computation.steps:
            rates.append(storage_rate(net, marking))
            if isinstance(step, Delay):
                marking = marking.aged(step.d)
            else:
                marking = marking.remove(step.consumed).add(step.produced)
        bound = query.v + delta * timed * max(rates)
        report["replay"] = {
            "delta": format_rational(delta),
            "cost": format_rational(cost),
            "bound": format_rational(bound),
            "steps": len(computation.steps),
            "computation": format_trace(net, computation).rstrip("\n").splitlines(),
        }
    _emit(report, output)
    return {"yes": EXIT_OK, "no": EXIT_NO, "unknown": EXIT_UNKNOWN}[verdict.kind]


def cmd_optimize(net: PTPN, args, delta, bounds, output) -> int:
    result = cost_optimal(
        net, net.place_named(args.p_init).id, net.place_named(args.p_fin).id, bounds
    )
    if result.kind == "infinite":
        _emit({"optimal": "infinite", "note": "final place unreachable"}, output)
        return EXIT_OK
    exactness = "exact" if result.exact else "upper bound"
    _emit({"optimal": result.value, "exactness": exactness}, output)
    return EXIT_OK if result.exact else EXIT_UNKNOWN


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config) if args.config else {}
        delta, bounds, output = _settings(args, config)
    except (OSError, ValueError) as exc:
        print(f"ptpn: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        net = _read_net(args.net)
    except OSError as exc:
        print(f"ptpn: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NetFormatError as exc:
        print(f"ptpn: net parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    handlers = {
        "validate": cmd_validate,
        "simulate": cmd_simulate,
        "abstract": cmd_abstract,
        "check": cmd_check,
        "optimize": cmd_optimize,
    }
    try:
        return handlers[args.command](net, args, delta, bounds, output)
    except (ValueError, ReplayError) as exc:
        print(f"ptpn: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
