"""Command-line interface.

Subcommands: design (emit a code as JSON), analyze (separation vector,
rate, schedule check), simulate (Monte Carlo sweep to CSV/JSON-lines),
tradeoff (greedy vs repetition tables), slope (diversity order from a
sweep CSV).  Exit codes: 0 success, 2 configuration/usage error,
1 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .design import (
    NetworkCode,
    code_for_requirements,
    default_schedule,
    greedy_code,
    network_code,
    validate_schedule,
    _systematize,
)
from .harness import (
    ConfigError,
    SimConfig,
    estimate_diversity_slope,
    records_from_csv,
    records_to_csv,
    records_to_json_lines,
    run_sweep,
    tradeoff_table,
)

__all__ = ["main", "cli_main"]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netcode",
                                description="Cooperative network coding toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="construct a code and emit it as JSON")
    d.add_argument("--k", type=int, help="number of sources (with --d)")
    d.add_argument("--n", type=int, help="number of slots (with --d)")
    d.add_argument("--d", type=int, required=True, help="target minimum distance")
    d.add_argument("-o", "--output", default="-", help="output path (default stdout)")

    a = sub.add_parser("analyze", help="report separation vector, rate, schedule")
    a.add_argument("code_file", help="code JSON file")

    s = sub.add_parser("simulate", help="run a Monte Carlo SNR sweep")
    s.add_argument("--config", required=True, help="simulation config JSON file")
    s.add_argument("-o", "--output", default="-", help="output path (default stdout)")
    s.add_argument("--json", action="store_true",
                   help="emit JSON lines instead of CSV")

    t = sub.add_parser("tradeoff", help="greedy vs repetition trade-off table")
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--n-range", help="inclusive length range lo:hi")
    t.add_argument("--d-range", help="inclusive distance range lo:hi")
    t.add_argument("-o", "--output", default="-", help="output path (default stdout)")

    sl = sub.add_parser("slope", help="diversity slope from a sweep CSV")
    sl.add_argument("--input", required=True, help="sweep CSV file")
    sl.add_argument("--source", type=int, required=True, help="1-based source index")
    sl.add_argument("--window", type=int, default=3,
                    help="number of top SNR points (default 3)")
    return p


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w"), True


def _cmd_design(args) -> int:
    if args.n is not None:
        G = greedy_code(args.n, args.d)
        G = _systematize(G)
        code = network_code(G, default_schedule(G))
    elif args.k is not None:
        code = code_for_requirements(args.k, args.d)
    else:
        raise ConfigError("design needs --k or --n")
    fp, close = _open_out(args.output)
    try:
        fp.write(json.dumps(code.to_json_dict(), indent=2) + "\n")
    finally:
        if close:
            fp.close()
    return 0


def _cmd_analyze(args) -> int:
    try:
        with open(args.code_file) as fp:
            code = NetworkCode.from_json_dict(json.load(fp))
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read code file: {exc}") from exc
    ok, violations = validate_schedule(code)
    print(f"k = {code.k}, n = {code.n}, rate = {Fraction(code.k, code.n)}")
    print(f"separation vector = {list(code.sep)}")
    print(f"schedule = {list(code.v)}")
    print(f"schedule valid = {ok}")
    for v in violations:
        print(f"  violation: {v}")
    return 0


def _cmd_simulate(args) -> int:
    try:
        with open(args.config) as fp:
            obj = json.load(fp)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    config = SimConfig.from_json_dict(obj)
    records = run_sweep(config)
    fp, close = _open_out(args.output)
    try:
        if args.json:
            records_to_json_lines(records, fp)
        else:
            records_to_csv(records, fp)
    finally:
        if close:
            fp.close()
    return 0


def _parse_range(text: str) -> range:
    try:
        lo, hi = text.split(":")
        return range(int(lo), int(hi) + 1)
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}, expected lo:hi") from exc


def _cmd_tradeoff(args) -> int:
    if (args.n_range is None) == (args.d_range is None):
        raise ConfigError("provide exactly one of --n-range or --d-range")
    if args.n_range:
        rows = tradeoff_table(args.k, n_range=_parse_range(args.n_range))
    else:
        rows = tradeoff_table(args.k, d_range=_parse_range(args.d_range))
    fp, close = _open_out(args.output)
    try:
        fp.write("k,n,d,rate,greedy_min,greedy_max,greedy_avg,"
                 "rep_min,rep_max,rep_avg,rate_advantage\n")
        for r in rows:
            fp.write(",".join(str(x) for x in [
                r.k, r.n, r.d, float(r.greedy.rate),
                r.greedy.d_min, r.greedy.d_max, r.greedy.d_avg,
                r.repetition.d_min, r.repetition.d_max, r.repetition.d_avg,
                r.advantage]) + "\n")
    finally:
        if close:
            fp.close()
    return 0


def _cmd_slope(args) -> int:
    try:
        with open(args.input) as fp:
            records = records_from_csv(fp)
    except OSError as exc:
        raise ConfigError(f"cannot read input file: {exc}") from exc
    slope = estimate_diversity_slope(records, args.source - 1, args.window)
    print(f"source {args.source}: diversity slope {slope:.4g}")
    return 0


_COMMANDS = {
    "design": _cmd_design,
    "analyze": _cmd_analyze,
    "simulate": _cmd_simulate,
    "tradeoff": _cmd_tradeoff,
    "slope": _cmd_slope,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
