"""Command line interface.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 enumeration budget
exceeded. Reports go to --out or stdout; wall time goes to stderr so report
bytes depend only on (config, seed).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from .errors import InvalidParameterError, ResourceLimitError, UsageError
from .experiments import ExperimentConfig, emit_report, run_config
from .montecarlo import WORKERS_ENV


def _parse_params(pairs: list[str]) -> dict:
    params = {}
    for pair in pairs:
        if "=" not in pair:
            raise UsageError(f"--param expects KEY=VAL, got {pair!r}")
        key, value = pair.split("=", 1)
        try:
            params[key] = int(value)
        except ValueError:
            params[key] = value
    return params


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainlab",
        description="Simulate and exactly verify chained-index blackboard protocols.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; explicit flags override it")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default: ${WORKERS_ENV} or all cores)")

    verify = sub.add_parser("verify", parents=[common], help="run an exact verification suite")
    verify.add_argument("--suite", default=None, help="suite name (default: 'default')")
    verify.add_argument("--n", type=int, default=None)
    verify.add_argument("--theta", default=None, help="bias as a rational, e.g. 1/6")

    simulate = sub.add_parser("simulate", parents=[common], help="Monte Carlo protocol success")
    simulate.add_argument("--protocol", default=None)
    simulate.add_argument("--n", type=int, default=None)
    simulate.add_argument("--k", type=int, default=None)
    simulate.add_argument("--trials", type=int, default=None)
    simulate.add_argument("--param", action="append", default=[], metavar="KEY=VAL")

    table = sub.add_parser("table", parents=[common], help="plot-ready long-format tables")
    table.add_argument("--suite", default=None)
    table.add_argument("--sweep", default=None, help="e.g. n=4..64, B=1..64:*2, t=16..1024:*4")
    table.add_argument("--theta", default=None)

    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        data = _load_config_file(args.config)
    data.setdefault("mode", args.command)

    def override(key, value):
        if value is not None:
            data[key] = value

    override("out", args.out)
    override("format", args.format)
    override("seed", args.seed)
    if args.command == "verify":
        override("suite", args.suite)
        data.setdefault("suite", "default")
        override("n", args.n)
        if args.theta is not None:
            data["theta"] = args.theta
    elif args.command == "simulate":
        if args.protocol is not None:
            data["protocol"] = {"name": args.protocol, "params": _parse_params(args.param)}
        elif args.param:
            raise UsageError("--param requires --protocol")
        override("n", args.n)
        override("k", args.k)
        override("trials", args.trials)
    elif args.command == "table":
        override("suite", args.suite)
        override("sweep", args.sweep)
        if args.theta is not None:
            data["theta"] = args.theta
    data.setdefault("format", "json")
    data.setdefault("seed", 0)
    try:
        if data.get("theta") is not None:
            data["theta"] = Fraction(str(data["theta"]))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad theta {data.get('theta')!r}: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = _config_from_args(args)
        started = time.monotonic()
        payload, code = run_config(config, workers=args.workers)
        elapsed = time.monotonic() - started
        body = emit_report(payload, config.format)
        if config.out:
            with open(config.out, "wb") as fh:
                fh.write(body)
        else:
            sys.stdout.buffer.write(body)
            sys.stdout.buffer.flush()
        print(f"chainlab {config.mode} finished in {elapsed:.2f}s", file=sys.stderr)
        return code
    except (UsageError, InvalidParameterError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
