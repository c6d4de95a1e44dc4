"""Command-line client: thin wrapper over the runner or a remote service.

    polarsim run    --config cfg.json --out results/
    polarsim sweep  --config cfg.json --param mass --values 0.5,0.9,1.5 --out results/
    polarsim bisect --config cfg.json --m-lo 0.5 --m-hi 2.0 --tol 0.02 --out results/

With --server URL the subcommand posts the same payload to a running
service and serializes the response; the output files are byte-identical
either way. Exit codes: 0 success, 2 config error, 3 bracket error.
"""

from __future__ import annotations

import argparse
import json
import sys
import urllib.error
import urllib.request
from pathlib import Path

from .config import parse_config
from .errors import BracketError, ConfigError
from .runner import bisect_critical_mass, run, sweep
from .serialize import (
    write_bisect_outputs,
    write_run_outputs,
    write_sweep_outputs,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BRACKET = 3


def _load_raw_config(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc


def _post(server: str, endpoint: str, body: dict) -> dict:
    url = server.rstrip("/") + endpoint
    data = json.dumps(body).encode()
    req = urllib.request.Request(
        url, data=data, headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read().decode())
    except urllib.error.HTTPError as exc:
        detail = exc.read().decode(errors="replace")
        if exc.code == 409:
            raise BracketError(detail)
        raise ConfigError(f"server rejected the request ({exc.code}): {detail}")
    except urllib.error.URLError as exc:
        raise ConfigError(f"cannot reach server {server!r}: {exc.reason}")


def _cmd_run(args: argparse.Namespace) -> int:
    if args.server:
        raw = _load_raw_config(args.config)
        payload = _post(args.server, "/run", {"config": raw})
    else:
        cfg = parse_config(args.config)
        payload = run(cfg).to_payload()
    write_run_outputs(payload, args.out)
    blowup = payload["blowup"]
    if blowup["detected"]:
        print(
            f"blow-up detected at t={blowup['t_detect']} ({blowup['criterion']})"
        )
    else:
        print("run completed without blow-up")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {args.values!r}")
    if args.server:
        raw = _load_raw_config(args.config)
        resp = _post(
            args.server,
            "/sweep",
            {"config": raw, "param": args.param, "values": values},
        )
        rows = resp["rows"]
    else:
        cfg = parse_config(args.config)
        rows = [r.to_payload() for r in sweep(cfg, args.param, values)]
    write_sweep_outputs(rows, args.out)
    flags = "".join("T" if r["detected"] else "F" for r in rows)
    print(f"sweep over {args.param}: {len(rows)} runs, blow-up flags [{flags}]")
    return EXIT_OK


def _cmd_bisect(args: argparse.Namespace) -> int:
    if args.server:
        raw = _load_raw_config(args.config)
        payload = _post(
            args.server,
            "/bisect",
            {
                "config": raw,
                "m_lo": args.m_lo,
                "m_hi": args.m_hi,
                "tol": args.tol,
            },
        )
    else:
        cfg = parse_config(args.config)
        payload = bisect_critical_mass(cfg, args.m_lo, args.m_hi, args.tol).to_payload()
    write_bisect_outputs(payload, args.out)
    print(
        f"critical mass estimate {payload['estimate']} "
        f"(bracket [{payload['m_lo']}, {payload['m_hi']}])"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarsim",
        description="Boundary-coupled drift-diffusion solver suite",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--server", default=None, help="service URL; in-process if omitted")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run over a list of parameter values")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--server", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_bisect = sub.add_parser("bisect", help="bisect the critical mass")
    p_bisect.add_argument("--config", required=True)
    p_bisect.add_argument("--m-lo", type=float, required=True)
    p_bisect.add_argument("--m-hi", type=float, required=True)
    p_bisect.add_argument("--tol", type=float, required=True)
    p_bisect.add_argument("--out", required=True)
    p_bisect.add_argument("--server", default=None)
    p_bisect.set_defaults(func=_cmd_bisect)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BracketError as exc:
        print(f"bracket error: {exc}", file=sys.stderr)
        return EXIT_BRACKET


if __name__ == "__main__":
    sys.exit(main())
