"""Command line front end.

Every subcommand is a thin client: it marshals arguments into a request,
posts it to the service app through an in-process ASGI transport, and
turns the response into files, console lines, and an exit code. No
numerics happen here, so the command line and the HTTP service cannot
drift apart. Everything runs in a single local process.

Exit codes: 0 success or certified, 1 malformed input, 2 a run left the
float range, 3 a hypothesis or certificate check failed. Nothing else.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import httpx

from .service import app

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2
EXIT_REJECTED = 3

_STATUS_EXIT = {
    "ok": EXIT_OK,
    "certified": EXIT_OK,
    "non_finite_state": EXIT_NUMERIC,
    "not_certified": EXIT_REJECTED,
    "not_diagonally_stable": EXIT_REJECTED,
    "violated": EXIT_REJECTED,
}


class ServiceClient:
    """Synchronous POSTs into the ASGI app, one event loop per call.

    Per-call loops keep the client safe to use from worker threads, which
    is how --jobs runs preset sweeps.
    """

    def __init__(self, asgi_app=app):
        self._app = asgi_app

    def post(self, path: str, payload: dict) -> httpx.Response:
        async def go():
            transport = httpx.ASGITransport(app=self._app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://ptstab", timeout=None
            ) as client:
                return await client.post(path, json=payload)

        return asyncio.run(go())


def _fail(resp: httpx.Response) -> int:
    """Print a 4xx response's diagnostics and return the input-error code."""
    try:
        detail = resp.json()["detail"]
    except Exception:
        detail = resp.text
    if isinstance(detail, dict) and "error" in detail:
        print(f"error: {detail['error']}: {detail['message']}", file=sys.stderr)
    else:
        # pydantic validation errors arrive as a list of field reports
        if isinstance(detail, list):
            for item in detail:
                loc = ".".join(str(p) for p in item.get("loc", []))
                print(f"error: {loc}: {item.get('msg')}", file=sys.stderr)
        else:
            print(f"error: {detail}", file=sys.stderr)
    return EXIT_INPUT


def _load_json(path: str, what: str) -> Optional[dict]:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read {what} {path!r}: {exc}", file=sys.stderr)
        return None


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / name
    target.write_text(text)
    return target


def _write_json(out_dir: Path, name: str, obj) -> Path:
    return _write(out_dir, name, json.dumps(obj, indent=2) + "\n")


# --- simulate -------------------------------------------------------------------


def _simulate_one(client: ServiceClient, label: str, payload: dict, out_dir: Path,
                  fmt: str) -> int:
    resp = client.post("/simulate", payload)
    if resp.status_code != 200:
        print(f"{label}: request rejected", file=sys.stderr)
        return _fail(resp)
    body = resp.json()
    if body["status"] == "non_finite_state":
        print(
            f"{label}: run left the float range at t = {body['t']}: {body['detail']}",
            file=sys.stderr,
        )
        return EXIT_NUMERIC
    if fmt == "csv":
        data_file = _write(out_dir, f"{label}.csv", body["csv"])
    else:
        data_file = _write_json(out_dir, f"{label}.json", body["table"])
    _write_json(out_dir, f"{label}.meta.json", body["metadata"])
    _write_json(out_dir, f"{label}.metrics.json", body["metrics"])
    steps = body["metadata"]["integrator"]["steps"]
    print(f"{label}: ok, {steps} steps, wrote {data_file}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = {}
    if args.config:
        loaded = _load_json(args.config, "config")
        if loaded is None:
            return EXIT_INPUT
        if not isinstance(loaded, dict):
            print("error: config file must hold a JSON object", file=sys.stderr)
            return EXIT_INPUT
        config.update(loaded)
    for key, value in (
        ("T", args.T),
        ("Tbar", args.Tbar),
        ("h0", args.h0),
        ("kappa", args.kappa),
        ("terminalGap", args.terminal_gap),
    ):
        if value is not None:
            config[key] = value

    base = {
        "config": config,
        "format": args.format,
        "checkResiduals": args.check_residuals,
    }
    runs: list[tuple[str, dict]] = []
    for preset in args.preset or []:
        runs.append((preset, {**base, "preset": preset}))
    if args.system:
        system = _load_json(args.system, "system spec")
        if system is None:
            return EXIT_INPUT
        runs.append(("scalar", {**base, "system": system}))
    if not runs:
        # mirrors the service's rejection of an empty request body
        print("error: nothing to run, give --preset or --system", file=sys.stderr)
        return EXIT_INPUT

    seen: dict[str, int] = {}
    labeled = []
    for name, payload in runs:
        n = seen.get(name, 0)
        seen[name] = n + 1
        labeled.append((f"{name}-{n + 1}" if n else name, payload))

    client = ServiceClient()
    out_dir = Path(args.out)
    if args.jobs > 1 and len(labeled) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(
                pool.map(
                    lambda run: _simulate_one(client, run[0], run[1], out_dir, args.format),
                    labeled,
                )
            )
    else:
        codes = [
            _simulate_one(client, label, payload, out_dir, args.format)
            for label, payload in labeled
        ]
    return max(codes)


# --- verify ---------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    if (args.preset is None) == (args.spec is None):
        print("error: give exactly one of --preset or --spec", file=sys.stderr)
        return EXIT_INPUT
    if args.preset is not None:
        payload = {"preset": args.preset}
        label = args.preset
    else:
        spec = _load_json(args.spec, "interconnection spec")
        if spec is None:
            return EXIT_INPUT
        payload = {"spec": spec}
        label = Path(args.spec).stem

    resp = ServiceClient().post("/verify", payload)
    if resp.status_code != 200:
        return _fail(resp)
    body = resp.json()
    report = body["report"]
    print(f"theorem {report['theoremId']}: {body['status'].replace('_', ' ')}")
    width = max(len(h["name"]) for h in report["hypotheses"])
    for h in report["hypotheses"]:
        mark = "pass" if h["passed"] else "FAIL"
        print(f"  [{mark}] {h['name']:<{width}}  {h['detail']}")
    witnesses = report.get("witnesses") or {}
    if "delta" in witnesses:
        print(f"  delta = {witnesses['delta']}")
    if "q" in witnesses:
        print(f"  q = {witnesses['q']}")
    target = _write_json(Path(args.out), f"{label}.report.json", report)
    print(f"wrote {target}")
    return _STATUS_EXIT[body["status"]]


# --- decay-rate -----------------------------------------------------------------


def cmd_decay_rate(args: argparse.Namespace) -> int:
    matrix = _load_json(args.matrix, "gain matrix")
    if matrix is None:
        return EXIT_INPUT
    if not isinstance(matrix, dict) or "a" not in matrix or "b" not in matrix:
        print('error: matrix file needs keys "a" and "b"', file=sys.stderr)
        return EXIT_INPUT
    resp = ServiceClient().post("/decay-rate", {"a": matrix["a"], "b": matrix["b"]})
    if resp.status_code != 200:
        return _fail(resp)
    body = resp.json()
    if body["status"] == "not_diagonally_stable":
        print(f"not diagonally stable: {body['detail']}", file=sys.stderr)
        return EXIT_REJECTED
    result = body["result"]
    print(f"delta = {result['delta']}")
    print(f"q = {result['q']}")
    print(f"slack = {result['slack']}")
    print(f"bisection delta = {result['bisectionDelta']}")
    _write_json(Path(args.out), f"{Path(args.matrix).stem}.decay.json", result)
    return EXIT_OK


# --- certify --------------------------------------------------------------------


def cmd_certify(args: argparse.Namespace) -> int:
    rate = _load_json(args.rate, "rate")
    if rate is None:
        return EXIT_INPUT
    try:
        csv_text = Path(args.trajectory).read_text()
    except OSError as exc:
        print(f"error: cannot read trajectory {args.trajectory!r}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    payload = {
        "csv": csv_text,
        "signal": args.signal,
        "rate": rate,
        "onset": args.onset,
        "onsetSearch": args.onset_search,
    }
    if args.c_cap is not None:
        payload["cCap"] = args.c_cap
    resp = ServiceClient().post("/certify", payload)
    if resp.status_code != 200:
        return _fail(resp)
    body = resp.json()
    report = body["report"]
    print(f"{args.signal}: {body['status']}")
    if report["c"] is not None:
        print(f"  c = {report['c']}")
    print(f"  onset = {report['onset']}")
    if report["firstViolation"] is not None:
        print(f"  first violation at t = {report['firstViolation']}")
    target = _write_json(Path(args.out), f"{args.signal}.certificate.json", report)
    print(f"wrote {target}")
    return _STATUS_EXIT[body["status"]]


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptstab",
        description="Simulate, verify, and certify prescribed-time stable systems.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (default: cwd)")
    common.add_argument(
        "--format", choices=("csv", "json"), default="csv",
        help="trajectory format for simulate (default csv)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "simulate", parents=[common],
        help="integrate presets or an inline system, write trajectory artifacts",
    )
    p.add_argument(
        "--preset", action="append",
        help="named preset; repeat for a sweep (see the presets catalog)",
    )
    p.add_argument("--system", help="JSON file with an inline scalar system spec")
    p.add_argument("--config", help="JSON file with overrides (T, x0, params, ...)")
    p.add_argument("--T", type=float, help="plant horizon override")
    p.add_argument("--Tbar", type=float, help="design horizon override")
    p.add_argument("--h0", type=float, help="base step size")
    p.add_argument("--kappa", type=float, help="terminal step shrink factor")
    p.add_argument("--terminal-gap", type=float, help="stop distance before T")
    p.add_argument(
        "--check-residuals", action="store_true",
        help="evaluate dissipation residuals and record them in the metadata",
    )
    p.add_argument("--jobs", type=int, default=1, help="concurrent sweep runs")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "verify", parents=[common],
        help="check theorem hypotheses for an interconnection",
    )
    p.add_argument("--preset", help="preset with an interconnection description")
    p.add_argument("--spec", help="JSON file with an interconnection spec")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser(
        "decay-rate", parents=[common],
        help="weighted decay rate of a Metzler gain matrix",
    )
    p.add_argument("matrix", help='JSON file {"a": [...], "b": [[...], ...]}')
    p.set_defaults(func=cmd_decay_rate)

    p = sub.add_parser(
        "certify", parents=[common],
        help="fit a prescribed-time exponential envelope over a recorded signal",
    )
    p.add_argument("trajectory", help="trajectory CSV produced by simulate")
    p.add_argument("--signal", required=True, help="column to certify")
    p.add_argument("--rate", required=True, help="JSON file with the blow-up rate")
    p.add_argument("--onset", type=float, default=0.0, help="envelope start time")
    p.add_argument(
        "--onset-search", action="store_true",
        help="scan onsets instead of anchoring at the given one",
    )
    p.add_argument("--c-cap", type=float, help="largest acceptable fitted constant")
    p.set_defaults(func=cmd_certify)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
