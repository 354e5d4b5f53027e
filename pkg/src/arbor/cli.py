"""arbor command line.

Subcommands: decide, certify, bench, scan, random. Every flag can also be
set through an ARBOR_* environment variable; a flag on the command line
wins over the environment, which wins over the built-in default.

Exit codes: decide returns 0 (discrete and free), 3 (not), 2 (bad input);
certify returns 0 (verified), 1 (an invariant failed), 2 (bad input);
scan returns 1 if any violation was found.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Callable, List, Optional

from . import __version__
from .certify import certify
from .descent import SCHEMA, decide
from .exact import ArborError, ValidationError
from .harness import (
    GenConfig,
    cells_csv,
    conjecture_scan,
    random_tuple,
    records_jsonl,
    run_bench,
    grid_csv,
)

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NOT_FREE = 0, 1, 2, 3


class _EnvError(Exception):
    pass


def _env(name: str, cast: Callable, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError as exc:
        raise _EnvError(f"{name}={raw!r}: {exc}") from exc


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _int_list(raw) -> List[int]:
    if isinstance(raw, list):
        return raw
    try:
        return [int(x) for x in str(raw).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}")


def _positive(raw) -> int:
    v = int(raw)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {raw!r}")
    return v


def _global_flags() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--p", type=_int_list, default=_env("ARBOR_P", _int_list, None), help="prime(s), comma-separated")
    g.add_argument("--seed", type=int, default=_env("ARBOR_SEED", int, 0))
    g.add_argument("--out", default=_env("ARBOR_OUT", str, None), help="output file (decide, certify, scan, random) or directory (bench)")
    g.add_argument("--cutoff", type=_positive, default=_env("ARBOR_CUTOFF", int, None), help="oracle overlap radius")
    g.add_argument(
        "--open-segment-strict",
        action="store_true",
        default=_env("ARBOR_OPEN_SEGMENT_STRICT", _bool, False),
        help="Ping-Pong windows need diameter <= l-2 instead of l-1",
    )
    g.add_argument("--workers", type=_positive, default=_env("ARBOR_WORKERS", int, 1))
    g.add_argument("-v", "--verbose", action="store_true")
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="arbor", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"arbor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decide", parents=[common], help="decide whether <H> is discrete and free")
    d.add_argument("input", help="JSON file with p and generators ('-' for stdin)")

    c = sub.add_parser("certify", parents=[common], help="verify a certificate with the tree oracle")
    c.add_argument("certificate", help="certificate JSON file ('-' for stdin)")

    b = sub.add_parser("bench", parents=[common], help="runtime grid over primes and tuple sizes")
    b.add_argument("--n", type=_int_list, default=_env("ARBOR_N", _int_list, [2]))
    b.add_argument("--N", type=_positive, default=_env("ARBOR_NBOUND", int, 10))
    b.add_argument("--trials", type=_positive, default=_env("ARBOR_TRIALS", int, 10))

    s = sub.add_parser("scan", parents=[common], help="check minimal tuples for elliptics or Ping-Pong")
    s.add_argument("--n", type=_int_list, default=_env("ARBOR_N", _int_list, [2]))
    s.add_argument("--N", type=_positive, default=_env("ARBOR_NBOUND", int, 10))
    s.add_argument("--trials", type=_positive, default=_env("ARBOR_TRIALS", int, 1000))

    r = sub.add_parser("random", parents=[common], help="emit random hyperbolic generators as decide input")
    r.add_argument("--N", type=_positive, default=_env("ARBOR_NBOUND", int, 10))
    r.add_argument("--count", type=_positive, default=_env("ARBOR_COUNT", int, 2))
    return parser


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _emit(obj, out: Optional[str]):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _single_prime(args, required=True) -> Optional[int]:
    if args.p is None:
        if required:
            raise ValidationError("--p is required")
        return None
    if len(args.p) != 1:
        raise ValidationError("exactly one prime expected")
    return args.p[0]


def cmd_decide(args) -> int:
    doc = _read_json(args.input)
    if not isinstance(doc, dict):
        raise ValidationError("input: expected a JSON object with 'p' and 'generators'")
    p = doc.get("p") if args.p is None else _single_prime(args)
    if p is None:
        raise ValidationError("input: missing field 'p'")
    gens = doc.get("generators")
    if not isinstance(gens, list) or not gens:
        raise ValidationError("input: field 'generators' must be a non-empty list")
    cert = decide(gens, p)
    _emit(cert.to_json(), args.out)
    return EXIT_OK if cert.free_discrete else EXIT_NOT_FREE


def cmd_certify(args) -> int:
    doc = _read_json(args.certificate)
    result = certify(doc, strict=args.open_segment_strict, cutoff=args.cutoff)
    _emit(result.to_json(), args.out)
    for line in result.messages:
        print(f"FAILED {line}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_FAIL


def cmd_bench(args) -> int:
    primes = args.p or [2]
    grid = [(p, n) for p in primes for n in args.n]
    for p, n in grid:
        GenConfig(p, args.N, n, args.seed)
    records, cells = run_bench(grid, args.N, args.trials, args.seed, workers=args.workers)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench.jsonl").write_text(records_jsonl(records))
    (out / "bench_cells.csv").write_text(cells_csv(cells))
    table = grid_csv(cells)
    (out / "bench_grid.csv").write_text(table)
    sys.stdout.write(table)
    return EXIT_OK


def cmd_scan(args) -> int:
    primes = args.p or [3]
    reports = []
    for n in args.n:
        rep = conjecture_scan(n, primes, args.N, args.trials, args.seed, workers=args.workers, strict=args.open_segment_strict)
        reports.append(rep.to_json())
    doc = {"schema": SCHEMA, "reports": reports}
    _emit(doc, args.out)
    return EXIT_FAIL if any(r["violations"] for r in reports) else EXIT_OK


def cmd_random(args) -> int:
    p = _single_prime(args, required=False) or 2
    cfg = GenConfig(p, args.N, args.count, args.seed)
    gens = random_tuple(cfg)
    _emit({"schema": SCHEMA, "p": p, "generators": [g.matrix.to_json() for g in gens]}, args.out)
    return EXIT_OK


COMMANDS = {"decide": cmd_decide, "certify": cmd_certify, "bench": cmd_bench, "scan": cmd_scan, "random": cmd_random}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        parser = build_parser()
    except _EnvError as exc:
        print(f"arbor: invalid environment: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"arbor {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArborError as exc:
        print(f"arbor {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
