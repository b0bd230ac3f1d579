"""Command line front end: ``polynet dim|filling|bounds|search|reproduce``.

Every command builds a report envelope (schema version 1) and prints it as
text, JSON or CSV.  Exit codes: 0 success, 2 invalid configuration, 3 resource
guard, 4 search budget exhausted (partial payload printed), 5 reproduced
table differs from the published values.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from datetime import datetime, timezone

from . import __version__
from .algebra import PrimeField, is_prime
from .bounds import bound_report
from .dimension import METHODS, dimension
from .errors import BadPrime, BudgetExceeded, DegreeOverflow
from .network import Architecture
from .search import SearchSpec, check_unimodality, dimension_table, find_minimal_filling

log = logging.getLogger("polynet")

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_BUDGET, EXIT_MISMATCH = 0, 2, 3, 4, 5

TABLE1 = {
    3: [(2, 2, 2, 1)],
    4: [(2, 3, 3, 2, 1)],
    5: [(2, 3, 3, 3, 2, 1)],
    6: [(2, 3, 3, 4, 4, 2, 1)],
    7: [(2, 3, 4, 5, 6, 4, 2, 1)],
    8: [(2, 3, 4, 5, 7, 7, 6, 2, 1), (2, 3, 5, 5, 7, 7, 5, 2, 1)],
    9: [(2, 3, 4, 8, 8, 8, 8, 8, 4, 1), (2, 3, 4, 5, 8, 9, 8, 8, 4, 1)],
}
TABLE1_EXTENDED = (8, 9)
TABLE1_SHAPE = {"d0": 2, "dh": 1, "degree": 2}
# Hidden-width cap for the extended rows; depth 9's default box has ~5e8 points.
EXTENDED_CAP = 10

TABLE2_DEGREES = (2, 3, 4, 5, 6)
TABLE2 = {
    (3, 2, 1): (5, 6, 6, 6, 6),
    (2, 3, 2): (6, 8, 9, 9, 9),
    (2, 3, 2, 3): (10, 12, 13, 13, 13),
    (2, 3, 2, 3, 4): (16, 21, 22, 22, 22),
}


class ConfigError(ValueError):
    pass


def canonical_hash(command: str, config: dict, payload) -> str:
    blob = json.dumps(
        {"command": command, "config": config, "payload": payload},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode()).hexdigest()


def envelope(command: str, config: dict, payload, wall_time: float) -> dict:
    return {
        "schema_version": 1,
        "tool": "polynet",
        "version": __version__,
        "command": command,
        "config": config,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": round(wall_time, 3),
        "payload": payload,
        "canonical_hash": canonical_hash(command, config, payload),
    }


def _arch(args) -> Architecture:
    try:
        return Architecture.parse(args.arch, args.degree)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _prime(args, arch: Architecture):
    if args.prime in (None, "auto"):
        return None
    try:
        p = int(args.prime)
    except ValueError as exc:
        raise ConfigError(f"--prime must be 'auto' or an integer, got {args.prime!r}") from exc
    if not (2 <= p < 2**31) or not is_prime(p):
        raise ConfigError(f"{p} is not a prime below 2**31")
    if arch.degree % p == 0:
        raise ConfigError(f"prime {p} divides the activation degree {arch.degree}")
    return PrimeField(p)


def _dim_payload(args) -> dict:
    arch = _arch(args)
    est = dimension(arch, method=args.method, trials=args.trials, seed=args.seed, prime=_prime(args, arch))
    return {"dimension": est.to_dict(), "bounds": bound_report(arch).to_dict()}


def cmd_dim(args):
    return _dim_payload(args), EXIT_OK


def cmd_filling(args):
    payload = _dim_payload(args)
    d = payload["dimension"]
    payload["filling"] = d["is_filling"]
    payload["certification"] = (
        "full-rank Jacobian witness" if d["is_filling"] == "proved" else "rank-deficient in every trial (probability 1)"
    )
    return payload, EXIT_OK


def cmd_bounds(args):
    return {"bounds": bound_report(_arch(args)).to_dict()}, EXIT_OK


def _search_spec(depth, args, cap=None, d0=None, dh=None, degree=None) -> SearchSpec:
    return SearchSpec(
        depth=depth,
        d0=args.d0 if d0 is None else d0,
        dh=args.dh if dh is None else dh,
        degree=args.degree if degree is None else degree,
        width_cap=cap,
        budget=args.budget,
        trials=args.trials,
        seed=args.seed,
        method=args.method,
    )


def _search_payload(result) -> dict:
    payload = result.to_dict()
    payload["unimodality_violations"] = [
        {"widths": list(w), "valley_index": i} for w, i in check_unimodality(result.architectures)
    ]
    return payload


def cmd_search(args):
    if args.depth < 2:
        raise ConfigError("--depth must be at least 2")
    cap = None
    if args.cap:
        cap = tuple(int(c) for c in args.cap.split(","))
    try:
        result = find_minimal_filling(_search_spec(args.depth, args, cap))
    except BudgetExceeded as exc:
        return _search_payload(exc.partial), EXIT_BUDGET
    return _search_payload(result), EXIT_OK


def reproduce_table1(args, extended: bool):
    rows = []
    status = EXIT_OK
    for depth, expected in TABLE1.items():
        if depth in TABLE1_EXTENDED and not extended:
            continue
        cap = None
        if depth in TABLE1_EXTENDED:
            probe = _search_spec(depth, args, **TABLE1_SHAPE).caps()
            cap = tuple(min(c, EXTENDED_CAP) for c in probe)
        spec = _search_spec(depth, args, cap, **TABLE1_SHAPE)
        try:
            result = find_minimal_filling(spec)
            complete = True
        except BudgetExceeded as exc:
            result, complete = exc.partial, False
            status = max(status, EXIT_BUDGET)
        found = sorted(result.architectures)
        if depth in TABLE1_EXTENDED:
            ok = all(w in found for w in expected)
            rule = "contains"
        else:
            ok = found == sorted(expected)
            rule = "equals"
        if not ok:
            status = EXIT_MISMATCH
        rows.append(
            {
                "depth": depth,
                "expected": [list(w) for w in expected],
                "found": [list(w) for w in found],
                "rule": rule,
                "match": ok,
                "complete": complete,
                "oracle_calls": result.oracle_calls,
                "unimodality_violations": [list(w) for w, _ in check_unimodality(found)],
            }
        )
    return {"table": 1, "extended": extended, "rows": rows}, status


def reproduce_table2(args):
    table = dimension_table(list(TABLE2), TABLE2_DEGREES, method=args.method, trials=args.trials, seed=args.seed)
    rows, matches = [], 0
    for widths, got in zip(table.rows, table.values()):
        expected = TABLE2[widths]
        cells_ok = [g == e for g, e in zip(got, expected)]
        matches += sum(cells_ok)
        rows.append({"widths": list(widths), "expected": list(expected), "computed": got, "match": cells_ok})
    total = len(TABLE2) * len(TABLE2_DEGREES)
    payload = {
        "table": 2,
        "degrees": list(TABLE2_DEGREES),
        "rows": rows,
        "cells_matched": matches,
        "cells_total": total,
        "details": table.to_dict(),
    }
    return payload, (EXIT_OK if matches == total else EXIT_MISMATCH), table


def cmd_reproduce(args):
    if args.table == 2:
        payload, status, _ = reproduce_table2(args)
        return payload, status
    return reproduce_table1(args, args.extended)


def render_text(command: str, env: dict) -> str:
    p = env["payload"]
    lines = [f"polynet {env['version']} {command}  seed={env['config'].get('seed')}"]
    if command in ("dim", "filling"):
        d, b = p["dimension"], p["bounds"]
        lines += [
            f"architecture   {tuple(d['widths'])}  r={d['degree']}",
            f"dim            {d['dim']}",
            f"ambient        {d['ambient']}",
            f"naive bound    {b['naive']}",
            f"recursive      {b['recursive_best']}",
        ]
        if b["ah"] is not None:
            ah = b["ah"]
            lines.append(
                f"AH             expected {ah['expected']}"
                + (f", exceptional (corrected {ah['corrected']})" if ah["exceptional"] else "")
            )
        verdict = "filling (proved)" if d["is_filling"] == "proved" else "not filling (probability 1)"
        lines.append(f"verdict        {verdict}")
        lines.append(
            "trials         "
            + ", ".join(f"{t['field']}:{t['rank']}" for t in d["trials"])
        )
    elif command == "bounds":
        b = p["bounds"]
        for key in ("ambient", "naive", "recursive_best", "thm2_filling_guaranteed", "bottleneck_hits"):
            lines.append(f"{key:<24}{b[key]}")
        if b["ah"] is not None:
            lines.append(f"{'ah':<24}{b['ah']}")
    elif command == "search":
        lines.append(f"caps {tuple(p['caps'])}  oracle calls {p['oracle_calls']}  complete {p['complete']}")
        for rec in p["minimal"]:
            lines.append(f"  {tuple(rec['widths'])}  {rec['certification']}")
        for v in p["unimodality_violations"]:
            lines.append(f"  not unimodal: {tuple(v['widths'])} (valley at {v['valley_index']})")
    elif command == "reproduce" and p["table"] == 2:
        lines.append(f"cells matched {p['cells_matched']}/{p['cells_total']}")
        for row in p["rows"]:
            mark = "ok " if all(row["match"]) else "BAD"
            lines.append(f"  {mark} {tuple(row['widths'])}: {row['computed']} (expected {row['expected']})")
    elif command == "reproduce":
        for row in p["rows"]:
            mark = "ok " if row["match"] else "BAD"
            lines.append(f"  {mark} h={row['depth']} {row['rule']} {[tuple(w) for w in row['expected']]}")
            if not row["match"] or len(row["found"]) != len(row["expected"]):
                lines.append(f"      found {len(row['found'])}: {[tuple(w) for w in row['found']]}")
    lines.append(f"hash {env['canonical_hash']}")
    return "\n".join(lines) + "\n"


def render_csv(command: str, env: dict) -> str:
    p = env["payload"]
    if command == "reproduce" and p["table"] == 2:
        lines = ["widths," + ",".join(f"r={r}" for r in p["degrees"])]
        for row in p["rows"]:
            lines.append('"' + ",".join(map(str, row["widths"])) + '",' + ",".join(map(str, row["computed"])))
        return "\n".join(lines) + "\n"
    if command == "reproduce":
        lines = ["depth,widths,listed"]
        for row in p["rows"]:
            listed = {tuple(w) for w in row["expected"]}
            for w in row["found"]:
                lines.append(f'{row["depth"]},"{",".join(map(str, w))}",{tuple(w) in listed}')
        return "\n".join(lines) + "\n"
    raise ConfigError("csv output is only available for tables (reproduce)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--degree", type=int, default=2, help="activation degree r")
    common.add_argument("--method", choices=METHODS, default="ff-stacked")
    common.add_argument("--trials", type=int, default=3)
    common.add_argument("--seed", type=int, default=None, help="default: $POLYNET_SEED or 0")
    common.add_argument("--prime", default="auto", help="'auto' or an explicit prime")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--extended", action="store_true", help="table 1: also search depths 8 and 9")
    common.add_argument("--budget", type=int, default=None, help="max oracle calls for searches")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="polynet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"polynet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("dim", "filling", "bounds"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--arch", required=True, help="comma separated widths, e.g. 2,3,2")
    p = sub.add_parser("search", parents=[common])
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--d0", type=int, default=2)
    p.add_argument("--dh", type=int, default=1)
    p.add_argument("--cap", default=None, help="comma separated hidden-width caps")
    p = sub.add_parser("reproduce", parents=[common])
    p.add_argument("--table", type=int, choices=(1, 2), default=1)
    return parser


COMMANDS = {
    "dim": cmd_dim,
    "filling": cmd_filling,
    "bounds": cmd_bounds,
    "search": cmd_search,
    "reproduce": cmd_reproduce,
}


def run(argv=None, stdout=None) -> int:
    """Parse ``argv``, execute, print the report; returns the exit code."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    if args.seed is None:
        env_seed = os.environ.get("POLYNET_SEED")
        try:
            args.seed = int(env_seed) if env_seed else 0
        except ValueError:
            print(f"polynet: invalid POLYNET_SEED {env_seed!r}", file=sys.stderr)
            return EXIT_CONFIG
    if args.trials < 1:
        print("polynet: --trials must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("format", "verbose")}
    start = time.perf_counter()
    try:
        if args.format == "csv" and args.command != "reproduce":
            raise ConfigError("csv output is only available for tables (reproduce)")
        payload, status = COMMANDS[args.command](args)
    except (ConfigError, BadPrime, ValueError) as exc:
        print(f"polynet: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegreeOverflow as exc:
        print(f"polynet: resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    env = envelope(args.command, config, payload, time.perf_counter() - start)
    if args.format == "json":
        stdout.write(json.dumps(env, indent=2, sort_keys=True) + "\n")
    elif args.format == "csv":
        stdout.write(render_csv(args.command, env))
    else:
        stdout.write(render_text(args.command, env))
    if status == EXIT_BUDGET:
        print("polynet: oracle budget exhausted; partial result", file=sys.stderr)
    elif status == EXIT_MISMATCH:
        print("polynet: reproduced table differs from the published values", file=sys.stderr)
    return status


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
