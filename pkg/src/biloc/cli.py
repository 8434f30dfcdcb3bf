"""Command-line front end: ``biloc analyze | sweep | sample | search | verify``.

Exit codes: 0 success, 1 verification failure, 2 parse error,
3 invalid state, 4 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import sys

import numpy as np

from . import acceptance, criteria, network, optimizer
from .states import (
    DomainError,
    InvalidStateError,
    SchmidtPureState,
    add_isotropic_noise,
    load_state_spec,
    make_werner,
    state_from_spec,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_PARSE = 2
EXIT_STATE = 3
EXIT_LIMIT = 4

MAX_GRID_POINTS = 10**6
REPORT_COLUMNS = ["s_max", "violates", "chsh_ab", "chsh_bc", "xi1", "xi2", "zeta1", "zeta2"]

FAMILY_PARAMS = {
    "werner": ({"V"}, {"Vab", "Vbc"}),
    "schmidt": ({"c", "q"},),
    "noisy_schmidt": ({"c", "q", "V"}, {"c", "q", "Vab", "Vbc"}),
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def fmt_num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "nan"
    return f"{x:.9g}"


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, int) and not isinstance(v, bool):
        return str(v)
    return fmt_num(v)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False)


def _parse_state(text: str, label: str):
    try:
        spec = load_state_spec(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"{label}: cannot parse state description: {exc}", EXIT_PARSE) from exc
    try:
        return state_from_spec(spec)
    except (InvalidStateError, DomainError) as exc:
        raise CliError(f"{label}: invalid state: {exc}", EXIT_STATE) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{label}: malformed state description: {exc}", EXIT_PARSE) from exc


def report_row(report: criteria.BilocReport) -> dict:
    return {
        "s_max": report.s_max,
        "violates": report.violates,
        "chsh_ab": report.chsh_ab,
        "chsh_bc": report.chsh_bc,
        "xi1": report.xi[0],
        "xi2": report.xi[1],
        "zeta1": report.zeta[0],
        "zeta2": report.zeta[1],
    }


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_num(row[k]) for k in header])
    return buf.getvalue()


def _table_text(pairs) -> str:
    width = max(len(k) for k, _ in pairs)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in pairs)


# ---------------------------------------------------------------- analyze

def cmd_analyze(args, out) -> int:
    rho_ab = _parse_state(args.ab, "--ab")
    rho_bc = _parse_state(args.bc, "--bc")
    report = criteria.mixed_pair_optimum(rho_ab, rho_bc)
    search = None
    if args.oracle:
        search = optimizer.maximize_fixed_bsm(rho_ab, rho_bc, _config(args))

    if args.format == "json":
        payload = {"report": report.to_json()}
        if search is not None:
            payload["oracle"] = search.to_json()
            payload["oracleGap"] = search.s_best - report.s_max
        out.write(_dumps(payload) + "\n")
    elif args.format == "csv":
        row = report_row(report)
        header = list(REPORT_COLUMNS)
        if search is not None:
            row["oracle_s_best"] = search.s_best
            row["oracle_gap"] = search.s_best - report.s_max
            header += ["oracle_s_best", "oracle_gap"]
        out.write(_csv_text(header, [row]))
    else:
        pairs = [(k, fmt_num(v)) for k, v in report_row(report).items()]
        pairs += [("alpha", fmt_num(report.alpha)), ("gamma", fmt_num(report.gamma))]
        pairs.append(("marginal", fmt_num(report.marginal)))
        if search is not None:
            pairs += [
                ("oracle_s_best", fmt_num(search.s_best)),
                ("oracle_gap", fmt_num(search.s_best - report.s_max)),
                ("oracle_converged", fmt_num(search.converged)),
            ]
        out.write(_table_text(pairs))
    return EXIT_OK


# ---------------------------------------------------------------- sweep

def parse_grid(spec: str) -> list[tuple[str, list[float]]]:
    """Parse ``"V=0.5:1.0:0.01;c=0,0.5,1"`` into named value lists.

    Ranges ``start:stop:step`` include ``stop`` when it lies on the grid;
    values are rounded to 12 decimals so that e.g. 0.71 prints as 0.71.
    Raises ``CliError`` with ``EXIT_LIMIT`` before materializing a grid
    with more than ``MAX_GRID_POINTS`` points.
    """
    axes = []
    sizes = []
    for part in filter(None, (p.strip() for p in spec.split(";"))):
        name, sep, body = part.partition("=")
        name = name.strip()
        if not sep or not name:
            raise CliError(f"grid axis {part!r} is not of the form name=values", EXIT_PARSE)
        try:
            if ":" in body:
                start, stop, step = (float(t) for t in body.split(":"))
                if not step > 0 or stop < start:
                    raise ValueError("need step > 0 and stop >= start")
                count = int(math.floor((stop - start) / step + 1e-9)) + 1
                axes.append((name, ("range", start, step, count)))
            else:
                values = [float(t) for t in body.split(",") if t.strip()]
                if not values:
                    raise ValueError("empty value list")
                count = len(values)
                axes.append((name, ("list", values)))
        except ValueError as exc:
            raise CliError(f"grid axis {name!r}: {exc}", EXIT_PARSE) from exc
        sizes.append(count)
    if not axes:
        raise CliError("empty grid", EXIT_PARSE)
    if len({n for n, _ in axes}) != len(axes):
        raise CliError("grid axis names must be distinct", EXIT_PARSE)
    total = math.prod(sizes)
    if total > MAX_GRID_POINTS:
        raise CliError(f"grid has {total} points, limit is {MAX_GRID_POINTS}", EXIT_LIMIT)

    out = []
    for name, axis in axes:
        if axis[0] == "range":
            _, start, step, count = axis
            out.append((name, [round(start + k * step, 12) for k in range(count)]))
        else:
            out.append((name, axis[1]))
    return out


def family_pair(family: str, params: dict):
    """State pair ``(rho_ab, rho_bc)`` for one sweep point."""
    if family == "werner":
        v_ab = params.get("Vab", params.get("V"))
        v_bc = params.get("Vbc", params.get("V"))
        return make_werner(v_ab), make_werner(v_bc)
    if family == "schmidt":
        return (
            SchmidtPureState.from_concurrence(params["c"]).state(),
            SchmidtPureState.from_concurrence(params["q"]).state(),
        )
    if family == "noisy_schmidt":
        v_ab = params.get("Vab", params.get("V"))
        v_bc = params.get("Vbc", params.get("V"))
        return (
            add_isotropic_noise(SchmidtPureState.from_concurrence(params["c"]).state(), v_ab),
            add_isotropic_noise(SchmidtPureState.from_concurrence(params["q"]).state(), v_bc),
        )
    raise CliError(f"unknown family {family!r}", EXIT_PARSE)


def sweep_rows(family: str, grid: list[tuple[str, list[float]]]):
    names = [n for n, _ in grid]
    if set(names) not in FAMILY_PARAMS[family]:
        allowed = " or ".join(",".join(sorted(s)) for s in FAMILY_PARAMS[family])
        raise CliError(f"family {family} takes grid axes {allowed}, got {','.join(names)}", EXIT_PARSE)
    for values in itertools.product(*(v for _, v in grid)):
        params = dict(zip(names, values))
        try:
            rho_ab, rho_bc = family_pair(family, params)
        except (InvalidStateError, DomainError) as exc:
            raise CliError(f"invalid grid point {params}: {exc}", EXIT_STATE) from exc
        row = dict(params)
        row.update(report_row(criteria.mixed_pair_optimum(rho_ab, rho_bc)))
        yield row


def cmd_sweep(args, out) -> int:
    grid = parse_grid(args.grid)
    header = [n for n, _ in grid] + REPORT_COLUMNS
    rows = list(sweep_rows(args.family, grid))
    if args.format == "json":
        out.write(_dumps(rows) + "\n")
    elif args.format == "table":
        width = 14
        out.write("".join(f"{h:>{width}}" for h in header) + "\n")
        for row in rows:
            out.write("".join(f"{fmt_num(row[h]):>{width}}" for h in header) + "\n")
    else:
        out.write(_csv_text(header, rows))
    return EXIT_OK


# ---------------------------------------------------------------- sample

def cmd_sample(args, out) -> int:
    rho_ab = _parse_state(args.ab, "--ab")
    rho_bc = _parse_state(args.bc, "--bc")
    if args.alpha is None:
        report = criteria.mixed_pair_optimum(rho_ab, rho_bc)
        alice, charlie, bob = report.alice_settings, report.charlie_settings, report.bob_measurement()
    else:
        gamma = args.alpha if args.gamma is None else args.gamma
        alice = network.zx_plane_settings(args.alpha)
        charlie = network.zx_plane_settings(gamma)
        bob = network.canonical_bsm()
    dist = network.born_distribution(rho_ab, rho_bc, alice, charlie, bob)
    try:
        est = network.sample_outcomes(dist, args.shots, args.seed)
    except DomainError as exc:
        raise CliError(str(exc), EXIT_PARSE) from exc
    exact = {"I": network.compute_I(dist), "J": network.compute_J(dist), "S": network.biloc_score(dist)}

    if args.format == "json":
        payload = est.to_json()
        payload["seed"] = args.seed
        payload["exact"] = exact
        out.write(_dumps(payload) + "\n")
        return EXIT_OK
    rows = [
        {"quantity": q, "estimate": getattr(est, q), "stderr": getattr(est, f"stderr_{q}"), "exact": exact[q]}
        for q in ("I", "J", "S")
    ]
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["quantity", "estimate", "stderr", "exact", "shots", "seed", "reliable"])
        for r in rows:
            writer.writerow([r["quantity"], fmt_num(r["estimate"]), fmt_num(r["stderr"]), fmt_num(r["exact"]),
                             est.shots, args.seed, fmt_num(est.reliable)])
        out.write(buf.getvalue())
        return EXIT_OK
    pairs = [("shots", str(est.shots)), ("seed", str(args.seed))]
    for r in rows:
        err = fmt_num(r["stderr"]) if est.reliable else "unreliable (fewer than 2 shots)"
        pairs.append((r["quantity"], f"{fmt_num(r['estimate'])} +- {err}  (exact {fmt_num(r['exact'])})"))
    out.write(_table_text(pairs))
    return EXIT_OK


# ---------------------------------------------------------------- search

def _config(args) -> optimizer.OptimizerConfig:
    try:
        return optimizer.OptimizerConfig(
            restarts=args.restarts, max_iterations=args.max_iterations, tolerance=args.tolerance, seed=args.seed
        )
    except DomainError as exc:
        raise CliError(str(exc), EXIT_PARSE) from exc


def cmd_search(args, out) -> int:
    rho_ab = _parse_state(args.ab, "--ab")
    config = _config(args)
    activated = None
    if args.mode == "activation":
        if args.bc is not None:
            raise CliError("--mode activation takes only --ab", EXIT_PARSE)
        scan = optimizer.activation_scan(rho_ab, config)
        result, activated = scan.search, scan.activated
        rho_bc = rho_ab
    else:
        if args.bc is None:
            raise CliError(f"--mode {args.mode} needs --bc", EXIT_PARSE)
        rho_bc = _parse_state(args.bc, "--bc")
        search = {
            "fixed-bsm": optimizer.maximize_fixed_bsm,
            "general-bob": optimizer.maximize_general_bob,
            "two-input-bob": optimizer.maximize_two_input_bob,
        }[args.mode]
        result = search(rho_ab, rho_bc, config)
    closed = criteria.mixed_pair_optimum(rho_ab, rho_bc).s_max

    if args.format == "json":
        payload = result.to_json()
        payload["closedForm"] = closed
        if activated is not None:
            payload["activated"] = activated
        out.write(_dumps(payload) + "\n")
        return EXIT_OK
    row = {"mode": args.mode, "s_best": result.s_best, "closed_form": closed, "gap": result.s_best - closed,
           "converged": result.converged, "evaluations": result.evaluations}
    if activated is not None:
        row["activated"] = activated
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(row))
        writer.writerow([_cell(v) for v in row.values()])
        out.write(buf.getvalue())
        return EXIT_OK
    pairs = [(k, _cell(v)) for k, v in row.items()]
    pairs.append(("settings", " ".join(fmt_num(float(p)) for p in result.settings)))
    out.write(_table_text(pairs))
    return EXIT_OK


# ---------------------------------------------------------------- verify

def cmd_verify(args, out) -> int:
    only = None
    if args.only:
        only = {s.strip() for s in args.only.split(",") if s.strip()}
        unknown = only - set(acceptance.CRITERIA)
        if unknown:
            raise CliError(f"unknown criteria: {', '.join(sorted(unknown))}", EXIT_PARSE)
    if args.inject_fault:
        out.write(f"fault injected: {args.inject_fault}\n")

    def echo(line):
        out.write(line + "\n")
        out.flush()

    results = acceptance.run_all(only=only, fault=args.inject_fault, echo=echo)
    failed = [r.id for r in results if not r.passed]
    out.write(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    out.write(f"; failed: {', '.join(failed)}\n" if failed else "\n")
    return EXIT_VERIFY if failed else EXIT_OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: error: {message}", EXIT_PARSE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="biloc", description="Bilocality analysis of entanglement-swapping networks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def formats(p, default="table"):
        p.add_argument("--format", choices=["table", "json", "csv"], default=default)

    def optimizer_opts(p):
        p.add_argument("--restarts", type=int, default=20)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-iterations", type=int, default=2000)
        p.add_argument("--tolerance", type=float, default=1e-10)

    p = sub.add_parser("analyze", help="closed-form maximal violation for a state pair")
    p.add_argument("--ab", required=True, help="JSON state description or path")
    p.add_argument("--bc", required=True, help="JSON state description or path")
    p.add_argument("--oracle", action="store_true", help="also run the fixed-BSM numerical search")
    formats(p)
    optimizer_opts(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="closed-form report over a parameter grid")
    p.add_argument("--family", required=True, choices=sorted(FAMILY_PARAMS))
    p.add_argument("--grid", required=True, help='e.g. "V=0.5:1.0:0.01" or "c=0:1:0.1;q=0:1:0.1"')
    formats(p, default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sample", help="finite-shot estimate of I, J and S")
    p.add_argument("--ab", required=True)
    p.add_argument("--bc", required=True)
    p.add_argument("--shots", type=int, required=True, help="shots per input pair (x, z)")
    p.add_argument("--seed", type=int, default=0)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--optimal", action="store_true", help="closed-form optimal settings (default)")
    group.add_argument("--alpha", type=float, help="Alice angle in the Z-X plane, standard Bell measurement")
    p.add_argument("--gamma", type=float, help="Charlie angle (defaults to --alpha)")
    formats(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("search", help="numerical maximization over measurement settings")
    p.add_argument("--mode", required=True, choices=[*optimizer.MODES, "activation"])
    p.add_argument("--ab", required=True)
    p.add_argument("--bc")
    optimizer_opts(p)
    formats(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion ids, e.g. AC-1,AC-4a")
    p.add_argument("--inject-fault", choices=["j-sign"], help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "gamma", None) is not None and args.alpha is None:
        print("biloc sample: error: --gamma requires --alpha", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
