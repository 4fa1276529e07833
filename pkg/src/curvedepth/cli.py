"""Command-line interface.

Subcommands: depth, rank, trim, outliers, audit, simulate-gp, reconstruct.
Global flags (before the subcommand): --seed, --threads, --format.

Exit codes are a stable contract: 0 success, 2 input error (unreadable or
malformed files), 3 parameter error (invalid depth id, bandwidth, ...),
4 audit mismatch or under-powered audit cells.

``--threads`` must take effect before the numeric libraries initialize
their thread pools, so everything that imports numpy is imported lazily
inside the command handlers.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

#: Decimal format shared with the CSV writer: round-trips float64 exactly.
_FMT = "%.17g"

_THREAD_ENV_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PARAMS = 3
EXIT_AUDIT = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvedepth",
        description="Depth statistics for grid-discretized curves.",
    )
    parser.add_argument("--seed", type=int, default=0, help="master RNG seed")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="cap BLAS/OpenMP thread pools (set before numpy loads)",
    )
    parser.add_argument(
        "--format",
        choices=("json", "csv", "md"),
        default="json",
        help="stdout format for tabular results",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_depth_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("input_csv", help="curves CSV: grid row, then one row per curve")
        p.add_argument("depth_id", help="one of h, rt, bd, mbd, hr, mhr")
        p.add_argument("--h", type=float, default=1.0, help="kernel bandwidth (h)")
        p.add_argument("--J", type=int, default=2, help="maximal band order (bd/mbd)")
        p.add_argument("--k", type=int, default=20, help="projection directions (rt)")

    p = sub.add_parser("depth", help="depth of query curves w.r.t. a sample")
    add_depth_args(p)
    p.add_argument(
        "--query",
        default="self",
        help="'self' evaluates each curve against the full sample, itself "
        "included (the sample formulas do not exclude the evaluated "
        "curve); otherwise a path to a CSV of query curves",
    )

    p = sub.add_parser("rank", help="centre-outward ranks (1 = deepest)")
    add_depth_args(p)

    p = sub.add_parser("trim", help="drop the floor(alpha*n) lowest-depth curves")
    add_depth_args(p)
    p.add_argument("--alpha", type=float, default=0.0, help="trim fraction in [0, 1)")
    p.add_argument("--out", default=None, help="write retained curves CSV here")

    p = sub.add_parser("outliers", help="flag curves of unusually low depth")
    add_depth_args(p)
    p.add_argument(
        "--q",
        type=float,
        default=0.1,
        help="flag curves with depth <= the q-quantile of sample depths "
        "(inclusive, so minimum-depth ties are all flagged)",
    )

    p = sub.add_parser("audit", help="run the 6x6 property audit")
    p.add_argument("--config", default=None, help="JSON file overriding audit defaults")
    p.add_argument("--out-dir", default=".", help="directory for audit.json / audit.md")

    p = sub.add_parser("simulate-gp", help="draw Gaussian-process sample paths")
    p.add_argument("out_csv", help="output CSV path")
    p.add_argument("--n", type=int, default=10, help="number of paths")
    p.add_argument("--spec", default=None, help="JSON file with a process spec")
    p.add_argument("--kernel-type", choices=("se", "cosine"), default="se")
    p.add_argument("--variance", type=float, default=1.0)
    p.add_argument("--length-scale", type=float, default=0.2)
    p.add_argument("--m", type=int, default=101, help="grid points")
    p.add_argument("--a", type=float, default=0.0, help="domain start")
    p.add_argument("--b", type=float, default=1.0, help="domain end")

    p = sub.add_parser(
        "reconstruct", help="fill sparse curves (NaN = unobserved) by interpolation"
    )
    p.add_argument("input_csv", help="sparse curves CSV (NaN cells allowed)")
    p.add_argument("out_csv", help="output CSV of reconstructed curves")

    return parser


# ---------------------------------------------------------------------------
# Shared helpers (import numpy lazily -- see module docstring)
# ---------------------------------------------------------------------------


def _load_sample(path: str):
    from curvedepth.core import FunctionalSample, read_curves_csv

    grid, values = read_curves_csv(path)
    return FunctionalSample(values, grid)


def _depth_params(args):
    from curvedepth.depths import DEPTH_IDS, DepthParams
    from curvedepth.core import ParameterError

    if args.depth_id not in DEPTH_IDS:
        raise ParameterError(
            f"unknown depth id {args.depth_id!r}; expected one of {DEPTH_IDS}"
        )
    return DepthParams(h=args.h, J=args.J, k=args.k, seed=args.seed)


def _sample_depths(args, sample):
    """Depth of each sample curve w.r.t. the whole sample (self included)."""
    from curvedepth.depths import depth_values

    params = _depth_params(args)
    return depth_values(args.depth_id, sample.values, sample, params)


def _ranks_from_values(values):
    """Centre-outward ranks: 1 = deepest, ties broken by curve index."""
    import numpy as np

    order = np.lexsort((np.arange(values.size), -values))
    ranks = np.empty(values.size, dtype=int)
    ranks[order] = np.arange(1, values.size + 1)
    return ranks, int(order[0])


def _emit(args, payload: dict, csv_rows, md_lines) -> None:
    """Write one result to stdout in the requested format."""
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif args.format == "csv":
        for row in csv_rows:
            print(",".join(row))
    else:
        print("\n".join(md_lines))


def _fmt(v: float) -> str:
    return _FMT % v


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def _cmd_depth(args) -> int:
    from curvedepth.core import read_curves_csv, InputError

    sample = _load_sample(args.input_csv)
    if args.query == "self":
        values = _sample_depths(args, sample)
        labels = list(range(sample.n))
    else:
        from curvedepth.depths import depth_values

        qgrid, qvalues = read_curves_csv(args.query)
        if qgrid.m != sample.grid.m or not (
            qgrid.points == sample.grid.points
        ).all():
            raise InputError("query CSV grid differs from the sample grid")
        params = _depth_params(args)
        values = depth_values(args.depth_id, qvalues, sample, params)
        labels = list(range(len(qvalues)))
    payload = {
        "schema": 1,
        "command": "depth",
        "depth": args.depth_id,
        "n": sample.n,
        "query": args.query,
        "params": {"h": args.h, "J": args.J, "k": args.k, "seed": args.seed},
        "values": [float(v) for v in values],
    }
    csv_rows = [("index", "value")] + [
        (str(i), _fmt(v)) for i, v in zip(labels, values)
    ]
    md = ["| index | depth |", "|---|---|"] + [
        f"| {i} | {_fmt(v)} |" for i, v in zip(labels, values)
    ]
    _emit(args, payload, csv_rows, md)
    return EXIT_OK


def _cmd_rank(args) -> int:
    sample = _load_sample(args.input_csv)
    values = _sample_depths(args, sample)
    ranks, deepest = _ranks_from_values(values)
    payload = {
        "schema": 1,
        "command": "rank",
        "depth": args.depth_id,
        "n": sample.n,
        "values": [float(v) for v in values],
        "ranks": [int(r) for r in ranks],
        "deepest": deepest,
    }
    csv_rows = [("index", "value", "rank")] + [
        (str(i), _fmt(v), str(int(r))) for i, (v, r) in enumerate(zip(values, ranks))
    ]
    md = ["| index | depth | rank |", "|---|---|---|"] + [
        f"| {i} | {_fmt(v)} | {int(r)} |"
        for i, (v, r) in enumerate(zip(values, ranks))
    ]
    _emit(args, payload, csv_rows, md)
    return EXIT_OK


def _cmd_trim(args) -> int:
    import numpy as np

    from curvedepth.core import ParameterError, write_curves_csv

    if not 0.0 <= args.alpha < 1.0:
        raise ParameterError(f"alpha must be in [0, 1), got {args.alpha}")
    sample = _load_sample(args.input_csv)
    values = _sample_depths(args, sample)
    n_drop = int(args.alpha * sample.n)
    order = np.lexsort((np.arange(sample.n), values))  # lowest depth first
    dropped = sorted(int(i) for i in order[:n_drop])
    retained = sorted(int(i) for i in order[n_drop:])
    kept = sample.values[retained]
    mean = kept.mean(axis=0)
    if args.out is not None:
        write_curves_csv(args.out, sample.grid, kept)
    payload = {
        "schema": 1,
        "command": "trim",
        "depth": args.depth_id,
        "alpha": args.alpha,
        "n": sample.n,
        "n_dropped": n_drop,
        "dropped": dropped,
        "retained": retained,
        "mean": [float(v) for v in mean],
        "out": args.out,
    }
    csv_rows = [("grid",) + tuple(_fmt(p) for p in sample.grid.points)] + [
        ("mean",) + tuple(_fmt(v) for v in mean)
    ]
    md = [
        f"Dropped {n_drop} of {sample.n} curves: {dropped}",
        "",
        "Retained indices: " + ", ".join(str(i) for i in retained),
    ]
    _emit(args, payload, csv_rows, md)
    return EXIT_OK


def _cmd_outliers(args) -> int:
    import numpy as np

    from curvedepth.core import ParameterError

    if not 0.0 < args.q < 1.0:
        raise ParameterError(f"q must be in (0, 1), got {args.q}")
    sample = _load_sample(args.input_csv)
    values = _sample_depths(args, sample)
    threshold = float(np.quantile(values, args.q))
    flagged = [int(i) for i in np.flatnonzero(values <= threshold)]
    payload = {
        "schema": 1,
        "command": "outliers",
        "depth": args.depth_id,
        "q": args.q,
        "threshold": threshold,
        "values": [float(v) for v in values],
        "flagged": flagged,
    }
    csv_rows = [("index", "value", "flagged")] + [
        (str(i), _fmt(v), str(int(i in set(flagged)))) for i, v in enumerate(values)
    ]
    md = [f"Depth threshold (q={args.q:g} quantile): {threshold:g}", ""] + [
        f"- curve {i}: depth {_fmt(values[i])}" for i in flagged
    ]
    _emit(args, payload, csv_rows, md)
    return EXIT_OK


def _audit_exit_code(report) -> tuple[int, list[str]]:
    """0 iff the matrix matches the embedded expected pattern and every
    cell had enough power to decide; 4 otherwise, with diagnostics."""
    from curvedepth.properties import GOLDEN

    under_powered = report.inapplicable_cells()
    if under_powered:
        cells = ", ".join(
            f"{c['depth']}/{c['property']}" for c in under_powered
        )
        return EXIT_AUDIT, [f"under-powered cells (inapplicable): {cells}"]
    mismatches = report.mismatches(GOLDEN)
    if mismatches:
        return EXIT_AUDIT, [
            f"mismatch {rec['depth']}/{rec['property']}: "
            f"got {rec['got']}, expected {rec['want']}"
            for rec in mismatches
        ]
    return EXIT_OK, []


def _cmd_audit(args) -> int:
    from curvedepth.core import InputError
    from curvedepth.properties import AuditConfig, run_full_audit

    config = AuditConfig(seed=args.seed)
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.config}: invalid JSON ({exc})") from exc
        obj.setdefault("seed", args.seed)
        config = AuditConfig.from_json(obj)

    report = run_full_audit(config)
    os.makedirs(args.out_dir, exist_ok=True)
    json_path = os.path.join(args.out_dir, "audit.json")
    md_path = os.path.join(args.out_dir, "audit.md")
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(md_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_markdown())

    print(report.to_markdown())
    code, messages = _audit_exit_code(report)
    for msg in messages:
        print(msg, file=sys.stderr)
    return code


def _cmd_simulate_gp(args) -> int:
    from curvedepth.core import InputError, uniform_grid, write_curves_csv
    from curvedepth.distributions import (
        GPSpec,
        Kernel,
        gpspec_from_json,
        sample_gp,
    )

    if args.spec is not None:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read {args.spec}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.spec}: invalid JSON ({exc})") from exc
        spec = gpspec_from_json(obj, uniform_grid(args.a, args.b, args.m))
    else:
        kernel = Kernel(args.kernel_type, args.variance, args.length_scale)
        spec = GPSpec(kernel, uniform_grid(args.a, args.b, args.m))
    sample = sample_gp(spec, args.n, args.seed)
    write_curves_csv(args.out_csv, sample.grid, sample.values)
    payload = {
        "schema": 1,
        "command": "simulate-gp",
        "n": args.n,
        "m": spec.grid.m,
        "seed": args.seed,
        "out": args.out_csv,
    }
    _emit(args, payload, [("out", args.out_csv)], [f"Wrote {args.out_csv}"])
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    import numpy as np

    from curvedepth.core import read_curves_csv, write_curves_csv
    from curvedepth.reconstruct import reconstruct_linear, sparse_from_values

    grid, values = read_curves_csv(args.input_csv, allow_nan=True)
    obs = sparse_from_values(values)
    full = reconstruct_linear(obs, grid)
    write_curves_csv(args.out_csv, grid, full.values)
    observed = [float(np.mean(~np.isnan(row))) for row in np.atleast_2d(values)]
    payload = {
        "schema": 1,
        "command": "reconstruct",
        "n": full.n,
        "m": grid.m,
        "observed_fraction": observed,
        "out": args.out_csv,
    }
    _emit(args, payload, [("out", args.out_csv)], [f"Wrote {args.out_csv}"])
    return EXIT_OK


_HANDLERS = {
    "depth": _cmd_depth,
    "rank": _cmd_rank,
    "trim": _cmd_trim,
    "outliers": _cmd_outliers,
    "audit": _cmd_audit,
    "simulate-gp": _cmd_simulate_gp,
    "reconstruct": _cmd_reconstruct,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is not None and args.threads > 0:
        for var in _THREAD_ENV_VARS:
            os.environ.setdefault(var, str(args.threads))
    # imported here so --threads is honored by the BLAS thread pools
    from curvedepth.core import InputError, ParameterError

    try:
        return _HANDLERS[args.command](args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
