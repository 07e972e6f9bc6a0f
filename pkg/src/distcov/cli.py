"""Command-line front end.

Subcommands: `schedule` (inspect the exchange schedule), `run` (one mode,
one report), `compare` (both modes, bit-exact equality gate, plot data),
`cost-model` (analytical speed-up), `gen` (reproducible synthetic dataset).

Exit codes: 0 success, 2 usage, 3 data error, 4 protocol error, 5 matrix
mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .costmodel import distributed_cost
from .errors import (
    CoverageError,
    DistCovError,
    MalformedFrame,
    MismatchError,
    TransportError,
    UnknownKind,
)
from .ingest import (
    PartitionSpec,
    hjoin,
    load_table,
    mfeat_preset,
    partition_vertical,
    synthetic_table,
)
from .report import dump_matrix, run_report
from .report import compare_partitions as _compare_partitions
from .runtime import run_centralized, run_distributed
from .schedule import build_schedule, validate_schedule

__all__ = ["main"]

_PRESETS = tuple(f"mfeat-{n}" for n in range(2, 7))
_PROTOCOL_ERRORS = (TransportError, CoverageError, MalformedFrame, UnknownKind)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _width_list(text: str) -> list[int]:
    try:
        widths = [int(w) for w in text.split(",") if w.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated int list") from None
    if not widths:
        raise argparse.ArgumentTypeError("width list is empty")
    return widths


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="distcov",
        description="Exact covariance of vertically partitioned data, "
        "distributed or centralized.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("schedule", help="show and validate the exchange schedule")
    sp.add_argument("--sites", type=_positive_int, required=True)
    sp.add_argument("--json", action="store_true", help="emit JSON instead of text")
    sp.set_defaults(func=_cmd_schedule)

    rp = sub.add_parser("run", help="run one mode on a dataset and report")
    _data_args(rp)
    rp.add_argument("--mode", choices=("centralized", "distributed"), required=True)
    rp.add_argument("--transport", choices=("in-process", "tcp"), default="in-process")
    rp.add_argument("--deadline-ms", type=float, default=None)
    rp.add_argument("--out", type=Path, default=None, help="write the JSON report here")
    rp.add_argument("--dump-matrix", type=Path, default=None,
                    help="also write the full matrix (binary dump)")
    rp.set_defaults(func=_cmd_run)

    cp = sub.add_parser("compare", help="run both modes and assert bit-exact equality")
    _data_args(cp, repeatable_preset=True)
    cp.add_argument("--transport", choices=("in-process", "tcp"), default="in-process")
    cp.add_argument("--deadline-ms", type=float, default=None)
    cp.add_argument("--out", type=Path, default=None)
    cp.add_argument("--plot-data", type=Path, default=None,
                    help="write partitions/centralized-ms/distributed-ms rows here")
    cp.add_argument("--selftest-corrupt", action="store_true", help=argparse.SUPPRESS)
    cp.set_defaults(func=_cmd_compare)

    mp = sub.add_parser("cost-model", help="analytical operation counts and speed-up")
    g = mp.add_mutually_exclusive_group(required=True)
    g.add_argument("--widths", type=_width_list, default=None,
                   help="comma-separated per-site column counts")
    g.add_argument("--sites", type=_positive_int, default=None)
    mp.add_argument("--gamma", type=_positive_int, default=None,
                    help="equal per-site width (with --sites)")
    mp.add_argument("--out", type=Path, default=None)
    mp.set_defaults(func=_cmd_cost_model)

    gp = sub.add_parser("gen", help="write a reproducible synthetic dataset")
    gp.add_argument("--rows", type=_positive_int, required=True)
    gp.add_argument("--cols", type=_positive_int, required=True)
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--out", type=Path, required=True)
    gp.add_argument("--format", choices=("whitespace", "csv"), default="whitespace")
    gp.set_defaults(func=_cmd_gen)
    return p


def _data_args(sp: argparse.ArgumentParser, repeatable_preset: bool = False) -> None:
    sp.add_argument("--inputs", nargs="+", type=Path, required=True,
                    help="data files, joined column-wise in the given order")
    sp.add_argument("--format", choices=("whitespace", "csv"), default="whitespace")
    if repeatable_preset:
        sp.add_argument("--preset", action="append", choices=_PRESETS, default=None,
                        help="benchmark partitioning; repeat for several rows")
    else:
        sp.add_argument("--preset", choices=_PRESETS, default=None,
                        help="benchmark partitioning of the 649 feature columns")
    sp.add_argument("--spec", type=Path, default=None,
                    help="partition spec JSON; default is one site per input file")


def _load_inputs(args) -> tuple:
    tables = [load_table(p, format=args.format) for p in args.inputs]
    return hjoin(tables), tables


def _default_spec(tables) -> PartitionSpec:
    # One site per input file, columns in file order.
    groups = []
    start = 0
    for t in tables:
        groups.append(tuple(range(start, start + t.cols)))
        start += t.cols
    return PartitionSpec(total_cols=start, groups=tuple(groups))


def _resolve_spec(args, tables, preset_name: str | None) -> PartitionSpec:
    if preset_name is not None:
        return mfeat_preset(int(preset_name.split("-")[1]))
    if args.spec is not None:
        try:
            text = args.spec.read_text()
        except OSError as exc:
            raise DistCovError(f"cannot read {args.spec}: {exc}") from None
        return PartitionSpec.from_json(text)
    return _default_spec(tables)


def _emit(doc: dict, out: Path | None) -> None:
    text = json.dumps(doc, indent=2)
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n")


def _cmd_schedule(args) -> int:
    s = build_schedule(args.sites)
    report = validate_schedule(s)
    if args.json:
        _emit(
            {
                "t": s.t,
                "r": s.r,
                "predecessors": [list(p) for p in s.predecessors],
                "validation": {
                    "pairs_covered": report.pairs_covered,
                    "duplicates": [list(d) for d in report.duplicates],
                    "gaps": [list(g) for g in report.gaps],
                    "max_list_len": report.max_list_len,
                    "valid": report.valid,
                },
            },
            None,
        )
        return 0
    print(f"t={s.t} r={s.r}")
    for k, preds in enumerate(s.predecessors):
        shown = ", ".join(str(p) for p in preds) if preds else "(none)"
        print(f"site {k} <- {shown}")
    verdict = "valid" if report.valid else "INVALID"
    print(
        f"coverage: {report.pairs_covered} pairs, "
        f"max list length {report.max_list_len}, {verdict}"
    )
    return 0 if report.valid else 4


def _cmd_run(args) -> int:
    table, tables = _load_inputs(args)
    spec = _resolve_spec(args, tables, args.preset)
    blocks = partition_vertical(table, spec)
    if args.mode == "distributed":
        schedule = build_schedule(spec.sites)
        cov, decomp, metrics = run_distributed(
            blocks, schedule, transport=args.transport, deadline_ms=args.deadline_ms
        )
    else:
        schedule = None
        cov, decomp, metrics = run_centralized(blocks)
    if args.dump_matrix is not None:
        dump_matrix(cov, args.dump_matrix)
    _emit(run_report(args.mode, spec.sites, cov, decomp, metrics, schedule), args.out)
    return 0


def _cmd_compare(args) -> int:
    table, tables = _load_inputs(args)
    presets = args.preset if args.preset else [None]
    rows = []
    for preset_name in presets:
        spec = _resolve_spec(args, tables, preset_name)
        blocks = partition_vertical(table, spec)
        rows.append(
            _compare_partitions(
                blocks,
                transport=args.transport,
                deadline_ms=args.deadline_ms,
                _corrupt=args.selftest_corrupt,
            )
        )
    doc = {"report_version": 1, "comparisons": rows}
    _emit(doc, args.out)
    if args.plot_data is not None:
        lines = ["# partitions centralized_ms distributed_ms"]
        for row in rows:
            lines.append(
                f"{row['partitions']} {row['centralized_ms']:.3f} {row['distributed_ms']:.3f}"
            )
        args.plot_data.write_text("\n".join(lines) + "\n")
    return 0


def _cmd_cost_model(args) -> int:
    if args.widths is not None:
        widths = args.widths
    else:
        if args.gamma is None:
            print("usage error: --sites needs --gamma", file=sys.stderr)
            return 2
        widths = [args.gamma] * args.sites
    schedule = build_schedule(len(widths))
    report = distributed_cost(widths, schedule)
    doc = {"report_version": 1, "widths": widths, **report.to_dict()}
    _emit(doc, args.out)
    return 0


def _cmd_gen(args) -> int:
    table = synthetic_table(args.rows, args.cols, args.seed)
    sep = "," if args.format == "csv" else " "
    # %.17g round-trips every float64 exactly, so gen -> load is lossless.
    np.savetxt(args.out, table.values, fmt="%.17g", delimiter=sep)
    print(f"wrote {args.rows}x{args.cols} (seed {args.seed}) to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MismatchError as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return 5
    except _PROTOCOL_ERRORS as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return 4
    except DistCovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
