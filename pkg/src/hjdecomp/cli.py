"""Command-line interface for solves, reconstruction, audits, and sweeps."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .grid import state_of_index
from .hjvf import read_field, write_field
from .pipeline import (
    MemoryBudgetError,
    ProblemConfig,
    default_tolerance,
    load_pieces_dir,
    run_decoupled_solve,
    run_full_solve,
    run_sweep,
    write_pieces_dir,
    write_sweep_csv,
)
from .reconstruct import Reconstruction, compare, sublevel_volume


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _slice_spec(text: str) -> dict[int, float]:
    out = {}
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        dim, _, value = tok.partition("=")
        out[int(dim)] = float(value)
    return out


def _load_approx(path_or_dir: str):
    p = Path(path_or_dir)
    if p.is_dir():
        return Reconstruction(load_pieces_dir(p))
    return read_field(p)


def cmd_solve(args) -> int:
    config = ProblemConfig.load(args.config)
    if args.solve_mode == "full":
        vf = run_full_solve(config)
        write_field(vf, args.out)
        print(
            f"full solve: {vf.grid.total_nodes} nodes, {vf.steps} steps, "
            f"{vf.solve_seconds:.3f} s -> {args.out}"
        )
    else:
        pieces = run_decoupled_solve(config, args.mv, args.mpsi)
        write_pieces_dir(pieces, args.out, config, args.mv, args.mpsi)
        total = sum(p.solve_seconds for p in pieces)
        print(
            f"decoupled solve: {len(pieces)} pieces ({2 * len(pieces)} subsystem solves), "
            f"{total:.3f} s solve time -> {args.out}"
        )
    return 0


def cmd_reconstruct(args) -> int:
    config = ProblemConfig.load(args.grid)
    pieces = load_pieces_dir(args.pieces)
    recon = Reconstruction(pieces)
    grid = config.grid()
    volume = sublevel_volume(recon, grid)
    print(f"reconstructed sub-zero volume: {volume!r}")
    if args.out:
        from .pipeline import _check_budget

        _check_budget(grid, config.memory_budget_bytes, "reconstruction export")
        field = recon.materialize(grid)
        first = pieces[0].x_value
        from .solver import ValueFunction

        vf = ValueFunction(
            field=field, label="reconstruction", horizon=first.horizon, mode=first.mode
        )
        write_field(vf, args.out)
        print(f"materialized reconstruction -> {args.out}")
    return 0


def cmd_compare(args) -> int:
    approx = _load_approx(args.approx)
    full = read_field(args.full)
    tol = args.tol if args.tol is not None else default_tolerance(full.grid)
    report = compare(approx, full, tol)
    text = "\n".join(f"{k} = {v!r}" for k, v in report.to_dict().items()) + "\n"
    Path(args.report).write_text(text)
    print(text, end="")
    return 0


def cmd_sweep(args) -> int:
    config = ProblemConfig.load(args.config)
    mv = args.mv or list(config.sweep_mv)
    mpsi = args.mpsi or list(config.sweep_mpsi)
    if not mv or not mpsi:
        print("sweep needs --mv and --mpsi lists (or sweep defaults in the config)", file=sys.stderr)
        return 2
    rows, _, _ = run_sweep(config, mv, mpsi, tol=args.tol)
    write_sweep_csv(rows, args.out)
    best = max(rows, key=lambda r: (r.volume_ratio, -r.pieces))
    print(f"{len(rows)} sweep rows -> {args.out}")
    print(
        f"best volume ratio {best.volume_ratio:.4f} at mv={best.mv}, mpsi={best.mpsi} "
        f"({best.pieces} pieces)"
    )
    return 0


def cmd_query(args) -> int:
    pieces = load_pieces_dir(args.pieces)
    recon = Reconstruction(pieces)
    state = np.asarray(_float_list(args.state))
    value = recon.value_at(state)
    print(f"{value!r}")
    print(f"inside approximation: {'yes' if value <= 0 else 'no'}")
    return 0


def cmd_export(args) -> int:
    if args.format != "csv":
        print(f"unsupported export format {args.format!r}", file=sys.stderr)
        return 2
    vf = read_field(args.input)
    grid = vf.grid
    fixed = _slice_spec(args.slice) if args.slice else {}
    for dim in fixed:
        if not 0 <= dim < grid.dim_count:
            print(f"slice dimension {dim} out of range", file=sys.stderr)
            return 2
    # Snap each fixed coordinate to the nearest node.
    index = [slice(None)] * grid.dim_count
    for dim, value in fixed.items():
        axis = grid.axis(dim)
        node = int(np.argmin(np.abs(axis - value)))
        index[dim] = node
        print(f"dim {dim}: snapped {value} to node {node} at {float(axis[node])!r}")
    free = [k for k in range(grid.dim_count) if k not in fixed]
    sliced = vf.values[tuple(index)]
    header = ",".join([f"x{k}" for k in free] + ["value"])
    lines = [header]
    axes = [grid.axis(k) for k in free]
    if free:
        mesh = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([m.ravel() for m in mesh], axis=1)
        flat = sliced.ravel()
        for row, val in zip(coords, flat):
            lines.append(",".join(repr(float(c)) for c in row) + f",{float(val)!r}")
    else:
        lines.append(f"{float(sliced)!r}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"{len(lines) - 1} rows -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hjdecomp",
        description="Backward reachable sets by level-set solves, with "
        "coupling-as-disturbance decomposition",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a full or decoupled solve")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", dest="solve_mode", choices=["full", "decoupled"], required=True)
    p.add_argument("--mv", type=int, default=1, help="speed-range sections (decoupled)")
    p.add_argument("--mpsi", type=int, default=1, help="heading-range sections (decoupled)")
    p.add_argument("--out", required=True, help="output file (full) or directory (decoupled)")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("reconstruct", help="evaluate a piece family on a full grid")
    p.add_argument("--pieces", required=True)
    p.add_argument("--grid", required=True, help="problem config defining the evaluation grid")
    p.add_argument("--out", help="materialize to an HJVF file")
    p.set_defaults(fn=cmd_reconstruct)

    p = sub.add_parser("compare", help="audit an approximation against a full solve")
    p.add_argument("--approx", required=True, help="HJVF file or pieces directory")
    p.add_argument("--full", required=True)
    p.add_argument("--tol", type=float)
    p.add_argument("--report", required=True)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("sweep", help="sweep split schedules against one full solve")
    p.add_argument("--config", required=True)
    p.add_argument("--mv", type=_int_list)
    p.add_argument("--mpsi", type=_int_list)
    p.add_argument("--tol", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("query", help="evaluate the reconstruction at one state")
    p.add_argument("--pieces", required=True)
    p.add_argument("--state", required=True, help="comma-separated full-state coordinates")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("export", help="export a value-function slice")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", default="csv")
    p.add_argument("--slice", help="fixed dims as dim=value pairs, e.g. 2=0.0,3=9.0")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_export)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, MemoryBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
