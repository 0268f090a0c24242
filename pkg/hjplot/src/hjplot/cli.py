"""The hjplot command: render slices of field files and sweep curves."""

from __future__ import annotations

import argparse
import sys

from .slices import SliceSpec, plot_slice
from .sweeps import plot_sweep


def _fix_pairs(tokens) -> dict:
    out = {}
    for tok in tokens or ():
        dim, _, value = tok.partition("=")
        out[int(dim)] = float(value)
    return out


def cmd_slice(args) -> int:
    fixed = _fix_pairs(args.fix)
    if args.free:
        free = tuple(int(t) for t in args.free.split(","))
    else:
        # default: the two lowest dimensions not fixed (validated downstream)
        free = tuple(k for k in range(max(fixed, default=-1) + 3) if k not in fixed)[:2]
    spec = SliceSpec(fixed=fixed, free=free, level=args.level)
    summary = plot_slice(
        args.field, spec, args.out,
        overlay_path=args.overlay, vertices_csv=args.vertices_csv,
    )
    if summary["empty"]:
        print("slice is an empty set at this level")
    else:
        print(f"{len(summary['segments'])} contour segment(s) -> {args.out}")
    return 0


def cmd_sweep(args) -> int:
    summary = plot_sweep(args.csv, args.kind, args.out)
    if "peak" in summary:
        mv, mpsi, ratio = summary["peak"]
        print(f"peak volume ratio {ratio:.4f} at mv={mv}, mpsi={mpsi} -> {args.out}")
    else:
        print(f"{summary['rows']} rows -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hjplot", description="Figures from reachability artifacts"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("slice", help="filled sub-level contour of a 2-d slice")
    p.add_argument("--field", required=True, help="HJVF file")
    p.add_argument("--overlay", help="second HJVF file drawn as an outline")
    p.add_argument("--fix", action="append", default=[],
                   help="dim=value, repeatable; snapped to the nearest node")
    p.add_argument("--free", help="the two free dims as 'i,j' (default: first unfixed)")
    p.add_argument("--level", type=float, default=0.0)
    p.add_argument("--out", required=True, help="output PNG")
    p.add_argument("--vertices-csv", help="also write contour vertices as CSV")
    p.set_defaults(fn=cmd_slice)

    p = sub.add_parser("sweep", help="volume-ratio or timing curves from a sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--kind", choices=["ratio", "time"], default="ratio")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
