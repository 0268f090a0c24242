"""Volume-ratio and timing curves from split-schedule sweep CSVs."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

SWEEP_HEADER = (
    "mv,mpsi,pieces,volume_approx,volume_full,volume_ratio,"
    "solve_seconds_decoupled,solve_seconds_full,reconstruct_seconds"
)

KINDS = ("ratio", "time")


@dataclass(frozen=True)
class SweepRow:
    mv: int
    mpsi: int
    pieces: int
    volume_approx: float
    volume_full: float
    volume_ratio: float
    solve_seconds_decoupled: float
    solve_seconds_full: float
    reconstruct_seconds: float


def read_sweep(path) -> list[SweepRow]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0].strip() != SWEEP_HEADER:
        raise ValueError(f"{path}: not a sweep CSV (header mismatch)")
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != 9:
            raise ValueError(f"{path}: malformed row {line!r}")
        rows.append(SweepRow(
            int(cells[0]), int(cells[1]), int(cells[2]),
            float(cells[3]), float(cells[4]), float(cells[5]),
            float(cells[6]), float(cells[7]), float(cells[8]),
        ))
    if not rows:
        raise ValueError(f"{path}: sweep CSV has no rows")
    return rows


def plot_sweep(csv_path, kind: str, out_path) -> dict:
    """One curve per mv across mpsi values; returns a summary for callers."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    rows = read_sweep(csv_path)
    by_mv: dict[int, list[SweepRow]] = {}
    for r in rows:
        by_mv.setdefault(r.mv, []).append(r)

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    if kind == "ratio":
        for mv, group in sorted(by_mv.items()):
            group = sorted(group, key=lambda r: r.mpsi)
            ax.plot([r.mpsi for r in group], [r.volume_ratio for r in group],
                    marker="o", label=f"mv={mv}")
        best = max(rows, key=lambda r: r.volume_ratio)
        ax.plot([best.mpsi], [best.volume_ratio], marker="*", markersize=16,
                color="#e9c46a", zorder=5)
        ax.annotate(
            f"peak {best.volume_ratio:.3f}\n(mv={best.mv}, mpsi={best.mpsi})",
            (best.mpsi, best.volume_ratio), textcoords="offset points", xytext=(8, -4),
        )
        ax.set_xlabel("heading sections (mpsi)")
        ax.set_ylabel("approximation volume / full volume")
        summary = {"peak": (best.mv, best.mpsi, best.volume_ratio)}
    else:
        for mv, group in sorted(by_mv.items()):
            group = sorted(group, key=lambda r: r.pieces)
            ax.plot([r.pieces for r in group],
                    [r.solve_seconds_decoupled for r in group],
                    marker="o", label=f"mv={mv}")
        ax.set_xlabel("pieces")
        ax.set_ylabel("decoupled solve seconds")
        summary = {"rows": len(rows)}
    if len(by_mv) > 1:
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return summary
