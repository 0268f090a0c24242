"""Problem configuration and orchestration of full and decoupled solves.

A problem is a JSON document naming a builtin system, a computation box, a
target built from slabs, and solve options.  The pipeline runs the direct
full-dimensional solve, the decoupled approximation for a given split
schedule (pieces solved independently by a worker pool), and sweeps over
schedules reusing one full solve.  Value functions are serialized in the
HJVF binary format; sweeps emit CSV rows.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .decompose import (
    DECOMPOSABLE_SYSTEMS,
    Piece,
    SelfCoupledSpec,
    build_pieces,
    builtin_decomposition,
)
from .grid import Grid, make_grid
from .hjvf import read_field, write_field
from .reconstruct import PieceResult, Reconstruction, ReconstructionReport, compare
from .shapes import ImplicitSurface, combine, sample_on_grid, slab
from .solver import MODES, SolveOptions, ValueFunction, solve_terminal_hjpde
from .systems import BUILTIN_MODEL_NAMES, builtin_model

__all__ = [
    "ProblemConfig",
    "SweepRow",
    "ConfigError",
    "MemoryBudgetError",
    "run_full_solve",
    "run_decoupled_solve",
    "run_sweep",
    "write_sweep_csv",
    "read_sweep_csv",
    "write_pieces_dir",
    "load_pieces_dir",
    "default_tolerance",
    "SWEEP_HEADER",
    "write_field",
    "read_field",
]

SWEEP_HEADER = (
    "mv,mpsi,pieces,volume_approx,volume_full,volume_ratio,"
    "solve_seconds_decoupled,solve_seconds_full,reconstruct_seconds"
)

DEFAULT_MEMORY_BUDGET = 4 * 1024**3
PIECES_MANIFEST = "pieces.json"


class ConfigError(ValueError):
    pass


class MemoryBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoxDim:
    min: float
    max: float
    nodes: int
    periodic: bool = False
    name: str = ""


@dataclass(frozen=True)
class TargetSlab:
    dim: int
    center: float
    half_width: float


@dataclass(frozen=True)
class ProblemConfig:
    system: str
    box: tuple[BoxDim, ...]
    target: tuple[TargetSlab, ...]
    horizon: float
    params: dict = field(default_factory=dict)
    mode: str = "reach_within"
    cfl_factor: float = 0.5
    threads: int | None = None
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET
    sweep_mv: tuple[int, ...] = ()
    sweep_mpsi: tuple[int, ...] = ()

    def __post_init__(self):
        if self.system not in BUILTIN_MODEL_NAMES:
            raise ConfigError(f"unknown system {self.system!r}")
        if not self.box:
            raise ConfigError("computation box is empty")
        if not self.target:
            raise ConfigError("target needs at least one slab")
        for t in self.target:
            if not 0 <= t.dim < len(self.box):
                raise ConfigError(f"target slab dimension {t.dim} outside the box")
            if not t.half_width > 0:
                raise ConfigError("target slab half_width must be positive")
        if not self.horizon > 0:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if not 0 < self.cfl_factor <= 1:
            raise ConfigError("cfl_factor must lie in (0, 1]")
        if self.memory_budget_bytes <= 0:
            raise ConfigError("memory budget must be positive")

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemConfig":
        try:
            box = tuple(
                BoxDim(
                    float(b["min"]), float(b["max"]), int(b["nodes"]),
                    bool(b.get("periodic", False)), str(b.get("name", "")),
                )
                for b in doc["box"]
            )
            target = tuple(
                TargetSlab(int(t["dim"]), float(t["center"]), float(t["half_width"]))
                for t in doc["target"]["slabs"]
            )
            sweep = doc.get("sweep", {})
            return cls(
                system=str(doc["system"]),
                box=box,
                target=target,
                horizon=float(doc["horizon"]),
                params=dict(doc.get("params", {})),
                mode=str(doc.get("mode", "reach_within")),
                cfl_factor=float(doc.get("cfl_factor", 0.5)),
                threads=int(doc["threads"]) if doc.get("threads") is not None else None,
                memory_budget_bytes=int(doc.get("memory_budget_bytes", DEFAULT_MEMORY_BUDGET)),
                sweep_mv=tuple(int(m) for m in sweep.get("mv", ())),
                sweep_mpsi=tuple(int(m) for m in sweep.get("mpsi", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed problem config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ProblemConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "params": dict(self.params),
            "box": [
                {"min": b.min, "max": b.max, "nodes": b.nodes, "periodic": b.periodic,
                 "name": b.name}
                for b in self.box
            ],
            "target": {"slabs": [
                {"dim": t.dim, "center": t.center, "half_width": t.half_width}
                for t in self.target
            ]},
            "horizon": self.horizon,
            "mode": self.mode,
            "cfl_factor": self.cfl_factor,
            "threads": self.threads,
            "memory_budget_bytes": self.memory_budget_bytes,
            "sweep": {"mv": list(self.sweep_mv), "mpsi": list(self.sweep_mpsi)},
        }

    # -- derived objects ---------------------------------------------------

    def grid(self) -> Grid:
        return make_grid(
            [b.min for b in self.box],
            [b.max for b in self.box],
            [b.nodes for b in self.box],
            [b.periodic for b in self.box],
        )

    def subgrid(self, dims) -> Grid:
        return make_grid(
            [self.box[k].min for k in dims],
            [self.box[k].max for k in dims],
            [self.box[k].nodes for k in dims],
            [self.box[k].periodic for k in dims],
        )

    def target_surface(self) -> ImplicitSurface:
        return combine(
            [slab(t.dim, t.center, t.half_width) for t in self.target],
            "intersection_max",
        )

    def model(self):
        return builtin_model(self.system, dict(self.params))

    def decomposition(self) -> SelfCoupledSpec:
        if self.system not in DECOMPOSABLE_SYSTEMS:
            raise ConfigError(f"system {self.system!r} has no builtin decomposition")
        return builtin_decomposition(
            self.system, dict(self.params), [(b.min, b.max) for b in self.box]
        )

    def solve_options(self, snapshot_times=None, backend=None) -> SolveOptions:
        return SolveOptions(
            horizon=self.horizon,
            cfl_factor=self.cfl_factor,
            mode=self.mode,
            snapshot_times=snapshot_times,
            backend=backend,
        )


def default_tolerance(grid: Grid) -> float:
    """Audit tolerance: three cells of the coarsest dimension, assuming
    value functions with Lipschitz constant near one per coordinate."""
    return 3.0 * max(grid.spacings)


def _check_budget(grid: Grid, budget: int, what: str) -> None:
    need = grid.total_nodes * 8
    if need > budget:
        raise MemoryBudgetError(
            f"{what} needs {need / 1024**2:.1f} MiB per field, over the "
            f"{budget / 1024**2:.1f} MiB budget; raise memory_budget_bytes to override"
        )


@dataclass
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

    def __post_init__(self):
        if self.pieces != self.mv * self.mpsi:
            raise ValueError("piece count must equal mv * mpsi")


def run_full_solve(config: ProblemConfig, snapshot_times=None, backend=None) -> ValueFunction:
    """Direct solve on the full-dimensional grid."""
    grid = config.grid()
    _check_budget(grid, config.memory_budget_bytes, f"full {grid.dim_count}-d solve")
    model = config.model()
    target = sample_on_grid(config.target_surface(), grid)
    opts = config.solve_options(snapshot_times=snapshot_times, backend=backend)
    return solve_terminal_hjpde(grid, model, target, None, opts)


def _split_legal(spec: SelfCoupledSpec, target_dims, m_v: int, m_psi: int) -> None:
    if not spec.wired:
        return
    offending = []
    if m_v > 1 and spec.x_dist_dim in target_dims:
        offending.append(spec.x_dist_dim)
    if m_psi > 1 and spec.y_dist_dim in target_dims:
        offending.append(spec.y_dist_dim)
    if offending:
        raise ConfigError(
            f"cannot split dimensions {offending}: the target set depends on them"
        )


def _local_target(spec_dims, target: tuple[TargetSlab, ...]) -> ImplicitSurface:
    local = [
        slab(spec_dims.index(t.dim), t.center, t.half_width)
        for t in target
        if t.dim in spec_dims
    ]
    if not local:
        raise ConfigError(
            "target must constrain both subsystems (every block needs at least one slab)"
        )
    return combine(local, "intersection_max")


def _solve_piece(config, spec, piece: Piece, backend=None) -> PieceResult:
    x_grid = config.subgrid(spec.x_dims)
    y_grid = config.subgrid(spec.y_dims)
    opts = config.solve_options(backend=backend)

    def solve_side(grid, model, dims, constraint_surface, constraint_iv, dist_dim):
        target = sample_on_grid(_local_target(dims, config.target), grid)
        constraint = None
        if constraint_surface is not None and dist_dim is not None:
            full_range = spec.box[dist_dim]
            # A section covering the whole range is the documented no-op mask;
            # skip it so box-edge nodes are not clipped to zero.
            if not constraint_iv.covers(full_range):
                constraint = sample_on_grid(constraint_surface, grid)
        return solve_terminal_hjpde(grid, model, target, constraint, opts)

    x_vf = solve_side(
        x_grid, piece.x_model, spec.x_dims, piece.x_constraint,
        piece.x_constraint_interval, spec.y_dist_dim,
    )
    y_vf = solve_side(
        y_grid, piece.y_model, spec.y_dims, piece.y_constraint,
        piece.y_constraint_interval, spec.x_dist_dim,
    )
    x_section = y_section = None
    if spec.wired:
        x_section = (spec.y_dist_dim, piece.x_constraint_interval.as_tuple())
        y_section = (spec.x_dist_dim, piece.y_constraint_interval.as_tuple())
    return PieceResult(
        piece.i, piece.j, x_vf, y_vf, spec.x_dims, spec.y_dims,
        x_section=x_section, y_section=y_section,
    )


def run_decoupled_solve(
    config: ProblemConfig, m_v: int, m_psi: int, backend=None
) -> list[PieceResult]:
    """Solve all 2 * m_v * m_psi subsystem problems, pieces in parallel."""
    spec = config.decomposition()
    target_dims = {t.dim for t in config.target}
    _split_legal(spec, target_dims, m_v, m_psi)
    for dims in (spec.x_dims, spec.y_dims):
        _check_budget(config.subgrid(dims), config.memory_budget_bytes, "subsystem solve")
    pieces = build_pieces(spec, m_v, m_psi)
    workers = config.threads or min(len(pieces), os.cpu_count() or 1)
    if workers <= 1 or len(pieces) == 1:
        return [_solve_piece(config, spec, p, backend) for p in pieces]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_solve_piece, config, spec, p, backend) for p in pieces]
        return [f.result() for f in futures]


def run_sweep(
    config: ProblemConfig,
    mv_list,
    mpsi_list,
    tol: float | None = None,
    full: ValueFunction | None = None,
    backend=None,
):
    """One row per (m_v, m_psi) pair; the full solve is computed once and reused.

    Returns (rows, full_value_function, reports).
    """
    mv_list = [int(m) for m in mv_list]
    mpsi_list = [int(m) for m in mpsi_list]
    if not mv_list or not mpsi_list:
        raise ConfigError("sweep needs at least one value for mv and mpsi")
    if full is None:
        full = run_full_solve(config, backend=backend)
    if tol is None:
        tol = default_tolerance(full.grid)
    rows = []
    reports = []
    for mv in mv_list:
        for mpsi in mpsi_list:
            pieces = run_decoupled_solve(config, mv, mpsi, backend=backend)
            t0 = time.perf_counter()
            report = compare(Reconstruction(pieces), full, tol)
            recon_seconds = time.perf_counter() - t0
            rows.append(
                SweepRow(
                    mv=mv,
                    mpsi=mpsi,
                    pieces=mv * mpsi,
                    volume_approx=report.volume_approx,
                    volume_full=report.volume_full,
                    volume_ratio=report.volume_ratio,
                    solve_seconds_decoupled=sum(p.solve_seconds for p in pieces),
                    solve_seconds_full=full.solve_seconds,
                    reconstruct_seconds=recon_seconds,
                )
            )
            reports.append(report)
    return rows, full, reports


def write_sweep_csv(rows, path) -> None:
    lines = [SWEEP_HEADER]
    for r in rows:
        lines.append(
            f"{r.mv},{r.mpsi},{r.pieces},{r.volume_approx!r},{r.volume_full!r},"
            f"{r.volume_ratio!r},{r.solve_seconds_decoupled:.6f},"
            f"{r.solve_seconds_full:.6f},{r.reconstruct_seconds:.6f}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_sweep_csv(path) -> list[SweepRow]:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0].strip() != SWEEP_HEADER:
        raise ValueError(f"{path}: not a sweep CSV (unexpected header)")
    rows = []
    for line in lines[1:]:
        mv, mpsi, pieces, va, vf_, vr, sd, sf, rs = line.split(",")
        rows.append(
            SweepRow(
                int(mv), int(mpsi), int(pieces), float(va), float(vf_), float(vr),
                float(sd), float(sf), float(rs),
            )
        )
    return rows


# -- pieces directory ------------------------------------------------------


def write_pieces_dir(pieces: list[PieceResult], out_dir, config: ProblemConfig | None = None,
                     mv: int | None = None, mpsi: int | None = None) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for p in pieces:
        x_name = f"piece_{p.i}_{p.j}_x.hjvf"
        y_name = f"piece_{p.i}_{p.j}_y.hjvf"
        write_field(p.x_value, out / x_name)
        write_field(p.y_value, out / y_name)
        entries.append({
            "i": p.i, "j": p.j, "x": x_name, "y": y_name,
            "x_solve_seconds": p.x_value.solve_seconds,
            "y_solve_seconds": p.y_value.solve_seconds,
            "x_section": [p.x_section[0], list(p.x_section[1])] if p.x_section else None,
            "y_section": [p.y_section[0], list(p.y_section[1])] if p.y_section else None,
        })
    first = pieces[0]
    manifest = {
        "format": "hjdecomp-pieces",
        "version": 1,
        "mv": mv if mv is not None else max(p.i for p in pieces),
        "mpsi": mpsi if mpsi is not None else max(p.j for p in pieces),
        "x_dims": list(first.x_dims),
        "y_dims": list(first.y_dims),
        "pieces": entries,
    }
    if config is not None:
        manifest["config"] = config.to_dict()
    (out / PIECES_MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")


def load_pieces_dir(in_dir) -> list[PieceResult]:
    root = Path(in_dir)
    manifest_path = root / PIECES_MANIFEST
    if not manifest_path.exists():
        raise FileNotFoundError(f"{root}: missing {PIECES_MANIFEST}")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("format") != "hjdecomp-pieces":
        raise ValueError(f"{manifest_path}: not a pieces manifest")
    x_dims = tuple(manifest["x_dims"])
    y_dims = tuple(manifest["y_dims"])
    results = []
    def parse_section(raw):
        if raw is None:
            return None
        dim, (lo, hi) = raw
        return (int(dim), (float(lo), float(hi)))

    for entry in manifest["pieces"]:
        x_vf = read_field(root / entry["x"])
        y_vf = read_field(root / entry["y"])
        x_vf.solve_seconds = float(entry.get("x_solve_seconds", 0.0))
        y_vf.solve_seconds = float(entry.get("y_solve_seconds", 0.0))
        results.append(
            PieceResult(
                int(entry["i"]), int(entry["j"]), x_vf, y_vf, x_dims, y_dims,
                x_section=parse_section(entry.get("x_section")),
                y_section=parse_section(entry.get("y_section")),
            )
        )
    return results
