"""Dimension-generic terminal-value Hamilton-Jacobi PDE solver.

Marching in tau = -t, the value obeys D_tau V = H(z, DV) with V(0) = l, so
one explicit step with the global Lax-Friedrichs numerical Hamiltonian is

    V <- V + dt * ( H(z, (p- + p+)/2) + sum_k alpha_k (p+_k - p-_k)/2 )

with alpha_k a per-dimension bound on |f_k| and dt restricted by the CFL
condition; in this marching direction the viscosity term carries a plus
sign (it is a scaled second difference), which is what makes the discrete
update monotone.  Two reachability semantics are offered:

* ``reach_within`` (default): after every step V <- min(V, l), so the
  sub-zero set accumulates every state that can reach the target at any
  time up to the horizon.
* ``exact_time``: plain marching, sub-zero set = states reaching the target
  exactly at the horizon.

A state-constraint field c, when present, is enforced after freezing by
V <- max(V, c): trajectories may never leave the constraint set, and the
masking can only shrink the sub-zero set.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, ScalarField
from .kernels import StepPlan
from .systems import Interval, SubsystemModel, dissipation_bound

__all__ = [
    "SolveOptions",
    "ValueFunction",
    "CflViolationError",
    "cfl_timestep",
    "lax_friedrichs_update",
    "solve_terminal_hjpde",
    "MODES",
]

MODES = ("exact_time", "reach_within")


class CflViolationError(RuntimeError):
    """Raised when a step produces non-finite values (the CFL signal)."""


@dataclass(frozen=True)
class SolveOptions:
    horizon: float
    cfl_factor: float = 0.5
    mode: str = "reach_within"
    snapshot_times: tuple[float, ...] | None = None
    backend: str | None = None

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if not 0 < self.cfl_factor <= 1:
            raise ValueError(f"cfl_factor must lie in (0, 1], got {self.cfl_factor}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.snapshot_times is not None:
            ts = tuple(sorted(float(t) for t in self.snapshot_times))
            for t in ts:
                if not 0.0 <= t <= self.horizon:
                    raise ValueError(f"snapshot time {t} outside [0, {self.horizon}]")
            object.__setattr__(self, "snapshot_times", ts)


@dataclass
class ValueFunction:
    """Solved value field plus solve metadata."""

    field: ScalarField
    label: str
    horizon: float
    mode: str
    solve_seconds: float = 0.0
    steps: int = 0
    snapshots: list = None  # list of (tau, ScalarField)

    def __post_init__(self):
        if self.snapshots is None:
            self.snapshots = []

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values


def cfl_timestep(grid: Grid, alphas, cfl_factor: float) -> float:
    """Stable explicit step: cfl_factor / sum_k(alpha_k / dx_k).

    With all-zero alphas the field is static and the solver covers the whole
    horizon in a single step; that case returns +inf and the caller truncates.
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    if np.any(alphas < 0):
        raise ValueError("dissipation coefficients must be non-negative")
    denom = float(np.sum(alphas / np.asarray(grid.spacings)))
    if denom == 0.0:
        return math.inf
    return cfl_factor / denom


def lax_friedrichs_update(
    field: ScalarField,
    model: SubsystemModel,
    alphas,
    dt: float,
    backend: str | None = None,
) -> ScalarField:
    """One discrete backward step; aborts on non-finite output."""
    plan = StepPlan(field.grid, model, alphas, backend=backend)
    out = plan.apply(field.values, dt)
    if not np.isfinite(out).all():
        raise CflViolationError(
            f"non-finite values after step dt={dt}: time step too large for alphas {list(plan.alphas)}"
        )
    return ScalarField(field.grid, out)


def _grid_box(grid: Grid) -> list[Interval]:
    return [Interval(lo, hi) for lo, hi in zip(grid.mins, grid.maxs)]


def solve_terminal_hjpde(
    grid: Grid,
    model: SubsystemModel,
    target: ScalarField,
    constraint: ScalarField | None = None,
    opts: SolveOptions | None = None,
) -> ValueFunction:
    """March the terminal-value PDE from V = l to the requested horizon.

    The final step (and any step landing on a snapshot time) is truncated so
    the horizon is hit exactly.  In ``reach_within`` mode each step is also
    clamped by the previous iterate; for a monotone scheme under the CFL
    bound that clamp is a no-op in exact arithmetic, and it guarantees that
    the value is pointwise non-increasing in the horizon even in floating
    point.
    """
    if opts is None:
        raise ValueError("solve options are required")
    if not target.grid.same_discretization(grid):
        raise ValueError("target is sampled on a different grid")
    target.assert_finite("target")
    if constraint is not None:
        if not constraint.grid.same_discretization(grid):
            raise ValueError("constraint is sampled on a different grid")
        constraint.assert_finite("constraint")
        if not np.any(constraint.values <= 0.0):
            raise ValueError("constraint has an empty sub-zero set")

    box = _grid_box(grid)
    alphas = [dissipation_bound(model, k, box) for k in range(grid.dim_count)]
    dt_max = cfl_timestep(grid, alphas, opts.cfl_factor)
    plan = StepPlan(grid, model, alphas, backend=opts.backend)

    tv = target.values
    cv = constraint.values if constraint is not None else None
    freezing = opts.mode == "reach_within"

    v = tv.copy()
    if cv is not None:
        np.maximum(v, cv, out=v)

    snapshots: list[tuple[float, ScalarField]] = []
    pending = list(opts.snapshot_times or ())
    stops = sorted(set(pending) | {opts.horizon})
    if stops and stops[0] == 0.0:
        snapshots.append((0.0, ScalarField(grid, v.copy())))
        stops = stops[1:]

    t0 = time.perf_counter()
    steps = 0
    tau = 0.0
    for stop in stops:
        while tau < stop:
            remaining = stop - tau
            lands = remaining <= dt_max
            dt = remaining if lands else dt_max
            out = plan.apply(v, dt)
            if not np.isfinite(out).all():
                raise CflViolationError(
                    f"non-finite values at step {steps + 1} (tau={tau:.6g}, dt={dt:.6g})"
                )
            if freezing:
                np.minimum(out, tv, out=out)
                np.minimum(out, v, out=out)
            if cv is not None:
                np.maximum(out, cv, out=out)
            v = out
            steps += 1
            tau = stop if lands else tau + dt_max
        if stop != opts.horizon or (opts.snapshot_times and stop in opts.snapshot_times):
            snapshots.append((stop, ScalarField(grid, v.copy())))
    elapsed = time.perf_counter() - t0

    result = ScalarField(grid, v)
    result.assert_finite("solved value function")
    return ValueFunction(
        field=result,
        label=model.label,
        horizon=opts.horizon,
        mode=opts.mode,
        solve_seconds=elapsed,
        steps=steps,
        snapshots=snapshots,
    )
