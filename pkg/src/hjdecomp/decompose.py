"""Coupling-as-disturbance decomposition: split schedules and solve pieces.

A self-coupled system z = (x, y) with x' = g(x, y, u_x, d_x) and
y' = h(x, y, u_y, d_y) is uncoupled by feeding each block the other block's
coupling variable as a bounded adversarial disturbance.  The disturbance
ranges may be split into sections; each (i, j) pair of sections yields one
"piece" holding two subsystem problems, and the cross-wiring invariant is
that the interval handed to one subsystem as a disturbance equals the state
constraint imposed on the other subsystem's matching dimension (a winning
trajectory must stay inside the interval its partner assumes for it).

Splitting a disturbance is only sound when the target set does not depend
on the variable being split.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .shapes import ImplicitSurface, slab
from .systems import Interval, SubsystemModel, builtin_model

__all__ = [
    "SelfCoupledSpec",
    "SplitSchedule",
    "Piece",
    "uniform_split",
    "build_pieces",
    "plane_decomposition",
    "decoupled2d_decomposition",
    "builtin_decomposition",
    "DECOMPOSABLE_SYSTEMS",
]


@dataclass(frozen=True)
class SelfCoupledSpec:
    """How a full system splits into two cross-coupled subsystem problems.

    ``x_dist_dim`` names the full-state dimension whose range feeds the
    x-subsystem's uncoupling disturbance (a y-block variable), and
    symmetrically for ``y_dist_dim``.  Fully decoupled systems carry no
    disturbance wiring (both dims None) and admit only the trivial schedule.
    """

    full_system: str
    full_params: dict
    box: tuple[Interval, ...]
    x_dims: tuple[int, ...]
    y_dims: tuple[int, ...]
    x_system: str
    x_params: dict
    y_system: str
    y_params: dict
    x_dist_dim: int | None = None
    x_dist_param: str | None = None
    y_dist_dim: int | None = None
    y_dist_param: str | None = None

    def __post_init__(self):
        n = len(self.box)
        if sorted(self.x_dims + self.y_dims) != list(range(n)):
            raise ValueError("x_dims and y_dims must partition the full dimension set")
        if tuple(sorted(self.x_dims)) != self.x_dims or tuple(sorted(self.y_dims)) != self.y_dims:
            raise ValueError("subsystem dimension maps must be strictly increasing")
        wired = [self.x_dist_dim, self.x_dist_param, self.y_dist_dim, self.y_dist_param]
        if any(w is None for w in wired) != all(w is None for w in wired):
            raise ValueError("disturbance wiring must be fully present or fully absent")
        if self.x_dist_dim is not None:
            if self.x_dist_dim not in self.y_dims:
                raise ValueError("the x-subsystem's disturbance variable must live in the y block")
            if self.y_dist_dim not in self.x_dims:
                raise ValueError("the y-subsystem's disturbance variable must live in the x block")

    @property
    def wired(self) -> bool:
        return self.x_dist_dim is not None

    @property
    def split_dims(self) -> tuple[int, ...]:
        """Full-state dimensions whose ranges get split (empty when unwired)."""
        return (self.x_dist_dim, self.y_dist_dim) if self.wired else ()


@dataclass(frozen=True)
class SplitSchedule:
    """Uniform partition of both disturbance ranges: m_x * m_y pieces total."""

    m_x: int
    m_y: int
    x_intervals: tuple[Interval, ...]
    y_intervals: tuple[Interval, ...]

    def __post_init__(self):
        if len(self.x_intervals) != self.m_x or len(self.y_intervals) != self.m_y:
            raise ValueError("schedule interval counts must match m_x and m_y")

    @property
    def pieces(self) -> int:
        return self.m_x * self.m_y


@dataclass(frozen=True)
class Piece:
    """One (i, j) section pair with its two cross-constrained subproblems.

    Indices are 1-based.  Constraint surfaces live on the subsystem's own
    (local) coordinates; they are built even for full-range sections, where
    their sub-zero set equals the whole computation box.
    """

    i: int
    j: int
    x_model: SubsystemModel
    y_model: SubsystemModel
    x_dist_interval: Interval | None = None
    x_constraint_interval: Interval | None = None
    x_constraint: ImplicitSurface | None = None
    y_dist_interval: Interval | None = None
    y_constraint_interval: Interval | None = None
    y_constraint: ImplicitSurface | None = None


def uniform_split(iv: Interval, m: int) -> list[Interval]:
    """m equal-width closed intervals covering iv, adjacent ones sharing endpoints."""
    if m < 1:
        raise ValueError(f"split count must be at least 1, got {m}")
    edges = np.linspace(iv.lo, iv.hi, m + 1)
    return [Interval(float(edges[k]), float(edges[k + 1])) for k in range(m)]


def _interval_slab(local_dim: int, iv: Interval) -> ImplicitSurface:
    center = 0.5 * (iv.lo + iv.hi)
    half = 0.5 * (iv.hi - iv.lo)
    return slab(local_dim, center, half)


def build_pieces(spec: SelfCoupledSpec, m_x: int, m_y: int) -> list[Piece]:
    """Cross product of the two split schedules: m_x * m_y wired pieces.

    For the plane instance m_x counts the speed sections (the x-subsystem's
    disturbance) and m_y the heading sections.
    """
    if m_x < 1 or m_y < 1:
        raise ValueError("split counts must be at least 1")
    if not spec.wired:
        if m_x != 1 or m_y != 1:
            raise ValueError(
                f"system {spec.full_system!r} has no uncoupling disturbance to split"
            )
        return [
            Piece(
                1, 1,
                builtin_model(spec.x_system, dict(spec.x_params)),
                builtin_model(spec.y_system, dict(spec.y_params)),
            )
        ]

    x_range = spec.box[spec.x_dist_dim]
    y_range = spec.box[spec.y_dist_dim]
    schedule = SplitSchedule(
        m_x, m_y,
        tuple(uniform_split(x_range, m_x)),
        tuple(uniform_split(y_range, m_y)),
    )
    # Local index of the constrained coordinate inside each subsystem.
    x_con_local = spec.x_dims.index(spec.y_dist_dim)
    y_con_local = spec.y_dims.index(spec.x_dist_dim)

    pieces = []
    for i, x_iv in enumerate(schedule.x_intervals, start=1):
        for j, y_iv in enumerate(schedule.y_intervals, start=1):
            x_model = builtin_model(
                spec.x_system, {**spec.x_params, spec.x_dist_param: x_iv.as_tuple()}
            )
            y_model = builtin_model(
                spec.y_system, {**spec.y_params, spec.y_dist_param: y_iv.as_tuple()}
            )
            pieces.append(
                Piece(
                    i=i,
                    j=j,
                    x_model=x_model,
                    y_model=y_model,
                    x_dist_interval=x_iv,
                    x_constraint_interval=y_iv,
                    x_constraint=_interval_slab(x_con_local, y_iv),
                    y_dist_interval=y_iv,
                    y_constraint_interval=x_iv,
                    y_constraint=_interval_slab(y_con_local, x_iv),
                )
            )
    return pieces


def plane_decomposition(params: dict, box) -> SelfCoupledSpec:
    """(px, psi) and (py, v) blocks of the constant-altitude plane.

    The speed range feeds the x-subsystem as the disturbance d_v; the
    heading range feeds the y-subsystem as d_psi.
    """
    params = dict(params or {})
    box = tuple(Interval(*iv) if not isinstance(iv, Interval) else iv for iv in box)
    if len(box) != 4:
        raise ValueError("plane decomposition needs a 4-dimensional box")
    shared = {k: params[k] for k in ("control_grows",) if k in params}
    x_params = {**shared, **{k: params[k] for k in ("omega", "paper_literal_sin") if k in params}}
    y_params = {**shared, **{k: params[k] for k in ("accel",) if k in params}}
    return SelfCoupledSpec(
        full_system="plane4d",
        full_params=params,
        box=box,
        x_dims=(0, 2),
        y_dims=(1, 3),
        x_system="plane_x_sub",
        x_params=x_params,
        y_system="plane_y_sub",
        y_params=y_params,
        x_dist_dim=3,
        x_dist_param="d_v",
        y_dist_dim=2,
        y_dist_param="d_psi",
    )


def decoupled2d_decomposition(params: dict, box) -> SelfCoupledSpec:
    """Two independent integrators; already decoupled, so no disturbance wiring."""
    params = dict(params or {})
    box = tuple(Interval(*iv) if not isinstance(iv, Interval) else iv for iv in box)
    if len(box) != 2:
        raise ValueError("decoupled2d decomposition needs a 2-dimensional box")
    shared = {k: params[k] for k in ("control_grows",) if k in params}
    x_params = dict(shared)
    y_params = dict(shared)
    if "u_x" in params:
        x_params["u"] = params["u_x"]
    if "u_y" in params:
        y_params["u"] = params["u_y"]
    return SelfCoupledSpec(
        full_system="decoupled2d",
        full_params=params,
        box=box,
        x_dims=(0,),
        y_dims=(1,),
        x_system="integrator1d",
        x_params=x_params,
        y_system="integrator1d",
        y_params=y_params,
    )


DECOMPOSABLE_SYSTEMS = {
    "plane4d": plane_decomposition,
    "decoupled2d": decoupled2d_decomposition,
}


def builtin_decomposition(system: str, params: dict, box) -> SelfCoupledSpec:
    try:
        factory = DECOMPOSABLE_SYSTEMS[system]
    except KeyError:
        raise ValueError(f"no builtin decomposition for system {system!r}") from None
    return factory(params, box)
