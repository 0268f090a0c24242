"""Dynamics models with closed-form optimized Hamiltonians.

Every builtin model is control-affine with interval-bounded inputs, so the
game Hamiltonian H(z, p) = min_u max_d p . f(z, u, d) decomposes into a sum
of independent terms of the form

    extremum over s in [lo, hi] of  c(z) * p_k * s

one term per input channel, plus pure drift terms carrying the degenerate
interval [1, 1].  The extremum of a linear function over an interval sits at
an endpoint, so with e = c(z) * p_k each term evaluates exactly as

    0.5 * (e * (lo + hi) + select * |e| * (hi - lo))

with select = +1 for an adversarial maximum and -1 for a minimizing control.
The same term list drives the scalar evaluator here and the grid kernels in
:mod:`hjdecomp.kernels`, so the two can never drift apart.

Builtin models:

* ``plane4d``        -- (px, py, psi, v): px' = v cos psi, py' = v sin psi,
                        psi' = omega, v' = a.
* ``plane_x_sub``    -- (px, psi): px' = dv cos psi, psi' = omega, with the
                        partner speed dv an adversarial disturbance.  Setting
                        ``paper_literal_sin`` swaps cos for sin.
* ``plane_y_sub``    -- (py, v): py' = v sin(dpsi), v' = a, with the partner
                        heading dpsi an adversarial disturbance.
* ``integrator1d``   -- z' = u.
* ``decoupled2d``    -- x' = ux, y' = uy.
* ``quad_lateral``   -- (z1, z2, z3, z4): z1' = z2, z2' = g tan z3, z3' = z4,
                        z4' = -d0 z3 - d1 z4 + n0 u (near-hover lateral
                        quadrotor with commanded pitch u).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Interval",
    "Coef",
    "HamTerm",
    "SubsystemModel",
    "interval_linear_extrema",
    "interval_sin_extrema",
    "interval_cos_extrema",
    "builtin_model",
    "hamiltonian",
    "dissipation_bound",
    "BUILTIN_MODEL_NAMES",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"interval lower bound {self.lo} exceeds upper bound {self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def max_abs(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def covers(self, other: "Interval", tol: float = 1e-12) -> bool:
        return self.lo <= other.lo + tol and self.hi >= other.hi - tol

    def as_tuple(self) -> tuple[float, float]:
        return (self.lo, self.hi)


def _as_interval(value, name: str) -> Interval:
    if isinstance(value, Interval):
        return value
    try:
        lo, hi = value
    except (TypeError, ValueError):
        raise ValueError(f"parameter {name!r} must be an interval (lo, hi), got {value!r}")
    return Interval(float(lo), float(hi))


def interval_linear_extrema(coef: float, iv: Interval) -> tuple[float, float]:
    """Exact (min, max) of coef * s for s in the interval."""
    a, b = coef * iv.lo, coef * iv.hi
    return (a, b) if a <= b else (b, a)


def _first_critical_at_or_after(lo: float, base: float) -> float:
    """Smallest base + 2*pi*k that is >= lo."""
    k = math.ceil((lo - base) / _TWO_PI)
    c = base + _TWO_PI * k
    if c < lo:  # guard against ceil rounding down by one ulp
        c += _TWO_PI
    return c


def interval_sin_extrema(iv: Interval) -> tuple[float, float]:
    """Exact (min, max) of sin over [lo, hi]; widths beyond 2*pi give (-1, 1)."""
    lo, hi = iv.lo, iv.hi
    if hi - lo >= _TWO_PI:
        return (-1.0, 1.0)
    smin = min(math.sin(lo), math.sin(hi))
    smax = max(math.sin(lo), math.sin(hi))
    if _first_critical_at_or_after(lo, math.pi / 2) <= hi:
        smax = 1.0
    if _first_critical_at_or_after(lo, -math.pi / 2) <= hi:
        smin = -1.0
    return (smin, smax)


def interval_cos_extrema(iv: Interval) -> tuple[float, float]:
    """Exact (min, max) of cos over [lo, hi]."""
    lo, hi = iv.lo, iv.hi
    if hi - lo >= _TWO_PI:
        return (-1.0, 1.0)
    cmin = min(math.cos(lo), math.cos(hi))
    cmax = max(math.cos(lo), math.cos(hi))
    if _first_critical_at_or_after(lo, 0.0) <= hi:
        cmax = 1.0
    if _first_critical_at_or_after(lo, math.pi) <= hi:
        cmin = -1.0
    return (cmin, cmax)


_TRIG_FNS = {"cos": np.cos, "sin": np.sin, "tan": np.tan}


@dataclass(frozen=True)
class Coef:
    """State-dependent term coefficient: scale * z[coord_dim] * trig(z[trig_dim]).

    Either factor may be absent; with both absent the coefficient is the
    constant ``scale``.
    """

    scale: float = 1.0
    coord_dim: int | None = None
    trig: str | None = None
    trig_dim: int | None = None

    def __post_init__(self):
        if (self.trig is None) != (self.trig_dim is None):
            raise ValueError("trig and trig_dim must be given together")
        if self.trig is not None and self.trig not in _TRIG_FNS:
            raise ValueError(f"unknown trig function {self.trig!r}")

    def sample(self, coords):
        """Evaluate on broadcastable coordinate arrays."""
        out = self.scale
        if self.coord_dim is not None:
            out = out * np.asarray(coords[self.coord_dim], dtype=np.float64)
        if self.trig is not None:
            out = out * _TRIG_FNS[self.trig](np.asarray(coords[self.trig_dim], dtype=np.float64))
        return out

    def at(self, z) -> float:
        return float(self.sample(z))

    def abs_bound(self, box) -> float:
        """Upper bound of |coefficient| over a box of per-dimension intervals."""
        bound = abs(self.scale)
        if self.coord_dim is not None:
            bound *= box[self.coord_dim].max_abs()
        if self.trig is not None:
            iv = box[self.trig_dim]
            if self.trig == "cos":
                tmin, tmax = interval_cos_extrema(iv)
            elif self.trig == "sin":
                tmin, tmax = interval_sin_extrema(iv)
            else:  # tan, monotone on (-pi/2, pi/2)
                if iv.lo <= -math.pi / 2 or iv.hi >= math.pi / 2:
                    raise ValueError(
                        f"tan coefficient needs its box inside (-pi/2, pi/2), got [{iv.lo}, {iv.hi}]"
                    )
                tmin, tmax = math.tan(iv.lo), math.tan(iv.hi)
            bound *= max(abs(tmin), abs(tmax))
        return bound


@dataclass(frozen=True)
class HamTerm:
    """One channel of the Hamiltonian: extremum of c(z) * p_dim * s over s in [lo, hi]."""

    dim: int
    lo: float
    hi: float
    select: float  # +1 adversarial max, -1 minimizing control; irrelevant when lo == hi
    coef: Coef | None = None

    def value(self, z, p) -> float:
        e = p[self.dim] if self.coef is None else self.coef.at(z) * p[self.dim]
        return 0.5 * (e * (self.lo + self.hi) + self.select * abs(e) * (self.hi - self.lo))

    def flow_bound(self, box) -> float:
        """Upper bound of this term's contribution to |f_dim| over the box."""
        cmax = 1.0 if self.coef is None else self.coef.abs_bound(box)
        return cmax * max(abs(self.lo), abs(self.hi))


@dataclass(frozen=True)
class SubsystemModel:
    """Immutable dynamics description driving both point and grid evaluation."""

    label: str
    state_dim: int
    control: dict = field(default_factory=dict)
    disturbance: dict = field(default_factory=dict)
    terms: tuple[HamTerm, ...] = ()

    def hamiltonian(self, state, costate) -> float:
        z = np.asarray(state, dtype=np.float64)
        p = np.asarray(costate, dtype=np.float64)
        if z.shape != (self.state_dim,) or p.shape != (self.state_dim,):
            raise ValueError(
                f"{self.label} expects state and costate of length {self.state_dim}, "
                f"got {z.shape} and {p.shape}"
            )
        return float(sum(t.value(z, p) for t in self.terms))

    def dissipation_bound(self, dim: int, box) -> float:
        if not 0 <= dim < self.state_dim:
            raise ValueError(f"dimension {dim} out of range for {self.label}")
        if len(box) != self.state_dim:
            raise ValueError(f"box must cover all {self.state_dim} state dimensions")
        box = [_as_interval(iv, "box entry") for iv in box]
        return float(sum(t.flow_bound(box) for t in self.terms if t.dim == dim))


def hamiltonian(model: SubsystemModel, state, costate) -> float:
    """min over controls, max over disturbances of costate . f(state, u, d)."""
    return model.hamiltonian(state, costate)


def dissipation_bound(model: SubsystemModel, dim: int, box) -> float:
    """Closed-form upper bound of |f_dim| over a state box and all admissible inputs."""
    return model.dissipation_bound(dim, box)


def _selectors(control_grows: bool) -> tuple[float, float]:
    """(control select, disturbance select); the default convention lets the
    control grow the reachable set (min) while the disturbance fights it (max)."""
    return (-1.0, 1.0) if control_grows else (1.0, -1.0)


def _take(params: dict, name: str, default=None, required_for: str | None = None):
    if name in params:
        return params.pop(name)
    if default is None and required_for is not None:
        raise ValueError(f"missing parameter {name!r} for model {required_for!r}")
    return default


def _reject_unknown(params: dict, name: str):
    if params:
        raise ValueError(f"unknown parameters for model {name!r}: {sorted(params)}")


def builtin_model(name: str, params: dict | None = None) -> SubsystemModel:
    """Construct one of the builtin models from a parameter map.

    Control intervals default to [-1, 1]; uncoupling disturbance intervals
    (``d_v``, ``d_psi``) and the quadrotor constants are required.
    """
    params = dict(params or {})
    control_grows = bool(_take(params, "control_grows", True))
    s_u, s_d = _selectors(control_grows)

    if name == "plane4d":
        omega = _as_interval(_take(params, "omega", (-1.0, 1.0)), "omega")
        accel = _as_interval(_take(params, "accel", (-1.0, 1.0)), "accel")
        _reject_unknown(params, name)
        terms = (
            HamTerm(0, 1.0, 1.0, 1.0, Coef(coord_dim=3, trig="cos", trig_dim=2)),
            HamTerm(1, 1.0, 1.0, 1.0, Coef(coord_dim=3, trig="sin", trig_dim=2)),
            HamTerm(2, omega.lo, omega.hi, s_u),
            HamTerm(3, accel.lo, accel.hi, s_u),
        )
        return SubsystemModel(
            "plane4d", 4, {"omega": omega, "accel": accel}, {}, terms
        )

    if name == "plane_x_sub":
        d_v = _as_interval(_take(params, "d_v", required_for=name), "d_v")
        omega = _as_interval(_take(params, "omega", (-1.0, 1.0)), "omega")
        literal_sin = bool(_take(params, "paper_literal_sin", False))
        _reject_unknown(params, name)
        trig = "sin" if literal_sin else "cos"
        terms = (
            HamTerm(0, d_v.lo, d_v.hi, s_d, Coef(trig=trig, trig_dim=1)),
            HamTerm(1, omega.lo, omega.hi, s_u),
        )
        return SubsystemModel("plane_x_sub", 2, {"omega": omega}, {"d_v": d_v}, terms)

    if name == "plane_y_sub":
        d_psi = _as_interval(_take(params, "d_psi", required_for=name), "d_psi")
        accel = _as_interval(_take(params, "accel", (-1.0, 1.0)), "accel")
        _reject_unknown(params, name)
        # The disturbance enters through sin(d_psi) only; optimize over its
        # exact range so the channel stays linear in s.
        smin, smax = interval_sin_extrema(d_psi)
        terms = (
            HamTerm(0, smin, smax, s_d, Coef(coord_dim=1)),
            HamTerm(1, accel.lo, accel.hi, s_u),
        )
        return SubsystemModel("plane_y_sub", 2, {"accel": accel}, {"d_psi": d_psi}, terms)

    if name == "integrator1d":
        u = _as_interval(_take(params, "u", (-1.0, 1.0)), "u")
        _reject_unknown(params, name)
        terms = (HamTerm(0, u.lo, u.hi, s_u),)
        return SubsystemModel("integrator1d", 1, {"u": u}, {}, terms)

    if name == "decoupled2d":
        u_x = _as_interval(_take(params, "u_x", (-1.0, 1.0)), "u_x")
        u_y = _as_interval(_take(params, "u_y", (-1.0, 1.0)), "u_y")
        _reject_unknown(params, name)
        terms = (
            HamTerm(0, u_x.lo, u_x.hi, s_u),
            HamTerm(1, u_y.lo, u_y.hi, s_u),
        )
        return SubsystemModel("decoupled2d", 2, {"u_x": u_x, "u_y": u_y}, {}, terms)

    if name == "quad_lateral":
        d0 = float(_take(params, "d0", required_for=name))
        d1 = float(_take(params, "d1", required_for=name))
        n0 = float(_take(params, "n0", required_for=name))
        gravity = float(_take(params, "gravity", required_for=name))
        u = _as_interval(_take(params, "u", (-1.0, 1.0)), "u")
        _reject_unknown(params, name)
        ulo, uhi = sorted((n0 * u.lo, n0 * u.hi))
        terms = (
            HamTerm(0, 1.0, 1.0, 1.0, Coef(coord_dim=1)),
            HamTerm(1, 1.0, 1.0, 1.0, Coef(scale=gravity, trig="tan", trig_dim=2)),
            HamTerm(2, 1.0, 1.0, 1.0, Coef(coord_dim=3)),
            HamTerm(3, 1.0, 1.0, 1.0, Coef(scale=-d0, coord_dim=2)),
            HamTerm(3, 1.0, 1.0, 1.0, Coef(scale=-d1, coord_dim=3)),
            HamTerm(3, ulo, uhi, s_u),
        )
        return SubsystemModel("quad_lateral", 4, {"u": u}, {}, terms)

    raise ValueError(f"unknown builtin model {name!r}")


BUILTIN_MODEL_NAMES = (
    "plane4d",
    "plane_x_sub",
    "plane_y_sub",
    "integrator1d",
    "decoupled2d",
    "quad_lateral",
)
