"""Lax-Friedrichs step kernels: numba-jitted hot path with a pure-numpy fallback.

The backend is selected by the environment flag ``HJDECOMP_BACKEND``
(``numba`` or ``numpy``; default ``numba`` when importable).  Solves whose
node count falls below ``HJDECOMP_NUMBA_MIN_NODES`` (default 20000) always
take the numpy path: the tiny subsystem grids are call-overhead-bound, and
keeping them off the numba threadpool lets independent pieces run safely
under a plain ThreadPoolExecutor.

Both backends evaluate the identical per-node expression in the identical
order, so results agree to the bit on typical hardware; a step reads one
immutable array and writes only its own node, which makes the output
independent of the numba thread count.
"""

from __future__ import annotations

import os

import numpy as np

from .grid import Grid, ScalarField, _diff_pair_arrays
from .systems import SubsystemModel

__all__ = ["StepPlan", "default_backend", "available_backends", "NUMBA_MIN_NODES"]

_BACKEND_ENV = "HJDECOMP_BACKEND"

NUMBA_MIN_NODES = int(os.environ.get("HJDECOMP_NUMBA_MIN_NODES", "20000"))

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if HAVE_NUMBA else ("numpy",)


def default_backend() -> str:
    choice = os.environ.get(_BACKEND_ENV, "").strip().lower()
    if choice in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if choice not in ("numba", "numpy"):
        raise ValueError(f"{_BACKEND_ENV} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba" and not HAVE_NUMBA:
        raise RuntimeError("HJDECOMP_BACKEND=numba but numba is not importable")
    return choice


if HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _lf_step_numba(
        vf, out, counts, strides, inv_dx, periodic, alphas,
        tstart, tend, los, his, sels, crow, coefs, dt,
    ):  # pragma: no cover - exercised through StepPlan
        n_total = vf.size
        d = counts.size
        for n in prange(n_total):
            h = 0.0
            diss = 0.0
            for k in range(d):
                st = strides[k]
                ck = counts[k]
                ik = (n // st) % ck
                if ik > 0:
                    vl = vf[n - st]
                elif periodic[k]:
                    vl = vf[n + (ck - 1) * st]
                else:
                    vl = 2.0 * vf[n] - vf[n + st]
                if ik < ck - 1:
                    vr = vf[n + st]
                elif periodic[k]:
                    vr = vf[n - (ck - 1) * st]
                else:
                    vr = 2.0 * vf[n] - vf[n - st]
                pm = (vf[n] - vl) * inv_dx[k]
                pp = (vr - vf[n]) * inv_dx[k]
                diss += alphas[k] * (pp - pm)
                if tend[k] > tstart[k]:
                    pav = 0.5 * (pm + pp)
                    for j in range(tstart[k], tend[k]):
                        ci = crow[j]
                        e = pav if ci < 0 else coefs[ci, n] * pav
                        h += 0.5 * (e * (los[j] + his[j]) + sels[j] * abs(e) * (his[j] - los[j]))
            out[n] = vf[n] + dt * (h + 0.5 * diss)


class StepPlan:
    """Per-solve preparation for repeated Lax-Friedrichs updates.

    Sorts the model's Hamiltonian terms by costate dimension, samples the
    state-dependent coefficients once, and dispatches each step to the
    selected backend.
    """

    def __init__(self, grid: Grid, model: SubsystemModel, alphas, backend: str | None = None):
        if model.state_dim != grid.dim_count:
            raise ValueError(
                f"model {model.label} has {model.state_dim} states, grid has {grid.dim_count}"
            )
        self.grid = grid
        self.model = model
        self.alphas = np.asarray(alphas, dtype=np.float64)
        if self.alphas.shape != (grid.dim_count,):
            raise ValueError("need one dissipation coefficient per grid dimension")

        if backend is None:
            # Auto choice honors the size threshold; an explicit request wins.
            requested = default_backend()
            small = grid.total_nodes < NUMBA_MIN_NODES
            self.backend = "numpy" if (requested == "numba" and small) else requested
        else:
            if backend not in available_backends():
                raise ValueError(f"backend {backend!r} unavailable")
            self.backend = backend

        d = grid.dim_count
        self._counts = np.asarray(grid.counts, dtype=np.int64)
        self._strides = grid.strides()
        self._inv_dx = 1.0 / np.asarray(grid.spacings, dtype=np.float64)
        self._periodic = np.asarray(grid.periodic, dtype=np.uint8)

        terms = sorted(model.terms, key=lambda t: t.dim)
        m = len(terms)
        self._los = np.array([t.lo for t in terms], dtype=np.float64)
        self._his = np.array([t.hi for t in terms], dtype=np.float64)
        self._sels = np.array([t.select for t in terms], dtype=np.float64)
        self._tstart = np.zeros(d, dtype=np.int64)
        self._tend = np.zeros(d, dtype=np.int64)
        for k in range(d):
            self._tstart[k] = next((j for j, t in enumerate(terms) if t.dim == k), m)
            self._tend[k] = self._tstart[k] + sum(1 for t in terms if t.dim == k)

        coords = grid.sparse_coords()
        self._crow = np.full(m, -1, dtype=np.int64)
        self._coef_sparse: list[np.ndarray | None] = [None] * m
        rows = []
        for j, t in enumerate(terms):
            if t.coef is None:
                continue
            sampled = np.asarray(t.coef.sample(coords), dtype=np.float64)
            self._coef_sparse[j] = sampled
            if self.backend == "numba":
                self._crow[j] = len(rows)
                rows.append(np.ascontiguousarray(np.broadcast_to(sampled, grid.shape)).ravel())
        if self.backend == "numba":
            n_total = grid.total_nodes
            self._coefs = (
                np.stack(rows) if rows else np.zeros((0, n_total), dtype=np.float64)
            )

    def apply(self, values: np.ndarray, dt: float) -> np.ndarray:
        """One backward step: v + dt * (H(z, (p- + p+)/2) + sum_k alpha_k (p+ - p-)/2).

        Marching forward in tau = -t, the artificial viscosity enters with a
        plus sign: alpha (p+ - p-)/2 is dx/2 times a second difference, so the
        scheme is monotone whenever alpha_k bounds |dH/dp_k| and dt satisfies
        the CFL bound.
        """
        if self.backend == "numba":
            flat = np.ascontiguousarray(values, dtype=np.float64).ravel()
            out = np.empty_like(flat)
            _lf_step_numba(
                flat, out, self._counts, self._strides, self._inv_dx, self._periodic,
                self.alphas, self._tstart, self._tend, self._los, self._his,
                self._sels, self._crow, self._coefs, dt,
            )
            return out.reshape(self.grid.shape)
        return self._apply_numpy(values, dt)

    def _apply_numpy(self, values, dt):
        v = values
        h = None
        diss = None
        for k in range(self.grid.dim_count):
            pm, pp = _diff_pair_arrays(v, k, self._inv_dx[k], bool(self._periodic[k]))
            dk = self.alphas[k] * (pp - pm)
            diss = dk if diss is None else diss + dk
            j0, j1 = int(self._tstart[k]), int(self._tend[k])
            if j1 > j0:
                pav = 0.5 * (pm + pp)
                for j in range(j0, j1):
                    c = self._coef_sparse[j]
                    e = pav if c is None else c * pav
                    tj = 0.5 * (
                        e * (self._los[j] + self._his[j])
                        + self._sels[j] * np.abs(e) * (self._his[j] - self._los[j])
                    )
                    h = tj if h is None else h + tj
        if h is None:
            h = 0.0
        return v + dt * (h + 0.5 * diss)


def warmup() -> None:
    """Trigger JIT compilation on a tiny problem (useful before timing runs)."""
    if not HAVE_NUMBA:
        return
    from .grid import make_grid
    from .systems import builtin_model

    g = make_grid([0.0, 0.0], [1.0, 1.0], [3, 3], [False, True])
    m = builtin_model("decoupled2d", {})
    plan = StepPlan(g, m, [1.0, 1.0], backend="numba")
    plan.apply(np.zeros(g.shape), 1e-3)
