"""Benchmark the numba kernel against the pure-numpy fallback.

Runs repeated Lax-Friedrichs steps of the 4-d plane model at a few grid
sizes, reports per-step times for both backends, and checks they agree.

    python3 benchmarks/bench_backends.py [--nodes 21,31,41] [--steps 20]
"""

import argparse
import time

import numpy as np

from hjdecomp.grid import make_grid
from hjdecomp.kernels import HAVE_NUMBA, StepPlan, warmup
from hjdecomp.shapes import combine, sample_on_grid, slab
from hjdecomp.solver import _grid_box
from hjdecomp.systems import builtin_model, dissipation_bound

PI = np.pi


def bench_case(n: int, steps: int):
    grid = make_grid([-40, -40, -PI, 6], [40, 40, PI, 12], [n, n, n, n],
                     [False, False, True, False])
    model = builtin_model("plane4d", {"omega": (-1, 1), "accel": (-1, 1)})
    target = sample_on_grid(
        combine([slab(0, 0.0, 2.0), slab(1, 0.0, 2.0)], "intersection_max"), grid
    )
    box = _grid_box(grid)
    alphas = [dissipation_bound(model, k, box) for k in range(4)]
    dt = 0.25 / sum(a / dx for a, dx in zip(alphas, grid.spacings))

    results = {}
    fields = {}
    backends = ("numba", "numpy") if HAVE_NUMBA else ("numpy",)
    for backend in backends:
        plan = StepPlan(grid, model, alphas, backend=backend)
        v = target.values
        t0 = time.perf_counter()
        for _ in range(steps):
            v = plan.apply(v, dt)
        elapsed = time.perf_counter() - t0
        results[backend] = elapsed / steps
        fields[backend] = v
    diff = (
        float(np.abs(fields["numba"] - fields["numpy"]).max())
        if len(fields) == 2
        else float("nan")
    )
    return grid.total_nodes, results, diff


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", default="21,31,41",
                        help="comma-separated nodes per dimension")
    parser.add_argument("--steps", type=int, default=20)
    args = parser.parse_args()

    if HAVE_NUMBA:
        warmup()

    print(f"{'nodes/dim':>9} {'total':>10} {'numba s/step':>13} {'numpy s/step':>13} "
          f"{'speedup':>8} {'max |diff|':>11}")
    for n in (int(tok) for tok in args.nodes.split(",")):
        total, times, diff = bench_case(n, args.steps)
        tb = times.get("numba", float("nan"))
        tp = times["numpy"]
        speedup = tp / tb if tb == tb else float("nan")
        print(f"{n:>9} {total:>10} {tb:>13.5f} {tp:>13.5f} {speedup:>8.2f} {diff:>11.3e}")


if __name__ == "__main__":
    main()
