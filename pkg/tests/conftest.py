import math

import pytest

from hjdecomp.kernels import warmup
from hjdecomp.pipeline import ProblemConfig


@pytest.fixture(scope="session", autouse=True)
def jit_warm():
    # Compile the kernels once so timed tests never see JIT latency.
    warmup()


def plane_config(nodes: int, horizon: float = 1.0, threads=None) -> ProblemConfig:
    return ProblemConfig.from_dict(
        {
            "system": "plane4d",
            "params": {"omega": [-1.0, 1.0], "accel": [-1.0, 1.0]},
            "box": [
                {"name": "px", "min": -40.0, "max": 40.0, "nodes": nodes},
                {"name": "py", "min": -40.0, "max": 40.0, "nodes": nodes},
                {"name": "psi", "min": -math.pi, "max": math.pi, "nodes": nodes,
                 "periodic": True},
                {"name": "v", "min": 6.0, "max": 12.0, "nodes": nodes},
            ],
            "target": {"slabs": [
                {"dim": 0, "center": 0.0, "half_width": 2.0},
                {"dim": 1, "center": 0.0, "half_width": 2.0},
            ]},
            "horizon": horizon,
            "mode": "reach_within",
            "cfl_factor": 0.5,
            "threads": threads,
        }
    )


def decoupled_config(nodes: int, horizon: float = 1.0) -> ProblemConfig:
    return ProblemConfig.from_dict(
        {
            "system": "decoupled2d",
            "params": {"u_x": [-1.0, 1.0], "u_y": [-1.0, 1.0]},
            "box": [
                {"min": -3.0, "max": 3.0, "nodes": nodes},
                {"min": -3.0, "max": 3.0, "nodes": nodes},
            ],
            "target": {"slabs": [
                {"dim": 0, "center": 0.0, "half_width": 1.0},
                {"dim": 1, "center": 0.0, "half_width": 1.0},
            ]},
            "horizon": horizon,
        }
    )
