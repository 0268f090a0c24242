import json
import shutil
import struct
import subprocess
from pathlib import Path

import numpy as np
import pytest

REPO_ARTIFACTS = Path(__file__).resolve().parents[2] / "artifacts"


def write_hjvf(path, mins, maxs, counts, periodic, values, horizon=0.0, mode_code=1):
    """Independent writer for the documented field format (test helper)."""
    parts = [struct.pack("<4sII", b"HJVF", 1, len(counts))]
    for lo, hi, n, per in zip(mins, maxs, counts, periodic):
        parts.append(struct.pack("<ddQB", float(lo), float(hi), int(n), int(per)))
    parts.append(struct.pack("<dB", float(horizon), int(mode_code)))
    parts.append(np.ascontiguousarray(values, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def square_target_values(xs, ys, extra_shape=(), half_width=2.0):
    """max(|x| - w, |y| - w) broadcast over trailing dimensions."""
    plane = np.maximum(
        np.abs(xs)[:, None] - half_width, np.abs(ys)[None, :] - half_width
    )
    out = plane.reshape(plane.shape + (1,) * len(extra_shape))
    return np.broadcast_to(out, plane.shape + tuple(extra_shape)).copy()


@pytest.fixture(scope="session")
def sample_target_4d(tmp_path_factory):
    """Synthetic 4-d field whose sub-zero set is the +/-2 square at all
    headings and speeds, on a grid with 2.5-unit position cells."""
    tmp = tmp_path_factory.mktemp("fields")
    path = tmp / "target4d.hjvf"
    n = 33
    mins = (-40.0, -40.0, -np.pi, 6.0)
    maxs = (40.0, 40.0, np.pi, 12.0)
    counts = (n, n, 9, 9)
    periodic = (0, 0, 1, 0)
    xs = np.linspace(-40, 40, n)
    values = square_target_values(xs, xs, extra_shape=(9, 9))
    write_hjvf(path, mins, maxs, counts, periodic, values)
    return path


def _cli_generate(out_dir: Path) -> bool:
    exe = shutil.which("hjdecomp")
    if exe is None:
        return False
    config = {
        "system": "plane4d",
        "params": {"omega": [-1.0, 1.0], "accel": [-1.0, 1.0]},
        "box": [
            {"name": "px", "min": -40.0, "max": 40.0, "nodes": 31},
            {"name": "py", "min": -40.0, "max": 40.0, "nodes": 31},
            {"name": "psi", "min": -np.pi, "max": np.pi, "nodes": 31, "periodic": True},
            {"name": "v", "min": 6.0, "max": 12.0, "nodes": 31},
        ],
        "target": {"slabs": [
            {"dim": 0, "center": 0.0, "half_width": 2.0},
            {"dim": 1, "center": 0.0, "half_width": 2.0},
        ]},
        "horizon": 1.0,
        "mode": "reach_within",
        "threads": 1,
    }
    cfg_path = out_dir / "plane31.json"
    cfg_path.write_text(json.dumps(config))
    # raw target: a solve over a vanishing horizon leaves the terminal data
    tiny = dict(config, horizon=1e-6)
    tiny_path = out_dir / "plane31_tiny.json"
    tiny_path.write_text(json.dumps(tiny))
    runs = [
        ["hjdecomp", "solve", "--config", str(tiny_path), "--mode", "full",
         "--out", str(out_dir / "target_31.hjvf")],
        ["hjdecomp", "solve", "--config", str(cfg_path), "--mode", "full",
         "--out", str(out_dir / "full_31.hjvf")],
        ["hjdecomp", "sweep", "--config", str(cfg_path), "--mv", "1,2",
         "--mpsi", "1,2,4,8", "--out", str(out_dir / "sweep_31.csv")],
    ]
    for cmd in runs:
        subprocess.run(cmd, check=True, capture_output=True)
    return True


@pytest.fixture(scope="session")
def solver_artifacts(tmp_path_factory):
    """The solver pipeline's exported artifacts: the sampled target field and
    the split-schedule sweep CSV (regenerated through the solver CLI when the
    repo copies are absent)."""
    if (REPO_ARTIFACTS / "target_31.hjvf").exists() and (
        REPO_ARTIFACTS / "sweep_31.csv"
    ).exists():
        root = REPO_ARTIFACTS
    else:
        root = tmp_path_factory.mktemp("artifacts")
        if not _cli_generate(root):
            pytest.skip("no exported artifacts and no solver CLI on PATH")
    full = root / "full_31.hjvf"
    return {
        "target": root / "target_31.hjvf",
        "sweep": root / "sweep_31.csv",
        "full": full if full.exists() else None,
    }
