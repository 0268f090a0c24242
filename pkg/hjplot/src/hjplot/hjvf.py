"""Standalone reader for the HJVF value-function file format.

This package deliberately reimplements the format from its documentation
(little-endian: magic ``HJVF``, u32 version 1, u32 dim count, per dimension
f64 min / f64 max / u64 nodes / u8 periodic, then f64 horizon, u8 mode,
then row-major f64 node values) so it never links against the solver
package producing the files.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"HJVF"
VERSION = 1
MODES = ("exact_time", "reach_within")

_HEAD = struct.Struct("<4sII")
_DIM = struct.Struct("<ddQB")
_TAIL = struct.Struct("<dB")


class FieldFormatError(ValueError):
    pass


@dataclass(frozen=True)
class GridInfo:
    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    counts: tuple[int, ...]
    periodic: tuple[bool, ...]

    @property
    def dim_count(self) -> int:
        return len(self.counts)

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(
            (hi - lo) / n if per else (hi - lo) / (n - 1)
            for lo, hi, n, per in zip(self.mins, self.maxs, self.counts, self.periodic)
        )

    def axis(self, dim: int) -> np.ndarray:
        return self.mins[dim] + self.spacings[dim] * np.arange(self.counts[dim])


@dataclass(frozen=True)
class FieldFile:
    grid: GridInfo
    horizon: float
    mode: str
    values: np.ndarray


def read_field_file(path) -> FieldFile:
    raw = Path(path).read_bytes()
    if len(raw) < _HEAD.size:
        raise FieldFormatError(f"{path}: shorter than the fixed header")
    magic, version, dim = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FieldFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FieldFormatError(f"{path}: unsupported version {version}")
    offset = _HEAD.size
    need = offset + dim * _DIM.size + _TAIL.size
    if len(raw) < need:
        raise FieldFormatError(f"{path}: truncated header")
    mins, maxs, counts, periodic = [], [], [], []
    for _ in range(dim):
        lo, hi, n, per = _DIM.unpack_from(raw, offset)
        offset += _DIM.size
        mins.append(lo)
        maxs.append(hi)
        counts.append(int(n))
        periodic.append(bool(per))
    horizon, mode_code = _TAIL.unpack_from(raw, offset)
    offset += _TAIL.size
    if mode_code >= len(MODES):
        raise FieldFormatError(f"{path}: unknown mode code {mode_code}")
    total = int(np.prod(counts))
    payload = raw[offset:]
    if len(payload) != total * 8:
        raise FieldFormatError(
            f"{path}: payload {len(payload)} bytes, header declares {total * 8}"
        )
    values = np.frombuffer(payload, dtype="<f8").reshape(counts)
    return FieldFile(
        grid=GridInfo(tuple(mins), tuple(maxs), tuple(counts), tuple(periodic)),
        horizon=horizon,
        mode=MODES[mode_code],
        values=values,
    )
