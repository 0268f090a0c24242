"""Bit-exact binary serialization of value functions.

Layout (all little-endian):

    bytes 0..3    magic ``HJVF``
    u32           format version (1)
    u32           dimension count d
    d times:      f64 min, f64 max, u64 node count, u8 periodic flag
    f64           horizon
    u8            mode (0 exact_time, 1 reach_within)
    n_total f64   node values, row-major, last dimension fastest

Malformed files are reported distinctly: wrong magic, unsupported version,
or a payload whose size disagrees with the header.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import ScalarField, make_grid
from .solver import MODES, ValueFunction

__all__ = [
    "write_field",
    "read_field",
    "FieldFileError",
    "BadMagicError",
    "VersionMismatchError",
    "TruncatedPayloadError",
    "MAGIC",
    "VERSION",
]

MAGIC = b"HJVF"
VERSION = 1

_HEAD = struct.Struct("<4sII")
_DIM = struct.Struct("<ddQB")
_TAIL = struct.Struct("<dB")


class FieldFileError(ValueError):
    """Base class for value-function file problems."""


class BadMagicError(FieldFileError):
    pass


class VersionMismatchError(FieldFileError):
    pass


class TruncatedPayloadError(FieldFileError):
    pass


def write_field(vf: ValueFunction, path) -> None:
    vf.field.assert_finite("value function")
    grid = vf.grid
    parts = [_HEAD.pack(MAGIC, VERSION, grid.dim_count)]
    for k in range(grid.dim_count):
        parts.append(
            _DIM.pack(grid.mins[k], grid.maxs[k], grid.counts[k], int(grid.periodic[k]))
        )
    parts.append(_TAIL.pack(vf.horizon, MODES.index(vf.mode)))
    parts.append(np.ascontiguousarray(vf.values, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_field(path) -> ValueFunction:
    raw = Path(path).read_bytes()
    if len(raw) < _HEAD.size:
        raise TruncatedPayloadError(f"{path}: file shorter than the fixed header")
    magic, version, dim = _HEAD.unpack_from(raw, 0)
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise VersionMismatchError(f"{path}: version {version}, this reader supports {VERSION}")
    offset = _HEAD.size
    need = offset + dim * _DIM.size + _TAIL.size
    if len(raw) < need:
        raise TruncatedPayloadError(f"{path}: header truncated ({len(raw)} of {need} bytes)")
    mins, maxs, counts, periodic = [], [], [], []
    for _ in range(dim):
        lo, hi, n, per = _DIM.unpack_from(raw, offset)
        offset += _DIM.size
        mins.append(lo)
        maxs.append(hi)
        counts.append(n)
        periodic.append(bool(per))
    horizon, mode_code = _TAIL.unpack_from(raw, offset)
    offset += _TAIL.size
    if mode_code >= len(MODES):
        raise FieldFileError(f"{path}: unknown mode code {mode_code}")
    grid = make_grid(mins, maxs, counts, periodic)
    expected = grid.total_nodes * 8
    payload = raw[offset:]
    if len(payload) != expected:
        raise TruncatedPayloadError(
            f"{path}: payload holds {len(payload)} bytes, header declares {expected}"
        )
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(grid.shape)
    field = ScalarField(grid, values)
    field.assert_finite(f"{path}")
    return ValueFunction(
        field=field,
        label=Path(path).stem,
        horizon=horizon,
        mode=MODES[mode_code],
    )
