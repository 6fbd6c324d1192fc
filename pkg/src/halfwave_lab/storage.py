"""Binary field container with JSON sidecar.

Layout of the ``.hwf`` container (all integers little endian):

    offset  size  content
    0       8     magic b"HWFIELD1"
    8       4     uint32 format version (currently 1)
    12      4     uint32 dimension n
    16      4     uint32 points per axis N
    20      4     uint32 flags (bit 0: time tag present)
    24      8     float64 box half length L
    32      8     float64 time tag (0 when absent)
    40      16*N^n complex128 samples, row-major axis order,
                  interleaved (re, im) little endian

The sidecar ``<path>.json`` repeats the geometry in readable form plus a
SHA-256 digest of the payload so containers can be validated without
parsing binary.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .spectral import Field, Grid

__all__ = ["save_field", "load_field", "ContainerError"]

_MAGIC = b"HWFIELD1"
_VERSION = 1
_HEADER = struct.Struct("<8sIIIIdd")


class ContainerError(ValueError):
    """Malformed or inconsistent field container."""


def save_field(path, f: Field) -> Path:
    """Write the field and its JSON sidecar; returns the container path."""
    path = Path(path)
    has_tag = f.time_tag is not None
    header = _HEADER.pack(
        _MAGIC,
        _VERSION,
        f.grid.dim,
        f.grid.points_per_axis,
        1 if has_tag else 0,
        f.grid.half_length,
        f.time_tag if has_tag else 0.0,
    )
    payload = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    path.write_bytes(header + payload)
    sidecar = {
        "format": "hwfield",
        "version": _VERSION,
        "dim": f.grid.dim,
        "points_per_axis": f.grid.points_per_axis,
        "half_length": f.grid.half_length,
        "time_tag": f.time_tag,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return path


def load_field(path, verify: bool = True) -> Field:
    """Read a container back; `verify` also checks the sidecar digest."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise ContainerError(f"{path} is too short to be a field container")
    magic, version, dim, n, flags, half_length, time_tag = _HEADER.unpack_from(blob)
    if magic != _MAGIC:
        raise ContainerError(f"{path} does not start with the container magic")
    if version != _VERSION:
        raise ContainerError(f"unsupported container version {version}")
    grid = Grid(dim, half_length, n)
    payload = blob[_HEADER.size:]
    expected = 16 * grid.num_points
    if len(payload) != expected:
        raise ContainerError(
            f"payload holds {len(payload)} bytes, geometry requires {expected}"
        )
    if verify:
        sidecar_path = Path(str(path) + ".json")
        if sidecar_path.exists():
            sidecar = json.loads(sidecar_path.read_text())
            digest = hashlib.sha256(payload).hexdigest()
            if sidecar.get("payload_sha256") not in (None, digest):
                raise ContainerError(f"payload digest mismatch for {path}")
    values = np.frombuffer(payload, dtype="<c16").reshape(grid.shape)
    return Field(grid, values, time_tag=time_tag if flags & 1 else None)
