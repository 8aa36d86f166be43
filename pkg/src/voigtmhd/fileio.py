"""Binary checkpoints and CSV diagnostics.

Checkpoint layout (all little-endian)::

    magic      4 bytes   b"VMHS"
    version    u32       1
    n          u32
    alpha      f64
    nu         f64
    t          f64
    fields     u32       3   (u, B, Psi)
    body       fields * 3 * n * n * (n//2+1) complex coefficients, each an
               (f64 real, f64 imag) pair, row-major half-spectrum order
    checksum   8 bytes   BLAKE2b-64 digest of body
"""
from __future__ import annotations

import csv
import hashlib
import math
import os
import struct

import numpy as np

from . import spectral as sp
from .diagnostics import DiagnosticsRecord
from .dynamics import VoigtParams, VoigtState, _require_solenoidal
from .errors import CheckpointError, NotSolenoidalError

MAGIC = b"VMHS"
VERSION = 1
_HEADER = struct.Struct("<4sIIdddI")
_CHECKSUM_BYTES = 8
_DTYPE = np.dtype("<c16")


def _checksum(body):
    return hashlib.blake2b(body, digest_size=_CHECKSUM_BYTES).digest()


def checkpoint_bytes(state):
    grid = state.grid
    header = _HEADER.pack(MAGIC, VERSION, grid.n, state.params.alpha, state.params.nu, state.t, 3)
    body = b"".join(
        np.ascontiguousarray(f.coeffs, dtype=_DTYPE).tobytes(order="C")
        for f in (state.u, state.B, state.Psi)
    )
    return header + body + _checksum(body)


def save_checkpoint(state, path):
    data = checkpoint_bytes(state)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def load_checkpoint(path, params=None):
    """Read a checkpoint; ``params`` supplies cfl/dt settings (alpha and nu come from the file)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size + _CHECKSUM_BYTES:
        raise CheckpointError(f"{path}: truncated header")
    magic, version, n, alpha, nu, t, nfields = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    if nfields != 3:
        raise CheckpointError(f"{path}: expected 3 fields, found {nfields}")
    try:
        grid = sp.make_grid(n)
    except ValueError as exc:
        raise CheckpointError(f"{path}: {exc}") from None
    per_field = 3 * int(np.prod(grid.spectral_shape)) * _DTYPE.itemsize
    body_len = nfields * per_field
    expected = _HEADER.size + body_len + _CHECKSUM_BYTES
    if len(data) != expected:
        raise CheckpointError(f"{path}: truncated or oversized file ({len(data)} != {expected} bytes)")
    body = data[_HEADER.size:_HEADER.size + body_len]
    if _checksum(body) != data[-_CHECKSUM_BYTES:]:
        raise CheckpointError(f"{path}: checksum mismatch")
    arr = np.frombuffer(body, dtype=_DTYPE).astype(complex).reshape((nfields, 3) + grid.spectral_shape)

    if params is None:
        params = VoigtParams(alpha=alpha, nu=nu)
    else:
        params = VoigtParams(alpha=alpha, nu=nu, cfl=params.cfl,
                             dt_override=params.dt_override, dt_cap=params.dt_cap)
    state = VoigtState.from_packed(arr.reshape((9,) + grid.spectral_shape), grid, t, params)
    for name, f in (("u", state.u), ("B", state.B)):
        try:
            _require_solenoidal(f, name)
        except NotSolenoidalError as exc:
            raise CheckpointError(f"{path}: {exc}") from None
        if sp.mean_mode_nonzero(f):
            raise CheckpointError(f"{path}: {name} has a nonzero mean")
    return state


# -- CSV -------------------------------------------------------------------------

HEADER = ",".join(DiagnosticsRecord.columns())


def format_row(record):
    vals = record.values()
    for name, v in zip(DiagnosticsRecord.columns(), vals):
        if not math.isfinite(v):
            raise ValueError(f"refusing to serialize non-finite {name}={v!r} at t={record.t!r}")
    return ",".join(format(float(v), ".17g") for v in vals)


def append_diagnostics(record, csv_path):
    """Append one row, writing the header first if the file is new or empty."""
    line = format_row(record)
    new = not os.path.exists(csv_path) or os.path.getsize(csv_path) == 0
    with open(csv_path, "a", newline="") as fh:
        if new:
            fh.write(HEADER + "\n")
        fh.write(line + "\n")


def read_diagnostics(csv_path):
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != DiagnosticsRecord.columns():
            raise ValueError(f"{csv_path}: unexpected diagnostics header")
        return [DiagnosticsRecord(*(float(x) for x in row)) for row in reader if row]


def write_diagnostics(records, csv_path):
    with open(csv_path, "w", newline="") as fh:
        fh.write(HEADER + "\n")
        for r in records:
            fh.write(format_row(r) + "\n")


def write_key_values(pairs, path):
    with open(path, "w") as fh:
        for key, value in pairs:
            fh.write(f"{key}: {value}\n")
