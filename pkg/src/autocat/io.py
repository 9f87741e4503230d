"""Serialization for states, Wigner maps, trajectories, and run records.

Binary layout (all integers little-endian): magic b"ACQS", u16 version
(currently 1), u8 kind (0 = state vector, 1 = density matrix, 2 = Wigner
grid), u8 payload code (4 = complex64, 8 = complex128, 3 = float64), u32
mode count, one u32 dimension per mode, then the payload row-major in the
coded dtype. States are written as complex128 and read back as whatever
the file declares. Wigner grids use kind 2 with dimensions (n_im, n_re)
and a float64 payload of re_axis, im_axis, values (row-major).

Text outputs are UTF-8 with LF newlines; floats are formatted with repr
so they round-trip exactly. Every writer goes through a temporary file
and os.replace, so a reader never observes a partial file.
"""

from __future__ import annotations

import json
import math
import os
import struct
import tempfile
from typing import Sequence

import numpy as np

from .fock import ModeSpace, QuantumState, number, partial_trace
from .wigner import WignerGrid, parity_point

__all__ = [
    "save_state",
    "load_state",
    "save_wigner",
    "load_wigner",
    "wigner_to_csv",
    "wigner_from_csv",
    "trajectory_to_csv",
    "sweep_to_csv",
    "shift_rows_to_csv",
    "record_json",
    "write_record",
    "atomic_write_text",
]

_MAGIC = b"ACQS"
_VERSION = 1
_HEADER = struct.Struct("<4sHBBI")
_CODES = {4: np.dtype("<c8"), 8: np.dtype("<c16"), 3: np.dtype("<f8")}


def _atomic_write(path: str, payload: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    _atomic_write(path, text.encode("utf-8"))


def _fmt(x: float) -> str:
    return repr(float(x))


def save_state(path: str, state: QuantumState) -> None:
    """Dump a state in the documented binary layout (complex128)."""
    kind = 0 if state.is_pure else 1
    dims = [s.dim for s in state.space]
    head = _HEADER.pack(_MAGIC, _VERSION, kind, 8, len(dims))
    head += struct.pack(f"<{len(dims)}I", *dims)
    payload = np.ascontiguousarray(state.data.astype("<c16"))
    _atomic_write(path, head + payload.tobytes())


def _read_header(raw: bytes):
    if len(raw) < _HEADER.size:
        raise ValueError("file too short for a state header")
    magic, version, kind, code, n_modes = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError("not a state dump (bad magic)")
    if version != _VERSION:
        raise ValueError(f"unsupported dump version {version}")
    if code not in _CODES:
        raise ValueError(f"unknown payload code {code}")
    off = _HEADER.size
    dims = struct.unpack_from(f"<{n_modes}I", raw, off)
    return kind, _CODES[code], dims, off + 4 * n_modes


def load_state(path: str) -> QuantumState:
    with open(path, "rb") as fh:
        raw = fh.read()
    kind, dtype, dims, off = _read_header(raw)
    if kind not in (0, 1):
        raise ValueError(f"file holds kind {kind}, not a state")
    n = int(np.prod(dims))
    count = n if kind == 0 else n * n
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=off)
    data = data.astype(complex)
    if kind == 1:
        data = data.reshape(n, n)
    return QuantumState(tuple(ModeSpace(d) for d in dims), data)


def save_wigner(path: str, grid: WignerGrid) -> None:
    """Binary Wigner map: kind 2, dims (n_im, n_re), float64 payload
    re_axis | im_axis | values."""
    n_im, n_re = grid.values.shape
    head = _HEADER.pack(_MAGIC, _VERSION, 2, 3, 2)
    head += struct.pack("<2I", n_im, n_re)
    payload = (np.ascontiguousarray(grid.re_axis.astype("<f8")).tobytes()
               + np.ascontiguousarray(grid.im_axis.astype("<f8")).tobytes()
               + np.ascontiguousarray(grid.values.astype("<f8")).tobytes())
    _atomic_write(path, head + payload)


def load_wigner(path: str) -> WignerGrid:
    with open(path, "rb") as fh:
        raw = fh.read()
    kind, dtype, dims, off = _read_header(raw)
    if kind != 2:
        raise ValueError(f"file holds kind {kind}, not a Wigner grid")
    n_im, n_re = dims
    re = np.frombuffer(raw, dtype=dtype, count=n_re, offset=off)
    off += 8 * n_re
    im = np.frombuffer(raw, dtype=dtype, count=n_im, offset=off)
    off += 8 * n_im
    vals = np.frombuffer(raw, dtype=dtype, count=n_im * n_re, offset=off)
    return WignerGrid(re.astype(float), im.astype(float),
                      vals.astype(float).reshape(n_im, n_re))


def wigner_to_csv(path: str, grid: WignerGrid) -> None:
    """CSV with header re,im,W; one row per grid point, row-major."""
    lines = ["re,im,W"]
    for i, b_im in enumerate(grid.im_axis):
        for j, b_re in enumerate(grid.re_axis):
            lines.append(
                f"{_fmt(b_re)},{_fmt(b_im)},{_fmt(grid.values[i, j])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def wigner_from_csv(path: str) -> WignerGrid:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "re,im,W":
            raise ValueError(f"unexpected Wigner CSV header: {header!r}")
        rows = [tuple(float(c) for c in ln.split(",")) for ln in fh if ln.strip()]
    re = np.unique([r[0] for r in rows])
    im = np.unique([r[1] for r in rows])
    if len(rows) != re.size * im.size:
        raise ValueError("Wigner CSV is not a complete rectangular grid")
    vals = np.empty((im.size, re.size))
    ji = {v: k for k, v in enumerate(re)}
    ii = {v: k for k, v in enumerate(im)}
    for b_re, b_im, w in rows:
        vals[ii[b_im], ji[b_re]] = w
    return WignerGrid(re, im, vals)


def trajectory_to_csv(path: str, times: Sequence[float],
                      states: Sequence[QuantumState],
                      include_w0: bool = False) -> None:
    """Trajectory table: t[ns], tr[1], n_m (n_b for bipartite states),
    parity_m, and the Wigner origin ReW0 when requested."""
    if len(times) != len(states):
        raise ValueError("one state per time sample required")
    if not states:
        raise ValueError("empty trajectory")
    two_mode = len(states[0].space) > 1
    cols = ["t[ns]", "tr[1]", "n_m"]
    if two_mode:
        cols.append("n_b")
    cols.append("parity_m")
    if include_w0:
        cols.append("ReW0")
    n_ops = [number(s).matrix for s in states[0].space]
    lines = [",".join(cols)]
    for t, st in zip(times, states):
        rho = st.rho
        mem = partial_trace(st, 0) if two_mode else st
        row = [_fmt(t * 1e9), _fmt(float(np.trace(rho).real))]
        rho_m = mem.rho
        row.append(_fmt(float(np.trace(n_ops[0] @ rho_m).real)))
        if two_mode:
            buf = partial_trace(st, 1)
            row.append(_fmt(float(np.trace(n_ops[1] @ buf.rho).real)))
        w0 = parity_point(mem)
        row.append(_fmt(0.5 * math.pi * w0))
        if include_w0:
            row.append(_fmt(w0))
        lines.append(",".join(row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def sweep_to_csv(path: str, columns: Sequence[str],
                 rows: Sequence[Sequence[float]]) -> None:
    """Generic numeric table with the given header."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(c) if not isinstance(c, (bool, str))
                              else str(c) for c in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def shift_rows_to_csv(path: str, rows) -> None:
    """Dispersive-shift table (n_photons, transmon_level, shift_MHz,
    label_confidence)."""
    lines = ["n_photons,transmon_level,shift_MHz,label_confidence"]
    for n, i, shift, conf in rows:
        lines.append(f"{int(n)},{int(i)},{_fmt(shift)},{_fmt(conf)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def record_json(protocol: str, params: dict, value: float | None,
                stderr: float, method: str, runtime_s: float) -> str:
    """Canonical result record. Non-finite values are stored as null so
    the output stays strict JSON; sentinels carry their bound in params."""
    if value is not None and not math.isfinite(value):
        value = None
    stderr = float(stderr)
    rec = {
        "protocol": protocol,
        "params": params,
        "value": value,
        "stderr": stderr if math.isfinite(stderr) else None,
        "method": method,
        "runtime_s": float(runtime_s),
    }
    return json.dumps(rec, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_record(path: str, protocol: str, params: dict,
                 value: float | None, stderr: float, method: str,
                 runtime_s: float) -> None:
    atomic_write_text(path, record_json(protocol, params, value, stderr,
                                        method, runtime_s))
