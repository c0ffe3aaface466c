"""MAPC raw frame files.

Layout, all little-endian::

    offset  type    field
    0       4s      magic b"MAPC"
    4       u2      version (1)
    6       u2      sample type: 0 = complex64, 1 = int16 I/Q interleaved
    8       u4      N_f      fast-time samples per chirp
    12      u4      N_chirps chirps per frame
    16      u4      N_R      receivers
    20      ...     payload

The payload holds one or more frames back to back.  Within a frame the
fast-time index varies fastest, then chirp, then receiver.  int16 samples
are scaled so that full scale (32768) maps to 1.0.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .radar_model import PhaseCodeMatrix, RadarConfig, derive_params
from .synth import DataCube

MAGIC = b"MAPC"
VERSION = 1
C64, I16 = 0, 1
_HEADER = struct.Struct("<4sHHIII")
HEADER_SIZE = _HEADER.size
I16_FULL_SCALE = 32768.0


class RawFormatError(ValueError):
    pass


def _frame_layout(samples: np.ndarray) -> np.ndarray:
    # [q, m, n] -> receiver-major, fast-time fastest
    return np.ascontiguousarray(np.transpose(samples, (2, 1, 0)))


def export_raw(path, frames, sample_type: str = "c64") -> None:
    """Write one cube ``[q, m, n]`` or a stack ``[frame, q, m, n]``."""
    if isinstance(frames, DataCube):
        frames = frames.samples
    arr = np.asarray(frames)
    if arr.ndim == 3:
        arr = arr[None]
    if arr.ndim != 4:
        raise RawFormatError("expected [q, m, n] or [frame, q, m, n]")
    _, n_f, n_chirp, n_rx = arr.shape
    if sample_type == "c64":
        code = C64
        body = b"".join(_frame_layout(f).astype("<c8").tobytes() for f in arr)
    elif sample_type == "i16":
        code = I16
        parts = []
        for f in arr:
            f = _frame_layout(f)
            iq = np.empty(f.shape + (2,), dtype=np.float64)
            iq[..., 0], iq[..., 1] = f.real, f.imag
            q = np.clip(np.round(iq * I16_FULL_SCALE), -32768, 32767)
            parts.append(q.astype("<i2").tobytes())
        body = b"".join(parts)
    else:
        raise ValueError(f"unknown sample type {sample_type!r}")
    data = _HEADER.pack(MAGIC, VERSION, code, n_f, n_chirp, n_rx) + body
    Path(path).write_bytes(data)


def read_raw(path) -> tuple:
    """Returns ``(frames[frame, q, m, n] complex64, sample_type)``."""
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise RawFormatError("file shorter than header")
    magic, version, code, n_f, n_chirp, n_rx = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise RawFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise RawFormatError(f"unsupported version {version}")
    per_sample = {C64: 8, I16: 4}.get(code)
    if per_sample is None:
        raise RawFormatError(f"unknown sample type code {code}")
    frame_bytes = n_f * n_chirp * n_rx * per_sample
    payload = memoryview(data)[HEADER_SIZE:]
    if frame_bytes == 0 or len(payload) == 0 or len(payload) % frame_bytes:
        raise RawFormatError(
            f"payload of {len(payload)} bytes is not a whole number of "
            f"{frame_bytes}-byte frames"
        )
    n_frames = len(payload) // frame_bytes
    if code == C64:
        flat = np.frombuffer(payload, dtype="<c8")
    else:
        iq = np.frombuffer(payload, dtype="<i2").astype(np.float32) / np.float32(I16_FULL_SCALE)
        flat = (iq[0::2] + 1j * iq[1::2]).astype(np.complex64)
    frames = flat.reshape(n_frames, n_rx, n_chirp, n_f).transpose(0, 3, 2, 1)
    return np.ascontiguousarray(frames).astype(np.complex64, copy=False), (
        "c64" if code == C64 else "i16"
    )


def ingest_raw(path, config: RadarConfig, frame: int = 0, subtract_frame: int | None = None,
               code: PhaseCodeMatrix | None = None) -> DataCube:
    """Load one frame as a :class:`DataCube`, optionally minus a reference frame."""
    frames, _ = read_raw(path)
    d = derive_params(config)
    expect = (d.n_fast, d.n_chirps_total, config.num_rx)
    if frames.shape[1:] != expect:
        raise RawFormatError(f"file frame shape {frames.shape[1:]} != config {expect}")
    n = frames.shape[0]
    for k in (frame, subtract_frame):
        if k is not None and not 0 <= k < n:
            raise RawFormatError(f"frame {k} not in file ({n} frames)")
    samples = frames[frame].astype(np.complex128)
    if subtract_frame is not None:
        samples = samples - frames[subtract_frame].astype(np.complex128)
    return DataCube(samples, config, code)
