"""Compensation-matrix filter bank and range compression."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .radar_model import C0, RadarConfig, derive_params
from .synth import ShapeError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RangeProfile:
    """Per-bin estimate over the range swath (complex or power)."""

    values: np.ndarray = field(repr=False)
    range_m: np.ndarray = field(repr=False)
    resolution_m: float = 0.0

    @property
    def power(self) -> np.ndarray:
        v = self.values
        return np.abs(v) ** 2 if np.iscomplexobj(v) else np.asarray(v, dtype=float)

    def power_db(self, floor_db: float = -300.0) -> np.ndarray:
        p = self.power
        with np.errstate(divide="ignore"):
            out = 10.0 * np.log10(p)
        return np.maximum(out, floor_db)

    @property
    def bin_m(self) -> float:
        return float(self.range_m[1] - self.range_m[0]) if self.range_m.size > 1 else 0.0

    def bins_per_resolution(self) -> float:
        return self.resolution_m / self.bin_m

    def nearest_bin(self, range_m: float) -> int:
        return int(np.argmin(np.abs(self.range_m - range_m)))


@dataclass(frozen=True)
class CompensationMatrix:
    """Unit-norm-column bank, column l tuned to ``R_near + l * dR``.

    Columns are ``exp(+j2pi(f_near + l*df) t) / sqrt(N_f)``; the positive
    exponent makes ``F @ x`` reproduce the dechirped tone model, so that the
    matched filter is ``F^H s``.
    """

    entries: np.ndarray = field(repr=False)
    near_beat_freq_hz: float
    freq_step_hz: float
    time_axis: np.ndarray = field(repr=False)
    range_m: np.ndarray = field(repr=False)
    resolution_m: float

    @property
    def shape(self):
        return self.entries.shape

    @property
    def n_fast(self) -> int:
        return self.entries.shape[0]

    @property
    def n_bins(self) -> int:
        return self.entries.shape[1]

    def profile(self, values) -> RangeProfile:
        return RangeProfile(np.asarray(values), self.range_m, self.resolution_m)

    def windowed(self, taps) -> "CompensationMatrix":
        """Bank for tapered snapshots: ``diag(h) F`` with columns renormalized."""
        taps = np.asarray(taps, dtype=float)
        if taps.shape != (self.n_fast,):
            raise ShapeError("window length must equal N_f")
        e = taps[:, None] * self.entries
        e = e / np.linalg.norm(e, axis=0, keepdims=True)
        return CompensationMatrix(
            e, self.near_beat_freq_hz, self.freq_step_hz,
            self.time_axis, self.range_m, self.resolution_m,
        )


def build_compensation_matrix(config: RadarConfig) -> CompensationMatrix:
    d = derive_params(config)
    if d.n_bins < d.n_fast:
        log.warning("undersampled filter bank: L=%d < N_f=%d", d.n_bins, d.n_fast)
    k = config.chirp_rate_hz_per_s
    tau_near = 2.0 * config.near_range_m / C0
    f_near = k * tau_near
    df = k * 2.0 * d.range_bin_m / C0
    t = tau_near + np.arange(d.n_fast) * d.sample_period_s
    ell = np.arange(d.n_bins)
    w = np.exp(2j * np.pi * np.outer(t, f_near + ell * df))
    w /= np.linalg.norm(w, axis=0, keepdims=True)
    ranges = config.near_range_m + ell * d.range_bin_m
    return CompensationMatrix(w, f_near, df, t, ranges, d.native_resolution_m)


@dataclass(frozen=True)
class WindowSpec:
    kind: str = "rectangular"
    length: int = 0

    def taps(self) -> np.ndarray:
        return window_taps(self.kind, self.length)


def window_taps(kind: str, length: int) -> np.ndarray:
    """Real symmetric taps in [0, 1]; Hann is 0.5*(1 - cos(2 pi n / (N-1)))."""
    kind = kind.lower()
    if kind in ("rect", "rectangular", "none", "boxcar"):
        return np.ones(length)
    if kind in ("hann", "hanning"):
        return np.hanning(length)
    raise ValueError(f"unknown window {kind!r}")


def _check(F: CompensationMatrix, s) -> np.ndarray:
    s = np.asarray(s)
    if s.shape[0] != F.n_fast:
        raise ShapeError(f"snapshot length {s.shape[0]} != N_f {F.n_fast}")
    return s


def matched_filter(F: CompensationMatrix, s) -> RangeProfile:
    """x_MF = F^H s."""
    s = _check(F, s)
    return F.profile(F.entries.conj().T @ s)


def windowed_matched_filter(F: CompensationMatrix, s, w: WindowSpec | str) -> RangeProfile:
    """x = F^H (h * s) for window taps h."""
    s = _check(F, s)
    if isinstance(w, str):
        w = WindowSpec(w, F.n_fast)
    if w.length != F.n_fast:
        raise ShapeError(f"window length {w.length} != N_f {F.n_fast}")
    return F.profile(F.entries.conj().T @ (w.taps() * s))
