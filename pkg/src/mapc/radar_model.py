"""Radar configuration, scene description and slow-time phase codes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

C0 = 3e8  # m/s, matches the round value used for the waveform tables


class ConfigError(ValueError):
    """Invalid radar configuration or scenario."""


class SceneError(ValueError):
    """Target outside the processed range swath."""


@dataclass(frozen=True)
class RadarConfig:
    """Waveform, array, sampling and CPI parameters.

    ``chirps_per_tx_in_cpi`` counts chirps per transmit sequence, so a CPI
    holds ``num_tx * chirps_per_tx_in_cpi`` chirps in total.
    ``oversample_factor`` is the range-grid oversampling of the filter bank.
    """

    num_tx: int = 2
    num_rx: int = 4
    start_freq_hz: float = 77e9
    bandwidth_hz: float = 240e6
    sweep_time_s: float = 2.67e-6
    chirp_rate_hz_per_s: float | None = None
    adc_rate_hz: float = 80e6
    chirps_per_tx_in_cpi: int = 32
    near_range_m: float = 0.0
    far_range_m: float = 133.0
    oversample_factor: int = 3
    noise_power: float = 0.0

    def __post_init__(self):
        if self.chirp_rate_hz_per_s is None:
            object.__setattr__(
                self, "chirp_rate_hz_per_s", self.bandwidth_hz / self.sweep_time_s
            )
        self.validate()

    def validate(self):
        for name in ("num_tx", "num_rx", "chirps_per_tx_in_cpi", "oversample_factor"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        for name in ("start_freq_hz", "bandwidth_hz", "sweep_time_s", "adc_rate_hz"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        expected = self.bandwidth_hz / self.sweep_time_s
        if abs(self.chirp_rate_hz_per_s - expected) > 1e-9 * abs(expected):
            raise ConfigError(
                f"chirp_rate_hz_per_s={self.chirp_rate_hz_per_s:g} inconsistent "
                f"with bandwidth/sweep_time={expected:g}"
            )
        if not (self.far_range_m > self.near_range_m >= 0):
            raise ConfigError("need far_range_m > near_range_m >= 0")
        if self.noise_power < 0:
            raise ConfigError("noise_power must be >= 0")

    @property
    def derived(self) -> "DerivedParams":
        return derive_params(self)

    def with_(self, **changes) -> "RadarConfig":
        """Copy with fields replaced; chirp rate is recomputed unless given."""
        if "chirp_rate_hz_per_s" not in changes and (
            "bandwidth_hz" in changes or "sweep_time_s" in changes
        ):
            changes["chirp_rate_hz_per_s"] = None
        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedParams:
    n_fast: int  # N_f
    n_bins: int  # L
    wavelength_m: float
    tx_spacing_m: float  # d_T
    rx_spacing_m: float  # d_R
    block_duration_s: float
    range_bin_m: float
    native_resolution_m: float
    sample_period_s: float
    n_chirps_total: int


def derive_params(config: RadarConfig) -> DerivedParams:
    """Quantities derived from the table parameters.

    The fast-time sample count is floored so no sample lies beyond the sweep.
    """
    n_fast = int(math.floor(config.sweep_time_s * config.adc_rate_hz + 1e-9))
    if n_fast < 2:
        raise ConfigError(f"sweep_time * adc_rate gives N_f={n_fast} < 2")
    n_bins = config.oversample_factor * n_fast
    lam = C0 / config.start_freq_hz
    return DerivedParams(
        n_fast=n_fast,
        n_bins=n_bins,
        wavelength_m=lam,
        tx_spacing_m=config.num_rx * lam / 2.0,
        rx_spacing_m=lam / 2.0,
        block_duration_s=config.num_tx * config.sweep_time_s,
        range_bin_m=(config.far_range_m - config.near_range_m) / n_bins,
        native_resolution_m=C0 / (2.0 * config.bandwidth_hz),
        sample_period_s=1.0 / config.adc_rate_hz,
        n_chirps_total=config.num_tx * config.chirps_per_tx_in_cpi,
    )


@dataclass(frozen=True)
class Target:
    """Point scatterer; ``velocity_mps`` is radial, positive receding."""

    range_m: float
    velocity_mps: float = 0.0
    azimuth_deg: float = 0.0
    amplitude: complex = 1.0 + 0j

    @property
    def u(self) -> float:
        return math.sin(math.radians(self.azimuth_deg))

    def doppler_hz(self, config: RadarConfig) -> float:
        return 2.0 * self.velocity_mps / derive_params(config).wavelength_m

    def norm_doppler(self, config: RadarConfig) -> float:
        """Doppler in cycles per chirp."""
        return self.doppler_hz(config) * config.sweep_time_s

    def spatial_freq(self, config: RadarConfig) -> float:
        d = derive_params(config)
        return self.u * d.rx_spacing_m / d.wavelength_m

    def delay_s(self) -> float:
        return 2.0 * self.range_m / C0

    def beat_hz(self, config: RadarConfig) -> float:
        return config.chirp_rate_hz_per_s * self.delay_s() + self.doppler_hz(config)

    def norm_beat(self, config: RadarConfig) -> float:
        return self.beat_hz(config) / config.adc_rate_hz


def amplitude_from_rcs(rcs_dbsm: float, range_m: float, phase_rad: float = 0.0) -> complex:
    """Relative echo amplitude, sqrt(sigma) / R**2 (two-way R^-4 power law)."""
    if range_m <= 0:
        raise SceneError("RCS conversion needs range_m > 0")
    mag = math.sqrt(10.0 ** (rcs_dbsm / 10.0)) / range_m**2
    return mag * complex(math.cos(phase_rad), math.sin(phase_rad))


def amplitude_from_db(amplitude_db: float, phase_rad: float = 0.0) -> complex:
    mag = 10.0 ** (amplitude_db / 20.0)
    return mag * complex(math.cos(phase_rad), math.sin(phase_rad))


def velocity_for_doppler_bin(config: RadarConfig, bin_index: int) -> float:
    """Radial velocity whose doppler falls exactly on a block-rate DFT bin.

    ``bin_index`` may be negative; the block-rate doppler is
    ``bin_index / chirps_per_tx_in_cpi`` cycles per block.
    """
    d = derive_params(config)
    fd_block = bin_index / config.chirps_per_tx_in_cpi
    fd_hz = fd_block / d.block_duration_s
    return fd_hz * d.wavelength_m / 2.0


def snap_velocity(config: RadarConfig, velocity_mps: float) -> float:
    """Nearest velocity lying on the block-rate doppler grid."""
    d = derive_params(config)
    fd_block = 2.0 * velocity_mps / d.wavelength_m * d.block_duration_s
    b = int(round(fd_block * config.chirps_per_tx_in_cpi))
    return velocity_for_doppler_bin(config, b)


def check_scene(config: RadarConfig, targets) -> None:
    for t in targets:
        if not (config.near_range_m <= t.range_m <= config.far_range_m):
            raise SceneError(
                f"target at {t.range_m} m outside swath "
                f"[{config.near_range_m}, {config.far_range_m}] m"
            )


# --------------------------------------------------------------------------
# Hadamard codes


class UnsupportedOrderError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseCodeMatrix:
    """Binary slow-time code; ``entries[m % order, i]`` codes transmitter i."""

    entries: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def phases(self) -> np.ndarray:
        """phi_m(i) in radians: 0 where +1, pi where -1."""
        return np.where(self.entries > 0, 0.0, np.pi)

    def chirp_phasors(self, n_chirps: int, n_tx: int) -> np.ndarray:
        """exp(j*phi_m(i)) for m < n_chirps, i < n_tx; period ``order``."""
        if n_tx > self.order:
            raise ConfigError(f"code order {self.order} < number of transmitters {n_tx}")
        rows = np.arange(n_chirps) % self.order
        return self.entries[rows, :n_tx].astype(np.complex128)


def hadamard(order: int) -> PhaseCodeMatrix:
    """Sylvester-construction Hadamard matrix of the given order."""
    if order < 1 or order & (order - 1):
        raise UnsupportedOrderError(f"Hadamard order {order} is not a power of two")
    a = np.ones((1, 1), dtype=np.int64)
    while a.shape[0] < order:
        a = np.block([[a, a], [a, -a]])
    a.setflags(write=False)
    return PhaseCodeMatrix(a)
