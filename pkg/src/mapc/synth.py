"""Dechirped receive-cube synthesis for a slow-time coded MIMO scene."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .radar_model import (
    PhaseCodeMatrix,
    RadarConfig,
    Target,
    check_scene,
    derive_params,
    hadamard,
)


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean circular complex white Gaussian noise."""

    power: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("noise power must be >= 0")


@dataclass(frozen=True)
class DataCube:
    """Samples indexed ``[fast-time q, chirp m, receiver n]``."""

    samples: np.ndarray = field(repr=False)
    config: RadarConfig | None = None
    code: PhaseCodeMatrix | None = None
    rng_seed: int | None = None

    @property
    def shape(self):
        return self.samples.shape

    @property
    def n_fast(self) -> int:
        return self.samples.shape[0]

    @property
    def n_chirps(self) -> int:
        return self.samples.shape[1]

    @property
    def n_rx(self) -> int:
        return self.samples.shape[2]


def _noise(shape, noise: NoiseModel) -> np.ndarray:
    """One independent stream per (chirp, receiver), spawned from the seed."""
    n_fast, n_chirp, n_rx = shape
    out = np.empty(shape, dtype=np.complex128)
    if noise.power == 0:
        out[:] = 0
        return out
    scale = np.sqrt(noise.power / 2.0)
    for m in range(n_chirp):
        for n in range(n_rx):
            ss = np.random.SeedSequence(entropy=noise.seed, spawn_key=(m, n))
            rng = np.random.default_rng(ss)
            w = rng.standard_normal((2, n_fast))
            out[:, m, n] = scale * (w[0] + 1j * w[1])
    return out


def synthesize_cube(
    config: RadarConfig,
    targets=(),
    code: PhaseCodeMatrix | None = None,
    noise: NoiseModel | None = None,
    active_tx=None,
) -> DataCube:
    """Dechirped, sampled MIMO returns plus AWGN.

    Each scatterer contributes
    ``alpha * sum_i exp(j2pi(fB*q + fd*m + (i*d_T + n*d_R)*u/lambda)) * exp(j*phi_m(i))``
    with ``fB = (K*tau + f_d) * T_s`` and ``fd = f_d * T_p``.

    ``active_tx`` restricts the sum to a subset of transmitters (the others
    stay silent); it exists for building per-transmitter references.
    """
    targets = list(targets)
    check_scene(config, targets)
    if code is None:
        code = hadamard(config.num_tx)
    if noise is None:
        noise = NoiseModel(config.noise_power, 0)
    d = derive_params(config)
    shape = (d.n_fast, d.n_chirps_total, config.num_rx)

    samples = _noise(shape, noise)
    if targets:
        phasors = code.chirp_phasors(d.n_chirps_total, config.num_tx)
        if active_tx is not None:
            keep = np.zeros(config.num_tx, dtype=bool)
            keep[list(active_tx)] = True
            phasors = phasors * keep[None, :]
        alpha = np.array([complex(t.amplitude) for t in targets])
        fb = np.array([t.norm_beat(config) for t in targets])
        fd = np.array([t.norm_doppler(config) for t in targets])
        i = np.arange(config.num_tx)[:, None]
        n = np.arange(config.num_rx)[None, :]
        pos = i * d.tx_spacing_m + n * d.rx_spacing_m  # (N_T, N_R)
        spatial = np.array([pos * t.u / d.wavelength_m for t in targets])
        sig = np.zeros(shape, dtype=np.complex128)
        kernels.accumulate_scene(sig, alpha, fb, fd, np.ascontiguousarray(spatial), phasors)
        samples = samples + sig
    return DataCube(samples, config, code, noise.seed)


def block_pulses(cube: DataCube | np.ndarray, num_tx: int | None = None) -> np.ndarray:
    """Group slow time into blocks of ``num_tx`` consecutive chirps.

    Returns an array ``[position k, q, block p, n]`` where chirp ``m = p*num_tx + k``.
    """
    if isinstance(cube, DataCube):
        samples = cube.samples
        if num_tx is None:
            num_tx = cube.config.num_tx
    else:
        samples = np.asarray(cube)
    if num_tx is None:
        raise ShapeError("num_tx required for a bare array")
    n_fast, n_chirp, n_rx = samples.shape
    if n_chirp % num_tx:
        raise ShapeError(f"{n_chirp} chirps not divisible into blocks of {num_tx}")
    n_blocks = n_chirp // num_tx
    b = samples.reshape(n_fast, n_blocks, num_tx, n_rx)
    return np.ascontiguousarray(b.transpose(2, 0, 1, 3))
