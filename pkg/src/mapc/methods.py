"""The three range-compression arms compared on one scene.

``hann_mf``
    Hann-windowed matched filter on the decoded, integrated snapshot
    (summed over transmitters).
``apc_proposed``
    Doppler-first chain, then MIMO RMMSE on the Hann-tapered per-transmitter
    snapshots against the correspondingly tapered filter bank; the
    per-transmitter estimates are summed coherently.
``apc_baseline``
    RMMSE in the conventional order: block-position-0 raw pulses of every
    block are averaged per receiver with no doppler compensation or
    decoding, filtered independently, and the receiver outputs averaged
    coherently.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .apc import ApcResult, ApcSettings, rmmse_baseline, rmmse_mimo
from .chain import CellSelector, PipelineOptions, PipelineResult, run_pipeline
from .stretch import (
    CompensationMatrix,
    RangeProfile,
    build_compensation_matrix,
    window_taps,
    windowed_matched_filter,
)
from .synth import DataCube, block_pulses

log = logging.getLogger(__name__)


@dataclass
class MethodOutputs:
    profiles: dict = field(default_factory=dict)  # name -> RangeProfile
    errors: dict = field(default_factory=dict)  # name -> message
    pipeline: PipelineResult | None = None
    apc: dict = field(default_factory=dict)  # name -> list of ApcResult


def _sigma2(cube: DataCube, noise_power) -> float:
    if noise_power is not None:
        return float(noise_power)
    return float(cube.config.noise_power)


def hann_mf(F: CompensationMatrix, pipe: PipelineResult) -> RangeProfile:
    s = pipe.snapshot.values.sum(axis=0)
    return windowed_matched_filter(F, s, "hanning")


def apc_proposed(F: CompensationMatrix, pipe: PipelineResult, sigma2: float,
                 settings: ApcSettings | None = None):
    """Returns ``(profile, per-transmitter ApcResults)``."""
    h = window_taps("hanning", F.n_fast)
    snaps = pipe.snapshot.values * h[None, :]
    s2 = sigma2 * pipe.snapshot.noise_gain * np.mean(h**2)
    results = rmmse_mimo(F.windowed(h), snaps, s2, settings)
    total = np.sum([r.final.values for r in results], axis=0)
    return F.profile(total), results


def apc_baseline(F: CompensationMatrix, cube: DataCube, sigma2: float,
                 settings: ApcSettings | None = None):
    """Returns ``(profile, per-receiver ApcResults)``."""
    blocks = block_pulses(cube)
    first = blocks[0]  # (q, p, n): position-0 pulse of every block
    n_blocks = first.shape[1]
    avg = first.mean(axis=1)
    results = [
        rmmse_baseline(F, avg[:, n], sigma2 / n_blocks, settings) for n in range(avg.shape[1])
    ]
    total = np.mean([r.final.values for r in results], axis=0)
    return F.profile(total), results


def pipeline_options(processing: dict | None = None) -> PipelineOptions:
    processing = processing or {}
    sel = CellSelector(mode=processing.get("selector", "detect"))
    return PipelineOptions(
        doppler_window=processing.get("doppler_window", "hanning"),
        n_angle=int(processing.get("n_angle", 64)),
        selector=sel,
        keep_intermediates=True,
    )


def apc_settings(processing: dict | None = None) -> ApcSettings:
    processing = processing or {}
    return ApcSettings(
        max_iterations=int(processing.get("max_iterations", 3)),
        early_stop_rel_change=float(processing.get("early_stop_rel_change", 1e-3)),
        diagonal_loading_factor=float(processing.get("diagonal_loading_factor", 0.0)),
    )


def run_methods(cube: DataCube, methods=("hann_mf", "apc_baseline", "apc_proposed"),
                options: PipelineOptions | None = None, settings: ApcSettings | None = None,
                noise_power: float | None = None) -> MethodOutputs:
    """Run the requested arms; one arm failing is recorded, not raised."""
    config = cube.config
    F = build_compensation_matrix(config)
    sigma2 = _sigma2(cube, noise_power)
    out = MethodOutputs()
    need_pipe = {"hann_mf", "apc_proposed"} & set(methods)
    if need_pipe:
        try:
            out.pipeline = run_pipeline(cube, config, options or pipeline_options())
        except (ValueError, np.linalg.LinAlgError) as exc:
            for m in need_pipe:
                out.errors[m] = f"pipeline: {exc}"
    for m in methods:
        if m in out.errors:
            continue
        try:
            if m == "hann_mf":
                out.profiles[m] = hann_mf(F, out.pipeline)
            elif m == "apc_proposed":
                out.profiles[m], out.apc[m] = apc_proposed(F, out.pipeline, sigma2, settings)
            elif m == "apc_baseline":
                out.profiles[m], out.apc[m] = apc_baseline(F, cube, sigma2, settings)
            else:
                raise ValueError(f"unknown method {m!r}")
        except (ValueError, np.linalg.LinAlgError) as exc:
            log.error("method %s failed: %s", m, exc)
            out.errors[m] = str(exc)
    return out


__all__ = [
    "ApcResult",
    "MethodOutputs",
    "apc_baseline",
    "apc_proposed",
    "apc_settings",
    "hann_mf",
    "pipeline_options",
    "run_methods",
]
