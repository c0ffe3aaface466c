"""Slow-time coded MIMO FMCW range compression with adaptive pulse compression."""
from .apc import ApcResult, ApcSettings, CovarianceError, estimate_noise_power, rmmse_baseline, rmmse_mimo
from .chain import (
    AngleCube,
    CellSelector,
    DecodedSet,
    PipelineOptions,
    PulseDoppler,
    Snapshot,
    angle_process,
    coherent_integrate,
    decode,
    doppler_compensate,
    doppler_process,
    run_pipeline,
)
from .metrics import (
    ComparisonReport,
    MetricsConfig,
    moving_average,
    moving_std,
    psl_sinr,
    weighted_amp_diff,
)
from .radar_model import (
    ConfigError,
    PhaseCodeMatrix,
    RadarConfig,
    Target,
    derive_params,
    hadamard,
)
from .stretch import (
    CompensationMatrix,
    RangeProfile,
    WindowSpec,
    build_compensation_matrix,
    matched_filter,
    windowed_matched_filter,
)
from .synth import DataCube, NoiseModel, block_pulses, synthesize_cube

__version__ = "0.1.0"
