import numpy as np
import pytest

from mapc.chain import run_pipeline
from mapc.methods import apc_baseline, apc_proposed, hann_mf, pipeline_options, run_methods
from mapc.radar_model import RadarConfig, Target
from mapc.stretch import build_compensation_matrix, windowed_matched_filter
from mapc.synth import NoiseModel, block_pulses, synthesize_cube


@pytest.fixture(scope="module")
def scene():
    cfg = RadarConfig(noise_power=1e-3)
    tg = [Target(45.0, 0.0, 0.0, 0.01), Target(10.0, 0.0, 0.0, 1.0)]
    return cfg, synthesize_cube(cfg, tg, noise=NoiseModel(1e-3, 5))


def test_hann_mf_uses_summed_snapshot(scene):
    cfg, cube = scene
    F = build_compensation_matrix(cfg)
    pipe = run_pipeline(cube, cfg, pipeline_options())
    got = hann_mf(F, pipe).values
    want = windowed_matched_filter(F, pipe.snapshot.values.sum(axis=0), "hanning").values
    np.testing.assert_array_equal(got, want)


def test_baseline_filters_averaged_position_zero_pulses(scene):
    cfg, cube = scene
    F = build_compensation_matrix(cfg)
    prof, results = apc_baseline(F, cube, cfg.noise_power)
    assert len(results) == cfg.num_rx
    avg = block_pulses(cube)[0].mean(axis=1)
    np.testing.assert_allclose(results[2].initial.values, F.entries.conj().T @ avg[:, 2])
    np.testing.assert_allclose(prof.values, np.mean([r.final.values for r in results], axis=0))


def test_proposed_sums_transmitters(scene):
    cfg, cube = scene
    F = build_compensation_matrix(cfg)
    pipe = run_pipeline(cube, cfg, pipeline_options())
    prof, results = apc_proposed(F, pipe, cfg.noise_power)
    assert len(results) == cfg.num_tx
    np.testing.assert_allclose(prof.values, results[0].final.values + results[1].final.values)


def test_run_methods_collects_all(scene):
    _, cube = scene
    out = run_methods(cube)
    assert set(out.profiles) == {"hann_mf", "apc_baseline", "apc_proposed"}
    assert not out.errors
    with_only = run_methods(cube, ("apc_baseline",))
    assert with_only.pipeline is None and set(with_only.profiles) == {"apc_baseline"}
