import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from hypothesis.extra.numpy import arrays

from mapc.metrics import (
    PSL_FLOOR_DB,
    DegenerateStatisticsError,
    MetricsConfig,
    compare_profiles,
    local_contrast,
    moving_average,
    moving_std,
    psl,
    psl_sinr,
    sinr,
    weighted_amp_diff,
)
from mapc.stretch import RangeProfile

finite = st.floats(-150.0, 50.0, allow_nan=False, allow_infinity=False)
series = arrays(np.float64, st.integers(1, 60), elements=finite)


def brute_moving(x, k):
    """Double loop over windows; partial windows at the leading edge."""
    means, stds = [], []
    for n in range(len(x)):
        win = [x[i] for i in range(max(0, n - k + 1), n + 1)]
        mu = sum(win) / len(win)
        means.append(mu)
        stds.append(math.sqrt(sum((v - mu) ** 2 for v in win) / len(win)))
    return means, sum(means) / len(means), stds, sum(stds) / len(stds)


def brute_delta(xp, xf):
    n = len(xp)
    mu = sum(xp) / n
    sd = math.sqrt(sum((v - mu) ** 2 for v in xp) / n)
    return [math.sqrt(abs(a * a - mu * mu)) / sd * (a - b) for a, b in zip(xp, xf)]


def _profile(power, step=0.25, res=0.5):
    power = np.asarray(power, dtype=float)
    return RangeProfile(power, np.arange(power.size) * step, res)


# ---------------------------------------------------------------- examples


def test_moving_average_partial_window_example():
    xbar, mu = moving_average([0.0, 2.0, 4.0], 2)
    np.testing.assert_allclose(xbar, [0.0, 1.0, 3.0])
    assert mu == pytest.approx(4.0 / 3.0)


def test_moving_std_example():
    sbar, _ = moving_std([0.0, 2.0], 2)
    np.testing.assert_allclose(sbar, [0.0, 1.0])


def test_delta_small_example():
    x = np.array([1.0, 2.0, 3.0])
    sd = math.sqrt(2.0 / 3.0)
    want = [math.sqrt(3.0) / sd, 0.0, math.sqrt(5.0) / sd * 3.0]
    np.testing.assert_allclose(weighted_amp_diff(x, np.zeros(3), 2.0, sd), want, rtol=1e-14)


def test_constant_series():
    xbar, mu = moving_average(np.full(9, -4.5), 5)
    sbar, musd = moving_std(np.full(9, -4.5), 5)
    np.testing.assert_array_equal(xbar, -4.5)
    assert mu == -4.5
    np.testing.assert_array_equal(sbar, 0.0)
    assert musd == 0.0


def test_k_one_is_identity(rng):
    x = rng.standard_normal(30)
    np.testing.assert_allclose(moving_average(x, 1)[0], x, rtol=0, atol=1e-15)
    np.testing.assert_array_equal(moving_std(x, 1)[0], 0.0)


def test_zero_weight_at_mean():
    x = np.array([1.0, 2.0, 3.0])
    d = weighted_amp_diff(x, np.array([9.0, -7.0, 5.0]))
    assert d[1] == 0.0


def test_errors():
    with pytest.raises(DegenerateStatisticsError):
        weighted_amp_diff(np.ones(4), np.zeros(4))
    with pytest.raises(ValueError):
        weighted_amp_diff(np.ones(4), np.zeros(3))
    with pytest.raises(ValueError):
        moving_average([], 3)
    with pytest.raises(ValueError):
        moving_std([1.0], 0)
    with pytest.raises(ValueError):
        MetricsConfig(window_samples=0)


# ---------------------------------------------------------------- oracles


@pytest.mark.parametrize("k", [1, 2, 5, 17])
def test_moving_stats_match_brute_force(rng, k):
    x = rng.normal(-30.0, 12.0, 100)
    means, mu, stds, musd = brute_moving(list(x), k)
    xbar, got_mu = moving_average(x, k)
    sbar, got_musd = moving_std(x, k)
    np.testing.assert_allclose(xbar, means, rtol=0, atol=1e-12)
    np.testing.assert_allclose(sbar, stds, rtol=0, atol=1e-12)
    assert abs(got_mu - mu) < 1e-12 and abs(got_musd - musd) < 1e-12


def test_delta_matches_brute_force_unit_scale(rng):
    xp, xf = rng.standard_normal(100), rng.standard_normal(100)
    np.testing.assert_allclose(weighted_amp_diff(xp, xf), brute_delta(list(xp), list(xf)),
                               rtol=0, atol=1e-12)


def test_delta_matches_brute_force_db_scale(rng):
    # values near -30 dB: the radical is ill-conditioned close to the mean,
    # so agreement is judged relative to the magnitude of delta
    xp = rng.normal(-30.0, 12.0, 100)
    xf = rng.normal(-30.0, 12.0, 100)
    np.testing.assert_allclose(weighted_amp_diff(xp, xf), brute_delta(list(xp), list(xf)),
                               rtol=1e-12, atol=1e-12)


# ---------------------------------------------------------------- properties


@given(series)
def test_delta_vanishes_for_equal_inputs(x):
    assume(np.std(x) > 0)
    np.testing.assert_array_equal(weighted_amp_diff(x, x.copy()), 0.0)


@given(series, series)
def test_delta_sign_agreement(x, y):
    n = min(x.size, y.size)
    x, y = x[:n], y[:n]
    assume(np.std(x) > 1e-6)
    d = weighted_amp_diff(x, y)
    w = np.sqrt(np.abs(x**2 - x.mean() ** 2))
    nz = (w > 0) & (x != y)
    assert np.all(np.sign(d[nz]) == np.sign(x[nz] - y[nz]))


@given(series, st.integers(1, 12))
def test_moving_average_bounded(x, k):
    xbar, _ = moving_average(x, k)
    tol = 1e-9 * (1 + np.abs(x).max())
    assert np.all(xbar >= x.min() - tol) and np.all(xbar <= x.max() + tol)


@given(series, st.integers(1, 12), st.floats(-20.0, 20.0))
def test_moving_std_homogeneous(x, k, c):
    a, _ = moving_std(x, k)
    b, _ = moving_std(c * x, k)
    np.testing.assert_allclose(b, abs(c) * a, rtol=1e-9, atol=1e-9)


# ---------------------------------------------------------------- PSL / SINR


def test_impulse_psl_is_floor():
    p = np.zeros(100)
    p[40] = 1.0
    assert psl(_profile(p)) == PSL_FLOOR_DB


def test_psl_reads_largest_sidelobe():
    p = np.full(100, 1e-4)
    p[50] = 1.0
    p[60] = 1e-2  # 10 bins away, outside a 2 x 2-bin mainlobe
    p[52] = 0.5   # inside the mainlobe
    assert psl(_profile(p)) == pytest.approx(-20.0)


def test_equal_peaks_equal_sinr():
    p = np.full(200, 1e-3)
    p[50] = p[150] = 1.0
    prof = _profile(p)
    s = sinr(prof, [(10.0, 15.0), (35.0, 40.0)])
    assert s[0] == pytest.approx(s[1]) == pytest.approx(30.0)
    lvl, s2 = psl_sinr(prof, [(10.0, 15.0), (35.0, 40.0)])
    assert s2 == s and lvl == pytest.approx(-30.0)


def test_region_outside_swath():
    with pytest.raises(ValueError):
        sinr(_profile(np.ones(50)), [(5.0, 40.0)])
    with pytest.raises(ValueError):
        psl_sinr(_profile(np.ones(50)), [])


def test_local_contrast():
    p = np.full(200, 1e-2)
    p[100] = 1.0
    assert local_contrast(_profile(p), 25.0) == pytest.approx(20.0)


def test_comparison_report_partitions_and_pairs(rng):
    rr = np.arange(100) * 0.25
    profs = {m: RangeProfile(rng.exponential(size=100), rr, 0.5) for m in ("hann_mf", "apc_proposed")}
    rep = compare_profiles(profs, [(5.0, 7.0)])
    assert list(rep.delta) == ["apc_proposed-hann_mf"]
    mask = (rr >= 5.0) & (rr <= 7.0)
    d = rep.delta["apc_proposed-hann_mf"]
    assert rep.mu_delta["apc_proposed-hann_mf"]["targets"] == pytest.approx(d[mask].mean())
    assert rep.mu_delta["apc_proposed-hann_mf"]["other"] == pytest.approx(d[~mask].mean())
    assert rep.to_json() == rep.to_json()
    with pytest.raises(ValueError):
        compare_profiles({"a": profs["hann_mf"], "b": RangeProfile(np.ones(100), rr + 1, 0.5)}, [(5.0, 7.0)])
