"""Profile comparison statistics: weighted amplitude differential, moving
statistics, PSL and SINR."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .stretch import RangeProfile

PSL_FLOOR_DB = -300.0


class DegenerateStatisticsError(ValueError):
    pass


@dataclass(frozen=True)
class MetricsConfig:
    window_samples: int = 5
    range_bin_m: float = 0.325
    target_regions: tuple = ()  # ((lo_m, hi_m), ...)

    def __post_init__(self):
        if self.window_samples < 1:
            raise ValueError("window_samples must be >= 1")


def weighted_amp_diff(x_p, x_f, mu_p=None, sigma_p=None) -> np.ndarray:
    """Delta_n = sqrt(|x_p^2 - mu_p^2|) / sigma_p * (x_p - x_f).

    Inputs are dB series.  ``mu_p`` and ``sigma_p`` default to the population
    mean and std of ``x_p``.
    """
    x_p = np.asarray(x_p, dtype=float)
    x_f = np.asarray(x_f, dtype=float)
    if x_p.shape != x_f.shape:
        raise ValueError("series lengths differ")
    if mu_p is None:
        mu_p = x_p.mean()
    if sigma_p is None:
        sigma_p = x_p.std()
    if not sigma_p > 0:
        raise DegenerateStatisticsError("sigma_p must be positive")
    # factored form of x^2 - mu^2 avoids cancellation when x is close to mu
    weight = np.sqrt(np.abs((x_p - mu_p) * (x_p + mu_p))) / sigma_p
    return weight * (x_p - x_f)


def moving_average(x, k: int):
    """Trailing k-sample mean; the first k-1 outputs average what is available.

    Returns ``(series, mean_of_series)``.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("empty series")
    if k < 1:
        raise ValueError("k must be >= 1")
    mean, _ = kernels.moving_stats(x, k)
    return mean, float(mean.mean())


def moving_std(x, k: int):
    """Trailing k-sample population std over the same windows as
    :func:`moving_average`."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("empty series")
    if k < 1:
        raise ValueError("k must be >= 1")
    _, std = kernels.moving_stats(x, k)
    return std, float(std.mean())


def region_mask(range_m, regions) -> np.ndarray:
    range_m = np.asarray(range_m)
    mask = np.zeros(range_m.shape, dtype=bool)
    for lo, hi in regions:
        mask |= (range_m >= lo) & (range_m <= hi)
    return mask


def _check_regions(profile: RangeProfile, regions):
    if not regions:
        raise ValueError("need at least one region")
    r0, r1 = profile.range_m[0], profile.range_m[-1]
    tol = profile.bin_m
    for lo, hi in regions:
        if lo > hi or lo < r0 - tol or hi > r1 + tol:
            raise ValueError(f"region ({lo}, {hi}) outside swath [{r0}, {r1}]")


def _db(p):
    return 10.0 * np.log10(p) if p > 0 else PSL_FLOOR_DB


def psl(profile: RangeProfile, regions=None, mainlobe_bins: float = 2.0) -> float:
    """Peak sidelobe level in dB.

    Mainlobes span ``mainlobe_bins`` native resolution cells either side of
    the peak of each region (of the global peak when no regions are given).
    """
    p = profile.power
    half = mainlobe_bins * profile.bins_per_resolution()
    peak_idx = [int(np.argmax(p))]
    if regions:
        for lo, hi in regions:
            m = region_mask(profile.range_m, [(lo, hi)])
            if m.any():
                idx = np.flatnonzero(m)
                peak_idx.append(int(idx[np.argmax(p[idx])]))
    keep = np.ones(p.size, dtype=bool)
    bins = np.arange(p.size)
    for i in peak_idx:
        keep &= np.abs(bins - i) > half
    peak = p.max()
    if peak <= 0:
        return PSL_FLOOR_DB
    side = p[keep].max() if keep.any() else 0.0
    if side <= 0:
        return PSL_FLOOR_DB
    return max(_db(side) - _db(peak), PSL_FLOOR_DB)


def sinr(profile: RangeProfile, regions) -> list:
    """Per region: region peak power over mean power outside every region, dB."""
    _check_regions(profile, regions)
    p = profile.power
    outside = ~region_mask(profile.range_m, regions)
    ref = p[outside].mean() if outside.any() else 0.0
    out = []
    for reg in regions:
        m = region_mask(profile.range_m, [reg])
        pk = p[m].max() if m.any() else 0.0
        if ref <= 0:
            out.append(float("inf") if pk > 0 else 0.0)
        else:
            out.append(_db(pk) - _db(ref))
    return out


def psl_sinr(profile: RangeProfile, target_regions, mainlobe_bins: float = 2.0):
    """``(PSL dB, [SINR dB per region])``."""
    _check_regions(profile, target_regions)
    return psl(profile, target_regions, mainlobe_bins), sinr(profile, target_regions)


def local_contrast(profile: RangeProfile, center_m: float, peak_bins: int = 1,
                   guard_bins: float = 2.0, train_bins: float = 6.0) -> float:
    """Target peak over the mean of the surrounding training cells, dB.

    The peak is taken within ``peak_bins`` oversampled bins of ``center_m``.
    Guard and training extents are in native resolution cells; this is the
    cell-averaging view of whether the target stands out locally.
    """
    p = profile.power
    per = profile.bins_per_resolution()
    c = profile.nearest_bin(center_m)
    g = int(np.ceil(guard_bins * per))
    t = int(np.ceil((guard_bins + train_bins) * per))
    pk = p[max(c - peak_bins, 0):c + peak_bins + 1].max()
    train = np.r_[p[max(c - t, 0):max(c - g, 0)], p[c + g + 1:c + t + 1]]
    return _db(pk) - _db(train.mean())


# --------------------------------------------------------------------------
# comparison report


@dataclass
class ComparisonReport:
    range_m: np.ndarray = field(repr=False)
    profiles_db: dict = field(default_factory=dict)  # method -> dB series
    regions: tuple = ()
    reference: str = "apc_proposed"
    window_samples: int = 5
    delta: dict = field(default_factory=dict)  # "ref-other" -> series
    mu_delta: dict = field(default_factory=dict)  # pair -> {"targets", "other"}
    moving_avg: dict = field(default_factory=dict)  # method -> {"targets","other","all"}
    moving_sd: dict = field(default_factory=dict)
    psl_db: dict = field(default_factory=dict)
    sinr_db: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "reference": self.reference,
            "window_samples": self.window_samples,
            "regions_m": [list(r) for r in self.regions],
            "methods": list(self.profiles_db),
            "psl_db": self.psl_db,
            "sinr_db": self.sinr_db,
            "mu_delta": self.mu_delta,
            "moving_average": self.moving_avg,
            "moving_std": self.moving_sd,
            "errors": self.errors,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True)


def _split_mean(x, mask):
    return {
        "targets": float(x[mask].mean()) if mask.any() else float("nan"),
        "other": float(x[~mask].mean()) if (~mask).any() else float("nan"),
    }


def compare_profiles(profiles: dict, regions, reference: str = "apc_proposed",
                     window_samples: int = 5, mainlobe_bins: float = 2.0) -> ComparisonReport:
    """Build the full comparison from per-method :class:`RangeProfile`s.

    All profiles must share one range axis.
    """
    if not profiles:
        raise ValueError("no profiles")
    first = next(iter(profiles.values()))
    rng = first.range_m
    for name, prof in profiles.items():
        if not np.array_equal(prof.range_m, rng):
            raise ValueError(f"range axis of {name!r} differs")
    _check_regions(first, regions)
    mask = region_mask(rng, regions)
    rep = ComparisonReport(rng, regions=tuple(tuple(r) for r in regions),
                           reference=reference, window_samples=window_samples)
    for name, prof in profiles.items():
        db = prof.power_db()
        rep.profiles_db[name] = db
        rep.psl_db[name], rep.sinr_db[name] = psl_sinr(prof, regions, mainlobe_bins)
        xbar, _ = moving_average(db, window_samples)
        sbar, _ = moving_std(db, window_samples)
        rep.moving_avg[name] = dict(_split_mean(xbar, mask), all=float(xbar.mean()))
        rep.moving_sd[name] = dict(_split_mean(sbar, mask), all=float(sbar.mean()))
    if reference in rep.profiles_db:
        xp = rep.profiles_db[reference]
        for name, xf in rep.profiles_db.items():
            if name == reference:
                continue
            key = f"{reference}-{name}"
            try:
                d = weighted_amp_diff(xp, xf)
            except DegenerateStatisticsError as exc:
                rep.errors[key] = str(exc)
                continue
            rep.delta[key] = d
            rep.mu_delta[key] = _split_mean(d, mask)
    return rep
