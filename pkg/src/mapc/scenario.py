"""Scenario files: INI-style radar parameters plus one section per target.

Grammar (``configparser`` syntax, ``#`` or ``;`` comments)::

    [radar]            any RadarConfig field name = value
    [run]              seed, methods (comma list)
    [metrics]          window_samples, mainlobe_bins, regions = lo-hi, lo-hi
    [processing]       doppler_window, n_angle, selector, max_iterations
    [target.<name>]    range_m, velocity_mps, azimuth_deg,
                       one of amplitude_db / rcs_dbsm, optional phase_deg

Sections other than ``[radar]`` are optional.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from .radar_model import (
    ConfigError,
    RadarConfig,
    Target,
    amplitude_from_db,
    amplitude_from_rcs,
    check_scene,
)

METHODS = ("hann_mf", "apc_baseline", "apc_proposed")

_INT_FIELDS = {"num_tx", "num_rx", "chirps_per_tx_in_cpi", "oversample_factor"}


@dataclass(frozen=True)
class Scenario:
    name: str
    config: RadarConfig
    targets: tuple = ()
    seed: int = 0
    methods: tuple = METHODS
    regions: tuple = ()  # ((lo_m, hi_m), ...)
    window_samples: int = 5
    mainlobe_bins: float = 2.0
    processing: dict = field(default_factory=dict)

    def default_regions(self, half_width_m: float | None = None) -> tuple:
        """One region per target, ``+-2`` native resolution cells wide."""
        hw = half_width_m if half_width_m is not None else 2 * self.config.derived.native_resolution_m
        lo, hi = self.config.near_range_m, self.config.far_range_m
        return tuple((max(t.range_m - hw, lo), min(t.range_m + hw, hi)) for t in self.targets)

    def metric_regions(self) -> tuple:
        return self.regions or self.default_regions()


def _parse_regions(text: str):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            lo, hi = (float(v) for v in item.split("-", 1))
        except ValueError as exc:
            raise ConfigError(f"bad region {item!r}; expected lo-hi") from exc
        out.append((lo, hi))
    return tuple(out)


def _radar(section) -> RadarConfig:
    known = {f.name for f in fields(RadarConfig)}
    kw = {}
    for key, raw in section.items():
        if key not in known:
            raise ConfigError(f"unknown radar key {key!r}")
        try:
            v = float(raw)
        except ValueError as exc:
            raise ConfigError(f"{key} = {raw!r} is not a number") from exc
        if key in _INT_FIELDS:
            if v != int(v):
                raise ConfigError(f"{key} must be an integer")
            v = int(v)
        kw[key] = v
    return RadarConfig(**kw)


def _target(name, section) -> Target:
    try:
        rng = section.getfloat("range_m")
        vel = section.getfloat("velocity_mps", 0.0)
        az = section.getfloat("azimuth_deg", 0.0)
        phase = math.radians(section.getfloat("phase_deg", 0.0))
    except ValueError as exc:
        raise ConfigError(f"target {name}: {exc}") from exc
    if rng is None:
        raise ConfigError(f"target {name}: range_m missing")
    has_db, has_rcs = "amplitude_db" in section, "rcs_dbsm" in section
    if has_db == has_rcs:
        raise ConfigError(f"target {name}: give exactly one of amplitude_db, rcs_dbsm")
    if has_db:
        amp = amplitude_from_db(section.getfloat("amplitude_db"), phase)
    else:
        amp = amplitude_from_rcs(section.getfloat("rcs_dbsm"), rng, phase)
    return Target(rng, vel, az, amp)


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    if not cp.has_section("radar"):
        raise ConfigError("missing [radar] section")
    config = _radar(cp["radar"])
    targets = tuple(
        _target(sec.split(".", 1)[1], cp[sec]) for sec in cp.sections() if sec.startswith("target.")
    )
    check_scene(config, targets)

    kw = {}
    if cp.has_section("run"):
        run = cp["run"]
        kw["seed"] = run.getint("seed", 0)
        if "methods" in run:
            methods = tuple(m.strip() for m in run["methods"].split(",") if m.strip())
            bad = set(methods) - set(METHODS)
            if bad or not methods:
                raise ConfigError(f"unknown methods {sorted(bad)}")
            kw["methods"] = methods
    if cp.has_section("metrics"):
        m = cp["metrics"]
        kw["window_samples"] = m.getint("window_samples", 5)
        kw["mainlobe_bins"] = m.getfloat("mainlobe_bins", 2.0)
        if "regions" in m:
            kw["regions"] = _parse_regions(m["regions"])
        if kw["window_samples"] < 1:
            raise ConfigError("window_samples must be >= 1")
    if cp.has_section("processing"):
        kw["processing"] = dict(cp["processing"])
    sc = Scenario(name, config, targets, **kw)
    for lo, hi in sc.regions:
        if lo > hi or lo < config.near_range_m or hi > config.far_range_m:
            raise ConfigError(f"region {lo}-{hi} outside swath")
    return sc


def load_scenario(path) -> Scenario:
    """Load a scenario file, or a shipped preset by bare name (``case2``)."""
    p = Path(path)
    if p.is_file():
        return parse_scenario(p.read_text(), p.stem)
    stem = p.name if p.suffix == ".cfg" else p.name + ".cfg"
    res = resources.files("mapc") / "presets" / stem
    if res.is_file():
        return parse_scenario(res.read_text(), Path(stem).stem)
    raise FileNotFoundError(f"no scenario file or preset named {path!s}")


def list_presets() -> list:
    return sorted(
        Path(r.name).stem for r in (resources.files("mapc") / "presets").iterdir()
        if r.name.endswith(".cfg")
    )
