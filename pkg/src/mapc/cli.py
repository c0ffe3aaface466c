"""Command-line scenario runner.

    mapc run <scenario> [--methods ...] [--seed N] [--out DIR] [--dump-intermediates]
    mapc ingest <raw> --config <cfg> [--subtract-frame K] [--out DIR]
    mapc report <results-dir>

Exit status: 0 success, 2 config error, 3 numerical error (including any
method failing), 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .metrics import ComparisonReport, compare_profiles, moving_average, moving_std
from .methods import apc_settings, pipeline_options, run_methods
from .radar_model import ConfigError, SceneError
from .rawio import RawFormatError, export_raw, ingest_raw
from .scenario import METHODS, Scenario, list_presets, load_scenario
from .stretch import RangeProfile
from .synth import NoiseModel, synthesize_cube

log = logging.getLogger("mapc")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
RUN_FILE = "run.json"
FMT = "%.17g"


class NumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunSpec:
    scenario: str
    methods: tuple = METHODS
    out_dir: str = "results"
    seed: int | None = None
    dump_intermediates: bool = False
    export_raw: str | None = None

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("need at least one method")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ConfigError(f"unknown methods {sorted(bad)}")


# --------------------------------------------------------------------------
# file emission


def _write_table(path: Path, header, columns):
    arr = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, arr, fmt=FMT, delimiter=",", header=",".join(header), comments="")


def write_profile_csv(path: Path, profile: RangeProfile):
    _write_table(path, ["range_m", "power_db"], [profile.range_m, profile.power_db()])


def read_profile_csv(path: Path, resolution_m: float) -> RangeProfile:
    a = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return RangeProfile(10.0 ** (a[:, 1] / 10.0), a[:, 0], resolution_m)


def emit_report(report: ComparisonReport, out_dir) -> list:
    """JSON summary plus CSV tables; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    p = out / "report.json"
    p.write_text(report.to_json() + "\n")
    written.append(p)
    for pair, d in sorted(report.delta.items()):
        p = out / f"delta_{pair}.csv"
        _write_table(p, ["range_m", "delta"], [report.range_m, d])
        written.append(p)
    # weighted-differential means: one row per location class, one column per pair
    pairs = sorted(report.mu_delta)
    p = out / "mu_delta.csv"
    lines = ["location," + ",".join(pairs)]
    for loc in ("targets", "other"):
        lines.append(loc + "," + ",".join(FMT % report.mu_delta[k][loc] for k in pairs))
    p.write_text("\n".join(lines) + "\n")
    written.append(p)
    # moving statistics summary: rows are methods
    p = out / "moving_stats_summary.csv"
    lines = ["method,mu_xbar_targets,mu_xbar_other,mu_sbar_targets,mu_sbar_other"]
    for m in report.profiles_db:
        a, s = report.moving_avg[m], report.moving_sd[m]
        vals = (a["targets"], a["other"], s["targets"], s["other"])
        lines.append(m + "," + ",".join(FMT % v for v in vals))
    p.write_text("\n".join(lines) + "\n")
    written.append(p)
    # moving statistic series
    header, cols = ["range_m"], [report.range_m]
    for m, db in report.profiles_db.items():
        header += [f"{m}_xbar", f"{m}_sbar"]
        cols += [moving_average(db, report.window_samples)[0], moving_std(db, report.window_samples)[0]]
    p = out / "moving_stats.csv"
    _write_table(p, header, cols)
    written.append(p)
    return written


def _dump_intermediates(out: Path, outputs):
    d = out / "intermediates"
    d.mkdir(parents=True, exist_ok=True)
    pipe = outputs.pipeline
    if pipe is None:
        return
    snap = pipe.snapshot
    cols, header = [np.arange(snap.values.shape[1])], ["q"]
    for i, row in enumerate(snap.values):
        cols += [row.real, row.imag]
        header += [f"tx{i}_re", f"tx{i}_im"]
    _write_table(d / "snapshot.csv", header, cols)
    cells = np.array(snap.cells, dtype=float).reshape(-1, 2)
    gain = np.broadcast_to(snap.noise_gain, (len(cells), snap.num_tx))
    _write_table(d / "cells.csv", ["doppler_bin", "angle_bin"] + [f"noise_gain_tx{i}" for i in range(snap.num_tx)],
                 [cells[:, 0], cells[:, 1], *gain.T])
    if pipe.pulse_doppler is not None:
        pw = np.sum(np.abs(pipe.pulse_doppler.data) ** 2, axis=(0, 3))  # (q, b)
        np.savetxt(d / "fast_time_doppler_power.csv", pw, fmt=FMT, delimiter=",")
    if pipe.angle is not None:
        np.savetxt(d / "doppler_angle_power.csv", pipe.angle.cell_power(), fmt=FMT, delimiter=",")
    for name, results in sorted(outputs.apc.items()):
        rows = []
        for ch, r in enumerate(results):
            for it, (c, u) in enumerate(zip(r.condition, r.unity_gain_residual), start=1):
                rows.append((ch, it, c, u))
        _write_table(d / f"{name}_iterations.csv",
                     ["channel", "iteration", "condition", "unity_gain_residual"],
                     np.array(rows, dtype=float).T)


# --------------------------------------------------------------------------
# runs


def _process(cube, sc: Scenario, methods, out: Path, dump: bool, seed) -> ComparisonReport:
    outputs = run_methods(
        cube, methods, pipeline_options(sc.processing), apc_settings(sc.processing)
    )
    out.mkdir(parents=True, exist_ok=True)
    profiles = {}
    for m in methods:
        if m in outputs.profiles:
            write_profile_csv(out / f"{m}.csv", outputs.profiles[m])
            # the report is built from what the CSVs hold, so `report` reproduces it
            profiles[m] = read_profile_csv(out / f"{m}.csv", outputs.profiles[m].resolution_m)
    meta = {
        "scenario": sc.name,
        "seed": seed,
        "methods": list(methods),
        "regions_m": [list(r) for r in sc.metric_regions()],
        "window_samples": sc.window_samples,
        "mainlobe_bins": sc.mainlobe_bins,
        "resolution_m": cube.config.derived.native_resolution_m,
        "errors": outputs.errors,
    }
    (out / RUN_FILE).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    if dump:
        _dump_intermediates(out, outputs)
    report = None
    if profiles:
        report = _report_from(profiles, meta)
        emit_report(report, out)
    if outputs.errors:
        raise NumericalError("; ".join(f"{k}: {v}" for k, v in sorted(outputs.errors.items())))
    return report


def _report_from(profiles, meta) -> ComparisonReport:
    regions = [tuple(r) for r in meta["regions_m"]]
    ref = "apc_proposed" if "apc_proposed" in profiles else next(iter(profiles))
    if not regions:
        first = next(iter(profiles.values()))
        regions = [(float(first.range_m[0]), float(first.range_m[-1]))]
    rep = compare_profiles(profiles, regions, ref, meta["window_samples"], meta["mainlobe_bins"])
    rep.errors.update(meta.get("errors", {}))
    return rep


def run_scenario(spec: RunSpec) -> ComparisonReport:
    sc = load_scenario(spec.scenario)
    seed = sc.seed if spec.seed is None else spec.seed
    cube = synthesize_cube(sc.config, sc.targets, noise=NoiseModel(sc.config.noise_power, seed))
    if spec.export_raw:
        export_raw(spec.export_raw, cube)
    return _process(cube, sc, spec.methods, Path(spec.out_dir), spec.dump_intermediates, seed)


def regenerate_report(results_dir) -> ComparisonReport:
    out = Path(results_dir)
    meta = json.loads((out / RUN_FILE).read_text())
    profiles = {
        m: read_profile_csv(out / f"{m}.csv", meta["resolution_m"])
        for m in meta["methods"]
        if (out / f"{m}.csv").is_file()
    }
    if not profiles:
        raise FileNotFoundError(f"no method CSVs in {out}")
    report = _report_from(profiles, meta)
    emit_report(report, out)
    return report


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mapc", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="synthesize a scenario and compare methods")
    r.add_argument("scenario", help=f"file path or preset name ({', '.join(list_presets())})")
    r.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", default="results")
    r.add_argument("--dump-intermediates", action="store_true")
    r.add_argument("--export-raw", metavar="PATH", help="also write the cube as a MAPC file")

    g = sub.add_parser("ingest", help="process a MAPC raw frame file")
    g.add_argument("raw")
    g.add_argument("--config", required=True, help="scenario file or preset for radar parameters")
    g.add_argument("--frame", type=int, default=0)
    g.add_argument("--subtract-frame", type=int, default=None)
    g.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    g.add_argument("--out", default="results")
    g.add_argument("--dump-intermediates", action="store_true")

    p = sub.add_parser("report", help="regenerate the report of a results directory")
    p.add_argument("results_dir")
    return ap


def _dispatch(args) -> int:
    if args.cmd == "run":
        spec = RunSpec(args.scenario, tuple(args.methods), args.out, args.seed,
                       args.dump_intermediates, args.export_raw)
        run_scenario(spec)
    elif args.cmd == "ingest":
        sc = load_scenario(args.config)
        cube = ingest_raw(args.raw, sc.config, args.frame, args.subtract_frame)
        _process(cube, sc, tuple(args.methods), Path(args.out), args.dump_intermediates, None)
    elif args.cmd == "report":
        regenerate_report(args.results_dir)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _dispatch(args)
    except (ConfigError, SceneError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        log.error("numerical error: %s", exc)
        return EXIT_NUMERICAL
    except (OSError, RawFormatError, json.JSONDecodeError) as exc:
        log.error("i/o error: %s", exc)
        return EXIT_IO
    except ValueError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
