import json

import numpy as np
import pytest

from mapc import cli, methods
from mapc.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, main


def _files(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def _peak_near(csv, r, tol_bins=1):
    a = np.loadtxt(csv, delimiter=",", skiprows=1)
    i = int(np.argmin(np.abs(a[:, 0] - r)))
    win = a[max(i - 6, 0):i + 7, 1]
    return a[max(i - tol_bins, 0):i + tol_bins + 1, 1].max() == win.max()


@pytest.mark.slow
def test_case1_run_writes_three_profiles(tmp_path):
    assert main(["run", "case1", "--out", str(tmp_path)]) == EXIT_OK
    for m in ("hann_mf", "apc_baseline", "apc_proposed"):
        csv = tmp_path / f"{m}.csv"
        assert csv.read_text().splitlines()[0] == "range_m,power_db"
        assert _peak_near(csv, 10.0) and _peak_near(csv, 45.0)
    ranges = [np.loadtxt(tmp_path / f"{m}.csv", delimiter=",", skiprows=1)[:, 0]
              for m in ("hann_mf", "apc_baseline", "apc_proposed")]
    assert all(np.array_equal(ranges[0], r) for r in ranges)
    rep = json.loads((tmp_path / "report.json").read_text())
    assert set(rep["sinr_db"]) == {"hann_mf", "apc_baseline", "apc_proposed"}


def test_empty_preset_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "empty", "--out", str(a), "--seed", "3", "--dump-intermediates"]) == EXIT_OK
    assert main(["run", "empty", "--out", str(b), "--seed", "3", "--dump-intermediates"]) == EXIT_OK
    assert _files(a) == _files(b)
    assert "intermediates/snapshot.csv" in _files(a)


def test_seed_changes_output(tmp_path):
    main(["run", "empty", "--out", str(tmp_path / "a"), "--seed", "1", "--methods", "hann_mf"])
    main(["run", "empty", "--out", str(tmp_path / "b"), "--seed", "2", "--methods", "hann_mf"])
    assert (tmp_path / "a/hann_mf.csv").read_bytes() != (tmp_path / "b/hann_mf.csv").read_bytes()


def test_one_pair_gives_one_delta_csv(tmp_path):
    main(["run", "case1", "--out", str(tmp_path), "--methods", "hann_mf", "apc_proposed"])
    assert sorted(p.name for p in tmp_path.glob("delta_*.csv")) == ["delta_apc_proposed-hann_mf.csv"]
    rows = (tmp_path / "mu_delta.csv").read_text().splitlines()
    assert rows[0] == "location,apc_proposed-hann_mf"
    assert [r.split(",")[0] for r in rows[1:]] == ["targets", "other"]


def test_report_re_emit_is_idempotent(tmp_path):
    main(["run", "case2", "--out", str(tmp_path), "--methods", "hann_mf", "apc_proposed"])
    first = _files(tmp_path)
    assert main(["report", str(tmp_path)]) == EXIT_OK
    assert _files(tmp_path) == first
    assert main(["report", str(tmp_path)]) == EXIT_OK
    assert _files(tmp_path) == first


def test_ingest_matches_run(tmp_path):
    raw = tmp_path / "c.mapc"
    main(["run", "case1", "--out", str(tmp_path / "run"), "--export-raw", str(raw),
          "--methods", "hann_mf"])
    assert main(["ingest", str(raw), "--config", "case1", "--out", str(tmp_path / "ing"),
                 "--methods", "hann_mf"]) == EXIT_OK
    a = np.loadtxt(tmp_path / "run/hann_mf.csv", delimiter=",", skiprows=1)
    b = np.loadtxt(tmp_path / "ing/hann_mf.csv", delimiter=",", skiprows=1)
    # export stores complex64, so only single-precision agreement is expected
    np.testing.assert_allclose(a, b, atol=1e-3)


def test_method_failure_does_not_abort_others(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise np.linalg.LinAlgError("forced")

    monkeypatch.setattr(methods, "apc_baseline", boom)
    code = main(["run", "case1", "--out", str(tmp_path)])
    assert code == EXIT_NUMERICAL
    assert (tmp_path / "hann_mf.csv").is_file() and (tmp_path / "apc_proposed.csv").is_file()
    assert not (tmp_path / "apc_baseline.csv").exists()
    assert "apc_baseline" in json.loads((tmp_path / "report.json").read_text())["errors"]


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[radar]\nnum_tx = 0\n")
    assert main(["run", str(bad), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert main(["run", str(tmp_path / "missing.cfg")]) == EXIT_IO
    junk = tmp_path / "junk.mapc"
    junk.write_bytes(b"nope")
    assert main(["ingest", str(junk), "--config", "case1", "--out", str(tmp_path / "o")]) == EXIT_IO
    assert main(["report", str(tmp_path / "nowhere")]) == EXIT_IO


def test_runspec_validation():
    with pytest.raises(cli.ConfigError):
        cli.RunSpec("case1", methods=())
    with pytest.raises(cli.ConfigError):
        cli.RunSpec("case1", methods=("fft",))
