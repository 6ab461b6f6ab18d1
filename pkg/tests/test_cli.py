import csv
import json
import os

import numpy as np
import pytest

from hydrosurvey.cli import main
from hydrosurvey.config import SCHUYLKILL_TIDES, RunConfig
from hydrosurvey.ingest import format_tides
from hydrosurvey.interp import read_esri_ascii
from hydrosurvey.sim import FIELD_PARAMETERS

FAST = {
    "mission": {"rect": [0, 0, 30, 12], "spacing_m": 6.0, "transect": {"a": [0, 6], "b": [30, 6]}},
    "sim": {"v_max": 2.0},
}
NOISELESS = {"noise": {k: 0.0 for k in FIELD_PARAMETERS}, "gps_sigma_m": 0.0}


def _config(tmp_path, extra=None, name="config.json"):
    data = json.loads(json.dumps(FAST))
    for key, val in (extra or {}).items():
        if isinstance(val, dict) and isinstance(data.get(key), dict):
            data[key].update(val)
        else:
            data[key] = val
    path = tmp_path / name
    path.write_text(json.dumps(data))
    (tmp_path / "tides.csv").write_text(format_tides(SCHUYLKILL_TIDES))
    return str(path)


def _simulate(tmp_path, cfg, name="run", *extra):
    out = tmp_path / name
    assert main(["--config", cfg, "simulate", "--out", str(out), *extra]) == 0
    return str(out)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_init(tmp_path):
    assert main(["init", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "config.json").exists() and (tmp_path / "tides.csv").exists()
    assert main(["init", "--out", str(tmp_path)]) == 2
    assert main(["init", "--out", str(tmp_path), "--force"]) == 0
    cfg = RunConfig.load(tmp_path / "config.json")
    assert len(cfg.tide_table().events) == 2


class TestPlan:
    def test_lawnmower(self, tmp_path):
        cfg = _config(tmp_path, {"mission": {"rect": [0, 0, 90, 40]}})
        assert main(["--config", cfg, "--out", str(tmp_path), "plan", "--spacing", "10"]) == 0
        plan = json.loads((tmp_path / "plan.json").read_text())
        assert len(plan["waypoints"]) == 10
        assert plan["kind"] == "lawnmower" and plan["spacing"] == 10

    def test_zero_spacing_exits_2(self, tmp_path):
        cfg = _config(tmp_path)
        assert main(["--config", cfg, "plan", "--out", str(tmp_path), "--spacing", "0"]) == 2

    def test_transect(self, tmp_path):
        cfg = _config(tmp_path)
        assert main(["--config", cfg, "plan", "--out", str(tmp_path), "--kind", "transect", "--passes", "2"]) == 0
        plan = json.loads((tmp_path / "plan.json").read_text())
        assert len(plan["waypoints"]) == 3

    def test_unknown_flag_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["plan", "--bogus"])
        assert err.value.code == 2


class TestSimulate:
    def test_writes_logs(self, tmp_path):
        out = _simulate(tmp_path, _config(tmp_path))
        names = sorted(os.listdir(out))
        assert names == ["aquatroll.csv", "bathy.csv", "lisst.csv", "truth.csv"]
        for n in names:
            assert len(_read_csv(os.path.join(out, n))) > 2

    def test_seed_reproducible(self, tmp_path):
        cfg = _config(tmp_path)
        a = _simulate(tmp_path, cfg, "a", "--seed", "3")
        b = _simulate(tmp_path, cfg, "b", "--seed", "3")
        for n in os.listdir(a):
            assert open(os.path.join(a, n), "rb").read() == open(os.path.join(b, n), "rb").read()

    def test_from_plan_file(self, tmp_path):
        cfg = _config(tmp_path)
        assert main(["--config", cfg, "plan", "--out", str(tmp_path), "--kind", "transect", "--passes", "1"]) == 0
        out = _simulate(tmp_path, cfg, "t", "--plan", str(tmp_path / "plan.json"))
        truth = np.array([list(map(float, r)) for r in _read_csv(os.path.join(out, "truth.csv"))[1:]])
        assert truth[:, 1].max() > 28

    def test_overwhelming_current_exits_3(self, tmp_path):
        cfg = _config(tmp_path, {"sim": {"v_max": 1.0, "current": {"uniform": [-10.0, 0.0]}}})
        assert main(["--config", cfg, "simulate", "--out", str(tmp_path / "x")]) == 3


class TestGrid:
    def test_noiseless_affine_depth(self, tmp_path):
        depth = {"kind": "affine", "coef": [0.02, -0.05, 5.0]}
        cfg = _config(tmp_path, {"sim": {**NOISELESS, "fields": {"depth_m": depth}}})
        logs = _simulate(tmp_path, cfg)
        assert main(["--config", cfg, "grid", "--logs", logs, "--parameter", "depth_m", "--out", str(tmp_path)]) == 0
        grid = read_esri_ascii(tmp_path / "depth_m.asc")
        cx, cy = grid.centers()
        truth = 0.02 * cx - 0.05 * cy + 5.0
        ok = ~grid.mask
        assert ok.sum() > 100
        assert np.max(np.abs(grid.values[ok] - truth[ok])) < 1e-6

    def test_unknown_parameter_exits_2(self, tmp_path):
        cfg = _config(tmp_path)
        logs = _simulate(tmp_path, cfg)
        assert main(["--config", cfg, "grid", "--logs", logs, "--parameter", "xyz", "--out", str(tmp_path)]) == 2

    def test_too_few_positions_exits_4(self, tmp_path):
        cfg = _config(tmp_path)
        logs = tmp_path / "tiny"
        logs.mkdir()
        (logs / "bathy.csv").write_text(
            "t_epoch_s,lat_deg,lon_deg,depth_m\n1660060800.0,39.9437,-75.1997,3.0\n1660060800.1,39.9438,-75.1996,3.1\n"
        )
        assert main(["--config", cfg, "grid", "--logs", str(logs), "--parameter", "depth_m", "--out", str(tmp_path)]) == 4

    def test_malformed_log_exits_4(self, tmp_path):
        cfg = _config(tmp_path)
        logs = tmp_path / "bad"
        logs.mkdir()
        (logs / "bathy.csv").write_text("t_epoch_s,lat_deg,lon_deg,depth_m\n1,39.9,-75.2,deep\n")
        assert main(["--config", cfg, "grid", "--logs", str(logs), "--parameter", "depth_m", "--out", str(tmp_path)]) == 4


class TestProfile:
    def test_transect_profile(self, tmp_path):
        depth = {"kind": "affine", "coef": [-0.04, 0.0, 5.0]}
        cfg = _config(tmp_path, {"mission": {"kind": "transect"}, "sim": {**NOISELESS, "fields": {"depth_m": depth}}})
        logs = _simulate(tmp_path, cfg)
        assert main(["--config", cfg, "profile", "--logs", logs, "--out", str(tmp_path)]) == 0
        rows = _read_csv(tmp_path / "profile.csv")
        assert rows[0] == ["station_m", "depth_m"]
        st = np.array([[float(a), float(b)] for a, b in rows[1:]])
        interior = (st[:, 0] > 2) & (st[:, 0] < 28)
        np.testing.assert_allclose(st[interior, 1], 5.0 - 0.04 * st[interior, 0], atol=0.05)

    def test_no_bathymetry_exits_4(self, tmp_path):
        cfg = _config(tmp_path)
        logs = tmp_path / "empty"
        logs.mkdir()
        (logs / "bathy.csv").write_text("t_epoch_s,lat_deg,lon_deg,depth_m\n1660060800.0,39.9437,-75.1997,\n")
        assert main(["--config", cfg, "profile", "--logs", str(logs), "--out", str(tmp_path)]) == 4


class TestTables:
    def test_correlate_and_summarize(self, tmp_path):
        cfg = _config(tmp_path)
        logs = _simulate(tmp_path, cfg)
        before = {n: open(os.path.join(logs, n), "rb").read() for n in os.listdir(logs)}
        assert main(["--config", cfg, "correlate", "--logs", logs, "--out", str(tmp_path)]) == 0
        rows = _read_csv(tmp_path / "correlation.csv")
        assert rows[0] == ["param_x", "param_y", "tide_group", "n", "r"]
        pooled = [r for r in rows[1:] if r[2] == "pooled"]
        assert len(pooled) == 3
        assert all(-1 <= float(r[4]) <= 1 for r in pooled)
        # default start time falls inside the low-tide window
        assert any(r[2] == "low" for r in rows[1:])

        assert main(["--config", cfg, "summarize", "--logs", logs, "--out", str(tmp_path)]) == 0
        rows = _read_csv(tmp_path / "summary.csv")
        params = {r[2] for r in rows[1:]}
        assert {"ph", "temp_c", "depth_m", "sediment_mg_l"} <= params
        for r in rows[1:]:
            assert float(r[4]) <= float(r[7]) <= float(r[5])
        after = {n: open(os.path.join(logs, n), "rb").read() for n in os.listdir(logs)}
        assert after == before

    def test_missing_logs_dir_exits_2(self, tmp_path):
        cfg = _config(tmp_path)
        assert main(["--config", cfg, "summarize", "--logs", str(tmp_path / "nope"), "--out", str(tmp_path)]) == 2
