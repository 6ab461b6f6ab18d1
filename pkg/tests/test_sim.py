import io
import math

import numpy as np
import pytest

from hydrosurvey.errors import ConfigError, SimulationTimeout
from hydrosurvey.geo import GeoPoint, LocalPoint, make_local_frame, project
from hydrosurvey.ingest import AQUATROLL, BATHY, LISST, parse_log
from hydrosurvey.mission import Waypoint, plan_lawnmower, plan_transect
from hydrosurvey.sim import (
    Command,
    CurrentField,
    ScalarField,
    SimConfig,
    VehicleState,
    cross_track_error,
    default_fields,
    run_survey,
    step_vehicle,
    waypoint_controller,
)

FRAME = make_local_frame(GeoPoint(39.94364, -75.19973))
SPECS = {"aquatroll": AQUATROLL, "bathy": BATHY, "lisst": LISST}


def _fields():
    f = {k: ScalarField.constant(1.0) for k in default_fields()}
    f["depth_m"] = ScalarField.affine(0.02, -0.05, 5.0)
    f["temp_c"] = ScalarField.affine(0.01, 0.03, 29.0)
    f["sediment_mg_l"] = ScalarField("gaussian_bumps", (), 20.0, ((10.0, 5.0, 4.0, 6.0),))
    return f


class TestDynamics:
    def test_straight_step(self):
        s = step_vehicle(VehicleState(LocalPoint(0, 0), 0.0), Command(1.0, 0.0), (0.0, 0.0), 0.5)
        assert (s.position.x, s.position.y) == (0.5, 0.0)

    def test_current_adds(self):
        s = step_vehicle(VehicleState(LocalPoint(0, 0), 0.0), Command(1.0, 0.0), (0.0, 2.0), 1.0)
        assert (s.position.x, s.position.y) == pytest.approx((1.0, 2.0))

    def test_turn_first(self):
        s = step_vehicle(VehicleState(LocalPoint(0, 0), 0.0), Command(1.0, math.pi / 2), (0, 0), 1.0)
        assert s.heading == pytest.approx(math.pi / 2)
        assert (s.position.x, s.position.y) == pytest.approx((0.0, 1.0), abs=1e-12)

    def test_controller_saturates(self):
        cfg = SimConfig(heading_gain=1.0, turn_rate_max=0.5)
        cmd = waypoint_controller(VehicleState(LocalPoint(0, 0), 0.0), Waypoint(LocalPoint(0, 10)), cfg)
        assert cmd.turn_rate == 0.5
        assert cmd.speed == cfg.v_max

    def test_controller_slows_near_waypoint(self):
        cfg = SimConfig()
        cmd = waypoint_controller(VehicleState(LocalPoint(0, 0), 0.0), Waypoint(LocalPoint(1, 0), 1.0), cfg)
        assert cmd.speed == pytest.approx(cfg.v_max / 2)
        assert cmd.turn_rate == 0.0


class TestFields:
    def test_affine(self):
        assert ScalarField.affine(2, -3, 1)(1.0, 1.0) == 0.0

    def test_round_trip(self):
        for f in _fields().values():
            assert ScalarField.from_dict(f.to_dict()) == f

    def test_bad_kind(self):
        with pytest.raises(ConfigError):
            ScalarField.from_dict({"kind": "spline"})

    def test_current_warning(self, caplog):
        CurrentField.uniform(3.0, 0.0)
        assert "exceeds" in caplog.text


def _parse(result):
    return {sid: parse_log(io.StringIO(text), SPECS[sid]) for sid, text in result.logs.items()}


class TestRunSurvey:
    plan = plan_lawnmower((0, 0, 30, 10), 5)

    def test_deterministic(self):
        cfg = dict(noise={"depth_m": 0.05, "temp_c": 0.1}, gps_sigma_m=0.3, seed=7)
        a = run_survey(self.plan, _fields(), FRAME, config=SimConfig(**cfg))
        b = run_survey(self.plan, _fields(), FRAME, config=SimConfig(**cfg))
        assert a.logs == b.logs and a.truth == b.truth
        c = run_survey(self.plan, _fields(), FRAME, config=SimConfig(**{**cfg, "seed": 8}))
        assert c.logs != a.logs

    def test_rates(self):
        cfg = SimConfig(rates={"bathy": 4.0})
        res = run_survey(self.plan, _fields(), FRAME, config=cfg)
        for spec in cfg.sensors:
            expect = math.floor(res.duration * spec.nominal_rate)
            assert abs(res.sample_counts[spec.sensor_id] - expect) <= 1
        assert cfg.sensors[1].nominal_rate == 4.0

    def test_noiseless_values_match_fields(self):
        fields = _fields()
        res = run_survey(self.plan, fields, FRAME, config=SimConfig(depth_offset_m=0.15))
        for sid, stream in _parse(res).items():
            assert np.all(np.diff(stream.times()) > 0)
            for s in stream.samples:
                p = project(FRAME, s.geo)
                for name, v in s.values.items():
                    truth = float(fields[name](p.x, p.y))
                    if name == "depth_m":
                        truth -= 0.15
                    assert v == pytest.approx(truth, abs=1e-9)

    def test_tracks_plan_without_current(self):
        res = run_survey(self.plan, _fields(), FRAME)
        assert cross_track_error(res.track, self.plan).max() < 1.0

    def test_current_pushes_off_track(self):
        calm = run_survey(self.plan, _fields(), FRAME)
        windy = run_survey(self.plan, _fields(), FRAME, current=CurrentField.uniform(0.0, 0.5))
        assert cross_track_error(windy.track, self.plan).max() > cross_track_error(calm.track, self.plan).max()

    def test_unreachable_waypoint_times_out(self):
        plan = plan_transect(LocalPoint(0, 0), LocalPoint(40, 0), 1)
        with pytest.raises(SimulationTimeout) as err:
            run_survey(plan, _fields(), FRAME, config=SimConfig(v_max=1.0, timeout_s=5.0))
        assert err.value.waypoint_index == 1

    def test_strong_current_times_out(self):
        plan = plan_transect(LocalPoint(0, 0), LocalPoint(40, 0), 1)
        current = CurrentField.uniform(-10.0, 0.0)
        with pytest.raises(SimulationTimeout):
            run_survey(plan, _fields(), FRAME, current=current, config=SimConfig(v_max=1.0))

    def test_reachable_within_default_timeout(self):
        plan = plan_lawnmower((0, 0, 60, 20), 4)
        res = run_survey(plan, _fields(), FRAME, current=CurrentField.uniform(0.3, -0.2))
        assert res.duration > 0

    def test_negative_depth_rejected(self):
        f = _fields()
        f["depth_m"] = ScalarField.affine(-1.0, 0.0, 1.0)
        with pytest.raises(ConfigError):
            run_survey(self.plan, f, FRAME)

    def test_missing_field_rejected(self):
        f = _fields()
        del f["ph"]
        with pytest.raises(ConfigError):
            run_survey(self.plan, f, FRAME)

    def test_write(self, tmp_path):
        res = run_survey(self.plan, _fields(), FRAME)
        paths = res.write(tmp_path)
        assert sorted(p.rsplit("/", 1)[1] for p in paths) == ["aquatroll.csv", "bathy.csv", "lisst.csv", "truth.csv"]
        assert (tmp_path / "truth.csv").read_text().splitlines()[0] == "t_epoch_s,x_m,y_m,heading_rad"
