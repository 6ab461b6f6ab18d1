"""JSON run configuration binding frame, region, sensors, tides, and parameters."""

from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Mapping
from zoneinfo import ZoneInfo

from .errors import ConfigError
from .geo import GeoPoint, LocalFrame, LocalPoint, SurveyRegion, longest_edge_rotation, make_local_frame
from .ingest import DEFAULT_SENSORS, DEFAULT_TIDE_WINDOW_S, SensorSpec, Tide, TideEvent, TideTable, parse_tides
from .interp.profile import DEFAULT_STATION_STEP_M, DEFAULT_WINDOW_M
from .interp.raster import DEFAULT_CELL_M
from .mission import (
    DEFAULT_CAPTURE_RADIUS_M,
    DEFAULT_SPACING_M,
    LaneAxis,
    MissionPlan,
    PlanKind,
    plan_lawnmower,
    plan_transect,
)
from .sim import CurrentField, ScalarField, SimConfig, default_fields, fields_from_dict
from .stats import DEFAULT_PAIRS

_EASTERN = ZoneInfo("America/New_York")

# Lower Schuylkill River reach surveyed in August 2022.
SCHUYLKILL_CORNERS = (
    (39.94364, -75.19973),
    (39.94403, -75.19943),
    (39.94356, -75.19856),
    (39.9432, -75.19883),
)
SCHUYLKILL_TIDES = TideTable(
    (
        TideEvent(datetime(2022, 8, 3, 11, 46, tzinfo=_EASTERN).timestamp(), 5.8, Tide.HIGH),
        TideEvent(datetime(2022, 8, 9, 12, 50, tzinfo=_EASTERN).timestamp(), 0.5, Tide.LOW),
    )
)

SENSOR_FILES = {"aquatroll": "aquatroll.csv", "bathy": "bathy.csv", "lisst": "lisst.csv"}


def template() -> dict:
    """Default configuration, as written by ``hydrosurvey init``."""
    sim = SimConfig()
    return {
        "region": [list(c) for c in SCHUYLKILL_CORNERS],
        "frame": {"origin": None, "rotation_rad": None},
        "sensors": {
            s.sensor_id: {"file": SENSOR_FILES[s.sensor_id], "rate_hz": s.nominal_rate}
            for s in DEFAULT_SENSORS
        },
        "tides": {"path": "tides.csv", "window_s": DEFAULT_TIDE_WINDOW_S},
        "mission": {
            "kind": PlanKind.LAWNMOWER.value,
            "rect": None,
            "spacing_m": DEFAULT_SPACING_M,
            "lane_axis": LaneAxis.ALONG_WIDTH.value,
            "capture_radius_m": DEFAULT_CAPTURE_RADIUS_M,
            "transect": {"a": None, "b": None, "passes": 2},
        },
        "interp": {
            "cell_m": DEFAULT_CELL_M,
            "window_m": DEFAULT_WINDOW_M,
            "station_step_m": DEFAULT_STATION_STEP_M,
            "depth_offset_m": sim.depth_offset_m,
        },
        "sim": {
            "dt": sim.dt,
            "v_max": sim.v_max,
            "turn_rate_max": sim.turn_rate_max,
            "heading_gain": sim.heading_gain,
            "gps_sigma_m": 0.0,
            "noise": {
                "depth_m": 0.02,
                "temp_c": 0.02,
                "ph": 0.005,
                "nitrate_mg_l": 0.2,
                "chl_rfu": 0.01,
                "sediment_mg_l": 0.5,
                "orp_mv": 1.0,
                "pressure_psi": 0.01,
                "baro_mmhg": 0.01,
            },
            "seed": 0,
            "start_epoch_s": sim.start_epoch_s,
            "depth_offset_m": sim.depth_offset_m,
            "timeout_s": None,
            "current": {"uniform": [0.0, 0.0]},
            "fields": {k: f.to_dict() for k, f in default_fields().items()},
        },
        "correlate": {
            "pairs": [list(p) for p in DEFAULT_PAIRS],
            "group_by_tide": True,
            "level": "auto",
        },
    }


def _merge(base: dict, over: Mapping) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k == "fields" and isinstance(v, Mapping):
            # each field spec is replaced whole, unnamed ones keep their defaults
            out[k] = {**out.get(k, {}), **copy.deepcopy(dict(v))}
        elif isinstance(v, Mapping) and isinstance(out.get(k), dict) and k != "current":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _positive(value, name) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise ConfigError(f"{name} must be positive, got {value!r}")
    return v


@dataclass
class RunConfig:
    data: dict
    base_dir: str = "."
    region: SurveyRegion = field(init=False)

    def __post_init__(self):
        self.data = _merge(template(), self.data)
        try:
            self.region = SurveyRegion.from_pairs(self.data["region"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad region: {exc}") from exc

    @classmethod
    def load(cls, path) -> RunConfig:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls(data, os.path.dirname(os.path.abspath(path)))

    def resolve(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)

    def frame(self) -> LocalFrame:
        f = self.data["frame"]
        origin = self.region.corners[0] if f.get("origin") is None else GeoPoint(*map(float, f["origin"]))
        rot = f.get("rotation_rad")
        rot = longest_edge_rotation(self.region) if rot is None else float(rot)
        return make_local_frame(origin, rot)

    def sensor_specs(self) -> tuple[SensorSpec, ...]:
        out = []
        for spec in DEFAULT_SENSORS:
            entry = self.data["sensors"].get(spec.sensor_id)
            if entry is None:
                continue
            out.append(spec.with_rate(_positive(entry.get("rate_hz", spec.nominal_rate), f"{spec.sensor_id}.rate_hz")))
        return tuple(out)

    def sensor_file(self, sensor_id: str) -> str:
        return self.data["sensors"][sensor_id].get("file", SENSOR_FILES.get(sensor_id, f"{sensor_id}.csv"))

    def tide_table(self) -> TideTable:
        t = self.data["tides"]
        if t.get("events"):
            try:
                return TideTable(
                    tuple(TideEvent(float(e[0]), float(e[1]), Tide(e[2])) for e in t["events"])
                )
            except (TypeError, ValueError, IndexError) as exc:
                raise ConfigError(f"bad inline tide events: {exc}") from exc
        path = t.get("path")
        if not path:
            return TideTable()
        full = self.resolve(path)
        if not os.path.exists(full):
            raise ConfigError(f"tide table not found: {full}")
        return parse_tides(full)

    @property
    def tide_window(self) -> float:
        return _positive(self.data["tides"].get("window_s", DEFAULT_TIDE_WINDOW_S), "tides.window_s")

    def mission_rect(self) -> tuple[float, float, float, float]:
        rect = self.data["mission"].get("rect")
        if rect is None:
            return self.region.bounding_rect(self.frame())
        if len(rect) != 4:
            raise ConfigError("mission.rect must be [x0, y0, width, height]")
        return tuple(map(float, rect))

    def transect_endpoints(self) -> tuple[LocalPoint, LocalPoint]:
        t = self.data["mission"]["transect"]
        if t.get("a") is not None and t.get("b") is not None:
            return LocalPoint(*map(float, t["a"])), LocalPoint(*map(float, t["b"]))
        x0, y0, w, h = self.mission_rect()
        return LocalPoint(x0 + w / 2, y0), LocalPoint(x0 + w / 2, y0 + h)

    def plan(self, kind=None, spacing=None, passes=None, lane_axis=None) -> MissionPlan:
        m = self.data["mission"]
        try:
            kind = PlanKind(kind or m["kind"])
            axis = LaneAxis(lane_axis or m.get("lane_axis", LaneAxis.ALONG_WIDTH.value))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        radius = _positive(m.get("capture_radius_m", DEFAULT_CAPTURE_RADIUS_M), "capture_radius_m")
        if kind is PlanKind.LAWNMOWER:
            sp = m.get("spacing_m", DEFAULT_SPACING_M) if spacing is None else spacing
            try:
                sp = float(sp)
            except (TypeError, ValueError):
                raise ConfigError(f"spacing must be a number, got {sp!r}") from None
            return plan_lawnmower(self.mission_rect(), sp, axis, radius)
        a, b = self.transect_endpoints()
        n = m["transect"].get("passes", 2) if passes is None else passes
        return plan_transect(a, b, n, radius)

    def interp(self, key: str) -> float:
        return _positive(self.data["interp"][key], f"interp.{key}")

    @property
    def depth_offset(self) -> float:
        return float(self.data["interp"].get("depth_offset_m", 0.0))

    def sim_config(self, seed: int | None = None) -> SimConfig:
        s = self.data["sim"]
        try:
            return SimConfig(
                dt=float(s["dt"]),
                v_max=float(s["v_max"]),
                turn_rate_max=float(s["turn_rate_max"]),
                heading_gain=float(s["heading_gain"]),
                noise={k: float(v) for k, v in (s.get("noise") or {}).items()},
                gps_sigma_m=float(s.get("gps_sigma_m", 0.0)),
                seed=int(s.get("seed", 0) if seed is None else seed),
                start_epoch_s=float(s["start_epoch_s"]),
                depth_offset_m=float(s.get("depth_offset_m", 0.0)),
                timeout_s=None if s.get("timeout_s") is None else float(s["timeout_s"]),
                sensors=self.sensor_specs(),
            )
        except (TypeError, ValueError, KeyError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad sim section: {exc}") from exc

    def fields(self) -> dict[str, ScalarField]:
        return fields_from_dict(self.data["sim"]["fields"])

    def current(self) -> CurrentField:
        return CurrentField.from_dict(self.data["sim"].get("current"))

    def pairs(self) -> list[tuple[str, str]]:
        try:
            return [(str(a), str(b)) for a, b in self.data["correlate"]["pairs"]]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad correlate.pairs: {exc}") from exc


def dump(data: Mapping[str, Any]) -> str:
    return json.dumps(data, indent=2) + "\n"
