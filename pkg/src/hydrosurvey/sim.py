"""Desk simulation of an ASV survey.

A unicycle-model vehicle follows the mission waypoints while a current
field pushes it off track. Each sensor samples synthetic scalar fields at
its own rate and the run is written out in exactly the CSV layouts that
:mod:`hydrosurvey.ingest` reads, plus a ground-truth track.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, SimulationTimeout
from .geo import LocalFrame, LocalPoint, unproject_arrays
from .ingest import DEFAULT_SENSORS, TIME_COL, SensorSpec
from .mission import MissionPlan, Waypoint, path_length

log = logging.getLogger(__name__)

FIELD_PARAMETERS = (
    "depth_m",
    "temp_c",
    "ph",
    "nitrate_mg_l",
    "chl_rfu",
    "sediment_mg_l",
    "orp_mv",
    "pressure_psi",
    "baro_mmhg",
)
CURRENT_WARN_MPS = 2.0
DEFAULT_DEPTH_OFFSET_M = 0.15
# 2022-08-09 12:00 EDT
DEFAULT_START_EPOCH_S = 1660060800.0


@dataclass(frozen=True)
class ScalarField:
    """Synthetic ground truth for one measured parameter.

    ``kind`` is ``constant`` (``params = (c,)``), ``affine``
    (``params = (a, b, c)`` for ``a*x + b*y + c``) or ``gaussian_bumps``
    (``base`` plus ``bumps`` of ``(cx, cy, amplitude, sigma)``).
    """

    kind: str
    params: tuple[float, ...] = ()
    base: float = 0.0
    bumps: tuple[tuple[float, float, float, float], ...] = ()

    def __post_init__(self):
        if self.kind == "constant" and len(self.params) != 1:
            raise ConfigError("constant field needs one value")
        elif self.kind == "affine" and len(self.params) != 3:
            raise ConfigError("affine field needs three coefficients")
        elif self.kind == "gaussian_bumps":
            if any(len(b) != 4 or not b[3] > 0 for b in self.bumps):
                raise ConfigError("bumps need (cx, cy, amplitude, sigma > 0)")
        elif self.kind not in ("constant", "affine", "gaussian_bumps"):
            raise ConfigError(f"unknown field kind {self.kind!r}")

    @classmethod
    def constant(cls, c: float) -> ScalarField:
        return cls("constant", (float(c),))

    @classmethod
    def affine(cls, a: float, b: float, c: float) -> ScalarField:
        return cls("affine", (float(a), float(b), float(c)))

    @classmethod
    def from_dict(cls, d: Mapping) -> ScalarField:
        kind = d.get("kind")
        try:
            if kind == "constant":
                return cls.constant(d["value"])
            if kind == "affine":
                return cls.affine(*d["coef"])
            if kind == "gaussian_bumps":
                bumps = tuple(
                    (float(b["center"][0]), float(b["center"][1]), float(b["amplitude"]), float(b["sigma"]))
                    for b in d.get("bumps", ())
                )
                return cls("gaussian_bumps", (), float(d.get("base", 0.0)), bumps)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed field spec {dict(d)!r}: {exc}") from exc
        raise ConfigError(f"unknown field kind {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.params[0]}
        if self.kind == "affine":
            return {"kind": "affine", "coef": list(self.params)}
        return {
            "kind": "gaussian_bumps",
            "base": self.base,
            "bumps": [
                {"center": [cx, cy], "amplitude": a, "sigma": s} for cx, cy, a, s in self.bumps
            ],
        }

    def __call__(self, x, y):
        if self.kind == "constant":
            if np.ndim(x):
                return np.full(np.shape(x), self.params[0])
            return self.params[0]
        if self.kind == "affine":
            a, b, c = self.params
            return a * x + b * y + c
        total = self.base
        for cx, cy, amp, sigma in self.bumps:
            total = total + amp * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * sigma * sigma))
        return total


@dataclass(frozen=True)
class CurrentField:
    """Water velocity ``offset + matrix @ (x, y)`` in m/s."""

    offset: tuple[float, float] = (0.0, 0.0)
    matrix: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 0.0), (0.0, 0.0))

    def __post_init__(self):
        flat = list(self.offset) + [v for row in self.matrix for v in row]
        if not all(math.isfinite(v) for v in flat):
            raise ConfigError("current field must be finite")
        if math.hypot(*self.offset) > CURRENT_WARN_MPS:
            log.warning("current %.2f m/s exceeds the %.1f m/s design bound",
                        math.hypot(*self.offset), CURRENT_WARN_MPS)

    @classmethod
    def uniform(cls, u: float, v: float) -> CurrentField:
        return cls((float(u), float(v)))

    @classmethod
    def from_dict(cls, d: Mapping | None) -> CurrentField:
        if not d:
            return cls()
        try:
            if "uniform" in d:
                return cls.uniform(*d["uniform"])
            m = d.get("matrix", ((0.0, 0.0), (0.0, 0.0)))
            return cls(
                tuple(map(float, d.get("offset", (0.0, 0.0)))),
                (tuple(map(float, m[0])), tuple(map(float, m[1]))),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed current spec: {exc}") from exc

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        (a, b), (c, d) = self.matrix
        return self.offset[0] + a * x + b * y, self.offset[1] + c * x + d * y


@dataclass
class SimConfig:
    dt: float = 0.05
    v_max: float = 1.5
    turn_rate_max: float = 1.0
    heading_gain: float = 2.0
    noise: dict[str, float] = field(default_factory=dict)
    gps_sigma_m: float = 0.0
    seed: int = 0
    rates: dict[str, float] = field(default_factory=dict)
    start_epoch_s: float = DEFAULT_START_EPOCH_S
    depth_offset_m: float = DEFAULT_DEPTH_OFFSET_M
    timeout_s: float | None = None
    sensors: tuple[SensorSpec, ...] = DEFAULT_SENSORS

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.v_max > 0:
            raise ConfigError("v_max must be positive")
        if not (self.turn_rate_max > 0 and self.heading_gain > 0):
            raise ConfigError("turn_rate_max and heading_gain must be positive")
        if self.gps_sigma_m < 0 or any(s < 0 for s in self.noise.values()):
            raise ConfigError("noise sigmas must be non-negative")
        if any(not r > 0 for r in self.rates.values()):
            raise ConfigError("sensor rates must be positive")
        self.sensors = tuple(
            s.with_rate(self.rates[s.sensor_id]) if s.sensor_id in self.rates else s
            for s in self.sensors
        )


@dataclass(frozen=True)
class VehicleState:
    position: LocalPoint
    heading: float
    speed: float = 0.0


class Command(NamedTuple):
    speed: float
    turn_rate: float


def wrap_angle(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


def step_vehicle(state: VehicleState, command: Command, current, dt: float) -> VehicleState:
    """Unicycle update with additive current drift (``current`` is a callable or vector)."""
    x, y = state.position.x, state.position.y
    cx, cy = current(x, y) if callable(current) else current
    heading = state.heading + command.turn_rate * dt
    x += (command.speed * math.cos(heading) + cx) * dt
    y += (command.speed * math.sin(heading) + cy) * dt
    return VehicleState(LocalPoint(x, y), heading, command.speed)


def waypoint_controller(state: VehicleState, waypoint: Waypoint, config: SimConfig) -> Command:
    dx = waypoint.position.x - state.position.x
    dy = waypoint.position.y - state.position.y
    err = wrap_angle(math.atan2(dy, dx) - state.heading)
    turn = max(-config.turn_rate_max, min(config.turn_rate_max, config.heading_gain * err))
    dist = math.hypot(dx, dy)
    speed = config.v_max * min(1.0, dist / (2 * waypoint.capture_radius))
    return Command(speed, turn)


@dataclass
class SurveyResult:
    logs: dict[str, str]
    truth: str
    duration: float
    track: np.ndarray  # (n, 3): t, x, y
    sample_counts: dict[str, int]

    def write(self, directory) -> list[str]:
        os.makedirs(directory, exist_ok=True)
        written = []
        for name, text in list(self.logs.items()) + [("truth", self.truth)]:
            path = os.path.join(directory, f"{name}.csv")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            written.append(path)
        return written


def default_timeout(plan: MissionPlan, config: SimConfig) -> float:
    turn_allowance = len(plan.waypoints) * 2 * math.pi / config.turn_rate_max
    return 2 * (path_length(plan) / config.v_max + turn_allowance) + 60.0


def _check_fields(plan: MissionPlan, fields: Mapping[str, ScalarField], sensors):
    for spec in sensors:
        for name in spec.parameter_names:
            if name not in fields:
                raise ConfigError(f"no field spec for parameter {name!r}")
    if "depth_m" in fields:
        pts = np.array([tuple(p) for p in plan.points])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], 21), np.linspace(lo[1], hi[1], 21))
        if np.min(fields["depth_m"](gx, gy)) < 0:
            raise ConfigError("depth field is negative inside the survey area")


def run_survey(
    plan: MissionPlan,
    fields: Mapping[str, ScalarField],
    frame: LocalFrame,
    current=None,
    config: SimConfig | None = None,
) -> SurveyResult:
    """Drive the plan and sample every sensor along the way.

    Samples are taken at exact multiples of each sensor's period. Logged
    values are the field at the true position plus Gaussian noise; logged
    GPS is the true position plus Gaussian noise, converted to lat/lon.
    Depth is logged relative to the transducer, i.e. minus
    ``depth_offset_m``. Raises :class:`SimulationTimeout` if a waypoint
    cannot be reached.
    """
    config = config or SimConfig()
    current = current or CurrentField()
    sensors = config.sensors
    _check_fields(plan, fields, sensors)
    rng = np.random.default_rng(config.seed)
    timeout = config.timeout_s if config.timeout_s is not None else default_timeout(plan, config)
    wps = plan.waypoints

    p0, p1 = wps[0].position, wps[1].position
    state = VehicleState(p0, math.atan2(p1.y - p0.y, p1.x - p0.x))
    target = 1

    rows = {s.sensor_id: [] for s in sensors}
    next_k = {s.sensor_id: 0 for s in sensors}
    track = [(0.0, p0.x, p0.y, state.heading)]

    def emit(t_end, prev, cur, t_prev):
        for spec in sensors:
            sid = spec.sensor_id
            while next_k[sid] / spec.nominal_rate <= t_end + 1e-9:
                ts = next_k[sid] / spec.nominal_rate
                f = 0.0 if t_end == t_prev else (ts - t_prev) / (t_end - t_prev)
                f = min(max(f, 0.0), 1.0)
                x = prev[0] + f * (cur[0] - prev[0])
                y = prev[1] + f * (cur[1] - prev[1])
                gps = rng.normal(0.0, config.gps_sigma_m, 2) if config.gps_sigma_m > 0 else (0.0, 0.0)
                vals = []
                for name in spec.parameter_names:
                    v = float(fields[name](x, y))
                    if name == "depth_m":
                        v -= config.depth_offset_m
                    sigma = config.noise.get(name, 0.0)
                    if sigma > 0:
                        v += float(rng.normal(0.0, sigma))
                    vals.append(v)
                rows[sid].append((ts, x + gps[0], y + gps[1], vals))
                next_k[sid] += 1

    emit(0.0, (p0.x, p0.y), (p0.x, p0.y), 0.0)
    n = 0
    while target < len(wps):
        n += 1
        t = n * config.dt
        if t > timeout:
            raise SimulationTimeout(target, tuple(wps[target].position), t)
        prev = (state.position.x, state.position.y)
        cmd = waypoint_controller(state, wps[target], config)
        state = step_vehicle(state, cmd, current, config.dt)
        cur = (state.position.x, state.position.y)
        track.append((t, cur[0], cur[1], state.heading))
        emit(t, prev, cur, (n - 1) * config.dt)
        while target < len(wps) and math.hypot(
            wps[target].position.x - cur[0], wps[target].position.y - cur[1]
        ) <= wps[target].capture_radius:
            target += 1
    duration = n * config.dt

    logs = {}
    for spec in sensors:
        data = rows[spec.sensor_id]
        xs = np.array([r[1] for r in data])
        ys = np.array([r[2] for r in data])
        lat, lon = unproject_arrays(frame, xs, ys)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(spec.columns)
        for (ts, _, _, vals), la, lo in zip(data, lat.tolist(), lon.tolist()):
            w.writerow([repr(config.start_epoch_s + ts), repr(la), repr(lo)] + [repr(v) for v in vals])
        logs[spec.sensor_id] = buf.getvalue()

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([TIME_COL, "x_m", "y_m", "heading_rad"])
    for t, x, y, h in track:
        w.writerow([repr(config.start_epoch_s + t), repr(x), repr(y), repr(h)])

    return SurveyResult(
        logs,
        buf.getvalue(),
        duration,
        np.array([(t, x, y) for t, x, y, _ in track]),
        {sid: len(r) for sid, r in rows.items()},
    )


def cross_track_error(track: np.ndarray, plan: MissionPlan) -> np.ndarray:
    """Distance from each track point to the nearest planned segment."""
    pts = track[:, 1:3] if track.shape[1] == 3 else track
    best = np.full(len(pts), np.inf)
    wp = np.array([tuple(p) for p in plan.points])
    for a, b in zip(wp[:-1], wp[1:]):
        ab = b - a
        s = np.clip(((pts - a) @ ab) / (ab @ ab), 0.0, 1.0)
        d = np.linalg.norm(pts - (a + s[:, None] * ab), axis=1)
        best = np.minimum(best, d)
    return best


def default_fields() -> dict[str, ScalarField]:
    """A plausible late-summer tidal-river scene over a ~90 x 50 m reach."""
    return {
        "depth_m": ScalarField("gaussian_bumps", (), 4.0, ((30.0, 10.0, 2.5, 15.0), (70.0, 35.0, -1.5, 12.0))),
        "temp_c": ScalarField.affine(0.01, -0.02, 30.5),
        "ph": ScalarField.affine(0.001, -0.002, 7.9),
        "nitrate_mg_l": ScalarField.affine(-0.03, 0.05, 120.0),
        "chl_rfu": ScalarField("gaussian_bumps", (), 0.4, ((45.0, 20.0, 1.2, 10.0),)),
        "sediment_mg_l": ScalarField.affine(0.02, 0.01, 25.0),
        "orp_mv": ScalarField.affine(0.2, -0.3, 200.0),
        "pressure_psi": ScalarField.constant(14.7),
        "baro_mmhg": ScalarField.affine(0.0, 0.005, 8.0),
    }


def fields_from_dict(d: Mapping[str, Mapping]) -> dict[str, ScalarField]:
    return {name: ScalarField.from_dict(spec) for name, spec in d.items()}


def sensors_from_rates(rates: Mapping[str, float], sensors: Sequence[SensorSpec] = DEFAULT_SENSORS):
    return tuple(s.with_rate(rates[s.sensor_id]) if s.sensor_id in rates else s for s in sensors)
