"""Sensor log parsing, multi-rate synchronisation, and tide tagging."""

from __future__ import annotations

import bisect
import csv
import io
import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import ConfigError, OrderingError, ParseError
from .geo import GeoPoint, LocalFrame, LocalPoint, project_arrays

TIME_COL = "t_epoch_s"
LAT_COL = "lat_deg"
LON_COL = "lon_deg"

DEFAULT_TIDE_WINDOW_S = 5400.0


@dataclass(frozen=True)
class SensorSpec:
    sensor_id: str
    parameters: tuple[tuple[str, str], ...]
    nominal_rate: float

    def __post_init__(self):
        if not self.nominal_rate > 0:
            raise ConfigError(f"{self.sensor_id}: nominal_rate must be positive")
        names = self.parameter_names
        if len(set(names)) != len(names):
            raise ConfigError(f"{self.sensor_id}: duplicate parameter names")

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.parameters)

    @property
    def period(self) -> float:
        return 1.0 / self.nominal_rate

    @property
    def columns(self) -> tuple[str, ...]:
        return (TIME_COL, LAT_COL, LON_COL) + self.parameter_names

    def with_rate(self, rate: float) -> SensorSpec:
        return replace(self, nominal_rate=float(rate))


AQUATROLL = SensorSpec(
    "aquatroll",
    (
        ("ph", "pH"),
        ("temp_c", "degC"),
        ("nitrate_mg_l", "mg/L"),
        ("pressure_psi", "psi"),
        ("baro_mmhg", "mmHg"),
        ("orp_mv", "mV"),
        ("chl_rfu", "RFU"),
    ),
    0.5,
)
BATHY = SensorSpec("bathy", (("depth_m", "m"),), 10.0)
LISST = SensorSpec("lisst", (("sediment_mg_l", "mg/L"),), 1.0)

DEFAULT_SENSORS = (AQUATROLL, BATHY, LISST)


def sensor_for_parameter(parameter: str, specs: Iterable[SensorSpec] = DEFAULT_SENSORS):
    for spec in specs:
        if parameter in spec.parameter_names:
            return spec
    raise ConfigError(f"unknown parameter {parameter!r}")


@dataclass(frozen=True)
class SensorSample:
    t: float
    geo: GeoPoint | None
    values: dict[str, float | None]


@dataclass(frozen=True)
class SampleStream:
    spec: SensorSpec
    samples: tuple[SensorSample, ...]

    def __post_init__(self):
        for a, b in zip(self.samples, self.samples[1:]):
            if not b.t > a.t:
                raise OrderingError(f"{self.spec.sensor_id}: timestamps not strictly increasing")

    def __len__(self):
        return len(self.samples)

    def times(self) -> np.ndarray:
        return np.fromiter((s.t for s in self.samples), dtype=float, count=len(self.samples))

    def has_positions(self) -> bool:
        return any(s.geo is not None for s in self.samples)


class Tide(str, Enum):
    HIGH = "high"
    LOW = "low"
    UNTAGGED = "untagged"


@dataclass(frozen=True)
class SynchronizedRecord:
    t: float
    position: LocalPoint
    values: dict[str, float | None]
    tide: Tide = Tide.UNTAGGED
    run: str = ""

    def get(self, parameter: str) -> float | None:
        return self.values.get(parameter)


@dataclass(frozen=True)
class TideEvent:
    peak_time: float
    height_ft: float
    kind: Tide

    def __post_init__(self):
        if self.kind is Tide.UNTAGGED:
            raise ConfigError("tide events must be 'high' or 'low'")
        if not (math.isfinite(self.peak_time) and math.isfinite(self.height_ft)):
            raise ConfigError("tide event fields must be finite")


@dataclass(frozen=True)
class TideTable:
    events: tuple[TideEvent, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(sorted(self.events, key=lambda e: e.peak_time)))


def _open_text(source) -> tuple[TextIO, str | None, bool]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, newline="", encoding="utf-8"), os.fspath(source), True
    return source, getattr(source, "name", None), False


def _parse_float(text: str, column: str, line: int, path) -> float | None:
    text = text.strip()
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"column {column!r}: {text!r} is not a number", line, path) from None
    if not math.isfinite(value):
        raise ParseError(f"column {column!r}: non-finite value {text!r}", line, path)
    return value


def parse_log(source, spec: SensorSpec) -> SampleStream:
    """Read one sensor CSV (path or open text file) into a :class:`SampleStream`.

    Rows that repeat the previous timestamp replace it (last one wins); any
    other backwards step in time raises :class:`OrderingError`.
    """
    fh, path, owned = _open_text(source)
    try:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file, header row required", 1, path) from None
        missing = [c for c in spec.columns if c not in header]
        if missing:
            raise ParseError(f"missing column(s) {', '.join(missing)}", 1, path)
        idx = {c: header.index(c) for c in spec.columns}

        samples: list[SensorSample] = []
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, found {len(row)}", line, path
                )
            t = _parse_float(row[idx[TIME_COL]], TIME_COL, line, path)
            if t is None:
                raise ParseError("missing timestamp", line, path)
            lat = _parse_float(row[idx[LAT_COL]], LAT_COL, line, path)
            lon = _parse_float(row[idx[LON_COL]], LON_COL, line, path)
            if (lat is None) != (lon is None):
                raise ParseError("latitude and longitude must both be present or both empty", line, path)
            try:
                geo = None if lat is None else GeoPoint(lat, lon)
            except ConfigError as exc:
                raise ParseError(str(exc), line, path) from None
            values = {
                name: _parse_float(row[idx[name]], name, line, path)
                for name in spec.parameter_names
            }
            sample = SensorSample(t, geo, values)
            if samples and t == samples[-1].t:
                samples[-1] = sample
            elif samples and t < samples[-1].t:
                raise OrderingError(
                    f"timestamp {t!r} earlier than previous {samples[-1].t!r}", line, path
                )
            else:
                samples.append(sample)
        return SampleStream(spec, tuple(samples))
    finally:
        if owned:
            fh.close()


def parse_tides(source) -> TideTable:
    """Read ``peak_epoch_s, height_ft, kind`` rows into a :class:`TideTable`."""
    fh, path, owned = _open_text(source)
    try:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return TideTable()
        need = {"peak_epoch_s", "height_ft", "kind"}
        if not need <= {f.strip() for f in reader.fieldnames}:
            raise ParseError(f"tide table needs columns {sorted(need)}", 1, path)
        events = []
        for row in reader:
            row = {k.strip(): (v or "").strip() for k, v in row.items()}
            line = reader.line_num
            t = _parse_float(row["peak_epoch_s"], "peak_epoch_s", line, path)
            h = _parse_float(row["height_ft"], "height_ft", line, path)
            if t is None or h is None:
                raise ParseError("tide rows need a time and a height", line, path)
            try:
                kind = Tide(row["kind"].lower())
                events.append(TideEvent(t, h, kind))
            except (ValueError, ConfigError):
                raise ParseError(f"bad tide kind {row['kind']!r}", line, path) from None
        return TideTable(tuple(events))
    finally:
        if owned:
            fh.close()


def format_tides(table: TideTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["peak_epoch_s", "height_ft", "kind"])
    for e in table.events:
        w.writerow([repr(e.peak_time), repr(e.height_ft), e.kind.value])
    return buf.getvalue()


def apply_depth_offset(stream: SampleStream, offset: float, parameter: str = "depth_m") -> SampleStream:
    """Add the transducer draft back onto depth readings."""
    if parameter not in stream.spec.parameter_names or offset == 0:
        return stream
    samples = []
    for s in stream.samples:
        v = s.values.get(parameter)
        if v is not None:
            s = replace(s, values={**s.values, parameter: v + offset})
        samples.append(s)
    return SampleStream(stream.spec, tuple(samples))


def _nearest_indices(times: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Index of the nearest entry of sorted ``times`` for each query (ties -> earlier)."""
    right = np.searchsorted(times, query, side="left")
    right = np.clip(right, 0, len(times) - 1)
    left = np.clip(right - 1, 0, len(times) - 1)
    d_left = np.abs(query - times[left])
    d_right = np.abs(times[right] - query)
    return np.where(d_left <= d_right, left, right)


def _pick_position_stream(streams: Sequence[SampleStream], position_id: str | None) -> SampleStream:
    if position_id is not None:
        for s in streams:
            if s.spec.sensor_id == position_id:
                if not s.has_positions():
                    raise ConfigError(f"position stream {position_id!r} has no GPS fixes")
                return s
        raise ConfigError(f"position stream {position_id!r} not supplied")
    candidates = [s for s in streams if s.has_positions()]
    if not candidates:
        raise ConfigError("no stream carries GPS positions")
    return max(candidates, key=lambda s: sum(x.geo is not None for x in s.samples))


def synchronize(
    streams: Sequence[SampleStream],
    frame: LocalFrame,
    reference_id: str | None = None,
    position_id: str | None = None,
    run: str = "",
) -> list[SynchronizedRecord]:
    """Fuse multi-rate streams onto the samples of a reference stream.

    The reference defaults to the slowest stream. Every other stream
    contributes its nearest-in-time sample when that sample lies within one
    nominal period, otherwise its parameters are missing. Positions come
    from the reference sample's own GPS fix when present, else from linear
    time interpolation over ``position_id`` (default: the stream with most
    fixes), clamped at the ends of that stream.
    """
    if not streams:
        raise ConfigError("no streams to synchronise")
    if reference_id is None:
        ref = min(streams, key=lambda s: s.spec.nominal_rate)
    else:
        matches = [s for s in streams if s.spec.sensor_id == reference_id]
        if not matches:
            raise ConfigError(f"reference stream {reference_id!r} not supplied")
        ref = matches[0]

    seen: dict[str, str] = {}
    for s in streams:
        for name in s.spec.parameter_names:
            if name in seen and seen[name] != s.spec.sensor_id:
                raise ConfigError(f"parameter {name!r} provided by more than one stream")
            seen[name] = s.spec.sensor_id

    if not ref.samples:
        return []
    ref_t = ref.times()

    lat = np.full(len(ref_t), np.nan)
    lon = np.full(len(ref_t), np.nan)
    for i, s in enumerate(ref.samples):
        if s.geo is not None:
            lat[i], lon[i] = s.geo.lat, s.geo.lon
    gaps = np.isnan(lat)
    if gaps.any():
        src = _pick_position_stream(streams, position_id)
        fixes = [s for s in src.samples if s.geo is not None]
        ft = np.array([s.t for s in fixes])
        lat[gaps] = np.interp(ref_t[gaps], ft, [s.geo.lat for s in fixes])
        lon[gaps] = np.interp(ref_t[gaps], ft, [s.geo.lon for s in fixes])
    xs, ys = project_arrays(frame, lat, lon)

    values = [dict(s.values) for s in ref.samples]
    for other in streams:
        if other is ref:
            continue
        names = other.spec.parameter_names
        if not other.samples:
            for v in values:
                v.update(dict.fromkeys(names))
            continue
        ot = other.times()
        nearest = _nearest_indices(ot, ref_t)
        ok = np.abs(ot[nearest] - ref_t) <= other.spec.period
        for v, j, hit in zip(values, nearest, ok):
            if hit:
                sample_values = other.samples[j].values
                v.update({n: sample_values.get(n) for n in names})
            else:
                v.update(dict.fromkeys(names))

    return [
        SynchronizedRecord(float(t), LocalPoint(float(x), float(y)), v, Tide.UNTAGGED, run)
        for t, x, y, v in zip(ref_t, xs, ys, values)
    ]


def tide_for_time(t: float, tides: TideTable, window: float = DEFAULT_TIDE_WINDOW_S) -> Tide:
    events = tides.events
    if not events:
        return Tide.UNTAGGED
    times = [e.peak_time for e in events]
    i = bisect.bisect_left(times, t)
    best = None
    for j in (i - 1, i):
        if 0 <= j < len(events):
            d = abs(t - times[j])
            # Iterating earlier-first with a strict comparison keeps ties on the earlier peak.
            if best is None or d < best[0]:
                best = (d, events[j])
    if best[0] <= window:
        return best[1].kind
    return Tide.UNTAGGED


def tag_tide(
    records: Iterable[SynchronizedRecord],
    tides: TideTable,
    window: float = DEFAULT_TIDE_WINDOW_S,
) -> list[SynchronizedRecord]:
    """Label each record with the tide whose peak is within ``window`` seconds."""
    return [replace(r, tide=tide_for_time(r.t, tides, window)) for r in records]
