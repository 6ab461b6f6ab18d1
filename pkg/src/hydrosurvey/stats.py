"""Per-run parameter summaries and Pearson correlation tables."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConfigError, EmptyInputError, UndefinedCorrelationError
from .ingest import SynchronizedRecord, Tide

POOLED = "pooled"
DEFAULT_PAIRS = (("ph", "temp_c"), ("chl_rfu", "nitrate_mg_l"), ("temp_c", "nitrate_mg_l"))


@dataclass(frozen=True)
class SummaryRow:
    parameter: str
    count: int
    min: float
    max: float
    max_deviation: float
    mean: float


@dataclass(frozen=True)
class CorrelationEntry:
    param_x: str
    param_y: str
    r: float | None
    n: int
    tide_group: str = POOLED
    error: str | None = None

    @property
    def defined(self) -> bool:
        return self.r is not None


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation, using mean-subtracted (two-pass) sums."""
    n = len(xs)
    if n != len(ys):
        raise ConfigError(f"series lengths differ ({n} vs {len(ys)})")
    if n < 2:
        raise UndefinedCorrelationError(f"need at least 2 pairs, got {n}")
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    if all(v == xs[0] for v in xs) or all(v == ys[0] for v in ys):
        raise UndefinedCorrelationError("correlation undefined for a constant series")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [v - mx for v in xs]
    dy = [v - my for v in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    den = math.sqrt(sxx * syy)
    if not math.isfinite(den) or den == 0.0:
        den = math.sqrt(sxx) * math.sqrt(syy)
    r = sxy / den
    return max(-1.0, min(1.0, r))


def summarize_values(parameter: str, values: Iterable[float | None]) -> SummaryRow:
    vals = [float(v) for v in values if v is not None]
    if not vals:
        raise EmptyInputError(f"no values for {parameter!r}")
    lo, hi = min(vals), max(vals)
    mean = min(max(math.fsum(vals) / len(vals), lo), hi)
    return SummaryRow(parameter, len(vals), lo, hi, hi - lo, mean)


def summarize(records: Iterable[SynchronizedRecord], parameter: str) -> SummaryRow:
    """Min/max/mean and max deviation of one parameter, ignoring gaps."""
    return summarize_values(parameter, (r.values.get(parameter) for r in records))


def _complete_pairs(records, px, py):
    out = []
    for r in records:
        x, y = r.values.get(px), r.values.get(py)
        if x is not None and y is not None:
            out.append((r, x, y))
    return out


def _entry(px, py, group, xs, ys) -> CorrelationEntry:
    try:
        return CorrelationEntry(px, py, pearson(xs, ys), len(xs), group)
    except UndefinedCorrelationError as exc:
        return CorrelationEntry(px, py, None, len(xs), group, str(exc))


def _run_means(triples):
    by_run = defaultdict(list)
    for r, x, y in triples:
        by_run[r.run].append((x, y))
    xs, ys = [], []
    for run in sorted(by_run):
        pairs = by_run[run]
        xs.append(math.fsum(p[0] for p in pairs) / len(pairs))
        ys.append(math.fsum(p[1] for p in pairs) / len(pairs))
    return xs, ys


def correlate_pairs(
    records: Sequence[SynchronizedRecord],
    pairs: Iterable[tuple[str, str]] = DEFAULT_PAIRS,
    group_by_tide: bool = False,
    by_run: bool = False,
) -> list[CorrelationEntry]:
    """Pairwise-complete Pearson R for each parameter pair.

    Always reports the pooled value; with ``group_by_tide`` also one entry per
    tide condition present. With ``by_run`` each run contributes a single
    point (its mean over complete pairs) instead of every record. Entries
    whose correlation is undefined carry ``r=None`` and an error message.
    """
    records = list(records)
    groups = [(POOLED, records)]
    if group_by_tide:
        for tide in Tide:
            sub = [r for r in records if r.tide is tide]
            if sub:
                groups.append((tide.value, sub))

    out = []
    for px, py in pairs:
        for name, recs in groups:
            triples = _complete_pairs(recs, px, py)
            if by_run:
                xs, ys = _run_means(triples)
            else:
                xs = [t[1] for t in triples]
                ys = [t[2] for t in triples]
            out.append(_entry(px, py, name, xs, ys))
    return out


def format_correlations(entries: Iterable[CorrelationEntry]) -> str:
    """CSV with columns param_x, param_y, tide_group, n, r (empty r = undefined)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["param_x", "param_y", "tide_group", "n", "r"])
    for e in entries:
        w.writerow([e.param_x, e.param_y, e.tide_group, e.n, "" if e.r is None else repr(e.r)])
    return buf.getvalue()


def format_summaries(rows: Iterable[tuple[str, str, SummaryRow]]) -> str:
    """CSV of ``(run, tide_group, SummaryRow)`` triples."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", "tide_group", "parameter", "count", "min", "max", "max_deviation", "mean"])
    for run, group, s in rows:
        w.writerow(
            [run, group, s.parameter, s.count, repr(s.min), repr(s.max), repr(s.max_deviation), repr(s.mean)]
        )
    return buf.getvalue()
