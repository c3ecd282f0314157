"""Monthly flux series: CSV ingestion, pooling, log transform and summaries.

Two CSV layouts are understood:

``long``
    header ``station,year,month,flux``; one observation per row.
``wide``
    header ``station,year,jan,feb,...,dec`` (or month numbers ``1..12``);
    one row per station and year.

Cells that are empty, ``NA`` or ``na`` are missing values.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import DataError, DegenerateDataError, DomainError
from .estimators import MIN_FIT_SIZE, OrderedSample

__all__ = [
    "MONTHS",
    "MonthlySeries",
    "SeriesCollection",
    "SummaryRow",
    "LogSample",
    "load_csv",
    "write_csv",
    "pooled_values",
    "log_transform",
    "summarize",
]

MONTHS = ("JAN", "FEB", "MAR", "APR", "MAY", "JUN", "JUL", "AUG", "SEP", "OCT", "NOV", "DEC")
MISSING_TOKENS = frozenset({"", "NA", "na"})
LAYOUTS = ("long", "wide")
MALFORMED_LIMIT = 0.5


@dataclass
class MonthlySeries:
    """Records ``(year, month, flux)`` of one station; ``flux`` is None when missing."""

    station_id: str
    rows: list = field(default_factory=list)

    def values(self) -> list:
        return [r[2] for r in self.rows]


@dataclass
class SeriesCollection:
    series: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.series)

    def __len__(self):
        return len(self.series)

    def station(self, station_id: str) -> MonthlySeries:
        for s in self.series:
            if s.station_id == station_id:
                return s
        raise DataError(f"unknown station {station_id!r}")


def _parse_month(text: str) -> int:
    t = text.strip()
    if t.upper() in MONTHS:
        return MONTHS.index(t.upper()) + 1
    m = int(t)
    if not 1 <= m <= 12:
        raise ValueError(f"month {m} outside 1..12")
    return m


def _parse_flux(text: str) -> Optional[float]:
    t = text.strip()
    if t in MISSING_TOKENS or text in MISSING_TOKENS:
        return None
    v = float(t)
    if not math.isfinite(v):
        raise ValueError(f"flux {t!r} is not finite")
    return v


def _open_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {os.fspath(path)}: {exc}") from exc


def load_csv(path, layout: str = "long", strict: bool = False) -> SeriesCollection:
    """Parse a monthly flux CSV file.

    Malformed rows are skipped and listed in ``errors`` as ``"line N: ..."``.
    With ``strict`` a file in which more than half of the data rows are
    malformed is rejected. A repeated (station, year, month) key is always
    an error.
    """
    if layout not in LAYOUTS:
        raise DomainError(f"unknown layout {layout!r}; expected 'long' or 'wide'")
    rows = _open_rows(path)
    if not rows:
        raise DataError("file is empty")
    header = [h.strip().lower() for h in rows[0]]

    if layout == "long":
        need = ["station", "year", "month", "flux"]
        if any(c not in header for c in need):
            raise DataError(f"long layout needs columns {','.join(need)}")
        cols = {c: header.index(c) for c in need}
    else:
        if "station" not in header or "year" not in header:
            raise DataError("wide layout needs station and year columns")
        cols = {"station": header.index("station"), "year": header.index("year")}
        month_cols = {}
        for j, h in enumerate(header):
            try:
                month_cols[_parse_month(h)] = j
            except ValueError:
                continue
        if sorted(month_cols) != list(range(1, 13)):
            raise DataError("wide layout needs twelve month columns")

    records: dict = {}
    seen: dict = {}
    errors = []
    n_data = 0
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        n_data += 1
        try:
            if len(row) != len(header):
                raise ValueError(f"expected {len(header)} fields, got {len(row)}")
            station = row[cols["station"]].strip()
            if not station:
                raise ValueError("empty station id")
            year = int(row[cols["year"]])
            if layout == "long":
                entries = [(_parse_month(row[cols["month"]]), _parse_flux(row[cols["flux"]]))]
            else:
                entries = [(m, _parse_flux(row[month_cols[m]])) for m in range(1, 13)]
        except ValueError as exc:
            errors.append(f"line {lineno}: {exc}")
            continue
        for month, flux in entries:
            key = (station, year, month)
            if key in seen:
                raise DataError(
                    f"duplicate record station={station} year={year} month={month} "
                    f"(lines {seen[key]} and {lineno})"
                )
            seen[key] = lineno
            records.setdefault(station, []).append((year, month, flux))

    if strict and n_data and len(errors) / n_data > MALFORMED_LIMIT:
        raise DataError(f"{len(errors)} of {n_data} rows malformed; first: {errors[0]}")

    series = [MonthlySeries(st, sorted(recs, key=lambda r: (r[0], r[1]))) for st, recs in records.items()]
    return SeriesCollection(series=series, errors=errors)


def _fmt(v: Optional[float]) -> str:
    return "NA" if v is None else repr(float(v))


def write_csv(collection: Iterable[MonthlySeries], fh=None, layout: str = "long") -> str:
    """Serialise series in either layout; returns the text and writes to ``fh``.

    ``fh`` may be an open text file or a path.
    """
    if layout not in LAYOUTS:
        raise DomainError(f"unknown layout {layout!r}; expected 'long' or 'wide'")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if layout == "long":
        w.writerow(["station", "year", "month", "flux"])
        for s in collection:
            for year, month, flux in s.rows:
                w.writerow([s.station_id, year, month, _fmt(flux)])
    else:
        w.writerow(["station", "year", *[m.lower() for m in MONTHS]])
        for s in collection:
            by_year: dict = {}
            for year, month, flux in s.rows:
                by_year.setdefault(year, {})[month] = flux
            for year in sorted(by_year):
                cells = by_year[year]
                w.writerow([s.station_id, year, *[_fmt(cells.get(m)) for m in range(1, 13)]])
    text = buf.getvalue()
    if fh is not None:
        if isinstance(fh, (str, os.PathLike)):
            with open(fh, "w", newline="", encoding="utf-8") as out:
                out.write(text)
        else:
            fh.write(text)
    return text


def _select(collection, station):
    series = list(collection)
    if station is not None:
        series = [s for s in series if s.station_id == station]
        if not series:
            raise DataError(f"unknown station {station!r}")
    return series


def pooled_values(collection, station: Optional[str] = None) -> OrderedSample:
    """All non-missing fluxes, pooled over stations and months, untransformed."""
    vals = [f for s in _select(collection, station) for f in s.values() if f is not None]
    if len(vals) < MIN_FIT_SIZE:
        raise DegenerateDataError(f"only {len(vals)} usable values, need {MIN_FIT_SIZE}")
    return OrderedSample.from_values(vals)


@dataclass(frozen=True)
class LogSample:
    sample: OrderedSample
    n_missing: int
    n_nonpositive: int

    @property
    def n_used(self) -> int:
        return self.sample.n

    def to_dict(self) -> dict:
        return {"n_used": self.n_used, "n_missing": self.n_missing, "n_nonpositive": self.n_nonpositive}


def log_transform(collection, station: Optional[str] = None) -> LogSample:
    """Natural log of every strictly positive flux, pooled with equal weight.

    Missing cells and zero or negative fluxes are excluded and counted.
    """
    missing = nonpos = 0
    logs = []
    for s in _select(collection, station):
        for f in s.values():
            if f is None:
                missing += 1
            elif f <= 0.0:
                nonpos += 1
            else:
                logs.append(math.log(f))
    if len(logs) < MIN_FIT_SIZE:
        raise DegenerateDataError(
            f"only {len(logs)} strictly positive fluxes, need {MIN_FIT_SIZE}"
        )
    return LogSample(OrderedSample.from_values(logs), missing, nonpos)


@dataclass(frozen=True)
class SummaryRow:
    month: str
    min: Optional[float]
    q1: Optional[float]
    median: Optional[float]
    mean: Optional[float]
    q3: Optional[float]
    max: Optional[float]
    na_count: int

    FIELDS = ("month", "min", "q1", "median", "mean", "q3", "max", "na_count")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}


def summarize(collection) -> list:
    """Per-month min, quartiles, mean, max and missing count.

    Quartiles use linear interpolation between order statistics at
    positions (n - 1) p, the usual default of statistical environments.
    """
    by_month = {m: [] for m in range(1, 13)}
    na = {m: 0 for m in range(1, 13)}
    for s in collection:
        for _, month, flux in s.rows:
            if flux is None:
                na[month] += 1
            else:
                by_month[month].append(flux)
    out = []
    for m in range(1, 13):
        x = np.asarray(by_month[m], dtype=float)
        if x.size == 0:
            out.append(SummaryRow(MONTHS[m - 1], None, None, None, None, None, None, na[m]))
            continue
        q = np.quantile(x, [0.0, 0.25, 0.5, 0.75, 1.0], method="linear")
        out.append(SummaryRow(
            MONTHS[m - 1],
            float(q[0]), float(q[1]), float(q[2]), float(x.mean()), float(q[3]), float(q[4]),
            na[m],
        ))
    return out
