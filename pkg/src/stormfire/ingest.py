"""CSV extract readers and writers with schema validation.

All interchange is desk-scale CSV: UTF-8, mandatory header, ISO-8601 dates,
missing values as empty fields (never numeric sentinels). Readers raise
:class:`IngestError` naming the offending row; writers preserve record order
so a read/write round trip is field-identical.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

from .geo import CellId, GeoPoint

log = logging.getLogger(__name__)

FIRES_COLUMNS = [
    "fire_id", "lat", "lon", "ignition_date",
    "duration_days", "total_burned_ha", "first_day_burned_ha",
]
THUNDER_COLUMNS = ["date", "row", "col", "thunder_hours"]
WEATHER_COLUMNS = [
    "date", "row", "col", "t_c", "rh_pct", "prec_mm",
    "wind_u_ms", "wind_v_ms", "sm", "water_mm",
]
STATIC_COLUMNS = ["row", "col", "low_veg", "high_veg", "pop", "historical_fires"] + [
    f"ndvi_m{m:02d}" for m in range(1, 13)
]
FWI_COLUMNS = ["date", "row", "col", "ffmc", "dmc", "dc", "isi", "bui", "fwi"]


class IngestError(ValueError):
    """A malformed input file; the message carries the row number."""


@dataclass(frozen=True)
class WildfireEvent:
    fire_id: str
    ignition: GeoPoint
    ignition_date: date
    duration_days: int
    total_burned_ha: float
    first_day_burned_ha: float


@dataclass(frozen=True)
class ThunderRecord:
    cell: CellId  # 0.05-degree grid
    date: date
    thunder_hours: int


@dataclass(frozen=True)
class WeatherDay:
    cell: CellId  # 0.25-degree grid
    date: date
    t: float | None
    rh: float | None
    prec: float | None
    wind_u: float | None
    wind_v: float | None
    sm: float | None
    water: float | None


@dataclass(frozen=True)
class StaticCell:
    cell: CellId  # 0.25-degree grid
    low_veg: float | None
    high_veg: float | None
    pop: float | None
    historical_fires: float | None
    ndvi_by_month: tuple[float | None, ...]  # January..December


@dataclass(frozen=True)
class FwiRow:
    cell: CellId  # 0.25-degree grid
    date: date
    ffmc: float | None
    dmc: float | None
    dc: float | None
    isi: float | None
    bui: float | None
    fwi: float | None


def _read_rows(path: str | Path, columns: Sequence[str]):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file, expected header {list(columns)}")
        missing = [c for c in columns if c not in header]
        if missing:
            raise IngestError(f"{path}: missing column {missing[0]!r}")
        pos = [header.index(c) for c in columns]
        for k, raw in enumerate(reader, start=1):
            if not raw:
                continue
            if len(raw) != len(header):
                raise IngestError(f"{path}: wrong field count at row {k}")
            yield k, [raw[p] for p in pos]


def _parse_date(value: str, path, k: int) -> date:
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise IngestError(f"{path}: unparsable date at row {k}: {value!r}")


def _parse_int(value: str, path, k: int, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise IngestError(f"{path}: unparsable {name} at row {k}: {value!r}")


def _parse_float(value: str, path, k: int, name: str) -> float | None:
    if value == "":
        return None
    try:
        return float(value)
    except ValueError:
        raise IngestError(f"{path}: unparsable {name} at row {k}: {value!r}")


def _require(value, path, k: int, name: str):
    if value is None:
        raise IngestError(f"{path}: missing {name} at row {k}")
    return value


def _check_range(value, lo, hi, path, k, name):
    if value is not None and not (lo <= value <= hi):
        raise IngestError(f"{path}: {name} out of range at row {k}: {value}")
    return value


def read_fires(path: str | Path) -> list[WildfireEvent]:
    events = []
    for k, (fire_id, lat, lon, ign, dur, total, first) in _read_rows(path, FIRES_COLUMNS):
        if not fire_id:
            raise IngestError(f"{path}: missing fire_id at row {k}")
        point = GeoPoint(
            _require(_parse_float(lat, path, k, "lat"), path, k, "lat"),
            _require(_parse_float(lon, path, k, "lon"), path, k, "lon"),
        )
        duration = _parse_int(dur, path, k, "duration_days")
        if duration < 1:
            raise IngestError(f"{path}: duration_days < 1 at row {k}")
        total_ha = _require(_parse_float(total, path, k, "total_burned_ha"), path, k, "total_burned_ha")
        first_ha = _require(_parse_float(first, path, k, "first_day_burned_ha"), path, k, "first_day_burned_ha")
        if total_ha < 0 or first_ha < 0:
            raise IngestError(f"{path}: negative area at row {k}")
        if first_ha > total_ha:
            raise IngestError(f"{path}: first_day_burned_ha exceeds total at row {k}")
        events.append(
            WildfireEvent(fire_id, point, _parse_date(ign, path, k), duration, total_ha, first_ha)
        )
    return events


def _cell(row_s: str, col_s: str, path, k: int) -> CellId:
    row = _parse_int(row_s, path, k, "row")
    col = _parse_int(col_s, path, k, "col")
    if row < 0 or col < 0:
        raise IngestError(f"{path}: negative cell index at row {k}")
    return CellId(row, col)


def read_thunder(path: str | Path) -> list[ThunderRecord]:
    records = []
    seen: set[tuple[CellId, date]] = set()
    for k, (d, row, col, hours) in _read_rows(path, THUNDER_COLUMNS):
        cell = _cell(row, col, path, k)
        day = _parse_date(d, path, k)
        n = _parse_int(hours, path, k, "thunder_hours")
        if not 1 <= n <= 24:
            raise IngestError(f"{path}: thunder_hours out of range at row {k}: {n}")
        if (cell, day) in seen:
            raise IngestError(f"{path}: duplicate key at row {k}: {cell} {day}")
        seen.add((cell, day))
        records.append(ThunderRecord(cell, day, n))
    return records


def read_weather(path: str | Path) -> list[WeatherDay]:
    records = []
    seen: set[tuple[CellId, date]] = set()
    for k, (d, row, col, t, rh, prec, u, v, sm, water) in _read_rows(path, WEATHER_COLUMNS):
        cell = _cell(row, col, path, k)
        day = _parse_date(d, path, k)
        if (cell, day) in seen:
            raise IngestError(f"{path}: duplicate key at row {k}: {cell} {day}")
        seen.add((cell, day))
        rh_v = _check_range(_parse_float(rh, path, k, "rh_pct"), 0, 100, path, k, "rh_pct")
        prec_v = _parse_float(prec, path, k, "prec_mm")
        if prec_v is not None and prec_v < 0:
            raise IngestError(f"{path}: prec_mm out of range at row {k}: {prec_v}")
        sm_v = _check_range(_parse_float(sm, path, k, "sm"), 0, 1, path, k, "sm")
        water_v = _parse_float(water, path, k, "water_mm")
        if water_v is not None and water_v < 0:
            raise IngestError(f"{path}: water_mm out of range at row {k}: {water_v}")
        records.append(
            WeatherDay(
                cell, day,
                _parse_float(t, path, k, "t_c"), rh_v, prec_v,
                _parse_float(u, path, k, "wind_u_ms"), _parse_float(v, path, k, "wind_v_ms"),
                sm_v, water_v,
            )
        )
    return records


def read_static(path: str | Path) -> list[StaticCell]:
    records = []
    seen: set[CellId] = set()
    for k, fields in _read_rows(path, STATIC_COLUMNS):
        cell = _cell(fields[0], fields[1], path, k)
        if cell in seen:
            raise IngestError(f"{path}: duplicate key at row {k}: {cell}")
        seen.add(cell)
        low = _check_range(_parse_float(fields[2], path, k, "low_veg"), 0, 1, path, k, "low_veg")
        high = _check_range(_parse_float(fields[3], path, k, "high_veg"), 0, 1, path, k, "high_veg")
        pop = _parse_float(fields[4], path, k, "pop")
        if pop is not None and pop < 0:
            raise IngestError(f"{path}: pop out of range at row {k}: {pop}")
        hist = _parse_float(fields[5], path, k, "historical_fires")
        if hist is not None and hist < 0:
            raise IngestError(f"{path}: historical_fires out of range at row {k}: {hist}")
        ndvi = tuple(
            _check_range(
                _parse_float(fields[6 + m], path, k, f"ndvi_m{m + 1:02d}"),
                -1, 1, path, k, f"ndvi_m{m + 1:02d}",
            )
            for m in range(12)
        )
        records.append(StaticCell(cell, low, high, pop, hist, ndvi))
    return records


def read_fwi(path: str | Path) -> list[FwiRow]:
    records = []
    seen: set[tuple[CellId, date]] = set()
    for k, (d, row, col, ffmc, dmc, dc, isi, bui, fwi) in _read_rows(path, FWI_COLUMNS):
        cell = _cell(row, col, path, k)
        day = _parse_date(d, path, k)
        if (cell, day) in seen:
            raise IngestError(f"{path}: duplicate key at row {k}: {cell} {day}")
        seen.add((cell, day))
        vals = [
            _parse_float(v, path, k, name)
            for v, name in zip((ffmc, dmc, dc, isi, bui, fwi), FWI_COLUMNS[3:])
        ]
        for v, name in zip(vals, FWI_COLUMNS[3:]):
            if v is not None and v < 0:
                raise IngestError(f"{path}: {name} out of range at row {k}: {v}")
        records.append(FwiRow(cell, day, *vals))
    return records


# --- writers ---------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # float() strips numpy scalar types
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


def _write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_fires(path, events: Sequence[WildfireEvent]) -> None:
    _write_csv(path, FIRES_COLUMNS, (
        (e.fire_id, e.ignition.lat, e.ignition.lon, e.ignition_date,
         e.duration_days, e.total_burned_ha, e.first_day_burned_ha)
        for e in events
    ))


def write_thunder(path, records: Sequence[ThunderRecord]) -> None:
    _write_csv(path, THUNDER_COLUMNS, (
        (r.date, r.cell.row, r.cell.col, r.thunder_hours) for r in records
    ))


def write_weather(path, records: Sequence[WeatherDay]) -> None:
    _write_csv(path, WEATHER_COLUMNS, (
        (r.date, r.cell.row, r.cell.col, r.t, r.rh, r.prec, r.wind_u, r.wind_v, r.sm, r.water)
        for r in records
    ))


def write_static(path, records: Sequence[StaticCell]) -> None:
    _write_csv(path, STATIC_COLUMNS, (
        (r.cell.row, r.cell.col, r.low_veg, r.high_veg, r.pop, r.historical_fires, *r.ndvi_by_month)
        for r in records
    ))


def write_fwi(path, records: Sequence[FwiRow]) -> None:
    _write_csv(path, FWI_COLUMNS, (
        (r.date, r.cell.row, r.cell.col, r.ffmc, r.dmc, r.dc, r.isi, r.bui, r.fwi)
        for r in records
    ))


# --- missing-data filter ----------------------------------------------------


@dataclass(frozen=True)
class RemovalReport:
    kept: int
    removed: int
    removed_by_class: dict[bool, int]

    @property
    def fraction(self) -> float:
        total = self.kept + self.removed
        return self.removed / total if total else 0.0


def drop_incomplete(
    rows: Sequence[dict],
    feature_names: Sequence[str],
    label_key: str = "label",
) -> tuple[list[dict], RemovalReport]:
    """Remove rows with any missing model feature; both classes are filtered
    and the removal is reported per class."""
    kept: list[dict] = []
    removed_by_class = {False: 0, True: 0}
    for row in rows:
        if any(row.get(name) is None for name in feature_names):
            removed_by_class[bool(row[label_key])] += 1
        else:
            kept.append(row)
    removed = sum(removed_by_class.values())
    report = RemovalReport(kept=len(kept), removed=removed, removed_by_class=removed_by_class)
    if removed:
        log.warning(
            "dropped %d/%d incomplete rows (%.2f%%; %d positive, %d negative)",
            removed, removed + len(kept), 100.0 * report.fraction,
            removed_by_class[True], removed_by_class[False],
        )
    if not kept:
        log.warning("all rows removed by the missing-data filter")
    return kept, report
