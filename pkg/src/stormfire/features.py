"""Feature assembly: the model-ready row per labeled sample.

Groups mirror the ablation table: vegetation/meteorological/anthropogenic
(VMA), fire history, the six fire-weather indices, and spatiotemporal
columns (lat, lon, one-hot month). Index columns prefer an ingested table
and fall back to computing from raw weather only when none was provided.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from datetime import date
from typing import NamedTuple, Sequence

import numpy as np

from . import fwi as fwi_mod
from .geo import WEATHER_GRID, CellId, GridSpec, cell_of
from .ingest import FwiRow, StaticCell, WeatherDay, _write_csv
from .labeler import LabeledSample

log = logging.getLogger(__name__)

PREC_DAY_THRESHOLD_MM = 1.0  # trace rain must not reset dryness
DAYS_SINCE_PREC_WINDOW = 90
MONTHLY_PREC_WINDOW = 30

MONTH_COLUMNS = [f"month_{m:02d}" for m in range(1, 13)]
VMA_FEATURES = [
    "RH", "t", "prec", "days_since_prec", "monthly_prec",
    "v_total", "v_direction", "low_veg", "high_veg", "NDVI", "sm", "water", "pop",
]
HISTORY_FEATURES = ["historical_fires"]
FWI_FEATURES = ["fwi", "bui", "drought", "duff", "ffmc", "isi"]
SPATIOTEMPORAL_FEATURES = ["lat", "lon", *MONTH_COLUMNS]


@dataclass(frozen=True)
class FeatureSetConfig:
    include_vma: bool = True
    include_history: bool = True
    include_fwi: bool = True
    include_spatiotemporal: bool = True

    def __post_init__(self) -> None:
        if not any(
            (self.include_vma, self.include_history, self.include_fwi, self.include_spatiotemporal)
        ):
            raise ValueError("at least one feature group must be enabled")

    def feature_names(self) -> list[str]:
        names: list[str] = []
        if self.include_vma:
            names += VMA_FEATURES
        if self.include_history:
            names += HISTORY_FEATURES
        if self.include_fwi:
            names += FWI_FEATURES
        if self.include_spatiotemporal:
            names += SPATIOTEMPORAL_FEATURES
        return names

    @classmethod
    def for_model_number(cls, number: int) -> "FeatureSetConfig":
        table = {
            1: cls(True, False, False, False),
            2: cls(True, True, False, False),
            3: cls(True, False, True, False),
            4: cls(True, True, True, False),
            5: cls(True, True, True, True),
        }
        if number not in table:
            raise ValueError(f"model number must be 1..5, got {number}")
        return table[number]


def days_since_prec(
    daily_prec: Sequence[float | None],
    threshold_mm: float = PREC_DAY_THRESHOLD_MM,
    window: int = DAYS_SINCE_PREC_WINDOW,
) -> int | None:
    """Days back to the most recent day with precipitation >= threshold,
    0 when the anchor day itself qualifies, capped at `window`. The series
    ends at the anchor day. None when a missing value hides the answer."""
    if len(daily_prec) < window + 1:
        raise ValueError(
            f"insufficient history: need {window + 1} days, have {len(daily_prec)}"
        )
    for lag in range(window):
        value = daily_prec[-1 - lag]
        if value is None:
            return None
        if value >= threshold_mm:
            return lag
    return window


def monthly_prec(
    daily_prec: Sequence[float | None], window: int = MONTHLY_PREC_WINDOW
) -> float | None:
    """Mean daily precipitation over the `window` days before the anchor day
    (anchor excluded)."""
    if len(daily_prec) < window + 1:
        raise ValueError(
            f"insufficient history: need {window + 1} days, have {len(daily_prec)}"
        )
    values = daily_prec[-1 - window : -1]
    if any(v is None for v in values):
        return None
    return float(sum(values)) / window


class WindVector(NamedTuple):
    v_total: float
    v_direction: float  # degrees clockwise from north, direction of travel
    calm: bool


def wind_decompose(u: float, v: float) -> WindVector:
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ValueError("wind components must be finite")
    speed = math.hypot(u, v)
    if speed == 0.0:
        return WindVector(0.0, 0.0, True)
    direction = math.degrees(math.atan2(u, v)) % 360.0
    if direction >= 360.0:  # a hair below zero rounds up to exactly 360
        direction = 0.0
    return WindVector(speed, direction, False)


@dataclass
class _WeatherSeries:
    start: date
    days: list[WeatherDay]

    def index_of(self, when: date) -> int:
        i = (when - self.start).days
        if i < 0 or i >= len(self.days):
            raise ValueError(
                f"date not covered: {when} outside {self.start}..{self.days[-1].date}"
            )
        return i


@dataclass
class Tables:
    """All gridded inputs keyed for per-sample lookup."""

    weather: dict[CellId, _WeatherSeries]
    static: dict[CellId, StaticCell]
    fwi_rows: dict[tuple[CellId, date], FwiRow] | None
    weather_spec: GridSpec
    _computed_fwi: dict[CellId, dict[date, dict[str, float | None]]]

    @classmethod
    def build(
        cls,
        weather: Sequence[WeatherDay],
        static: Sequence[StaticCell],
        fwi_rows: Sequence[FwiRow] | None = None,
        weather_spec: GridSpec = WEATHER_GRID,
    ) -> "Tables":
        by_cell: dict[CellId, list[WeatherDay]] = {}
        for wd in weather:
            by_cell.setdefault(wd.cell, []).append(wd)
        series: dict[CellId, _WeatherSeries] = {}
        for cell, days in by_cell.items():
            days.sort(key=lambda wd: wd.date)
            for a, b in zip(days, days[1:]):
                if (b.date - a.date).days != 1:
                    raise ValueError(f"date gap in weather for cell {cell}: {a.date} -> {b.date}")
            series[cell] = _WeatherSeries(days[0].date, days)
        fwi_map = None
        if fwi_rows is not None:
            fwi_map = {(r.cell, r.date): r for r in fwi_rows}
        return cls(
            weather=series,
            static={s.cell: s for s in static},
            fwi_rows=fwi_map,
            weather_spec=weather_spec,
            _computed_fwi={},
        )

    def fwi_values(self, cell: CellId, when: date) -> dict[str, float | None]:
        """The six index columns for a cell-day; ingested table wins, the
        engine fills in only when no table was provided."""
        if self.fwi_rows is not None:
            row = self.fwi_rows.get((cell, when))
            if row is None:
                return dict.fromkeys(FWI_FEATURES)
            return {
                "fwi": row.fwi, "bui": row.bui, "drought": row.dc,
                "duff": row.dmc, "ffmc": row.ffmc, "isi": row.isi,
            }
        if cell not in self._computed_fwi:
            self._computed_fwi[cell] = self._roll_cell(cell)
        return self._computed_fwi[cell].get(when, dict.fromkeys(FWI_FEATURES))

    def _roll_cell(self, cell: CellId) -> dict[date, dict[str, float | None]]:
        series = self.weather[cell]
        center = self.weather_spec.cell_center(cell)
        band = fwi_mod.band_for_latitude(center.lat)
        state = fwi_mod.DEFAULT_START
        out: dict[date, dict[str, float | None]] = {}
        skipped = 0
        for wd in series.days:
            if None in (wd.t, wd.rh, wd.prec, wd.wind_u, wd.wind_v):
                # carry state through the gap; the day itself has no indices
                out[wd.date] = dict.fromkeys(FWI_FEATURES)
                skipped += 1
                continue
            wx = fwi_mod.DailyWeather(
                temp_c=wd.t,
                rh_pct=wd.rh,
                wind_kmh=math.hypot(wd.wind_u, wd.wind_v) * 3.6,
                rain_mm=wd.prec,
                month=wd.date.month,
                latitude_band=band,
            )
            state, day_out = fwi_mod.step(state, wx)
            out[wd.date] = {
                "fwi": day_out.fwi, "bui": day_out.bui, "drought": state.dc,
                "duff": state.dmc, "ffmc": state.ffmc, "isi": day_out.isi,
            }
        if skipped:
            log.warning("cell %s: %d days lacked weather inputs for index computation", cell, skipped)
        return out


def assemble(sample: LabeledSample, tables: Tables, cfg: FeatureSetConfig) -> dict:
    """One model row: enabled feature columns plus label and split. Values
    are None where the source field is missing (filtered by drop_incomplete);
    uncovered cells or dates raise."""
    wcell = cell_of(sample.anchor, tables.weather_spec)
    series = tables.weather.get(wcell)
    if series is None:
        raise ValueError(f"cell not covered: weather {wcell}")
    i = series.index_of(sample.date)
    wd = series.days[i]
    static = tables.static.get(wcell)
    if static is None:
        raise ValueError(f"cell not covered: static {wcell}")

    row: dict[str, object] = {}
    if cfg.include_vma:
        if i < DAYS_SINCE_PREC_WINDOW:
            raise ValueError(
                f"insufficient history: {sample.date} is day {i} of cell {wcell}"
            )
        prec_series = [d.prec for d in series.days[i - DAYS_SINCE_PREC_WINDOW : i + 1]]
        if wd.wind_u is None or wd.wind_v is None:
            v_total = v_direction = None
        else:
            wind = wind_decompose(wd.wind_u, wd.wind_v)
            v_total, v_direction = wind.v_total, wind.v_direction
        row.update({
            "RH": wd.rh,
            "t": wd.t,
            "prec": wd.prec,
            "days_since_prec": days_since_prec(prec_series),
            "monthly_prec": monthly_prec(prec_series),
            "v_total": v_total,
            "v_direction": v_direction,
            "low_veg": static.low_veg,
            "high_veg": static.high_veg,
            "NDVI": static.ndvi_by_month[sample.date.month - 1],
            "sm": wd.sm,
            "water": wd.water,
            "pop": static.pop,
        })
    if cfg.include_history:
        row["historical_fires"] = static.historical_fires
    if cfg.include_fwi:
        row.update(tables.fwi_values(wcell, sample.date))
    if cfg.include_spatiotemporal:
        row["lat"] = sample.anchor.lat
        row["lon"] = sample.anchor.lon
        for m, name in enumerate(MONTH_COLUMNS, start=1):
            row[name] = 1.0 if sample.date.month == m else 0.0
    row["label"] = sample.label
    row["split"] = sample.split
    return row


def assemble_rows(
    samples: Sequence[LabeledSample], tables: Tables, cfg: FeatureSetConfig
) -> list[dict]:
    return [assemble(s, tables, cfg) for s in samples]


# --- descriptive statistics -------------------------------------------------


def pearson_matrix(X: np.ndarray) -> np.ndarray:
    """Pairwise Pearson r with unit diagonal; entries involving a constant
    column are NaN (explicitly undefined), never silently zero."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need at least 2 rows")
    centered = X - X.mean(axis=0)
    sd = np.sqrt((centered**2).sum(axis=0))
    cov = centered.T @ centered
    denom = np.outer(sd, sd)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = cov / denom
    r[denom == 0.0] = np.nan
    r = np.clip(r, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return r


def class_histograms(
    X: np.ndarray, labels: np.ndarray, bins: int
) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Per feature: (edges, counts for label False, counts for label True)
    over equal-width bins spanning the pooled min..max."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if bins < 1:
        raise ValueError("bins must be >= 1")
    out = []
    for j in range(X.shape[1]):
        col = X[:, j]
        lo, hi = float(col.min()), float(col.max())
        edges = np.linspace(lo, hi, bins + 1)
        width = hi - lo
        if width == 0.0:
            idx = np.zeros(len(col), dtype=int)
        else:
            idx = np.minimum(((col - lo) / width * bins).astype(int), bins - 1)
        neg = np.bincount(idx[~labels], minlength=bins)
        pos = np.bincount(idx[labels], minlength=bins)
        out.append((edges, neg, pos))
    return out


# --- CSV interchange ---------------------------------------------------------


def write_features(path, names: Sequence[str], rows: Sequence[dict]) -> None:
    _write_csv(
        path,
        [*names, "label", "split"],
        (([row[n] for n in names] + [int(bool(row["label"])), row["split"]]) for row in rows),
    )


def read_features(path) -> tuple[list[str], list[dict]]:
    import csv as _csv
    from pathlib import Path

    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        if header[-2:] != ["label", "split"]:
            raise ValueError(f"{path}: expected trailing label,split columns")
        names = header[:-2]
        rows = []
        for raw in reader:
            row: dict[str, object] = {
                n: (float(v) if v != "" else None) for n, v in zip(names, raw)
            }
            row["label"] = bool(int(raw[-2]))
            row["split"] = raw[-1]
            rows.append(row)
    return names, rows


def write_pearson(path, names: Sequence[str], matrix: np.ndarray) -> None:
    rows = []
    for i, name in enumerate(names):
        rows.append([name] + [None if np.isnan(v) else float(v) for v in matrix[i]])
    _write_csv(path, ["feature", *names], rows)


def write_class_histograms(
    path, names: Sequence[str], hists: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]]
) -> None:
    rows = []
    for name, (edges, neg, pos) in zip(names, hists):
        for b in range(len(neg)):
            rows.append([name, float(edges[b]), float(edges[b + 1]), int(neg[b]), int(pos[b])])
    _write_csv(path, ["feature", "bin_lo", "bin_hi", "count_neg", "count_pos"], rows)
