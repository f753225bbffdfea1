"""Synthetic world generator with a planted ignition law.

Builds a small multi-year patch of weather, storms, and fires whose lightning
ignitions follow a known logistic law over (ffmc, rh, prec, ndvi), and emits
ground-truth causes alongside so end-to-end tests can check that the labeling
join recovers exactly what was planted. Byte-deterministic per seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from . import fwi as fwi_mod
from .geo import (
    THUNDER_GRID,
    WEATHER_GRID,
    CellId,
    GeoPoint,
    SpatialIndex,
    cell_of,
    neighbors_within,
)
from .ingest import (
    FwiRow,
    StaticCell,
    ThunderRecord,
    WeatherDay,
    WildfireEvent,
    _write_csv,
    write_fires,
    write_fwi,
    write_static,
    write_thunder,
    write_weather,
)

TRUTH_COLUMNS = ["fire_id", "cause", "storm_row", "storm_col", "storm_date"]

#: thunder subcells per weather-cell side (0.25 / 0.05)
_SUBS = 5


@dataclass(frozen=True)
class PlantedLaw:
    """Logistic ignition law over standardized (ffmc, rh, prec, ndvi); the
    product term makes the surface non-linear when nonzero."""

    intercept: float = -2.0
    ffmc: float = 2.2
    rh: float = -2.2
    prec: float = -0.6
    ndvi: float = 0.4
    ffmc_rh_product: float = 0.0


@dataclass(frozen=True)
class AnthroLaw:
    """Ignition law for background (non-lightning) fires; deliberately leans
    on different drivers than the lightning law."""

    intercept: float = -0.3
    pop: float = 1.6
    temp: float = 0.9
    rh: float = -0.5


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_cells: int = 16
    n_days: int = 730
    start_date: date = date(2020, 1, 1)
    lat0: float = 42.0
    lon0: float = 8.0
    storm_rate: float = 0.06
    fire_base_rate: float = 1.0
    anthro_rate: float = 0.05
    ag_rate: float = 0.01
    holdover_lag_days: int = 0
    warmup_days: int = 90
    guard_radius_km: float = 10.0
    guard_days: int = 7
    planted_coefficients: PlantedLaw = field(default_factory=PlantedLaw)
    anthro_coefficients: AnthroLaw = field(default_factory=AnthroLaw)

    def __post_init__(self) -> None:
        if self.n_cells < 1 or self.n_days < 1:
            raise ValueError("n_cells and n_days must be positive")
        if self.warmup_days < 0 or self.warmup_days >= self.n_days:
            raise ValueError("warmup_days must fit inside n_days")


@dataclass(frozen=True)
class TruthRecord:
    fire_id: str
    cause: str  # lightning | anthropogenic | agricultural
    storm_cell: CellId | None
    storm_date: date | None


@dataclass
class SynthWorld:
    fires: list[WildfireEvent]
    thunder: list[ThunderRecord]
    weather: list[WeatherDay]
    static: list[StaticCell]
    fwi: list[FwiRow]
    truth: list[TruthRecord]

    def truth_lightning_ids(self) -> set[str]:
        return {t.fire_id for t in self.truth if t.cause == "lightning"}


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _zscore(arr: np.ndarray) -> np.ndarray:
    sd = float(arr.std())
    if sd == 0.0:
        return np.zeros_like(arr)
    return (arr - float(arr.mean())) / sd


def synth_world(cfg: SynthConfig) -> SynthWorld:
    rng = np.random.default_rng(cfg.seed)
    n_side = math.ceil(math.sqrt(cfg.n_cells))
    base = cell_of(GeoPoint(cfg.lat0, cfg.lon0), WEATHER_GRID)
    cells = [
        CellId(base.row + k // n_side, base.col + k % n_side) for k in range(cfg.n_cells)
    ]
    dates = [cfg.start_date + timedelta(days=d) for d in range(cfg.n_days)]
    months = np.array([d.month for d in dates])
    doy = np.array([d.timetuple().tm_yday for d in dates], dtype=float)
    band = fwi_mod.band_for_latitude(cfg.lat0)

    nc, nd = cfg.n_cells, cfg.n_days
    storm = rng.random((nc, nd)) < cfg.storm_rate
    storm[:, : cfg.warmup_days] = False

    # Weather: seasonal temperature, humid rainy storm days with a dry-storm
    # minority (the interesting high-danger lightning cases).
    seasonal = 12.0 + 10.0 * np.sin(2.0 * math.pi * (doy - 120.0) / 365.25)
    cell_offset = rng.normal(0.0, 1.5, size=(nc, 1))
    t = seasonal[None, :] + cell_offset + rng.normal(0.0, 3.0, size=(nc, nd)) - 2.0 * storm
    rh = np.clip(rng.normal(52.0, 15.0, size=(nc, nd)) + 22.0 * storm, 3.0, 100.0)
    base_wet = rng.random((nc, nd)) >= 0.65
    prec = np.where(base_wet, rng.exponential(1.8, size=(nc, nd)), 0.0)
    dry_storm = rng.random((nc, nd)) < 0.25
    storm_rain = np.where(
        dry_storm, rng.uniform(0.0, 1.5, size=(nc, nd)), rng.gamma(2.0, 4.0, size=(nc, nd))
    )
    prec = np.where(storm, storm_rain, prec)
    wind_u = rng.normal(0.0, 2.5, size=(nc, nd))
    wind_v = rng.normal(0.0, 2.5, size=(nc, nd))
    sm_noise = rng.normal(0.0, 0.03, size=(nc, nd))
    water = np.clip(0.05 + 0.1 * rh / 100.0 + rng.normal(0.0, 0.02, size=(nc, nd)), 0.0, 0.5)

    sm = np.empty((nc, nd))
    level = rng.uniform(0.15, 0.45, size=nc)
    for d in range(nd):
        level = np.clip(0.92 * level + 0.02 + 0.004 * np.minimum(prec[:, d], 20.0) + sm_noise[:, d], 0.02, 0.98)
        sm[:, d] = level

    # Moisture codes rolled per cell from conventional start-up values.
    ffmc = np.empty((nc, nd))
    dmc = np.empty((nc, nd))
    dc = np.empty((nc, nd))
    isi = np.empty((nc, nd))
    bui = np.empty((nc, nd))
    fwi_arr = np.empty((nc, nd))
    for c in range(nc):
        state = fwi_mod.DEFAULT_START
        for d in range(nd):
            wx = fwi_mod.DailyWeather(
                temp_c=float(t[c, d]),
                rh_pct=float(rh[c, d]),
                wind_kmh=float(math.hypot(wind_u[c, d], wind_v[c, d]) * 3.6),
                rain_mm=float(prec[c, d]),
                month=int(months[d]),
                latitude_band=band,
            )
            state, out = fwi_mod.step(state, wx)
            ffmc[c, d], dmc[c, d], dc[c, d] = state.ffmc, state.dmc, state.dc
            isi[c, d], bui[c, d], fwi_arr[c, d] = out.isi, out.bui, out.fwi

    # Static surface per weather cell.
    low_veg = rng.uniform(0.1, 0.6, size=nc)
    high_veg = rng.uniform(0.0, 1.0, size=nc) * (1.0 - low_veg)
    pop = rng.lognormal(2.0, 1.0, size=nc)
    historical = rng.gamma(1.5, 20.0, size=nc)
    ndvi_phase = rng.normal(0.0, 0.6, size=nc)
    ndvi = np.clip(
        0.45
        + 0.25 * np.sin(2.0 * math.pi * (np.arange(1, 13)[None, :] - 5.0) / 12.0 + ndvi_phase[:, None])
        + rng.normal(0.0, 0.03, size=(nc, 12)),
        -1.0,
        1.0,
    )

    # Thunder subcells per storm cell-day.
    thunder: list[ThunderRecord] = []
    thunder_parent: list[tuple[int, int]] = []  # (cell index, day index)
    n_sub = rng.integers(1, 4, size=(nc, nd))
    for d in range(nd):
        for c in range(nc):
            if not storm[c, d]:
                continue
            chosen = rng.choice(_SUBS * _SUBS, size=int(n_sub[c, d]), replace=False)
            for sub in sorted(int(s) for s in chosen):
                trow = cells[c].row * _SUBS + sub // _SUBS
                tcol = cells[c].col * _SUBS + sub % _SUBS
                hours = int(rng.integers(1, 9))
                thunder.append(ThunderRecord(CellId(trow, tcol), dates[d], hours))
                thunder_parent.append((c, d))

    # Planted ignition draws. The lightning law is only ever evaluated on
    # storm days, which are systematically wetter than average, so its inputs
    # standardize over the thunder-day population itself.
    if thunder_parent:
        pc = np.array([c for c, _ in thunder_parent])
        pdy = np.array([d for _, d in thunder_parent])

        def _storm_z(arr: np.ndarray) -> np.ndarray:
            vals = arr[pc, pdy]
            sd = float(vals.std())
            return (arr - float(vals.mean())) / sd if sd else np.zeros_like(arr)

        z_ffmc, z_rh, z_prec = _storm_z(ffmc), _storm_z(rh), _storm_z(prec)
    else:
        z_ffmc, z_rh, z_prec = _zscore(ffmc), _zscore(rh), _zscore(prec)
    z_ndvi = _zscore(ndvi)
    z_t, z_pop = _zscore(t), _zscore(np.log1p(pop))
    z_rh_all = _zscore(rh)

    law = cfg.planted_coefficients
    fires: list[WildfireEvent] = []
    truth: list[TruthRecord] = []

    def _next_id() -> str:
        return f"F{len(fires) + 1:06d}"

    def _make_fire(point: GeoPoint, day_idx: int, duration: int, cause: str,
                   storm_cell: CellId | None, storm_day: date | None) -> None:
        total = float(rng.gamma(2.0, 50.0))
        first = total * float(rng.uniform(0.05, 0.5))
        fid = _next_id()
        fires.append(
            WildfireEvent(fid, point, dates[day_idx], duration, total, first)
        )
        truth.append(TruthRecord(fid, cause, storm_cell, storm_day))

    for rec, (c, d) in zip(thunder, thunder_parent):
        lag = cfg.holdover_lag_days
        if d + lag >= nd:
            continue
        eta = (
            law.intercept
            + law.ffmc * z_ffmc[c, d]
            + law.rh * z_rh[c, d]
            + law.prec * z_prec[c, d]
            + law.ndvi * z_ndvi[c, months[d] - 1]
            + law.ffmc_rh_product * z_ffmc[c, d] * z_rh[c, d]
        )
        if rng.random() < cfg.fire_base_rate * _sigmoid(eta):
            res = THUNDER_GRID.resolution_deg
            lat = THUNDER_GRID.origin.lat + (rec.cell.row + float(rng.uniform(0.1, 0.9))) * res
            lon = THUNDER_GRID.origin.lon + (rec.cell.col + float(rng.uniform(0.1, 0.9))) * res
            _make_fire(GeoPoint(lat, lon), d + lag, int(rng.integers(2, 9)),
                       "lightning", rec.cell, rec.date)

    # Background fires, guarded away from thunder so the planted causes stay
    # exactly recoverable by the 10 km / lookback-week join.
    thunder_points = [THUNDER_GRID.cell_center(r.cell) for r in thunder]
    thunder_dates = [r.date for r in thunder]
    thunder_idx = SpatialIndex.build(thunder_points, THUNDER_GRID)

    def _near_recent_thunder(point: GeoPoint, when: date) -> bool:
        for h in neighbors_within(thunder_idx, point, cfg.guard_radius_km):
            gap = (when - thunder_dates[h]).days
            if 0 <= gap <= cfg.guard_days:
                return True
        return False

    anthro = cfg.anthro_coefficients
    wres = WEATHER_GRID.resolution_deg
    anthro_draw = rng.random((nc, nd))
    ag_draw = rng.random((nc, nd))
    point_jitter = rng.uniform(0.05, 0.95, size=(nc, nd, 2))
    for d in range(cfg.warmup_days, nd):
        for c in range(nc):
            lat = WEATHER_GRID.origin.lat + (cells[c].row + float(point_jitter[c, d, 0])) * wres
            lon = WEATHER_GRID.origin.lon + (cells[c].col + float(point_jitter[c, d, 1])) * wres
            point = GeoPoint(lat, lon)
            if not storm[c, d]:
                eta = (
                    anthro.intercept
                    + anthro.pop * z_pop[c]
                    + anthro.temp * z_t[c, d]
                    + anthro.rh * z_rh_all[c, d]
                )
                p = cfg.fire_base_rate * cfg.anthro_rate * _sigmoid(eta)
                if anthro_draw[c, d] < p and not _near_recent_thunder(point, dates[d]):
                    _make_fire(point, d, int(rng.integers(2, 9)), "anthropogenic", None, None)
                    continue
            if ag_draw[c, d] < cfg.fire_base_rate * cfg.ag_rate:
                _make_fire(point, d, 1, "agricultural", None, None)

    weather_rows = [
        WeatherDay(cells[c], dates[d], float(t[c, d]), float(rh[c, d]), float(prec[c, d]),
                   float(wind_u[c, d]), float(wind_v[c, d]), float(sm[c, d]), float(water[c, d]))
        for d in range(nd) for c in range(nc)
    ]
    fwi_rows = [
        FwiRow(cells[c], dates[d], float(ffmc[c, d]), float(dmc[c, d]), float(dc[c, d]),
               float(isi[c, d]), float(bui[c, d]), float(fwi_arr[c, d]))
        for d in range(nd) for c in range(nc)
    ]
    static_rows = [
        StaticCell(cells[c], float(low_veg[c]), float(high_veg[c]), float(pop[c]),
                   float(historical[c]), tuple(float(v) for v in ndvi[c]))
        for c in range(nc)
    ]
    thunder.sort(key=lambda r: (r.date, r.cell))
    return SynthWorld(fires, thunder, weather_rows, static_rows, fwi_rows, truth)


def write_truth(path, records: list[TruthRecord]) -> None:
    _write_csv(path, TRUTH_COLUMNS, (
        (r.fire_id, r.cause,
         r.storm_cell.row if r.storm_cell else None,
         r.storm_cell.col if r.storm_cell else None,
         r.storm_date)
        for r in records
    ))


def write_world(world: SynthWorld, out_dir: str | Path) -> dict[str, Path]:
    """Emit every table as CSV; returns {name: path}."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "fires": out / "fires.csv",
        "thunder": out / "thunder.csv",
        "weather": out / "weather.csv",
        "static": out / "static.csv",
        "fwi": out / "fwi.csv",
        "truth": out / "truth.csv",
    }
    write_fires(paths["fires"], world.fires)
    write_thunder(paths["thunder"], world.thunder)
    write_weather(paths["weather"], world.weather)
    write_static(paths["static"], world.static)
    write_fwi(paths["fwi"], world.fwi)
    write_truth(paths["truth"], world.truth)
    return paths
