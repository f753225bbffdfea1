"""Climate analyses on a fitted ignition model: regional mean-risk trends
over the data years, and the delta projection that shifts RH, temperature,
and precipitation to a future climate while holding everything else fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geo import CellId, GeoPoint, GridSpec, cell_of
from .ingest import WeatherDay, _write_csv

DEFAULT_REGION_RESOLUTION_DEG = 2.5


def region_grid(resolution_deg: float = DEFAULT_REGION_RESOLUTION_DEG) -> GridSpec:
    return GridSpec(resolution_deg=resolution_deg)


@dataclass(frozen=True)
class ClimateDelta:
    """Additive offsets applied to the three projected drivers; optional
    per-region overrides win over the global values."""

    rh: float = 0.0
    t: float = 0.0
    prec: float = 0.0
    per_region: tuple[tuple[CellId, tuple[float, float, float]], ...] = ()

    def __post_init__(self) -> None:
        values = [self.rh, self.t, self.prec]
        for _, (r, t, p) in self.per_region:
            values += [r, t, p]
        if not all(math.isfinite(v) for v in values):
            raise ValueError("delta offsets must be finite")

    def offsets_for(self, region: CellId) -> tuple[float, float, float]:
        for cell, offsets in self.per_region:
            if cell == region:
                return offsets
        return (self.rh, self.t, self.prec)


@dataclass
class RiskTable:
    """Mean predicted probability per (region, year)."""

    grid: GridSpec
    mean: dict[tuple[CellId, int], float]
    count: dict[tuple[CellId, int], int]

    @property
    def total_samples(self) -> int:
        return sum(self.count.values())


def regional_risk(
    model,
    X: np.ndarray,
    points: Sequence[GeoPoint],
    years: Sequence[int],
    grid: GridSpec | None = None,
) -> RiskTable:
    """Aggregate model predictions by region cell and year. Permutation
    invariant over sample order: sums accumulate per key, one division at
    the end."""
    grid = grid or region_grid()
    X = np.asarray(X, dtype=np.float64)
    if not (len(points) == len(years) == X.shape[0]):
        raise ValueError("points, years, and rows must align")
    probs = model.predict_proba(X)
    groups: dict[tuple[CellId, int], list[float]] = {}
    for p, point, year in zip(probs, points, years):
        groups.setdefault((cell_of(point, grid), int(year)), []).append(float(p))
    # summing each group in sorted order makes the reduction exactly
    # independent of input sample order
    means = {key: math.fsum(sorted(vals)) / len(vals) for key, vals in sorted(groups.items())}
    counts = {key: len(groups[key]) for key in sorted(groups)}
    return RiskTable(grid=grid, mean=means, count=counts)


@dataclass(frozen=True)
class TrendCell:
    mean_annual_diff: float
    n_years: int
    n_samples: int


@dataclass
class TrendTable:
    per_region: dict[CellId, TrendCell]
    excluded_regions: int  # had fewer than 2 years of coverage

    @property
    def global_mean(self) -> float | None:
        if not self.per_region:
            return None
        return float(np.mean([c.mean_annual_diff for c in self.per_region.values()]))

    @property
    def global_median(self) -> float | None:
        if not self.per_region:
            return None
        return float(np.median([c.mean_annual_diff for c in self.per_region.values()]))


def annual_trend(risk: RiskTable) -> TrendTable:
    """Per region: mean of first differences between successive covered
    years; regions with fewer than two years are excluded and counted."""
    by_region: dict[CellId, dict[int, float]] = {}
    samples: dict[CellId, int] = {}
    for (cell, year), value in risk.mean.items():
        by_region.setdefault(cell, {})[year] = value
        samples[cell] = samples.get(cell, 0) + risk.count[(cell, year)]
    out: dict[CellId, TrendCell] = {}
    excluded = 0
    for cell in sorted(by_region):
        series = by_region[cell]
        years = sorted(series)
        if len(years) < 2:
            excluded += 1
            continue
        diffs = [series[b] - series[a] for a, b in zip(years, years[1:])]
        out[cell] = TrendCell(
            mean_annual_diff=float(sum(diffs) / len(diffs)),
            n_years=len(years),
            n_samples=samples[cell],
        )
    return TrendTable(per_region=out, excluded_regions=excluded)


@dataclass(frozen=True)
class ProjectionCell:
    risk_base: float
    risk_projected: float
    ratio: float | None  # None when the baseline risk is zero
    n_samples: int


@dataclass
class ProjectionResult:
    per_region: dict[CellId, ProjectionCell]
    clamped_values: int
    base_probs: np.ndarray
    projected_probs: np.ndarray


def shift_columns(
    X: np.ndarray,
    names: Sequence[str],
    points: Sequence[GeoPoint],
    delta: ClimateDelta,
    grid: GridSpec,
) -> tuple[np.ndarray, int]:
    """Copy of X with RH/t/prec shifted per region; RH clamps to [0, 100]
    and precipitation to >= 0, counting every clamped value."""
    X = np.array(X, dtype=np.float64, copy=True)
    idx = {n: i for i, n in enumerate(names)}
    clamped = 0
    offsets = [delta.offsets_for(cell_of(p, grid)) for p in points]
    off = np.asarray(offsets, dtype=np.float64)
    if "RH" in idx:
        col = idx["RH"]
        X[:, col] += off[:, 0]
        bad = (X[:, col] < 0.0) | (X[:, col] > 100.0)
        clamped += int(bad.sum())
        X[:, col] = np.clip(X[:, col], 0.0, 100.0)
    if "t" in idx:
        X[:, idx["t"]] += off[:, 1]
    if "prec" in idx:
        col = idx["prec"]
        X[:, col] += off[:, 2]
        bad = X[:, col] < 0.0
        clamped += int(bad.sum())
        X[:, col] = np.clip(X[:, col], 0.0, None)
    return X, clamped


def aggregate_projection(
    base: np.ndarray,
    projected: np.ndarray,
    points: Sequence[GeoPoint],
    grid: GridSpec,
    clamped: int,
) -> ProjectionResult:
    """Regional mean risk before/after from per-sample probabilities, with
    the same order-stable reduction as :func:`regional_risk`."""
    groups: dict[CellId, tuple[list[float], list[float]]] = {}
    for b, p, point in zip(base, projected, points):
        acc = groups.setdefault(cell_of(point, grid), ([], []))
        acc[0].append(float(b))
        acc[1].append(float(p))
    per_region = {}
    for cell in sorted(groups):
        bs, ps = groups[cell]
        n = len(bs)
        rb = math.fsum(sorted(bs)) / n
        rp = math.fsum(sorted(ps)) / n
        per_region[cell] = ProjectionCell(
            risk_base=rb,
            risk_projected=rp,
            ratio=(rp / rb) if rb > 0.0 else None,
            n_samples=n,
        )
    return ProjectionResult(
        per_region=per_region,
        clamped_values=clamped,
        base_probs=np.asarray(base),
        projected_probs=np.asarray(projected),
    )


def project(
    model,
    X: np.ndarray,
    names: Sequence[str],
    points: Sequence[GeoPoint],
    delta: ClimateDelta,
    grid: GridSpec | None = None,
) -> ProjectionResult:
    """Re-score with shifted drivers, holding every other column constant,
    and compare regional mean risk before and after."""
    grid = grid or region_grid()
    X = np.asarray(X, dtype=np.float64)
    base = model.predict_proba(X)
    shifted, clamped = shift_columns(X, names, points, delta, grid)
    projected = model.predict_proba(shifted)
    return aggregate_projection(base, projected, points, grid, clamped)


def shift_weather(
    weather: Sequence[WeatherDay], delta: ClimateDelta, grid: GridSpec | None = None,
    weather_spec: GridSpec | None = None,
) -> tuple[list[WeatherDay], int]:
    """Strict-recompute variant: shift the raw weather table itself so that
    downstream assembly recomputes the dependent features (lagged
    precipitation, computed indices) from the projected climate."""
    from .geo import WEATHER_GRID

    grid = grid or region_grid()
    weather_spec = weather_spec or WEATHER_GRID
    out = []
    clamped = 0
    for wd in weather:
        d_rh, d_t, d_prec = delta.offsets_for(cell_of(weather_spec.cell_center(wd.cell), grid))
        rh = wd.rh
        if rh is not None:
            rh += d_rh
            if rh < 0.0 or rh > 100.0:
                clamped += 1
            rh = min(max(rh, 0.0), 100.0)
        t = wd.t if wd.t is None else wd.t + d_t
        prec = wd.prec
        if prec is not None:
            prec += d_prec
            if prec < 0.0:
                clamped += 1
            prec = max(prec, 0.0)
        out.append(WeatherDay(wd.cell, wd.date, t, rh, prec, wd.wind_u, wd.wind_v, wd.sm, wd.water))
    return out, clamped


# --- artifact writers --------------------------------------------------------


def write_trend_grid(path, trend: TrendTable) -> None:
    rows = [
        (cell.row, cell.col, c.mean_annual_diff, c.n_years, c.n_samples)
        for cell, c in sorted(trend.per_region.items())
    ]
    _write_csv(path, ["region_row", "region_col", "mean_annual_diff", "n_years", "n_samples"], rows)


def write_projection_grid(path, result: ProjectionResult) -> None:
    rows = [
        (cell.row, cell.col, c.risk_base, c.risk_projected, c.ratio)
        for cell, c in sorted(result.per_region.items())
    ]
    _write_csv(path, ["region_row", "region_col", "risk_base", "risk_projected", "ratio"], rows)


def region_polygon(cell: CellId, grid: GridSpec) -> list[list[float]]:
    lat0 = grid.origin.lat + cell.row * grid.resolution_deg
    lon0 = grid.origin.lon + cell.col * grid.resolution_deg
    lat1 = lat0 + grid.resolution_deg
    lon1 = lon0 + grid.resolution_deg
    return [[lon0, lat0], [lon1, lat0], [lon1, lat1], [lon0, lat1], [lon0, lat0]]


def write_region_geojson(path, grid: GridSpec, properties_by_cell: dict[CellId, dict]) -> None:
    import json
    from pathlib import Path

    features = []
    for cell in sorted(properties_by_cell):
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [region_polygon(cell, grid)]},
                "properties": {"region_row": cell.row, "region_col": cell.col,
                               **properties_by_cell[cell]},
            }
        )
    payload = {"type": "FeatureCollection", "features": features}
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
