"""Fire-cause labeling: the storm/fire spatiotemporal join, balanced negative
sampling, and train/test/holdout splitting.

A fire is lightning-ignited when a thunderhour occurred within the radius on
the ignition day or in the lookback window before it (holdover smoldering);
negatives are thunder cell-days where no fire ignited nearby within the
following window. Everything downstream assumes the class balance and the
holdout-year quarantine established here.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Sequence

import numpy as np

from .geo import THUNDER_GRID, CellId, GeoPoint, GridSpec, SpatialIndex, neighbors_within
from .ingest import ThunderRecord, WildfireEvent

log = logging.getLogger(__name__)

LIGHTNING = "lightning"
ANTHROPOGENIC = "anthropogenic"


@dataclass(frozen=True)
class LabelingConfig:
    radius_km: float = 10.0
    holdover_days: int = 7
    min_duration_days: int = 2
    holdout_year: int = 2021
    seed: int = 0
    train_fraction: float = 0.8
    split_mode: str = "row"  # row | year

    def __post_init__(self) -> None:
        if self.radius_km <= 0:
            raise ValueError("radius_km must be positive")
        if self.holdover_days < 0:
            raise ValueError("holdover_days must be non-negative")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.split_mode not in ("row", "year"):
            raise ValueError(f"unknown split_mode {self.split_mode!r}")


@dataclass(frozen=True)
class LabeledSample:
    anchor: GeoPoint
    date: date
    label: bool
    origin: str
    split: str  # train | test | holdout


def centroid_ignition(polygon: Sequence[GeoPoint]) -> GeoPoint:
    """Area-weighted centroid of a burned-area polygon in a local tangent
    plane; degenerate (zero-area) polygons fall back to the vertex midpoint.
    """
    if len(polygon) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    lat0 = sum(p.lat for p in polygon) / len(polygon)
    ref_lon = polygon[0].lon
    lons = [ref_lon + (((p.lon - ref_lon) + 180.0) % 360.0 - 180.0) for p in polygon]
    lon0 = sum(lons) / len(polygon)
    k = math.cos(math.radians(lat0))
    xs = [(lon - lon0) * k for lon in lons]
    ys = [p.lat - lat0 for p in polygon]
    area2 = 0.0
    cx = 0.0
    cy = 0.0
    for i in range(len(polygon)):
        j = (i + 1) % len(polygon)
        cross = xs[i] * ys[j] - xs[j] * ys[i]
        area2 += cross
        cx += (xs[i] + xs[j]) * cross
        cy += (ys[i] + ys[j]) * cross
    if abs(area2) < 1e-12:
        log.warning("zero-area polygon, falling back to vertex midpoint")
        return GeoPoint(lat0, lon0)
    cx /= 3.0 * area2
    cy /= 3.0 * area2
    return GeoPoint(lat0 + cy, lon0 + cx / k)


@dataclass
class ThunderIndex:
    """Thunder cell-days bucketed by cell center for radius queries."""

    index: SpatialIndex
    records: list[ThunderRecord]

    @classmethod
    def build(cls, records: Sequence[ThunderRecord], spec: GridSpec = THUNDER_GRID) -> "ThunderIndex":
        centers = [spec.cell_center(r.cell) for r in records]
        return cls(SpatialIndex.build(centers, spec), list(records))

    def near(self, point: GeoPoint, radius_km: float) -> list[ThunderRecord]:
        return [self.records[h] for h in neighbors_within(self.index, point, radius_km)]


@dataclass
class FireIndex:
    index: SpatialIndex
    records: list[WildfireEvent]

    @classmethod
    def build(cls, records: Sequence[WildfireEvent], spec: GridSpec = THUNDER_GRID) -> "FireIndex":
        points = [f.ignition for f in records]
        return cls(SpatialIndex.build(points, spec), list(records))

    def near(self, point: GeoPoint, radius_km: float) -> list[WildfireEvent]:
        return [self.records[h] for h in neighbors_within(self.index, point, radius_km)]


def classify_fire(fire: WildfireEvent, thunder_idx: ThunderIndex, cfg: LabelingConfig) -> str:
    """`lightning` iff any thunder cell-day lies within radius_km of the
    ignition point and within the closed lookback window ending on the
    ignition day."""
    for rec in thunder_idx.near(fire.ignition, cfg.radius_km):
        gap = (fire.ignition_date - rec.date).days
        if 0 <= gap <= cfg.holdover_days:
            return LIGHTNING
    return ANTHROPOGENIC


def eligible_negative_anchors(
    thunder: Sequence[ThunderRecord], fire_idx: FireIndex, cfg: LabelingConfig,
    spec: GridSpec = THUNDER_GRID,
) -> list[ThunderRecord]:
    """Thunder cell-days with no fire igniting within radius_km during the
    window [date, date + holdover_days]."""
    eligible = []
    for rec in thunder:
        center = spec.cell_center(rec.cell)
        spoiled = False
        for fire in fire_idx.near(center, cfg.radius_km):
            gap = (fire.ignition_date - rec.date).days
            if 0 <= gap <= cfg.holdover_days:
                spoiled = True
                break
        if not spoiled:
            eligible.append(rec)
    return eligible


def sample_negatives(
    thunder: Sequence[ThunderRecord], fire_idx: FireIndex, n: int,
    cfg: LabelingConfig, seed: int,
) -> list[ThunderRecord]:
    """n uniform draws without replacement from the eligible thunder
    cell-days, in canonical (date, cell) order."""
    eligible = sorted(eligible_negative_anchors(thunder, fire_idx, cfg),
                      key=lambda r: (r.date, r.cell))
    if len(eligible) < n:
        raise ValueError(
            f"insufficient eligible negatives: need {n}, have {len(eligible)}"
        )
    rng = np.random.default_rng([seed, 0xA11])
    chosen = sorted(rng.choice(len(eligible), size=n, replace=False).tolist())
    return [eligible[i] for i in chosen]


def sample_calm_anchors(
    cells: Sequence[CellId], dates: Sequence[date],
    thunder_idx: ThunderIndex, fire_idx: FireIndex, n: int,
    cfg: LabelingConfig, seed: int,
    spec: GridSpec = THUNDER_GRID,
) -> list[tuple[CellId, date]]:
    """n cell-days with neither thunder (within radius, in the lookback
    window that would have made a fire here lightning-classified) nor any
    fire igniting within radius during the following window.

    Uniform without replacement over the eligible subset of the cells x dates
    lattice, sampled lazily through a seeded permutation.
    """
    cells = sorted(set(cells))
    dates = sorted(set(dates))
    total = len(cells) * len(dates)
    rng = np.random.default_rng([seed, 0xCA1])
    chosen: list[tuple[CellId, date]] = []
    for flat in rng.permutation(total):
        cell = cells[int(flat) // len(dates)]
        day = dates[int(flat) % len(dates)]
        center = spec.cell_center(cell)
        thunder_near = any(
            0 <= (day - rec.date).days <= cfg.holdover_days
            for rec in thunder_idx.near(center, cfg.radius_km)
        )
        if thunder_near:
            continue
        fire_near = any(
            0 <= (fire.ignition_date - day).days <= cfg.holdover_days
            for fire in fire_idx.near(center, cfg.radius_km)
        )
        if fire_near:
            continue
        chosen.append((cell, day))
        if len(chosen) == n:
            return sorted(chosen, key=lambda cd: (cd[1], cd[0]))
    raise ValueError(
        f"insufficient eligible negatives: need {n}, have {len(chosen)}"
    )


def _assign_splits(
    samples: list[tuple[GeoPoint, date, bool, str]], cfg: LabelingConfig
) -> list[LabeledSample]:
    rng = np.random.default_rng([cfg.seed, 0x59117])
    out: list[LabeledSample] = []
    if cfg.split_mode == "year":
        years = sorted({d.year for _, d, _, _ in samples if d.year != cfg.holdout_year})
        year_split = {y: ("train" if rng.random() < cfg.train_fraction else "test") for y in years}
        for anchor, day, label, origin in samples:
            split = "holdout" if day.year == cfg.holdout_year else year_split[day.year]
            out.append(LabeledSample(anchor, day, label, origin, split))
    else:
        for anchor, day, label, origin in samples:
            if day.year == cfg.holdout_year:
                split = "holdout"
            else:
                split = "train" if rng.random() < cfg.train_fraction else "test"
            out.append(LabeledSample(anchor, day, label, origin, split))
    if not any(s.split == "train" for s in out):
        log.warning("training set is empty (all rows in holdout year?)")
    return out


def build_dataset(
    fires: Sequence[WildfireEvent],
    thunder: Sequence[ThunderRecord],
    cfg: LabelingConfig,
    mode: str = LIGHTNING,
    calm_domain: tuple[Sequence[CellId], Sequence[date]] | None = None,
) -> list[LabeledSample]:
    """Balanced labeled samples for one ignition type.

    lightning mode: positives are lightning-classified fires, negatives are
    fire-free thunder cell-days. anthropogenic mode: positives are the
    remaining fires, negatives are thunder-free fire-free cell-days drawn
    from `calm_domain` (cells, dates).
    """
    if mode not in (LIGHTNING, ANTHROPOGENIC):
        raise ValueError(f"unknown mode {mode!r}")
    kept = [f for f in fires if f.duration_days >= cfg.min_duration_days]
    dropped = len(fires) - len(kept)
    if dropped:
        log.info("duration filter removed %d single-day fires", dropped)
    thunder_idx = ThunderIndex.build(thunder)
    fire_idx = FireIndex.build(kept)
    cause = {f.fire_id: classify_fire(f, thunder_idx, cfg) for f in kept}

    positives = sorted(
        (f for f in kept if cause[f.fire_id] == mode), key=lambda f: f.fire_id
    )
    rows: list[tuple[GeoPoint, date, bool, str]] = [
        (f.ignition, f.ignition_date, True, f"fire:{f.fire_id}") for f in positives
    ]
    if mode == LIGHTNING:
        negatives = sample_negatives(thunder, fire_idx, len(positives), cfg, cfg.seed)
        rows += [
            (THUNDER_GRID.cell_center(r.cell), r.date, False,
             f"thunder:{r.cell.row}:{r.cell.col}:{r.date.isoformat()}")
            for r in negatives
        ]
    else:
        if calm_domain is None:
            raise ValueError("anthropogenic mode requires calm_domain=(cells, dates)")
        cells, dates = calm_domain
        anchors = sample_calm_anchors(
            cells, dates, thunder_idx, fire_idx, len(positives), cfg, cfg.seed
        )
        rows += [
            (THUNDER_GRID.cell_center(cell), day, False,
             f"calm:{cell.row}:{cell.col}:{day.isoformat()}")
            for cell, day in anchors
        ]
    return _assign_splits(rows, cfg)


def write_labeled(path, samples: Iterable[LabeledSample]) -> None:
    from .ingest import _write_csv

    _write_csv(
        path,
        ["anchor_lat", "anchor_lon", "date", "label", "origin", "split"],
        ((s.anchor.lat, s.anchor.lon, s.date, int(s.label), s.origin, s.split) for s in samples),
    )


def read_labeled(path) -> list[LabeledSample]:
    from .ingest import _parse_date, _parse_float, _read_rows, _require

    samples = []
    for k, (lat, lon, d, label, origin, split) in _read_rows(
        path, ["anchor_lat", "anchor_lon", "date", "label", "origin", "split"]
    ):
        if split not in ("train", "test", "holdout"):
            raise ValueError(f"{path}: unknown split at row {k}: {split!r}")
        samples.append(
            LabeledSample(
                GeoPoint(
                    _require(_parse_float(lat, path, k, "anchor_lat"), path, k, "anchor_lat"),
                    _require(_parse_float(lon, path, k, "anchor_lon"), path, k, "anchor_lon"),
                ),
                _parse_date(d, path, k),
                bool(int(label)),
                origin,
                split,
            )
        )
    return samples
