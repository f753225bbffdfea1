"""Pipeline command line: every stage is a subcommand reading a JSON run
configuration (flag-overridable), writing its declared artifacts into the
output directory, and printing one line with a content hash per artifact.

Stages chain through files only, so any prefix of
synth -> label -> features -> train -> eval -> ablate / cross / trend /
project -> report can be rerun in isolation; identical config and seed give
byte-identical outputs regardless of --workers.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields as dc_fields
from datetime import date
from pathlib import Path

import numpy as np

from . import climate as climate_mod
from . import features as features_mod
from . import ingest, labeler, synth
from .geo import CellId, THUNDER_GRID
from .labeler import LabeledSample, LabelingConfig
from .models import (
    DesignMatrix,
    ablation_grid,
    cross_type,
    evaluate,
    load_model,
    permutation_importance,
    save_model,
    train_model,
)

log = logging.getLogger(__name__)

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass
class RunConfig:
    seed: int
    out_dir: Path
    workers: int = 1
    inputs: dict = field(default_factory=dict)
    labeling: LabelingConfig = field(default_factory=LabelingConfig)
    feature_set: int = 5
    model_kind: str = "boosted"
    model_hyper: dict = field(default_factory=dict)
    ablate_hyper: dict = field(default_factory=dict)
    synth: synth.SynthConfig = field(default_factory=synth.SynthConfig)
    region_resolution_deg: float = 2.5
    trend_samples: int = 4000
    delta: climate_mod.ClimateDelta = field(default_factory=climate_mod.ClimateDelta)
    recompute_dependent: bool = False
    geojson: bool = False
    importance_repeats: int = 5

    def path(self, name: str) -> Path:
        """Resolve an artifact path: explicit config entry, else out_dir."""
        if name in self.inputs:
            return Path(self.inputs[name])
        return self.out_dir / name


def _typed(section: dict, key: str, kind, default, where: str):
    if key not in section:
        return default
    value = section[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"config field {where}{key}: expected {kind.__name__}, got {value!r}")
    return value


def _build_labeling(section: dict, seed: int) -> LabelingConfig:
    try:
        return LabelingConfig(
            radius_km=_typed(section, "radius_km", float, 10.0, "labeling."),
            holdover_days=_typed(section, "holdover_days", int, 7, "labeling."),
            min_duration_days=_typed(section, "min_duration_days", int, 2, "labeling."),
            holdout_year=_typed(section, "holdout_year", int, 2021, "labeling."),
            seed=seed,
            train_fraction=_typed(section, "train_fraction", float, 0.8, "labeling."),
            split_mode=_typed(section, "split_mode", str, "row", "labeling."),
        )
    except ValueError as exc:
        raise ConfigError(f"config field labeling: {exc}") from exc


def _build_synth(section: dict, seed: int) -> synth.SynthConfig:
    kwargs = {}
    law_fields = {"planted_coefficients": synth.PlantedLaw, "anthro_coefficients": synth.AnthroLaw}
    valid = {f.name for f in dc_fields(synth.SynthConfig)}
    for key, value in section.items():
        if key not in valid:
            raise ConfigError(f"config field synth.{key}: unknown field")
        if key in law_fields:
            if not isinstance(value, dict):
                raise ConfigError(f"config field synth.{key}: expected object")
            try:
                kwargs[key] = law_fields[key](**value)
            except TypeError as exc:
                raise ConfigError(f"config field synth.{key}: {exc}") from exc
        elif key == "start_date":
            kwargs[key] = date.fromisoformat(value)
        elif key != "seed":
            kwargs[key] = value
    try:
        return synth.SynthConfig(seed=seed, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config field synth: {exc}") from exc


def _build_delta(section: dict) -> climate_mod.ClimateDelta:
    per_region = []
    for entry in section.get("per_region", []):
        try:
            cell = CellId(int(entry["region_row"]), int(entry["region_col"]))
            per_region.append(
                (cell, (float(entry.get("rh", 0.0)), float(entry.get("t", 0.0)),
                        float(entry.get("prec", 0.0))))
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"config field climate.delta.per_region: {exc}") from exc
    try:
        return climate_mod.ClimateDelta(
            rh=_typed(section, "rh", float, 0.0, "climate.delta."),
            t=_typed(section, "t", float, 0.0, "climate.delta."),
            prec=_typed(section, "prec", float, 0.0, "climate.delta."),
            per_region=tuple(per_region),
        )
    except ValueError as exc:
        raise ConfigError(f"config field climate.delta: {exc}") from exc


def load_config(config_path: str | None, overrides: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if config_path:
        p = Path(config_path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        with p.open(encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {p}: invalid JSON ({exc})") from exc

    seed = overrides.seed if overrides.seed is not None else raw.get("seed")
    if seed is None:
        raise ConfigError("config field seed: mandatory (set in config or via --seed)")
    if not isinstance(seed, int):
        raise ConfigError(f"config field seed: expected int, got {seed!r}")

    out_dir = overrides.out or raw.get("out_dir", "out")
    workers = overrides.workers if overrides.workers is not None else raw.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError(f"config field workers: expected positive int, got {workers!r}")

    labeling_raw = dict(raw.get("labeling", {}))
    if overrides.radius_km is not None:
        labeling_raw["radius_km"] = overrides.radius_km
    if overrides.holdover_days is not None:
        labeling_raw["holdover_days"] = overrides.holdover_days
    if overrides.holdout_year is not None:
        labeling_raw["holdout_year"] = overrides.holdout_year

    feature_set = overrides.feature_set if overrides.feature_set is not None else raw.get("feature_set", 5)
    if feature_set not in (1, 2, 3, 4, 5):
        raise ConfigError(f"config field feature_set: expected 1..5, got {feature_set!r}")

    model_section = dict(raw.get("model", {}))
    model_kind = overrides.model or model_section.get("kind", "boosted")
    if model_kind not in ("logreg", "forest", "boosted"):
        raise ConfigError(f"config field model.kind: expected logreg|forest|boosted, got {model_kind!r}")

    inputs = raw.get("inputs", {})
    if not isinstance(inputs, dict):
        raise ConfigError("config field inputs: expected object mapping artifact name to path")

    climate_section = dict(raw.get("climate", {}))
    cfg = RunConfig(
        seed=seed,
        out_dir=Path(out_dir),
        workers=workers,
        inputs=inputs,
        labeling=_build_labeling(labeling_raw, seed),
        feature_set=feature_set,
        model_kind=model_kind,
        model_hyper=dict(model_section.get("hyper", {})),
        ablate_hyper=dict(raw.get("ablate_hyper", {})),
        synth=_build_synth(dict(raw.get("synth", {})), seed),
        region_resolution_deg=_typed(climate_section, "region_resolution_deg", float, 2.5, "climate."),
        trend_samples=_typed(climate_section, "trend_samples", int, 4000, "climate."),
        delta=_build_delta(dict(climate_section.get("delta", {}))),
        recompute_dependent=_typed(climate_section, "recompute_dependent", bool, False, "climate."),
        geojson=_typed(climate_section, "geojson", bool, False, "climate."),
        importance_repeats=_typed(climate_section, "importance_repeats", int, 5, "climate."),
    )
    return cfg


def content_hash(path: Path) -> str:
    digest = hashlib.blake2b(path.read_bytes(), digest_size=8)
    return digest.hexdigest()


def _announce(stage: str, paths: list[Path]) -> None:
    parts = " ".join(f"{p.name}={content_hash(p)}" for p in paths)
    print(f"{stage}: wrote {parts}")


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise SystemExit(f"{what} not found: {path}")
    return path


# --- stages -------------------------------------------------------------------


def stage_synth(cfg: RunConfig) -> list[Path]:
    world = synth.synth_world(cfg.synth)
    paths = synth.write_world(world, cfg.out_dir)
    return [paths[k] for k in ("fires", "thunder", "weather", "static", "fwi", "truth")]


def _load_world_inputs(cfg: RunConfig):
    fires = ingest.read_fires(_require(cfg.path("fires.csv"), "fires table"))
    thunder = ingest.read_thunder(_require(cfg.path("thunder.csv"), "thunder table"))
    return fires, thunder


def _calm_domain(cfg: RunConfig):
    weather = ingest.read_weather(_require(cfg.path("weather.csv"), "weather table"))
    cells = sorted({w.cell for w in weather})
    sub = []
    for cell in cells:
        for i in range(5):
            for j in range(5):
                sub.append(CellId(cell.row * 5 + i, cell.col * 5 + j))
    dates = sorted({w.date for w in weather})
    # leave the lagged-feature lookback so downstream assembly is defined
    dates = dates[features_mod.DAYS_SINCE_PREC_WINDOW:]
    if not dates:
        raise SystemExit("weather table too short for calm-anchor sampling")
    return sub, dates


def stage_label(cfg: RunConfig, mode: str) -> list[Path]:
    fires, thunder = _load_world_inputs(cfg)
    calm = _calm_domain(cfg) if mode == labeler.ANTHROPOGENIC else None
    samples = labeler.build_dataset(fires, thunder, cfg.labeling, mode=mode, calm_domain=calm)
    name = "labeled.csv" if mode == labeler.LIGHTNING else "labeled_anthro.csv"
    out = cfg.out_dir / name
    labeler.write_labeled(out, samples)
    return [out]


def _build_tables(cfg: RunConfig) -> features_mod.Tables:
    weather = ingest.read_weather(_require(cfg.path("weather.csv"), "weather table"))
    static = ingest.read_static(_require(cfg.path("static.csv"), "static table"))
    fwi_path = cfg.path("fwi.csv")
    fwi_rows = ingest.read_fwi(fwi_path) if fwi_path.exists() else None
    if fwi_rows is None:
        log.info("no fwi table found; indices will be computed from weather")
    return features_mod.Tables.build(weather, static, fwi_rows)


def stage_features(cfg: RunConfig, mode: str) -> list[Path]:
    labeled_name = "labeled.csv" if mode == labeler.LIGHTNING else "labeled_anthro.csv"
    samples = labeler.read_labeled(_require(cfg.path(labeled_name), "labeled table"))
    tables = _build_tables(cfg)
    fcfg = features_mod.FeatureSetConfig.for_model_number(cfg.feature_set)
    names = fcfg.feature_names()
    rows = features_mod.assemble_rows(samples, tables, fcfg)
    rows, report = ingest.drop_incomplete(rows, names)
    if not rows:
        raise SystemExit("all rows removed by the missing-data filter")
    out_name = "features.csv" if mode == labeler.LIGHTNING else "features_anthro.csv"
    out = cfg.out_dir / out_name
    features_mod.write_features(out, names, rows)
    written = [out]
    if mode == labeler.LIGHTNING:
        dm = DesignMatrix.from_rows(rows, names)
        stats_matrix = np.column_stack([dm.X, dm.y.astype(np.float64)])
        pearson = features_mod.pearson_matrix(stats_matrix)
        ppath = cfg.out_dir / "pearson.csv"
        features_mod.write_pearson(ppath, [*names, "label"], pearson)
        hists = features_mod.class_histograms(dm.X, dm.y, bins=20)
        hpath = cfg.out_dir / "class_histograms.csv"
        features_mod.write_class_histograms(hpath, names, hists)
        written += [ppath, hpath]
    log.info("assembled %d rows (%d dropped incomplete)", len(rows), report.removed)
    return written


def _load_matrix(cfg: RunConfig, name: str = "features.csv") -> DesignMatrix:
    names, rows = features_mod.read_features(_require(cfg.path(name), "features table"))
    return DesignMatrix.from_rows(rows, names)


def stage_train(cfg: RunConfig) -> list[Path]:
    dm = _load_matrix(cfg)
    model = train_model(cfg.model_kind, dm, cfg.model_hyper, seed=cfg.seed, workers=cfg.workers)
    out = cfg.out_dir / "model.json"
    save_model(out, model)
    return [out]


def stage_eval(cfg: RunConfig) -> list[Path]:
    model = load_model(_require(cfg.path("model.json"), "model file"))
    dm = _load_matrix(cfg)
    if model.names and model.names != dm.names:
        raise SystemExit("model/features mismatch: column names differ")
    test = dm.only_split("test")
    payload = {"test": evaluate(model, test.X, test.y).to_dict()}
    if (dm.split == "holdout").any():
        holdout = dm.only_split("holdout")
        payload["holdout"] = evaluate(model, holdout.X, holdout.y).to_dict()
    else:
        payload["holdout"] = None
    payload["n_rows"] = {s: int((dm.split == s).sum()) for s in ("train", "test", "holdout")}
    out = cfg.out_dir / "metrics.json"
    with out.open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")

    drops = permutation_importance(
        model, test.X, test.y, seed=cfg.seed, repeats=cfg.importance_repeats
    )
    imp = cfg.out_dir / "importance.csv"
    order = sorted(range(len(dm.names)), key=lambda j: (-drops[j], dm.names[j]))
    ingest._write_csv(
        imp,
        ["feature", "mean_accuracy_drop"],
        ((dm.names[j], float(drops[j])) for j in order),
    )
    return [out, imp]


def stage_ablate(cfg: RunConfig) -> list[Path]:
    dm = _load_matrix(cfg)
    feature_sets = []
    for number in (1, 2, 3, 4, 5):
        names = features_mod.FeatureSetConfig.for_model_number(number).feature_names()
        if not set(names) <= set(dm.names):
            raise SystemExit(
                f"features table lacks columns for model {number}; "
                "rerun the features stage with feature_set=5"
            )
        feature_sets.append((number, names))
    rows = ablation_grid(
        dm, feature_sets, model_kinds=("logreg", "forest", "boosted"),
        seed=cfg.seed, hyper_by_kind=cfg.ablate_hyper, workers=cfg.workers,
    )
    out = cfg.out_dir / "ablation.csv"
    ingest._write_csv(
        out,
        ["model_number", "model_kind", "n_features", "roc_auc",
         "accuracy", "f1", "precision", "recall"],
        (
            (r["model_number"], r["model_kind"], r["n_features"], r["roc_auc"],
             r["accuracy"], r["f1"], r["precision"], r["recall"])
            for r in rows
        ),
    )
    return [out]


def stage_cross(cfg: RunConfig) -> list[Path]:
    light = _load_matrix(cfg, "features.csv")
    anthro = _load_matrix(cfg, "features_anthro.csv")
    basic = features_mod.FeatureSetConfig.for_model_number(1).feature_names()
    full = features_mod.FeatureSetConfig.for_model_number(5).feature_names()
    sets = [("basic", basic)]
    if set(full) <= set(light.names) and set(full) <= set(anthro.names):
        sets.append(("full", full))
    rows = cross_type(
        light, anthro, sets, model_kind=cfg.model_kind,
        seed=cfg.seed, hyper=cfg.model_hyper, workers=cfg.workers,
    )
    out = cfg.out_dir / "cross_type.csv"
    ingest._write_csv(
        out,
        ["feature_config", "train_on", "test_on", "accuracy"],
        ((r["feature_config"], r["train_on"], r["test_on"], r["accuracy"]) for r in rows),
    )
    return [out]


def _thunder_anchor_rows(cfg: RunConfig, tables: features_mod.Tables):
    """Assembled rows for a seeded subsample of thunder cell-days, with their
    anchor points; anchors too early for the lagged features are dropped.
    Also returns the kept thunder records so a second pass (shifted tables)
    can assemble exactly the same anchors."""
    thunder = ingest.read_thunder(_require(cfg.path("thunder.csv"), "thunder table"))
    thunder = sorted(thunder, key=lambda r: (r.date, r.cell))
    rng = np.random.default_rng([cfg.seed, 0x7E6D])
    if len(thunder) > cfg.trend_samples:
        keep = sorted(rng.choice(len(thunder), size=cfg.trend_samples, replace=False).tolist())
        thunder = [thunder[i] for i in keep]
    fcfg = features_mod.FeatureSetConfig.for_model_number(cfg.feature_set)
    names = fcfg.feature_names()
    rows, points, years, kept = [], [], [], []
    skipped = 0
    for rec in thunder:
        anchor = THUNDER_GRID.cell_center(rec.cell)
        sample = LabeledSample(anchor, rec.date, False, "thunder", "test")
        try:
            row = features_mod.assemble(sample, tables, fcfg)
        except ValueError:
            skipped += 1
            continue
        if any(row.get(n) is None for n in names):
            skipped += 1
            continue
        rows.append(row)
        points.append(anchor)
        years.append(rec.date.year)
        kept.append(rec)
    if skipped:
        log.info("skipped %d thunder anchors without full coverage", skipped)
    if not rows:
        raise SystemExit("no thunder anchors with feature coverage")
    dm = DesignMatrix.from_rows(rows, names)
    return dm, points, years, kept


def stage_trend(cfg: RunConfig) -> list[Path]:
    model = load_model(_require(cfg.path("model.json"), "model file"))
    tables = _build_tables(cfg)
    dm, points, years, _ = _thunder_anchor_rows(cfg, tables)
    if model.names and model.names != dm.names:
        raise SystemExit("model/features mismatch: column names differ")
    grid = climate_mod.region_grid(cfg.region_resolution_deg)
    risk = climate_mod.regional_risk(model, dm.X, points, years, grid)
    trend = climate_mod.annual_trend(risk)
    out = cfg.out_dir / "trend_grid.csv"
    climate_mod.write_trend_grid(out, trend)
    written = [out]
    if cfg.geojson:
        props = {
            cell: {"mean_annual_diff": c.mean_annual_diff, "n_years": c.n_years,
                   "n_samples": c.n_samples}
            for cell, c in trend.per_region.items()
        }
        gj = cfg.out_dir / "trend_regions.geojson"
        climate_mod.write_region_geojson(gj, grid, props)
        written.append(gj)
    summary = {
        "global_mean_annual_diff": trend.global_mean,
        "global_median_annual_diff": trend.global_median,
        "regions": len(trend.per_region),
        "excluded_regions": trend.excluded_regions,
    }
    print(f"trend: {json.dumps(summary, sort_keys=True)}")
    return written


def stage_project(cfg: RunConfig) -> list[Path]:
    model = load_model(_require(cfg.path("model.json"), "model file"))
    grid = climate_mod.region_grid(cfg.region_resolution_deg)
    if cfg.recompute_dependent:
        # strict mode: shift the raw weather and reassemble the very same
        # anchors, so lagged features and computed indices respond to the
        # projected climate; both passes use the compute path
        weather = ingest.read_weather(_require(cfg.path("weather.csv"), "weather table"))
        static = ingest.read_static(_require(cfg.path("static.csv"), "static table"))
        base_tables = features_mod.Tables.build(weather, static, None)
        shifted_weather, clamped = climate_mod.shift_weather(weather, cfg.delta, grid)
        shifted_tables = features_mod.Tables.build(shifted_weather, static, None)
        dm, points, years, kept = _thunder_anchor_rows(cfg, base_tables)
        if model.names and model.names != dm.names:
            raise SystemExit("model/features mismatch: column names differ")
        fcfg = features_mod.FeatureSetConfig.for_model_number(cfg.feature_set)
        shifted_rows = []
        for rec, anchor in zip(kept, points):
            sample = LabeledSample(anchor, rec.date, False, "thunder", "test")
            shifted_rows.append(features_mod.assemble(sample, shifted_tables, fcfg))
        sdm = DesignMatrix.from_rows(shifted_rows, dm.names)
        base = model.predict_proba(dm.X)
        projected = model.predict_proba(sdm.X)
        result = climate_mod.aggregate_projection(base, projected, points, grid, clamped)
    else:
        tables = _build_tables(cfg)
        dm, points, years, _ = _thunder_anchor_rows(cfg, tables)
        if model.names and model.names != dm.names:
            raise SystemExit("model/features mismatch: column names differ")
        result = climate_mod.project(model, dm.X, dm.names, points, cfg.delta, grid)
    out = cfg.out_dir / "projection_grid.csv"
    climate_mod.write_projection_grid(out, result)
    written = [out]
    if cfg.geojson:
        props = {
            cell: {"risk_base": c.risk_base, "risk_projected": c.risk_projected,
                   "ratio": c.ratio}
            for cell, c in result.per_region.items()
        }
        gj = cfg.out_dir / "projection_regions.geojson"
        climate_mod.write_region_geojson(gj, grid, props)
        written.append(gj)
    bases = [c.risk_base for c in result.per_region.values()]
    projs = [c.risk_projected for c in result.per_region.values()]
    mean_base = sum(bases) / len(bases)
    mean_proj = sum(projs) / len(projs)
    print(
        "project: "
        + json.dumps(
            {
                "mean_risk_base": mean_base,
                "mean_risk_projected": mean_proj,
                "mean_risk_ratio": (mean_proj / mean_base) if mean_base > 0 else None,
                "clamped_values": result.clamped_values,
            },
            sort_keys=True,
        )
    )
    return written


def _markdown_table(path: Path) -> str:
    import csv as _csv

    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(_csv.reader(fh))
    if not rows:
        return "(empty)\n"
    out = ["| " + " | ".join(rows[0]) + " |",
           "|" + "---|" * len(rows[0])]
    for row in rows[1:]:
        out.append("| " + " | ".join(row) + " |")
    return "\n".join(out) + "\n"


def stage_report(cfg: RunConfig) -> list[Path]:
    sections = []
    missing = []

    metrics_path = cfg.path("metrics.json")
    if metrics_path.exists():
        sections.append("## Model metrics\n\n```json\n" + metrics_path.read_text().strip() + "\n```\n")
    else:
        missing.append("metrics.json")
        sections.append("## Model metrics\n\nnot run\n")

    for title, name in (
        ("Feature ablation", "ablation.csv"),
        ("Cross-ignition-type accuracy", "cross_type.csv"),
        ("Permutation importance", "importance.csv"),
        ("Regional annual trend", "trend_grid.csv"),
        ("Climate projection", "projection_grid.csv"),
        ("Feature correlations", "pearson.csv"),
    ):
        p = cfg.path(name)
        if p.exists():
            sections.append(f"## {title}\n\n" + _markdown_table(p))
        else:
            missing.append(name)
            sections.append(f"## {title}\n\nnot run\n")

    header = "# Pipeline summary\n\n"
    if missing:
        header += "Missing artifacts: " + ", ".join(missing) + "\n\n"
    out = cfg.out_dir / "summary.md"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(header + "\n".join(sections), encoding="utf-8")
    return [out]


# --- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stormfire",
        description="storm-to-wildfire ignition pipeline",
    )
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="global seed (mandatory here or in config)")
    parser.add_argument("--workers", type=int, help="parallelism cap; never changes outputs")
    parser.add_argument("--radius-km", type=float, dest="radius_km")
    parser.add_argument("--holdover-days", type=int, dest="holdover_days")
    parser.add_argument("--holdout-year", type=int, dest="holdout_year")
    parser.add_argument("--model", choices=("logreg", "forest", "boosted"))
    parser.add_argument("--feature-set", type=int, choices=(1, 2, 3, 4, 5), dest="feature_set")
    parser.add_argument("--out", help="output directory")
    sub = parser.add_subparsers(dest="stage", required=True)
    sub.add_parser("synth", help="generate a synthetic world")
    for name in ("label", "features"):
        p = sub.add_parser(name, help=f"{name} stage")
        p.add_argument("--mode", choices=("lightning", "anthropogenic"), default="lightning")
    for name in ("train", "eval", "ablate", "cross", "trend", "project", "report"):
        sub.add_parser(name, help=f"{name} stage")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = _LOG_LEVELS.get(os.environ.get("PIPELINE_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    stages = {
        "synth": lambda: stage_synth(cfg),
        "label": lambda: stage_label(cfg, getattr(args, "mode", "lightning")),
        "features": lambda: stage_features(cfg, getattr(args, "mode", "lightning")),
        "train": lambda: stage_train(cfg),
        "eval": lambda: stage_eval(cfg),
        "ablate": lambda: stage_ablate(cfg),
        "cross": lambda: stage_cross(cfg),
        "trend": lambda: stage_trend(cfg),
        "project": lambda: stage_project(cfg),
        "report": lambda: stage_report(cfg),
    }
    try:
        written = stages[args.stage]()
    except SystemExit as exc:
        print(f"{args.stage}: error: {exc}", file=sys.stderr)
        return 1
    except (ingest.IngestError, ValueError) as exc:
        print(f"{args.stage}: error: {exc}", file=sys.stderr)
        return 1
    _announce(args.stage, written)
    return 0


if __name__ == "__main__":
    sys.exit(main())
