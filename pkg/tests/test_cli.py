import hashlib
import json
from pathlib import Path

from stormfire.cli import main


def _cfg_file(tmp_path, **extra):
    cfg = {
        "seed": 11,
        "out_dir": str(tmp_path / "out"),
        "synth": {"n_cells": 9, "n_days": 260, "storm_rate": 0.08},
        "model": {"kind": "boosted", "hyper": {"rounds": 15, "max_depth": 3}},
        "climate": {"trend_samples": 400, "delta": {"rh": -5.0, "t": 2.0, "prec": -0.3}},
    }
    cfg.update(extra)
    p = tmp_path / "run.json"
    p.write_text(json.dumps(cfg))
    return p, Path(cfg["out_dir"])


def test_seed_is_mandatory(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "synth"]) == 2
    assert "seed" in capsys.readouterr().err


def test_config_errors_name_the_field(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"seed": 1, "feature_set": 9}))
    assert main(["--config", str(p), "synth"]) == 2
    assert "feature_set" in capsys.readouterr().err

    p.write_text(json.dumps({"seed": 1, "labeling": {"radius_km": -4.0}}))
    assert main(["--config", str(p), "label"]) == 2
    assert "labeling" in capsys.readouterr().err

    p.write_text(json.dumps({"seed": 1, "synth": {"bogus_knob": 3}}))
    assert main(["--config", str(p), "synth"]) == 2
    assert "synth.bogus_knob" in capsys.readouterr().err


def test_eval_before_train_fails_cleanly(tmp_path, capsys):
    cfg, out = _cfg_file(tmp_path)
    assert main(["--config", str(cfg), "synth"]) == 0
    assert main(["--config", str(cfg), "eval"]) == 1
    assert "model file not found" in capsys.readouterr().err


def test_label_requires_inputs(tmp_path, capsys):
    cfg, out = _cfg_file(tmp_path)
    assert main(["--config", str(cfg), "label"]) == 1
    assert "fires table not found" in capsys.readouterr().err


def test_end_to_end_smoke(tmp_path, capsys):
    cfg, out = _cfg_file(tmp_path)
    for stage in ("synth", "label", "features", "train", "eval", "report"):
        assert main(["--config", str(cfg), stage]) == 0, stage
        assert f"{stage}: wrote" in capsys.readouterr().out
    metrics = json.loads((out / "metrics.json").read_text())
    assert 0.0 <= metrics["test"]["accuracy"] <= 1.0
    assert metrics["test"]["confusion"]["tp"] >= 0
    assert (out / "importance.csv").exists()
    assert (out / "pearson.csv").exists()
    summary = (out / "summary.md").read_text()
    assert "Model metrics" in summary
    assert "not run" in summary  # ablation etc. were not executed


def test_trend_and_project_stages(tmp_path):
    cfg, out = _cfg_file(tmp_path)
    for stage in ("synth", "label", "features", "train", "trend", "project"):
        assert main(["--config", str(cfg), stage]) == 0, stage
    trend = (out / "trend_grid.csv").read_text().splitlines()
    assert trend[0] == "region_row,region_col,mean_annual_diff,n_years,n_samples"
    proj = (out / "projection_grid.csv").read_text().splitlines()
    assert proj[0] == "region_row,region_col,risk_base,risk_projected,ratio"
    assert len(proj) >= 2


def test_flag_overrides_config(tmp_path, capsys):
    cfg, out = _cfg_file(tmp_path)
    assert main(["--config", str(cfg), "synth"]) == 0
    assert main(["--config", str(cfg), "--holdout-year", "2020", "label"]) == 0
    capsys.readouterr()
    labeled = (out / "labeled.csv").read_text().splitlines()[1:]
    for line in labeled:
        date_s, split = line.split(",")[2], line.split(",")[5]
        assert (date_s.startswith("2020")) == (split == "holdout")


def test_rerun_same_seed_is_byte_identical(tmp_path):
    cfg, out = _cfg_file(tmp_path)
    digests = []
    for _ in range(2):
        for stage in ("synth", "label"):
            assert main(["--config", str(cfg), stage]) == 0
        digests.append(
            {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(out.iterdir())}
        )
    assert digests[0] == digests[1]


def test_ablate_cross_and_geojson_stages(tmp_path):
    cfg, out = _cfg_file(
        tmp_path,
        synth={"n_cells": 9, "n_days": 300, "storm_rate": 0.1, "anthro_rate": 0.15},
        ablate_hyper={
            "boosted": {"rounds": 10, "max_depth": 2},
            "forest": {"n_trees": 6, "max_depth": 4},
        },
        climate={"trend_samples": 300, "geojson": True, "delta": {"t": 2.0}},
    )
    for args in (
        ["synth"], ["label"], ["label", "--mode", "anthropogenic"],
        ["features"], ["features", "--mode", "anthropogenic"],
        ["train"], ["ablate"], ["cross"], ["trend"], ["project"], ["report"],
    ):
        assert main(["--config", str(cfg)] + args) == 0, args

    ablation = (out / "ablation.csv").read_text().splitlines()
    assert ablation[0].startswith("model_number,model_kind,n_features,roc_auc,accuracy")
    assert len(ablation) == 1 + 5 * 3  # 5 feature sets x 3 model kinds

    cross = (out / "cross_type.csv").read_text().splitlines()
    assert cross[0] == "feature_config,train_on,test_on,accuracy"
    assert len(cross) == 1 + 2 * 4  # basic + full, 2x2 each

    assert (out / "trend_regions.geojson").exists()
    assert (out / "projection_regions.geojson").exists()
    summary = (out / "summary.md").read_text()
    assert "Feature ablation" in summary and "not run" not in summary.split("## Feature ablation")[1].split("##")[0]


def test_strict_projection_mode(tmp_path):
    cfg, out = _cfg_file(
        tmp_path,
        climate={
            "trend_samples": 250,
            "delta": {"rh": -10.0, "t": 3.0, "prec": -0.5},
            "recompute_dependent": True,
        },
    )
    for stage in ("synth", "label", "features", "train", "project"):
        assert main(["--config", str(cfg), stage]) == 0, stage
    lines = (out / "projection_grid.csv").read_text().splitlines()
    assert len(lines) >= 2


def test_report_without_artifacts(tmp_path):
    cfg, out = _cfg_file(tmp_path)
    assert main(["--config", str(cfg), "report"]) == 0
    text = (out / "summary.md").read_text()
    assert "Missing artifacts" in text
    assert text.count("not run") >= 6
