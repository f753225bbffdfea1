import hashlib
from datetime import date

import pytest

from stormfire.geo import CellId
from stormfire.labeler import LIGHTNING, LabelingConfig, build_dataset
from stormfire.synth import PlantedLaw, SynthConfig, synth_world, write_world


def _dir_digest(d):
    out = {}
    for p in sorted(d.iterdir()):
        out[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


def test_same_seed_gives_identical_bytes(tmp_path):
    cfg = SynthConfig(seed=99, n_cells=9, n_days=200)
    a = tmp_path / "a"
    b = tmp_path / "b"
    write_world(synth_world(cfg), a)
    write_world(synth_world(cfg), b)
    assert _dir_digest(a) == _dir_digest(b)


def test_different_seed_changes_world():
    w1 = synth_world(SynthConfig(seed=1, n_cells=9, n_days=200))
    w2 = synth_world(SynthConfig(seed=2, n_cells=9, n_days=200))
    assert w1.thunder != w2.thunder


def test_fire_base_rate_zero_means_no_fires():
    world = synth_world(SynthConfig(seed=5, n_cells=9, n_days=200, fire_base_rate=0.0))
    assert world.fires == []
    assert world.truth == []
    assert len(world.thunder) > 0  # storms still happen


def test_world_tables_are_complete_and_consistent():
    cfg = SynthConfig(seed=3, n_cells=9, n_days=150)
    world = synth_world(cfg)
    assert len(world.weather) == 9 * 150
    assert len(world.fwi) == 9 * 150
    assert len(world.static) == 9
    assert all(r.thunder_hours >= 1 for r in world.thunder)
    weather_cells = {w.cell for w in world.weather}
    for rec in world.thunder:
        parent = CellId(rec.cell.row // 5, rec.cell.col // 5)
        assert parent in weather_cells
    assert {t.fire_id for t in world.truth} == {f.fire_id for f in world.fires}


def test_lightning_fires_sit_inside_their_storm_cell():
    world = synth_world(SynthConfig(seed=8, n_cells=9, n_days=400))
    fires = {f.fire_id: f for f in world.fires}
    n_checked = 0
    for t in world.truth:
        if t.cause != "lightning":
            continue
        f = fires[t.fire_id]
        assert f.ignition_date == t.storm_date  # default lag 0
        res = 0.05
        assert t.storm_cell.row == int((f.ignition.lat + 90.0) // res)
        n_checked += 1
    assert n_checked > 10


def test_planted_ffmc_signal_is_monotone_across_deciles():
    cfg = SynthConfig(
        seed=21,
        n_cells=25,
        n_days=500,
        storm_rate=0.12,
        planted_coefficients=PlantedLaw(
            intercept=-1.0, ffmc=4.0, rh=0.0, prec=0.0, ndvi=0.0
        ),
    )
    world = synth_world(cfg)
    ffmc_by_key = {(r.cell, r.date): r.ffmc for r in world.fwi}
    ignited_keys = {(t.storm_cell, t.storm_date) for t in world.truth if t.cause == "lightning"}
    pairs = []
    for rec in world.thunder:
        parent = CellId(rec.cell.row // 5, rec.cell.col // 5)
        pairs.append((ffmc_by_key[(parent, rec.date)], (rec.cell, rec.date) in ignited_keys))
    pairs.sort(key=lambda x: x[0])
    assert len(pairs) > 1500
    k = len(pairs) // 10
    rates = [
        sum(1 for _, hit in pairs[i * k : (i + 1) * k] if hit) / k for i in range(10)
    ]
    assert all(b >= a for a, b in zip(rates, rates[1:]))
    assert rates[-1] > rates[0] + 0.5


@pytest.mark.parametrize("lag", [0, 3])
def test_labeler_recovers_planted_causes_exactly(lag):
    cfg = SynthConfig(seed=13, n_cells=9, n_days=300, holdover_lag_days=lag)
    world = synth_world(cfg)
    lcfg = LabelingConfig(seed=77, holdout_year=2021)
    samples = build_dataset(world.fires, world.thunder, lcfg, mode=LIGHTNING)
    got_pos = {s.origin.removeprefix("fire:") for s in samples if s.label}
    assert got_pos == world.truth_lightning_ids()
    anthro_truth = {t.fire_id for t in world.truth if t.cause == "anthropogenic"}
    assert len(anthro_truth) > 5
    got_anthro = {
        s.origin.removeprefix("fire:")
        for s in build_dataset(
            world.fires,
            world.thunder,
            lcfg,
            mode="anthropogenic",
            calm_domain=(
                [CellId(w.cell.row * 5 + 2, w.cell.col * 5 + 2) for w in world.static],
                sorted({w.date for w in world.weather})[120:],
            ),
        )
        if s.label
    }
    assert got_anthro == anthro_truth
