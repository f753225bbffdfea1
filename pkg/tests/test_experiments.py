import numpy as np
import pytest

from stormfire.models import (
    BoostConfig,
    DesignMatrix,
    ForestConfig,
    ablation_grid,
    cross_type,
    evaluate,
    load_model,
    permutation_importance,
    save_model,
    train_boosted,
    train_forest,
    train_logistic,
    train_model,
    train_tree,
)


def _dm(rng, n=600, signal_col=2, names=("a", "b", "c")):
    X = rng.normal(size=(n, len(names)))
    logit = 4.0 * X[:, signal_col]
    y = rng.random(n) < 1.0 / (1.0 + np.exp(-logit))
    split = np.where(np.arange(n) % 5 == 0, "test", "train")
    return DesignMatrix(X, y, list(names), split)


def test_design_matrix_validation():
    with pytest.raises(ValueError, match="missing entry"):
        DesignMatrix.from_rows([{"a": None, "label": True, "split": "train"}], ["a"])
    with pytest.raises(ValueError, match="unique"):
        DesignMatrix(np.ones((2, 2)), [True, False], ["x", "x"], ["train", "test"])
    dm = DesignMatrix.from_rows(
        [{"a": 1.0, "label": True, "split": "train"}, {"a": 2.0, "label": False, "split": "test"}],
        ["a"],
    )
    assert dm.n == 2 and dm.names == ["a"]
    with pytest.raises(ValueError, match="no rows in split"):
        dm.only_split("holdout")


def test_train_model_dispatch():
    rng = np.random.default_rng(0)
    dm = _dm(rng)
    for kind, hyper in (
        ("logreg", {}),
        ("forest", {"n_trees": 5, "max_depth": 4}),
        ("boosted", {"rounds": 5, "max_depth": 2}),
    ):
        model = train_model(kind, dm, hyper, seed=1)
        test = dm.only_split("test")
        assert evaluate(model, test.X, test.y).accuracy > 0.8
    with pytest.raises(ValueError, match="unknown model kind"):
        train_model("svm", dm)


def test_ablation_grid_shape_and_signal_group_gain():
    rng = np.random.default_rng(5)
    dm = _dm(rng, n=900, signal_col=2)
    feature_sets = [(1, ["a", "b"]), (2, ["a", "b", "c"])]
    rows = ablation_grid(
        dm,
        feature_sets,
        model_kinds=("logreg", "boosted"),
        seed=0,
        hyper_by_kind={"boosted": {"rounds": 25, "max_depth": 3}},
    )
    assert len(rows) == 4  # |configs| x |kinds|
    acc = {(r["model_number"], r["model_kind"]): r["accuracy"] for r in rows}
    assert acc[(2, "boosted")] > acc[(1, "boosted")] + 0.2  # planted group helps
    assert all(set(r) >= {"model_number", "model_kind", "accuracy", "roc_auc"} for r in rows)


def test_cross_type_no_shift_control():
    rng = np.random.default_rng(9)
    a = _dm(rng, n=700)
    b = _dm(rng, n=700)  # same generating law: no covariate shift
    rows = cross_type(
        a, b, [("full", ["a", "b", "c"])], model_kind="boosted",
        hyper={"rounds": 20, "max_depth": 3}, seed=0,
    )
    assert len(rows) == 4
    acc = {(r["train_on"], r["test_on"]): r["accuracy"] for r in rows}
    # identical distributions: off-diagonal within noise of diagonal
    assert abs(acc[("lightning", "anthropogenic")] - acc[("lightning", "lightning")]) < 0.1
    assert abs(acc[("anthropogenic", "lightning")] - acc[("anthropogenic", "anthropogenic")]) < 0.1


def test_permutation_importance_finds_planted_column():
    rng = np.random.default_rng(3)
    dm = _dm(rng, n=800, signal_col=1)
    model = train_boosted(
        dm.only_split("train").X, dm.only_split("train").y, BoostConfig(rounds=30, max_depth=3)
    )
    test = dm.only_split("test")
    drops = permutation_importance(model, test.X, test.y, seed=4, repeats=5)
    assert int(np.argmax(drops)) == 1
    assert drops[1] > 0.2


def test_permutation_importance_unused_feature_zero_drop():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(400, 2))
    y = X[:, 0] > 0
    tree = train_tree(X, y)  # splits only on column 0

    def used(node, out=set()):
        if not node.is_leaf:
            out.add(node.feature)
            used(node.left, out)
            used(node.right, out)
        return out

    assert used(tree.root) == {0}
    drops = permutation_importance(tree, X, y, seed=0, repeats=3)
    assert drops[1] == 0.0
    assert drops[0] > 0.3


def test_permutation_importance_deterministic():
    rng = np.random.default_rng(8)
    dm = _dm(rng, n=300)
    model = train_logistic(dm.X, dm.y)
    a = permutation_importance(model, dm.X, dm.y, seed=11, repeats=4)
    b = permutation_importance(model, dm.X, dm.y, seed=11, repeats=4)
    assert np.array_equal(a, b)


def test_model_io_round_trip(tmp_path):
    rng = np.random.default_rng(12)
    dm = _dm(rng, n=300)
    train = dm.only_split("train")
    models = {
        "logreg": train_logistic(train.X, train.y, names=dm.names),
        "forest": train_forest(train.X, train.y, ForestConfig(n_trees=6, max_depth=4), seed=0, names=dm.names),
        "boosted": train_boosted(train.X, train.y, BoostConfig(rounds=4, max_depth=2), names=dm.names),
    }
    for kind, model in models.items():
        path = tmp_path / f"{kind}.json"
        save_model(path, model)
        clone = load_model(path)
        assert np.array_equal(model.predict_proba(dm.X), clone.predict_proba(dm.X))
        assert clone.names == dm.names


def test_model_io_rejects_unknown_version(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"format_version": 99, "kind": "logreg"}')
    with pytest.raises(ValueError, match="format_version"):
        load_model(p)
