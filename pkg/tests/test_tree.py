import json

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raildemand.data import DIRECTIONS
from raildemand.design import feature_frame
from raildemand.linreg import ols
from raildemand.synth import Segment, SynthConfig, generate
from raildemand.tree import (ModelTree, TreeConfig, best_split, grow_tree, max_splits_for, predict, predict_frame,
                             split_sse)

from conftest import brute_force_split, lstsq_rss, two_regime_frame

CFG = TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=("w",))


def random_fixture(seed: int, n: int, k: int = 3) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    df = pd.DataFrame({"intercept": 1.0, "x": rng.normal(size=n)})
    for j in range(k):
        # mix of discrete and continuous candidates, with repeated values
        df[f"v{j}"] = rng.integers(0, 6, n).astype(float) if j % 2 else np.round(rng.uniform(0, 10, n), 1)
    slope = np.where(df["v0"] > 5, 2.0, -1.0)
    df["log_tickets"] = 1 + slope * df["x"] + rng.normal(0, 0.5, n)
    return df


def test_max_splits_is_ceil_cube_root():
    assert [max_splits_for(n) for n in (1, 8, 9, 27, 28, 1000, 1001, 8000)] == [1, 2, 3, 3, 4, 10, 11, 20]


def test_min_leaf_defaults_to_square_of_parameters():
    assert TreeConfig().resolve(1000, ["zone"]).min_leaf_size == 16
    with pytest.raises(ValueError):
        TreeConfig(min_leaf_size=15).resolve(1000, ["zone"])
    with pytest.raises(ValueError):
        TreeConfig(max_splits=11).resolve(1000, ["zone"])


def test_price_excluded_from_candidates_by_default():
    cols = ["log_real_fare", "zone"]
    assert TreeConfig(split_candidates=tuple(cols)).resolve(100).split_candidates == ("zone",)
    assert "log_real_fare" in TreeConfig(split_candidates=tuple(cols), allow_price_splits=True).resolve(
        100).split_candidates


# -- split_sse -------------------------------------------------------------------

def test_split_sse_exact_regimes():
    df = two_regime_frame()
    assert split_sse(df, "w", 0.0 - 1e-12, CFG) == pytest.approx(0.0, abs=1e-20)


def test_split_sse_infeasible_side():
    df = two_regime_frame()
    w_sorted = np.sort(df["w"].to_numpy())
    assert split_sse(df, "w", w_sorted[2], CFG) is None
    assert split_sse(df, "w", w_sorted[-4], CFG) is None


def test_split_sse_twelve_points_against_hand_fits():
    rng = np.random.default_rng(12)
    df = pd.DataFrame({"intercept": 1.0, "x": rng.normal(size=12), "w": np.arange(12.0)})
    df["log_tickets"] = rng.normal(size=12)
    X, y = df[["intercept", "x"]].to_numpy(), df["log_tickets"].to_numpy()
    left = df["w"].to_numpy() <= 5.5
    expected = ols(X[left], y[left]).residual_sum_squares + ols(X[~left], y[~left]).residual_sum_squares
    assert split_sse(df, "w", 5.5, CFG) == pytest.approx(expected, rel=1e-12)


# -- best_split -------------------------------------------------------------------

def test_best_split_finds_regime_boundary():
    df = two_regime_frame()
    rule = best_split(df, CFG)
    w = df["w"].to_numpy()
    expected = (w[w < 0].max() + w[w >= 0].min()) / 2
    assert rule.variable == "w"
    assert rule.threshold == pytest.approx(expected, rel=1e-12)
    root = lstsq_rss(df[["intercept", "x"]].to_numpy(), df["log_tickets"].to_numpy())
    assert rule.sse <= 1e-12 * root


def test_best_split_homogeneous_data_is_none():
    rng = np.random.default_rng(1)
    df = pd.DataFrame({"intercept": 1.0, "x": rng.normal(size=60), "w": rng.uniform(size=60)})
    df["log_tickets"] = 2 - 0.5 * df["x"]
    assert best_split(df, CFG) is None


def test_best_split_needs_two_leaves_of_records():
    df = two_regime_frame(n_per_side=30).iloc[: 2 * 4 - 1]
    assert best_split(df, CFG) is None


def test_dummy_split_at_half():
    rng = np.random.default_rng(2)
    d = np.repeat([0.0, 1.0], 20)
    x = rng.normal(size=40)
    df = pd.DataFrame({"intercept": 1.0, "x": x, "d": d, "log_tickets": np.where(d == 1, 4 * x, -x)})
    rule = best_split(df, TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=("d",)))
    assert rule.threshold == 0.5


def test_ties_go_to_first_candidate():
    df = two_regime_frame()
    df["w2"] = df["w"] * 10  # same partition order, listed second
    cfg = TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=("w", "w2"))
    assert best_split(df, cfg).variable == "w"
    cfg = TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=("w2", "w"))
    assert best_split(df, cfg).variable == "w2"


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6), st.integers(12, 120), st.integers(1, 3))
def test_best_split_matches_brute_force(seed, n, k):
    df = random_fixture(seed, n, k)
    cands = [f"v{j}" for j in range(k)]
    cfg = TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=tuple(cands))
    got = best_split(df, cfg)
    want = brute_force_split(df, ["intercept", "x"], cands, 4)
    if want is None:
        assert got is None
        return
    assert got is not None
    assert got.sse == pytest.approx(want[3], rel=1e-9, abs=1e-12)
    assert split_sse(df, got.variable, got.threshold, cfg) == pytest.approx(want[3], rel=1e-9, abs=1e-12)


# -- grow_tree -------------------------------------------------------------------

def test_single_leaf_when_min_leaf_exceeds_half():
    df = two_regime_frame()
    tree = grow_tree(df, TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=("w",), min_leaf_size=31))
    assert tree.split_count == 0
    ref = ols(df[["intercept", "x"]].to_numpy(), df["log_tickets"].to_numpy())
    np.testing.assert_allclose(tree.root.leaf.fit.coefficients, ref.coefficients, rtol=1e-12)
    r = df.iloc[5].to_dict()
    assert predict(tree, r) == pytest.approx(ref.coefficients @ [1.0, r["x"]], rel=1e-12)


def test_two_regime_tree_matches_per_regime_ols():
    df = two_regime_frame()
    tree = grow_tree(df, CFG)
    assert tree.split_count == 1
    assert tree.root.rule.variable == "w"
    np.testing.assert_allclose(tree.root.left.leaf.fit.coefficients, [0.0, 1.0], atol=1e-10)
    np.testing.assert_allclose(tree.root.right.leaf.fit.coefficients, [0.0, 3.0], atol=1e-10)
    r = {"intercept": 1.0, "x": 0.7, "w": 2.0}
    assert predict(tree, r) == pytest.approx(2.1, abs=1e-10)


def test_boundary_record_routes_left():
    df = two_regime_frame()
    tree = grow_tree(df, CFG)
    s = tree.root.rule.threshold
    assert predict(tree, {"intercept": 1.0, "x": 1.0, "w": s}) == pytest.approx(1.0, abs=1e-10)
    assert predict(tree, {"intercept": 1.0, "x": 1.0, "w": np.nextafter(s, 1)}) == pytest.approx(3.0, abs=1e-10)


def test_predict_missing_field_named():
    tree = grow_tree(two_regime_frame(), CFG)
    with pytest.raises(KeyError, match="'w'"):
        predict(tree, {"intercept": 1.0, "x": 1.0})
    with pytest.raises(KeyError, match="'x'"):
        predict(tree, {"intercept": 1.0, "w": 1.0})


def test_split_budget_at_thousand_records():
    df = random_fixture(7, 1000)
    df["log_tickets"] += np.where(df["v1"] > 2, 1.0, 0.0) * df["v2"]
    tree = grow_tree(df, TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=("v0", "v1", "v2")))
    assert tree.split_count <= 10


def test_noiseless_segments_fit_exactly():
    segs = (Segment("kungur", -2.0, 14.0, (0.1, 0.0), {"direction": ["Kungur"]}),
            Segment("rest", -0.5, 8.0, (-0.2, 0.1), {"direction": [d for d in DIRECTIONS if d != "Kungur"]}))
    ds, truth = generate(SynthConfig(seed=2, n_routes=60, years=(2015, 2016), segments=segs, noise_sigma=0.0,
                                     confounding=0.0))
    ff = feature_frame(ds)
    ff["log_tickets"] = truth.table["log_demand"].to_numpy()
    tree = grow_tree(ff, TreeConfig(split_candidates=("zone", "dir_Kungur", "d_population")))
    root = lstsq_rss(ff[list(tree.leaf_regressors)].to_numpy(), ff["log_tickets"].to_numpy())
    leaves = sum(leaf.fit.residual_sum_squares for leaf in tree.leaves())
    assert leaves <= 1e-12 * root


def _check_tree(tree: ModelTree, n: int):
    assert tree.split_count <= max_splits_for(n)
    idx = np.concatenate([leaf.record_indices for leaf in tree.leaves()])
    assert len(idx) == n and np.array_equal(np.sort(idx), np.arange(n))
    assert all(len(leaf.record_indices) >= tree.config.min_leaf_size for leaf in tree.leaves())
    assert all(leaf.fit.n_obs == len(leaf.record_indices) for leaf in tree.leaves())
    totals = [before for _, _, before, _ in tree.split_log] + [tree.split_log[-1][3]] if tree.split_log else []
    assert all(b >= a - 1e-9 * max(abs(b), 1) for b, a in zip(totals, totals[1:]))


@settings(max_examples=20)
@given(st.integers(0, 10 ** 6), st.integers(20, 400))
def test_growth_invariants(seed, n):
    df = random_fixture(seed, n)
    tree = grow_tree(df, TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=("v0", "v1", "v2")))
    _check_tree(tree, n)
    leaf_total = sum(leaf.fit.residual_sum_squares for leaf in tree.leaves())
    if tree.split_log:
        assert leaf_total == pytest.approx(tree.split_log[-1][3], rel=1e-8, abs=1e-10)


def test_deterministic_split_log():
    df = random_fixture(3, 300)
    cfg = TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=("v0", "v1", "v2"))
    assert grow_tree(df, cfg, rng_seed=1).split_log == grow_tree(df, cfg, rng_seed=1).split_log


def test_every_record_reaches_its_leaf():
    df = random_fixture(4, 300)
    tree = grow_tree(df, TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=("v0", "v1", "v2")))
    pred = predict_frame(tree, df)
    for leaf in tree.leaves():
        rows = leaf.record_indices
        X = df[["intercept", "x"]].to_numpy()[rows]
        np.testing.assert_allclose(pred[rows], X @ leaf.fit.coefficients, rtol=1e-12)


def test_json_round_trip():
    df = random_fixture(5, 300)
    tree = grow_tree(df, TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=("v0", "v1", "v2")))
    d = json.loads(json.dumps(tree.to_dict()))
    assert {"variable", "threshold", "left", "right"} <= set(d["root"])
    back = ModelTree.from_dict(d)
    np.testing.assert_array_equal(predict_frame(back, df), predict_frame(tree, df))
    assert back.split_log == [tuple(e) for e in tree.split_log]
