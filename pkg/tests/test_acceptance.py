"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that pytest prints in its terminal summary.
Run alone with ``pytest tests/test_acceptance.py -v``. The whole file takes
about five minutes on one CPU, most of it in criteria 5, 7 and 8.
"""
import time

import numpy as np
import pandas as pd
import pytest

from raildemand.cli import main
from raildemand.describe import share_growth_table
from raildemand.design import build_design_matrix
from raildemand.elasticity import elasticity_distribution, group_elasticity
from raildemand.forest import ForestConfig, cv_r2, fit_forest, variable_importance
from raildemand.linreg import fit_ols
from raildemand.pricing import Action, optimal_tariff, recommend_direction
from raildemand.synth import (POOLED_ELASTICITY, TABLE_ELASTICITY, SynthConfig, confounded_preset, generate,
                              paper_calibrated_preset, single_segment_preset, two_segment_preset)
from raildemand.tree import TreeConfig, best_split, grow_tree, max_splits_for

from conftest import TABLE_COUNTS, brute_force_split, counts_dataset

pytestmark = pytest.mark.acceptance


def test_01_ols_recovery(verdict):
    ds, _ = generate(single_segment_preset(seed=0))
    t0 = time.perf_counter()
    fit = fit_ols(build_design_matrix(ds, "IV"), ds.records["log_tickets"].to_numpy())
    elapsed = time.perf_counter() - t0
    a = fit["log_real_fare"]
    ok = abs(a - POOLED_ELASTICITY) <= 0.05 and elapsed < 5.0
    verdict(1, ok, f"N={len(ds)} alpha_hat={a:.4f} truth={POOLED_ELASTICITY} fit {elapsed:.2f}s")


def test_02_omitted_variable_bias(verdict):
    hits = 0
    for seed in range(100):
        ds, _ = generate(confounded_preset(seed=seed))
        y = ds.records["log_tickets"].to_numpy()
        a1 = fit_ols(build_design_matrix(ds, "I"), y)["log_real_fare"]
        a2 = fit_ols(build_design_matrix(ds, "II"), y)["log_real_fare"]
        hits += abs(a1) < abs(a2)
    verdict(2, hits >= 95, f"|alpha_I| < |alpha_II| in {hits}/100 seeds")


def random_split_fixture(seed: int) -> tuple[pd.DataFrame, list[str]]:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(16, 201))
    k = int(rng.integers(1, 4))
    df = pd.DataFrame({"intercept": 1.0, "x": rng.normal(size=n)})
    for j in range(k):
        df[f"v{j}"] = rng.integers(0, 8, n).astype(float) if j % 2 else np.round(rng.uniform(0, 10, n), 2)
    slope = np.where(df["v0"] > rng.uniform(2, 8), 2.0, -1.0)
    df["log_tickets"] = 1 + slope * df["x"] + rng.normal(0, 0.5, n)
    return df, [f"v{j}" for j in range(k)]


def test_03_split_search_oracle(verdict):
    mismatches, elapsed = [], 0.0
    for seed in range(50):
        df, cands = random_split_fixture(seed)
        cfg = TreeConfig(leaf_regressors=("intercept", "x"), split_candidates=tuple(cands))
        t0 = time.perf_counter()
        got = best_split(df, cfg)
        elapsed += time.perf_counter() - t0
        want = brute_force_split(df, ["intercept", "x"], cands, cfg.resolve(len(df)).min_leaf_size)
        if want is None or got is None:
            if (want is None) != (got is None):
                mismatches.append(seed)
            continue
        var, lo, hi, sse = want
        same = got.variable == var and lo < got.threshold < hi and abs(got.sse - sse) <= 1e-9 * max(sse, 1e-300)
        if not same:
            mismatches.append(seed)
    ok = not mismatches and elapsed < 10.0
    verdict(3, ok, f"50 fixtures, mismatches {mismatches}, best_split total {elapsed:.2f}s")


def stopping_fixture(seed: int, n: int) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    df = pd.DataFrame({"intercept": 1.0, "x1": rng.normal(size=n), "x2": rng.normal(size=n),
                       "x3": rng.normal(size=n), "v0": rng.uniform(0, 10, n), "v1": rng.integers(0, 5, n),
                       "v2": rng.normal(size=n)})
    slope = np.where(df["v0"] > 5, 1.5, -1.0) + 0.5 * df["v1"]
    df["log_tickets"] = slope * df["x1"] + np.sin(df["v2"]) + rng.normal(0, 0.3, n)
    return df


def test_04_stopping_rule(verdict):
    cfg = TreeConfig(leaf_regressors=("intercept", "x1", "x2", "x3"), split_candidates=("v0", "v1", "v2"))
    bad, most = [], {}
    for n in (27, 1000, 8000):
        for seed in range(20):
            tree = grow_tree(stopping_fixture(seed, n), cfg)
            sizes = [len(leaf.record_indices) for leaf in tree.leaves()]
            if tree.split_count > max_splits_for(n) or min(sizes) < 16:
                bad.append((n, seed))
            most[n] = max(most.get(n, 0), tree.split_count)
    verdict(4, not bad, f"violations {bad}; max splits seen {most} (caps 3, 10, 20), min leaf 16")


def test_05_oob_arithmetic(verdict):
    ds, _ = generate(SynthConfig(seed=5, n_routes=42, years=(2015, 2016)))
    ds = ds.subset(np.arange(len(ds)) < 1000)
    forest = fit_forest(ds, ForestConfig(n_trees=2000, subsample_fraction=0.75, seed=5))
    mean = float(forest.oob_counts().mean())
    verdict(5, len(ds) == 1000 and abs(mean - 500) <= 30, f"N={len(ds)} B=2000 mean OOB trees {mean:.2f}")


def test_06_heterogeneity_payoff(verdict):
    gaps = []
    for seed in range(5):
        ds, _ = generate(two_segment_preset(seed=seed))
        forest = fit_forest(ds, ForestConfig(n_trees=50, seed=seed))
        pooled = fit_ols(build_design_matrix(ds, "IV"), ds.records["log_tickets"].to_numpy()).r2
        gaps.append(cv_r2(forest) - pooled)
    verdict(6, min(gaps) >= 0.05, f"cv_r2 - pooled r2 over 5 seeds: {', '.join(f'{g:.3f}' for g in gaps)}")


def test_07_importance(verdict):
    first, worst_sum = 0, 0.0
    for seed in range(100):
        ds, _ = generate(two_segment_preset(seed=seed, n_routes=100))
        imp = variable_importance(fit_forest(ds, ForestConfig(n_trees=10, seed=seed)))
        worst_sum = max(worst_sum, abs(sum(imp.entries.values()) - 1.0))
        first += imp.top() == "d_population"
    ok = worst_sum <= 1e-12 and first >= 95
    verdict(7, ok, f"d_population ranked first in {first}/100 seeds; max |sum - 1| = {worst_sum:.1e}")


def test_08_elasticity_recovery(verdict):
    t0 = time.perf_counter()
    ds, truth = generate(paper_calibrated_preset(seed=0, n_routes=834))
    full = (ds.records["fare_category"] == "FullSingle").to_numpy()
    sub = ds.subset(full)
    forest = fit_forest(sub, ForestConfig(n_trees=200, seed=0))
    rep = elasticity_distribution(forest, sub)
    groups = group_elasticity(rep, sub)
    elapsed = time.perf_counter() - t0
    errors = {d: groups.mean(d) - a for d, a in TABLE_ELASTICITY.items()}
    share = rep.shares["elastic"]
    ok = max(abs(e) for e in errors.values()) <= 0.15 and abs(share - 0.75) <= 0.05 and elapsed < 300
    worst = max(errors, key=lambda d: abs(errors[d]))
    verdict(8, ok, f"N={len(sub)} B=200 worst group error {worst} {errors[worst]:+.3f}; "
                   f"elastic share {share:.3f}; {elapsed:.0f}s")


def test_09_pricing_logic(verdict):
    directions = (recommend_direction(-1.75), recommend_direction(-0.89), recommend_direction(-1.0))
    rng = np.random.default_rng(9)
    far = 0
    for _ in range(1000):
        A, alpha, c = rng.uniform(0.1, 100), rng.uniform(-4, 0), rng.uniform(0, 20) * (rng.random() < 0.5)
        lo = rng.uniform(1, 50)
        hi = lo + rng.uniform(1, 50)
        grid = np.linspace(lo, hi, 100_000)
        best = grid[np.argmax((grid - c) * A * grid ** alpha)]
        far += abs(optimal_tariff(A, alpha, (lo, hi), c) - best) > (hi - lo) / (len(grid) - 1)
    ok = directions == (Action.REDUCE, Action.INCREASE, Action.HOLD) and far == 0
    verdict(9, ok, f"directions {[d.value for d in directions]}; {far}/1000 optima off the grid oracle")


def test_10_descriptive_table(verdict):
    t = share_growth_table(counts_dataset(TABLE_COUNTS), "direction")
    g = t[t.year == 2014].set_index("group")["growth_pct"].round(1)
    got = tuple(float(g[d]) for d in ("Western", "Kungur", "Agglomeration"))
    verdict(10, got == (12.4, 17.9, 28.3), f"2014 growth {got}")


def test_11_replay_determinism(verdict, tmp_path):
    (tmp_path / "synth.toml").write_text('[synth]\npreset = "two_segment"\npreset_args = {n_routes = 30}\n')
    d = {k: str(tmp_path / k) for k in ("bundle", "archive", "fit", "el", "price")}
    runs = [
        ["synth", "--config", str(tmp_path / "synth.toml"), "--seed", "2", "--out", d["bundle"]],
        ["ingest", d["bundle"], "--out", d["archive"]],
        ["describe", d["archive"], "--grouping", "settlement_pair", "--out", str(tmp_path / "describe.csv")],
        ["ols", d["archive"], "--spec", "all", "--out", str(tmp_path / "ols.json")],
        ["fit", d["archive"], "--trees", "12", "--seed", "4", "--out", d["fit"]],
        ["elasticity", d["archive"], "--forest", d["fit"], "--out", d["el"]],
        ["price", d["archive"], "--forest", d["fit"], "--bounds", d["bundle"] + "/rst_bounds.csv", "--out", d["price"]],
    ]
    manifests = ["bundle/run_manifest.json", "archive/run_manifest.json", "describe.csv.manifest.json",
                 "ols.json.manifest.json", "fit/run_manifest.json", "el/run_manifest.json", "price/run_manifest.json"]
    failed = []
    for argv, m in zip(runs, manifests):
        if main(argv + ["--threads", "1"]) != 0:
            failed.append(f"{argv[0]} run")
            continue
        for threads in (2, 4):
            out = tmp_path / "replay" / f"{argv[0]}_{threads}"
            if main(["replay", str(tmp_path / m), "--threads", str(threads), "--out", str(out)]) != 0:
                failed.append(f"{argv[0]} @ {threads} threads")
    verdict(11, not failed, f"7 commands replayed at 2 and 4 threads; failures: {failed or 'none'}")
