"""Walk through the estimation pipeline on a synthetic network with known elasticities.

    python demos/elasticity_walkthrough.py [n_routes] [n_trees]

Generates per-direction demand, compares pooled OLS specifications with the
model-tree ensemble, then turns the recovered elasticities into fare advice.
"""
import sys
import time

import numpy as np

from raildemand.design import build_design_matrix
from raildemand.elasticity import elasticity_distribution, group_elasticity
from raildemand.forest import ForestConfig, cv_r2, fit_forest, variable_family, variable_importance
from raildemand.linreg import fit_ols
from raildemand.pricing import recommend, summary_text
from raildemand.synth import TABLE_ELASTICITY, generate, paper_calibrated_preset

n_routes = int(sys.argv[1]) if len(sys.argv) > 1 else 300
n_trees = int(sys.argv[2]) if len(sys.argv) > 2 else 40

ds, truth = generate(paper_calibrated_preset(seed=0, n_routes=n_routes))
full = ds.subset((ds.records["fare_category"] == "FullSingle").to_numpy())
print(f"{len(ds)} monthly records, {len(full)} of them full fare, {len(ds.routes)} routes")

# Pooled regressions: one elasticity for everyone
y = full.records["log_tickets"].to_numpy()
for spec in ("I", "II", "III", "IV"):
    fit = fit_ols(build_design_matrix(full, spec), y)
    lo, hi = fit.confint("log_real_fare")
    print(f"  spec {spec:3s} alpha {fit['log_real_fare']:+.3f}  [{lo:+.3f}, {hi:+.3f}]  r2 {fit.r2:.3f}")
pooled_r2 = fit.r2

t0 = time.perf_counter()
forest = fit_forest(full, ForestConfig(n_trees=n_trees, seed=0))
print(f"\n{n_trees} model trees in {time.perf_counter() - t0:.1f}s; "
      f"cv_r2 {cv_r2(forest):.3f} vs pooled r2 {pooled_r2:.3f}")

imp = variable_importance(forest).grouped(variable_family)
print("split share by variable family:")
for name, share in imp.ranked()[:5]:
    print(f"  {name:24s} {share:6.1%}")

rep = elasticity_distribution(forest, full)
groups = group_elasticity(rep, full)
print(f"\nmean elasticity {rep.mean:+.3f}; elastic {rep.shares['elastic']:.1%} "
      f"(truth {truth.elastic_share((truth.table['fare_category'] == 'FullSingle').to_numpy()):.1%})")
print(f"{'direction':22s} {'estimate':>9s} {'truth':>7s}")
for d, a in TABLE_ELASTICITY.items():
    print(f"{d:22s} {groups.mean(d):+9.3f} {a:+7.2f}")
print()
print(groups.layout().to_string())

# Fare advice for the latest year, within +-10% of today's mean fare per direction
last = full.records["year"] == full.records["year"].max()
fares = full.records[last].groupby("direction")["nominal_fare"].mean()
elast = {d: groups.mean(d) for d in fares.index}
bounds = {d: (0.9 * f, 1.1 * f) for d, f in fares.items()}
print()
print(summary_text(recommend(elast, fares.to_dict(), bounds)), end="")
print(f"records with estimate within 0.1 of truth: "
      f"{np.mean(np.abs(rep.values - truth.elasticity[(truth.table['fare_category'] == 'FullSingle').to_numpy()]) < 0.1):.1%}")
