"""Why one elasticity is not enough: two demand regimes split on destination size.

    python demos/pooled_vs_segmented.py

Small towns respond to fares with elasticity -2, large ones with -0.5.
A pooled log-log regression averages the two; the tree ensemble finds the
break and recovers both slopes.
"""
import numpy as np

from raildemand.design import build_design_matrix, feature_frame
from raildemand.elasticity import elasticity_distribution
from raildemand.forest import ForestConfig, cv_r2, fit_forest, variable_importance
from raildemand.linreg import fit_ols
from raildemand.synth import generate, two_segment_preset

ds, truth = generate(two_segment_preset(seed=1, n_routes=150))
y = ds.records["log_tickets"].to_numpy()
pooled = fit_ols(build_design_matrix(ds, "IV"), y)
print(f"pooled spec IV: alpha {pooled['log_real_fare']:+.3f}, r2 {pooled.r2:.3f}")

forest = fit_forest(ds, ForestConfig(n_trees=30, seed=1))
print(f"forest: cv_r2 {cv_r2(forest):.3f}")
print("top split variables:", ", ".join(f"{k} {v:.0%}" for k, v in variable_importance(forest).ranked()[:3]))

e = elasticity_distribution(forest, ds).values
big = feature_frame(ds)["d_population"].to_numpy() > 10_000
for label, m in (("destination <= 10k", ~big), ("destination > 10k", big)):
    print(f"{label:20s} n={m.sum():5d}  mean estimate {e[m].mean():+.3f}  truth {truth.elasticity[m][0]:+.1f}  "
          f"10-90% [{np.quantile(e[m], 0.1):+.2f}, {np.quantile(e[m], 0.9):+.2f}]")
