from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from hypothesis import settings

from raildemand.data import Dataset
from raildemand.forest import BaggedForest, ForestConfig
from raildemand.linreg import OlsFit
from raildemand.synth import SynthConfig, generate, paper_calibrated_preset
from raildemand.tree import DEFAULT_LEAF_REGRESSORS, LeafModel, ModelTree, Node, TreeConfig

ZONES = (13.0, 25.0, 38.0, 50.0, 63.0)

STATIONS_CSV = """\
id,name,direction,lat,lon,population_5km,dist_settlement1_km,dist_settlement2_km,dist_bus_km,dist_highway_km,summer_gardens,is_perm,is_agglomeration,line_km
P1,Perm II,Western,58.00,56.20,1000000,0.5,2,0.2,0.3,0,1,1,1
W1,Mulyanka,Western,58.02,55.95,5000,1,4,0.5,1,1,0,1,20
W2,Overyata,Western,58.05,55.60,80,2,6,,2,0,0,0,45
K1,Kungur,Kungur,57.43,56.94,65000,0.3,8,0.2,0.4,0,0,0,30
"""

# 10 raw tickets: routes P1->W1 and P1->K1, months 2016-01 and 2016-02
TICKETS_CSV = """\
origin_id,destination_id,date,fare_category,quantity,nominal_fare
P1,W1,2016-01-03,FullSingle,1,52
P1,W1,2016-01-17,FullSingle,2,52
P1,W1,2016-02-01,FullSingle,1,52
P1,W1,2016-02-20,FullSingle,1,52
P1,K1,2016-01-05,FullSingle,1,78
P1,K1,2016-01-06,FullSingle,1,78
P1,K1,2016-01-30,FullSingle,1,78
P1,K1,2016-02-02,FullSingle,1,78
P1,K1,2016-02-14,FullSingle,0,78
P1,K1,2016-02-27,FullSingle,1,78
"""

TARIFFS_CSV = """\
year,zone,full_fare
2016,1,26
2016,2,52
2016,3,78
2016,4,98
2016,5,120
"""

CPI_CSV = """\
year,month,index
2016,1,100
2016,2,100.5
2016,3,101
"""

ZONES_CSV = "zone,upper_km\n" + "".join(f"{i},{z:g}\n" for i, z in enumerate(ZONES, 1))


@pytest.fixture
def csv_dir(tmp_path) -> Path:
    """A hand-counted input bundle: 4 stations, 2 routes, 2 months, 10 tickets."""
    d = tmp_path / "inputs"
    d.mkdir()
    for name, text in (("stations.csv", STATIONS_CSV), ("tickets.csv", TICKETS_CSV), ("tariffs.csv", TARIFFS_CSV),
                       ("cpi.csv", CPI_CSV), ("zones.csv", ZONES_CSV)):
        (d / name).write_text(text)
    return d


@pytest.fixture(scope="session")
def small_synth():
    """720 records over six directions and two years; one elasticity of -1.5."""
    return generate(SynthConfig(seed=1, n_routes=30, years=(2015, 2016)))


@pytest.fixture(scope="session")
def calibrated_noiseless():
    """Per-direction elasticities with no noise: 9000 full-fare records and a 10-tree forest."""
    from raildemand.elasticity import elasticity_distribution, group_elasticity
    from raildemand.forest import fit_forest

    ds, truth = generate(paper_calibrated_preset(seed=0, n_routes=150, noise_sigma=0.0, children_share=0.0))
    forest = fit_forest(ds, ForestConfig(n_trees=10, seed=0))
    report = elasticity_distribution(forest, ds)
    return ds, truth, forest, report, group_elasticity(report, ds)


def leaf_fit(coefs: dict[str, float], names=DEFAULT_LEAF_REGRESSORS, n_obs: int = 100) -> OlsFit:
    b = np.array([coefs.get(n, 0.0) for n in names])
    return OlsFit(list(names), b, np.zeros(len(names)), 0.5, 0.5, n_obs, len(names), 1.0)


def single_leaf_tree(coefs: dict[str, float], names=DEFAULT_LEAF_REGRESSORS) -> ModelTree:
    cfg = TreeConfig(leaf_regressors=tuple(names), split_candidates=(), max_splits=0)
    return ModelTree(Node(leaf=LeafModel(leaf_fit(coefs, names))), cfg, 0, [])


def forest_of(trees: list[ModelTree], n_obs: int = 4, memberships=None, columns=None) -> BaggedForest:
    if memberships is None:
        memberships = [np.arange(0, dtype=np.int64) for _ in trees]
    cfg = ForestConfig(n_trees=len(trees), subsample_fraction=1.0)
    return BaggedForest(list(trees), [np.asarray(m) for m in memberships], cfg, n_obs, columns or {})


def record(log_real_fare: float = 3.0, month: int = 1, **extra) -> dict[str, float]:
    r = {"intercept": 1.0, "log_real_fare": log_real_fare,
         "season_cos": float(np.cos(2 * np.pi * (month - 1) / 12)),
         "season_sin": float(np.sin(2 * np.pi * (month - 1) / 12))}
    r.update(extra)
    return r


def two_regime_frame(n_per_side: int = 30, seed: int = 0) -> pd.DataFrame:
    """y = x for w < 0 and y = 3x for w >= 0, no noise."""
    rng = np.random.default_rng(seed)
    w = np.concatenate([-rng.uniform(0.1, 5, n_per_side), rng.uniform(0, 5, n_per_side)])
    x = rng.normal(0, 1, 2 * n_per_side)
    y = np.where(w < 0, x, 3 * x)
    return pd.DataFrame({"intercept": 1.0, "x": x, "w": w, "log_tickets": y})


# Ticket counts per direction and year, 2013 and 2014
TABLE_COUNTS = {
    "Western": (514382, 578336),
    "Kungur": (242235, 285495),
    "Agglomeration": (385072, 493979),
}


def counts_dataset(counts: dict[str, tuple[int, ...]], first_year: int = 2013) -> Dataset:
    """One record per (direction, year) holding the given ticket count."""
    rows = []
    for i, (direction, per_year) in enumerate(counts.items()):
        for k, n in enumerate(per_year):
            rows.append((f"S{i}", f"T{i}", first_year + k, 1, "FullSingle", n, np.log(n), 26.0, 26.0,
                         np.log(26.0), 10.0, 1, direction))
    rec = pd.DataFrame(rows, columns=["origin", "destination", "year", "month", "fare_category", "tickets",
                                      "log_tickets", "nominal_fare", "real_fare", "log_real_fare", "distance_km",
                                      "zone", "direction"])
    return Dataset(rec, {}, (13.0,), {(first_year, 1): 100.0}, (first_year, 1))


settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


def lstsq_rss(X: np.ndarray, y: np.ndarray) -> float:
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    r = y - X @ coef
    return float(r @ r)


def brute_force_split(frame: pd.DataFrame, leaf: list[str], candidates: list[str], min_leaf: int,
                      response: str = "log_tickets", rel_tol: float = 1e-9):
    """Every (variable, midpoint) pair scored by two independent lstsq fits.

    Returns (variable, lower value, upper value, sse) for the best split, where
    the threshold lies between the two values, or None if no split improves
    the unsplit fit by more than ``rel_tol`` times its RSS.
    """
    X = frame[leaf].to_numpy(float)
    y = frame[response].to_numpy(float)
    root = lstsq_rss(X, y)
    best = None
    for var in candidates:
        v = frame[var].to_numpy(float)
        u = np.unique(v)
        for lo, hi in zip(u[:-1], u[1:]):
            left = v <= lo
            if left.sum() < min_leaf or (~left).sum() < min_leaf:
                continue
            sse = lstsq_rss(X[left], y[left]) + lstsq_rss(X[~left], y[~left])
            if best is None or sse < best[3]:
                best = (var, lo, hi, sse)
    if best is None or root - best[3] <= rel_tol * root:
        return None
    return best


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """Record one acceptance line, then assert it. Lines are printed in the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE, {})

    def check(number: int, ok: bool, detail: str):
        lines[number] = f"acceptance {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        assert ok, detail

    return check


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
