"""Model trees: binary partitions of the records with a least-squares demand model in every leaf.

Each split (m, s) sends records with w_m <= s left and the rest right. The
pair is chosen by exhaustive search over every candidate variable and every
midpoint between consecutive distinct values, minimising the summed residual
sum of squares of the two side regressions. Growth is best-improvement-first
under a global split budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from . import _splitscan
from .linreg import InsufficientDataError, OlsFit, ols

DEFAULT_LEAF_REGRESSORS = ("intercept", "log_real_fare", "season_cos", "season_sin")
PRICE = "log_real_fare"


def max_splits_for(n_obs: int) -> int:
    """Smallest integer k with k**3 >= n_obs (ceil of the cube root, exact for cubes)."""
    k = max(int(round(n_obs ** (1 / 3))) - 1, 0)
    while k ** 3 < n_obs:
        k += 1
    return k


@dataclass(frozen=True)
class TreeConfig:
    """Growth settings. ``None`` fields are filled from the data by :meth:`resolve`.

    max_splits defaults to ceil(N^(1/3)); min_leaf_size to the square of the
    number of leaf regressors; improvement_tolerance to 1e-9 times the root
    residual sum of squares.
    """

    leaf_regressors: tuple[str, ...] = DEFAULT_LEAF_REGRESSORS
    split_candidates: tuple[str, ...] | None = None
    max_splits: int | None = None
    min_leaf_size: int | None = None
    improvement_tolerance: float | None = None
    allow_price_splits: bool = False

    def resolve(self, n_obs: int, columns: Sequence[str] = ()) -> "TreeConfig":
        p = len(self.leaf_regressors)
        floor = max(p * p, p + 1)
        min_leaf = floor if self.min_leaf_size is None else int(self.min_leaf_size)
        if min_leaf < floor:
            raise ValueError(f"min_leaf_size={min_leaf} is below {floor} for {p} leaf regressors")
        cap = max_splits_for(n_obs)
        max_splits = cap if self.max_splits is None else int(self.max_splits)
        if max_splits > cap:
            raise ValueError(f"max_splits={max_splits} exceeds ceil(N^(1/3))={cap} for N={n_obs}")
        cands = self.split_candidates
        if cands is None:
            from .design import split_candidate_columns
            cands = tuple(split_candidate_columns(pd.DataFrame(columns=list(columns))))
        cands = tuple(cands)
        if not self.allow_price_splits and PRICE in cands:
            cands = tuple(c for c in cands if c != PRICE)
        if self.improvement_tolerance is not None and self.improvement_tolerance < 0:
            raise ValueError("improvement_tolerance must be non-negative")
        return replace(self, split_candidates=cands, max_splits=max_splits, min_leaf_size=min_leaf)

    def to_dict(self) -> dict:
        return {
            "leaf_regressors": list(self.leaf_regressors),
            "split_candidates": None if self.split_candidates is None else list(self.split_candidates),
            "max_splits": self.max_splits, "min_leaf_size": self.min_leaf_size,
            "improvement_tolerance": self.improvement_tolerance, "allow_price_splits": self.allow_price_splits,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TreeConfig":
        d = dict(d)
        d["leaf_regressors"] = tuple(d.get("leaf_regressors", DEFAULT_LEAF_REGRESSORS))
        if d.get("split_candidates") is not None:
            d["split_candidates"] = tuple(d["split_candidates"])
        return cls(**d)


@dataclass(frozen=True)
class SplitRule:
    variable: str
    threshold: float
    sse: float = math.nan

    def goes_left(self, value: float) -> bool:
        return value <= self.threshold


@dataclass
class LeafModel:
    fit: OlsFit
    record_indices: np.ndarray | None = None

    def predict_row(self, values: Sequence[float]) -> float:
        return float(np.dot(self.fit.coefficients, values))


@dataclass
class Node:
    rule: SplitRule | None = None
    left: "Node | None" = None
    right: "Node | None" = None
    leaf: LeafModel | None = None

    @property
    def is_leaf(self) -> bool:
        return self.rule is None


@dataclass
class ModelTree:
    root: Node
    config: TreeConfig
    split_count: int = 0
    split_log: list[tuple[str, float, float, float]] = field(default_factory=list)

    @property
    def leaf_regressors(self) -> tuple[str, ...]:
        return self.config.leaf_regressors

    def leaves(self) -> list[LeafModel]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node.leaf)
            else:
                stack.extend([node.right, node.left])
        return out

    def split_variables(self) -> list[str]:
        return [entry[0] for entry in self.split_log]

    def required_fields(self) -> list[str]:
        need = list(self.config.leaf_regressors)
        for v in self.split_variables():
            if v not in need:
                need.append(v)
        return need

    def to_dict(self) -> dict:
        def enc(node: Node):
            if node.is_leaf:
                f = node.leaf.fit
                d = f.to_dict()
                d["n_obs"] = f.n_obs
                return {"leaf": d}
            return {"variable": node.rule.variable, "threshold": node.rule.threshold,
                    "left": enc(node.left), "right": enc(node.right)}

        return {"config": self.config.to_dict(), "split_count": self.split_count,
                "split_log": [list(e) for e in self.split_log], "root": enc(self.root)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModelTree":
        def dec(nd) -> Node:
            if "leaf" in nd:
                lf = nd["leaf"]
                names = list(lf["coefficients"])
                coef = np.array([lf["coefficients"][n]["estimate"] for n in names], dtype=float)
                se = np.array([np.nan if lf["coefficients"][n]["stderr"] is None else lf["coefficients"][n]["stderr"]
                               for n in names], dtype=float)
                fit = OlsFit(names, coef, se, lf["r2"], lf["r2_adjusted"], lf["n_obs"], lf["n_params"],
                             lf["residual_sum_squares"], list(lf.get("dropped", [])))
                return Node(leaf=LeafModel(fit))
            return Node(SplitRule(nd["variable"], float(nd["threshold"])), dec(nd["left"]), dec(nd["right"]))

        return cls(dec(d["root"]), TreeConfig.from_dict(d["config"]), int(d["split_count"]),
                   [(e[0], float(e[1]), float(e[2]), float(e[3])) for e in d["split_log"]])


# -- array-level growth --------------------------------------------------------

class _Arrays:
    """Column-major views of the training data used during growth."""

    def __init__(self, X: np.ndarray, y: np.ndarray, F: np.ndarray):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        self.F = np.ascontiguousarray(F, dtype=np.float64)  # (n_candidates, n_obs)
        self.intercept_col = None


def _shift(arr: _Arrays, rows: np.ndarray):
    # centring leaves the fit unchanged only when an intercept is present
    if arr.intercept_col is None:
        return np.zeros(arr.X.shape[1]), 0.0
    mu = arr.X[rows].mean(axis=0)
    mu[arr.intercept_col] = 0.0
    return mu, float(arr.y[rows].mean())


@dataclass
class _Pending:
    node: Node
    rows: np.ndarray
    orders: list[np.ndarray]
    rss: float
    split: tuple[int, float, float, int] | None  # (variable index, threshold, sse, n_left)
    seq: int


def _search(arr: _Arrays, rows, orders, min_leaf, rss_here, tol):
    mu, muy = _shift(arr, rows)
    best = None
    for j, order in enumerate(orders):
        sse, thr, nl = _splitscan.scan_variable(arr.X, arr.y, arr.F[j], order, mu, muy, min_leaf)
        if nl < 0:
            continue
        if best is None or sse < best[2]:
            best = (j, thr, sse, nl)
    if best is None or rss_here - best[2] <= tol:
        return None
    return best


def _node_rss(arr: _Arrays, rows) -> float:
    mu, muy = _shift(arr, rows)
    return float(_splitscan.node_rss(arr.X, arr.y, rows, mu, muy))


def _fit_leaf(X, y, rows, names) -> LeafModel:
    try:
        fit = ols(X[rows], y[rows], list(names))
    except InsufficientDataError:
        # perfectly determined leaf
        coef, *_ = np.linalg.lstsq(X[rows], y[rows], rcond=None)
        fit = OlsFit(list(names), coef, np.full(len(names), np.nan), 1.0, 1.0, len(rows), len(rows), 0.0)
    return LeafModel(fit, np.asarray(rows))


def grow_arrays(X: np.ndarray, y: np.ndarray, F: np.ndarray, leaf_names: Sequence[str],
                cand_names: Sequence[str], config: TreeConfig,
                orders: list[np.ndarray] | None = None) -> ModelTree:
    """Grow a tree on arrays. ``F`` has one row per split candidate. ``config`` must be resolved.

    ``orders`` optionally supplies the stable argsort of each row of ``F``.
    """
    arr = _Arrays(X, y, F)
    if "intercept" in leaf_names:
        arr.intercept_col = list(leaf_names).index("intercept")
    n = len(y)
    if n < config.min_leaf_size:
        raise ValueError(f"{n} records is fewer than min_leaf_size={config.min_leaf_size}")
    rows = np.arange(n, dtype=np.int64)
    if orders is None:
        orders = [np.argsort(arr.F[j], kind="stable") for j in range(arr.F.shape[0])]
    orders = [np.asarray(o, dtype=np.int64) for o in orders]
    root_rss = _node_rss(arr, rows)
    tol = 1e-9 * root_rss if config.improvement_tolerance is None else config.improvement_tolerance
    root = Node()
    seq = 0
    frontier = [_Pending(root, rows, orders, root_rss,
                         _search(arr, rows, orders, config.min_leaf_size, root_rss, tol), seq)]
    total = root_rss
    log: list[tuple[str, float, float, float]] = []
    done: list[_Pending] = []
    in_left = np.zeros(n, dtype=bool)
    while len(log) < config.max_splits:
        best_k = None
        for k, pend in enumerate(frontier):
            if pend.split is None:
                continue
            gain = pend.rss - pend.split[2]
            if best_k is None or gain > frontier[best_k].rss - frontier[best_k].split[2]:
                best_k = k
        if best_k is None:
            break
        pend = frontier.pop(best_k)
        j, thr, sse, _ = pend.split
        go_left = arr.F[j][pend.rows] <= thr
        left_rows, right_rows = pend.rows[go_left], pend.rows[~go_left]
        in_left[left_rows] = True
        left_orders = [o[in_left[o]] for o in pend.orders]
        right_orders = [o[~in_left[o]] for o in pend.orders]
        in_left[left_rows] = False
        pend.node.rule = SplitRule(cand_names[j], float(thr), float(sse))
        pend.node.left, pend.node.right = Node(), Node()
        children = []
        child_total = 0.0
        for node, r, o in ((pend.node.left, left_rows, left_orders), (pend.node.right, right_rows, right_orders)):
            rss = _node_rss(arr, r)
            child_total += rss
            seq += 1
            children.append(_Pending(node, r, o, rss, None, seq))
        new_total = total - pend.rss + child_total
        log.append((cand_names[j], float(thr), float(total), float(new_total)))
        total = new_total
        budget_left = len(log) < config.max_splits
        for ch in children:
            if budget_left:
                ch.split = _search(arr, ch.rows, ch.orders, config.min_leaf_size, ch.rss, tol)
            frontier.append(ch)
    done = frontier
    for pend in done:
        pend.node.leaf = _fit_leaf(arr.X, arr.y, pend.rows, leaf_names)
    return ModelTree(root, config, len(log), log)


def _columns(records: pd.DataFrame, names: Sequence[str]) -> np.ndarray:
    missing = [c for c in names if c not in records.columns]
    if missing:
        raise KeyError(f"records are missing fields {missing}")
    return records[list(names)].to_numpy(dtype=float)


def grow_tree(records: pd.DataFrame, config: TreeConfig | None = None, rng_seed: int = 0,
              response: str = "log_tickets") -> ModelTree:
    """Grow a model tree on a frame holding the response, leaf regressors and split candidates.

    The search is exhaustive and deterministic, so ``rng_seed`` does not
    change the result; it is accepted for interface symmetry with ensembles.
    """
    config = (config or TreeConfig()).resolve(len(records), records.columns)
    X = _columns(records, config.leaf_regressors)
    F = _columns(records, config.split_candidates).T
    y = records[response].to_numpy(dtype=float)
    return grow_arrays(X, y, F, config.leaf_regressors, config.split_candidates, config)


def _side_rss(X: np.ndarray, y: np.ndarray) -> float:
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    r = y - X @ coef
    return float(r @ r)


def split_sse(records: pd.DataFrame, variable: str, threshold: float, config: TreeConfig,
              response: str = "log_tickets") -> float | None:
    """Summed residual sum of squares of the two half-plane regressions, or None if infeasible."""
    if len(records) == 0:
        raise ValueError("records must be non-empty")
    config = replace(config, max_splits=None).resolve(len(records), records.columns)
    left = records[variable].to_numpy(dtype=float) <= threshold
    if left.sum() < config.min_leaf_size or (~left).sum() < config.min_leaf_size:
        return None
    X = _columns(records, config.leaf_regressors)
    y = records[response].to_numpy(dtype=float)
    return _side_rss(X[left], y[left]) + _side_rss(X[~left], y[~left])


def best_split(records: pd.DataFrame, config: TreeConfig | None = None,
               response: str = "log_tickets") -> SplitRule | None:
    """Exhaustive best split of a node, or None when nothing improves on the unsplit fit."""
    config = replace(config or TreeConfig(), max_splits=None).resolve(len(records), records.columns)
    if len(records) < 2 * config.min_leaf_size:
        return None
    arr = _Arrays(_columns(records, config.leaf_regressors), records[response].to_numpy(dtype=float),
                  _columns(records, config.split_candidates).T)
    if "intercept" in config.leaf_regressors:
        arr.intercept_col = list(config.leaf_regressors).index("intercept")
    rows = np.arange(len(records), dtype=np.int64)
    orders = [np.argsort(arr.F[j], kind="stable").astype(np.int64) for j in range(arr.F.shape[0])]
    rss = _node_rss(arr, rows)
    tol = 1e-9 * rss if config.improvement_tolerance is None else config.improvement_tolerance
    found = _search(arr, rows, orders, config.min_leaf_size, rss, tol)
    if found is None:
        return None
    j, thr, sse, _ = found
    return SplitRule(config.split_candidates[j], float(thr), float(sse))


# -- prediction ----------------------------------------------------------------

def predict(tree: ModelTree, record: Mapping[str, float]) -> float:
    """Predicted log ticket count for one record (a mapping of field name to value)."""
    node = tree.root
    while not node.is_leaf:
        var = node.rule.variable
        if var not in record:
            raise KeyError(f"record is missing field {var!r}")
        node = node.left if record[var] <= node.rule.threshold else node.right
    vals = []
    for name in node.leaf.fit.names:
        if name not in record:
            raise KeyError(f"record is missing field {name!r}")
        vals.append(float(record[name]))
    return node.leaf.predict_row(vals)


def predict_arrays(tree: ModelTree, columns: Mapping[str, np.ndarray], n: int) -> np.ndarray:
    """Vectorised prediction; ``columns`` maps field name to a length-n array."""
    out = np.empty(n)
    stack = [(tree.root, np.arange(n))]
    while stack:
        node, idx = stack.pop()
        if len(idx) == 0:
            continue
        if node.is_leaf:
            f = node.leaf.fit
            acc = np.zeros(len(idx))
            for name, b in zip(f.names, f.coefficients):
                if b != 0.0:
                    acc += b * columns[name][idx]
            out[idx] = acc
            continue
        v = columns[node.rule.variable][idx]
        left = v <= node.rule.threshold
        stack.append((node.right, idx[~left]))
        stack.append((node.left, idx[left]))
    return out


def predict_frame(tree: ModelTree, frame: pd.DataFrame) -> np.ndarray:
    need = tree.required_fields()
    missing = [c for c in need if c not in frame.columns]
    if missing:
        raise KeyError(f"records are missing fields {missing}")
    cols = {c: frame[c].to_numpy(dtype=float) for c in need}
    return predict_arrays(tree, cols, len(frame))
