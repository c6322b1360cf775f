"""Bagged model trees with out-of-bag prediction, cross-validated R^2 and split-count importance."""
from __future__ import annotations

import base64
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
import pandas as pd

from .data import Dataset
from .design import feature_frame
from .tree import ModelTree, TreeConfig, grow_arrays, predict, predict_arrays


@dataclass(frozen=True)
class ForestConfig:
    tree: TreeConfig = TreeConfig()
    n_trees: int = 2000
    subsample_fraction: float = 0.75
    seed: int = 0
    with_replacement: bool = False

    def to_dict(self) -> dict:
        return {"tree": self.tree.to_dict(), "n_trees": self.n_trees,
                "subsample_fraction": self.subsample_fraction, "seed": self.seed,
                "with_replacement": self.with_replacement}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ForestConfig":
        d = dict(d)
        d["tree"] = TreeConfig.from_dict(d.get("tree", {}))
        return cls(**d)


def subsample_size(n_obs: int, fraction: float) -> int:
    return int(np.floor(fraction * n_obs + 0.5))


def draw_membership(n_obs: int, config: ForestConfig, b: int) -> np.ndarray:
    """Training rows of tree ``b`` (1-based), seeded by seed + b. Sorted; may repeat with replacement."""
    rng = np.random.default_rng(config.seed + b)
    m = subsample_size(n_obs, config.subsample_fraction)
    if config.with_replacement:
        return np.sort(rng.integers(0, n_obs, size=m))
    return np.sort(rng.choice(n_obs, size=m, replace=False))


@dataclass
class BaggedForest:
    trees: list[ModelTree]
    memberships: list[np.ndarray]
    config: ForestConfig
    n_obs: int
    columns: dict[str, np.ndarray] = field(default_factory=dict, repr=False)
    response: np.ndarray | None = field(default=None, repr=False)
    dataset_fingerprint: str = ""
    meta: dict = field(default_factory=dict)
    _oob_sum: np.ndarray | None = field(default=None, repr=False)
    _oob_count: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.trees)

    def in_bag(self, b: int) -> np.ndarray:
        mask = np.zeros(self.n_obs, dtype=bool)
        mask[self.memberships[b]] = True
        return mask

    def oob_counts(self) -> np.ndarray:
        counts = np.full(self.n_obs, len(self.trees), dtype=np.int64)
        for mem in self.memberships:
            counts[np.unique(mem)] -= 1
        return counts

    def _compute_oob(self) -> None:
        total = np.zeros(self.n_obs)
        count = np.zeros(self.n_obs, dtype=np.int64)
        for b, tree in enumerate(self.trees):
            out = np.flatnonzero(~self.in_bag(b))
            if len(out) == 0:
                continue
            cols = {k: v[out] for k, v in self.columns.items()}
            total[out] += predict_arrays(tree, cols, len(out))
            count[out] += 1
        self._oob_sum, self._oob_count = total, count

    def oob_predictions(self) -> np.ndarray:
        """Per-record OOB mean prediction; nan where every tree trained on the record."""
        if self._oob_sum is None:
            self._compute_oob()
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self._oob_count > 0, self._oob_sum / np.maximum(self._oob_count, 1), np.nan)

    def predict_columns(self, columns: Mapping[str, np.ndarray], n: int) -> np.ndarray:
        acc = np.zeros(n)
        for tree in self.trees:
            acc += predict_arrays(tree, columns, n)
        return acc / len(self.trees)


def _grow_one(b, X_all, y_all, F_all, orders_all, config: ForestConfig, tree_cfg: TreeConfig, n_obs):
    mem = draw_membership(n_obs, config, b + 1)
    if config.with_replacement:
        orders = None
    else:
        local = np.full(n_obs, -1, dtype=np.int64)
        local[mem] = np.arange(len(mem))
        orders = [local[o][local[o] >= 0] for o in orders_all]
    tree = grow_arrays(X_all[mem], y_all[mem], F_all[:, mem], tree_cfg.leaf_regressors,
                       tree_cfg.split_candidates, tree_cfg, orders=orders)
    for leaf in tree.leaves():
        leaf.record_indices = mem[leaf.record_indices].astype(np.int32)
    return tree, mem


def fit_forest(dataset: Dataset | pd.DataFrame, config: ForestConfig = ForestConfig(), threads: int = 1,
               response: str = "log_tickets") -> BaggedForest:
    """Grow ``config.n_trees`` model trees, tree b on its own random subsample seeded by seed + b.

    ``dataset`` may be a Dataset or an already-built feature frame holding
    the response. The result does not depend on ``threads``.
    """
    if isinstance(dataset, Dataset):
        frame = feature_frame(dataset)
        y_all = dataset.records[response].to_numpy(dtype=float)
        fingerprint = dataset.fingerprint()
    else:
        frame = dataset
        y_all = frame[response].to_numpy(dtype=float)
        fingerprint = hashlib.sha256(pd.util.hash_pandas_object(frame, index=False).values.tobytes()).hexdigest()
    n_obs = len(frame)
    m = subsample_size(n_obs, config.subsample_fraction)
    tree_cfg = config.tree.resolve(m, frame.columns)
    if n_obs < 2 * tree_cfg.min_leaf_size:
        raise ValueError(f"need at least {2 * tree_cfg.min_leaf_size} records, got {n_obs}")
    need = list(dict.fromkeys(list(tree_cfg.leaf_regressors) + list(tree_cfg.split_candidates)))
    missing = [c for c in need if c not in frame.columns]
    if missing:
        raise KeyError(f"records are missing fields {missing}")
    X_all = frame[list(tree_cfg.leaf_regressors)].to_numpy(dtype=float)
    F_all = np.ascontiguousarray(frame[list(tree_cfg.split_candidates)].to_numpy(dtype=float).T)
    orders_all = [np.argsort(F_all[j], kind="stable") for j in range(F_all.shape[0])]

    def job(b):
        return _grow_one(b, X_all, y_all, F_all, orders_all, config, tree_cfg, n_obs)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, range(config.n_trees)))
    else:
        results = [job(b) for b in range(config.n_trees)]
    columns = {c: frame[c].to_numpy(dtype=float) for c in need}
    return BaggedForest([t for t, _ in results], [mem for _, mem in results], config, n_obs, columns, y_all,
                        fingerprint)


def oob_predict(forest: BaggedForest, record_index: int) -> float | None:
    """Mean prediction of the trees whose subsample excludes the record, or None if there are none."""
    if not 0 <= record_index < forest.n_obs:
        raise IndexError(f"record index {record_index} out of range")
    value = forest.oob_predictions()[record_index]
    return None if np.isnan(value) else float(value)


def predict_mean(forest: BaggedForest, record: Mapping[str, float]) -> float:
    """Average of all tree predictions for one record."""
    return float(np.mean([predict(t, record) for t in forest.trees]))


def predict_mean_frame(forest: BaggedForest, frame: pd.DataFrame) -> np.ndarray:
    need = set()
    for t in forest.trees:
        need.update(t.required_fields())
    missing = sorted(c for c in need if c not in frame.columns)
    if missing:
        raise KeyError(f"records are missing fields {missing}")
    return forest.predict_columns({c: frame[c].to_numpy(dtype=float) for c in need}, len(frame))


def cv_r2(forest: BaggedForest, dataset: Dataset | None = None, response: str = "log_tickets") -> float:
    """1 - SSE/SST over records that have an out-of-bag prediction."""
    y = forest.response if dataset is None else dataset.records[response].to_numpy(dtype=float)
    pred = forest.oob_predictions()
    ok = ~np.isnan(pred)
    if not ok.any():
        raise ValueError("no record has an out-of-bag prediction")
    return r2_score(y[ok], pred[ok])


def r2_score(y: np.ndarray, pred: np.ndarray) -> float:
    resid = np.sum((y - pred) ** 2)
    tss = np.sum((y - y.mean()) ** 2)
    return float(1.0 - resid / tss)


@dataclass
class ImportanceTable:
    entries: dict[str, float]
    counts: dict[str, int]
    total_partitions: int

    def ranked(self) -> list[tuple[str, float]]:
        return sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))

    def top(self) -> str | None:
        r = self.ranked()
        return r[0][0] if r else None

    def grouped(self, key: Callable[[str], str]) -> "ImportanceTable":
        counts: dict[str, int] = {}
        for var, c in self.counts.items():
            counts[key(var)] = counts.get(key(var), 0) + c
        return _table(counts)

    def to_frame(self) -> pd.DataFrame:
        rows = [(v, self.counts[v], s) for v, s in self.ranked()]
        return pd.DataFrame(rows, columns=["variable", "splits", "share"])


def _table(counts: dict[str, int]) -> ImportanceTable:
    total = sum(counts.values())
    entries = {v: c / total for v, c in counts.items()} if total else {}
    return ImportanceTable(entries, dict(counts) if total else {}, total)


def variable_importance(forest: BaggedForest) -> ImportanceTable:
    """Share of all splits in the ensemble made on each variable."""
    counts: dict[str, int] = {}
    for tree in forest.trees:
        for var in tree.split_variables():
            counts[var] = counts.get(var, 0) + 1
    return _table(counts)


def variable_family(name: str) -> str:
    """Collapse one-hot direction columns into a single 'direction' variable."""
    return "direction" if name.startswith("dir_") else name


# -- persistence -------------------------------------------------------------

def _pack(mem: np.ndarray, n_obs: int) -> str:
    mask = np.zeros(n_obs, dtype=bool)
    mask[mem] = True
    return base64.b64encode(np.packbits(mask).tobytes()).decode("ascii")


def _unpack(s: str, n_obs: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(base64.b64decode(s), dtype=np.uint8))[:n_obs]
    return np.flatnonzero(bits)


def save_forest(forest: BaggedForest, directory) -> Path:
    directory = Path(directory)
    (directory / "trees").mkdir(parents=True, exist_ok=True)
    for b, tree in enumerate(forest.trees):
        (directory / "trees" / f"tree_{b:05d}.json").write_text(json.dumps(tree.to_dict(), sort_keys=True))
    manifest = {
        "config": forest.config.to_dict(), "seed": forest.config.seed, "n_obs": forest.n_obs,
        "n_trees": len(forest.trees), "dataset_fingerprint": forest.dataset_fingerprint, "meta": forest.meta,
        "memberships": [_pack(m, forest.n_obs) for m in forest.memberships],
    }
    if forest.config.with_replacement:
        manifest["membership_counts"] = [np.bincount(m, minlength=forest.n_obs).tolist() for m in forest.memberships]
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return directory


def load_forest(directory, dataset: Dataset | None = None) -> BaggedForest:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    config = ForestConfig.from_dict(manifest["config"])
    n_obs = manifest["n_obs"]
    trees = [ModelTree.from_dict(json.loads((directory / "trees" / f"tree_{b:05d}.json").read_text()))
             for b in range(manifest["n_trees"])]
    if "membership_counts" in manifest:
        mems = [np.repeat(np.arange(n_obs), c) for c in manifest["membership_counts"]]
    else:
        mems = [_unpack(s, n_obs) for s in manifest["memberships"]]
    forest = BaggedForest(trees, mems, config, n_obs, dataset_fingerprint=manifest["dataset_fingerprint"],
                          meta=manifest.get("meta", {}))
    if dataset is not None:
        attach_dataset(forest, dataset)
    return forest


def attach_dataset(forest: BaggedForest, dataset: Dataset, response: str = "log_tickets") -> None:
    """Bind training data to a loaded forest so OOB quantities can be computed."""
    if len(dataset) != forest.n_obs:
        raise ValueError(f"dataset has {len(dataset)} records, forest was fitted on {forest.n_obs}")
    if forest.dataset_fingerprint and dataset.fingerprint() != forest.dataset_fingerprint:
        raise ValueError("dataset fingerprint does not match the forest manifest")
    frame = feature_frame(dataset)
    need = set()
    for t in forest.trees:
        need.update(t.config.leaf_regressors)
        need.update(t.split_variables())
    forest.columns = {c: frame[c].to_numpy(dtype=float) for c in need}
    forest.response = dataset.records[response].to_numpy(dtype=float)
    forest._oob_sum = forest._oob_count = None
