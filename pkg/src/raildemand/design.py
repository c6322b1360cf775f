"""Regressor layouts: OLS design matrices and the per-record feature frame used by trees."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

from .data import DIRECTIONS, Dataset, SizeClass, classify_settlement


class Specification(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"


STATION_ATTRS = {
    # feature suffix -> Station attribute
    "population": "population_within_5km",
    "dist_settlement1": "dist_nearest_settlement_km",
    "dist_settlement2": "dist_second_settlement_km",
    "dist_bus": "dist_bus_stop_km",
    "dist_highway": "dist_highway_km",
    "summer_gardens": "has_summer_gardens",
    "is_perm": "is_perm",
    "is_agglomeration": "is_agglomeration",
    "lat": "latitude",
    "lon": "longitude",
}
MISSING_SOURCES = {
    "dist_settlement1_km": "dist_settlement1",
    "dist_settlement2_km": "dist_settlement2",
    "dist_bus_km": "dist_bus",
    "dist_highway_km": "dist_highway",
    "population_5km": "population",
}
SIZE_LABELS = [c.label for c in SizeClass]

# Spec IV station characteristics, per trip end.
IV_CONTINUOUS = ["dist_settlement1", "dist_settlement2", "dist_bus", "dist_highway", "summer_gardens", "is_perm",
                 "lat", "lon"]


def station_table(dataset: Dataset) -> pd.DataFrame:
    rows = {}
    for sid, s in dataset.stations.items():
        row = {k: float(getattr(s, attr)) for k, attr in STATION_ATTRS.items()}
        row["size_class"] = float(classify_settlement(s.population_within_5km, s.population_within_5km > 0))
        for src, name in MISSING_SOURCES.items():
            row[f"{name}_missing"] = float(src in s.missing)
        rows[sid] = row
    return pd.DataFrame.from_dict(rows, orient="index")


def feature_frame(dataset: Dataset) -> pd.DataFrame:
    """Numeric per-record frame of every regressor and split variable.

    Columns: intercept, log_real_fare, annual harmonics (season_cos,
    season_sin), month dummies month_2..month_12, year, month, distance_km,
    zone, one-hot directions dir_*, and station characteristics prefixed
    o_ (origin) and d_ (destination).
    """
    rec = dataset.records
    n = len(rec)
    month = rec["month"].to_numpy(dtype=float)
    cols: dict[str, np.ndarray] = {
        "intercept": np.ones(n),
        "log_real_fare": rec["log_real_fare"].to_numpy(dtype=float),
        "season_cos": np.cos(2 * np.pi * (month - 1) / 12),
        "season_sin": np.sin(2 * np.pi * (month - 1) / 12),
    }
    for m in range(2, 13):
        cols[f"month_{m}"] = (month == m).astype(float)
    cols["year"] = rec["year"].to_numpy(dtype=float)
    cols["month"] = month
    cols["distance_km"] = rec["distance_km"].to_numpy(dtype=float)
    cols["zone"] = rec["zone"].to_numpy(dtype=float)
    direction = rec["direction"].to_numpy()
    for d in DIRECTIONS:
        cols[f"dir_{d}"] = (direction == d).astype(float)
    st = station_table(dataset)
    for end, key in (("o", "origin"), ("d", "destination")):
        ids = rec[key].to_numpy()
        block = st.reindex(ids)
        for name in list(STATION_ATTRS) + ["size_class"]:
            cols[f"{end}_{name}"] = block[name].to_numpy(dtype=float) if n else np.zeros(0)
        cols[f"{end}_log_population"] = np.log1p(cols[f"{end}_population"])
        for name in MISSING_SOURCES.values():
            vals = block[f"{name}_missing"].to_numpy(dtype=float) if n else np.zeros(0)
            if vals.any():
                cols[f"{end}_{name}_missing"] = vals
    return pd.DataFrame(cols, index=rec.index)


def split_candidate_columns(frame: pd.DataFrame) -> list[str]:
    """Trip and station characteristics eligible as split variables (price and time excluded)."""
    names = ["distance_km", "zone"] + [f"dir_{d}" for d in DIRECTIONS]
    for end in ("o", "d"):
        names += [f"{end}_{k}" for k in STATION_ATTRS] + [f"{end}_size_class"]
    return [c for c in names if c in frame.columns]


@dataclass
class DesignMatrix:
    values: np.ndarray
    column_names: list[str]
    specification: Specification
    reference_levels: dict[str, str] = field(default_factory=dict)
    dropped: list[str] = field(default_factory=list)

    @property
    def shape(self):
        return self.values.shape

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, columns=self.column_names)


def _dummies(values: np.ndarray, levels: list, prefix: str, preferred_ref, cols, names, dropped, refs):
    present = [lv for lv in levels if np.any(values == lv)]
    for lv in levels:
        if lv not in present:
            dropped.append(f"{prefix}_{lv}")
    if not present:
        return
    ref = preferred_ref if preferred_ref in present else present[0]
    refs[prefix] = str(ref)
    for lv in present:
        if lv == ref:
            continue
        cols.append((values == lv).astype(float))
        names.append(f"{prefix}_{lv}")


def build_design_matrix(dataset: Dataset, specification: Specification | str) -> DesignMatrix:
    """Regressor matrix for OLS specifications I-IV.

    I: intercept + log_real_fare. II adds year, month and zone dummies.
    III adds direction dummies. IV adds trip and station characteristics.
    Dummies are drop-one with reference earliest year, January, zone 1 and
    Western; a level absent from the data is skipped and listed in
    ``dropped`` (the reference then falls to the first observed level).
    """
    spec = Specification(specification)
    if len(dataset) == 0:
        raise ValueError("cannot build a design matrix for an empty dataset")
    rec = dataset.records
    cols = [np.ones(len(rec)), rec["log_real_fare"].to_numpy(dtype=float)]
    names = ["intercept", "log_real_fare"]
    dropped: list[str] = []
    refs: dict[str, str] = {}
    level = ["I", "II", "III", "IV"].index(spec.value)
    if level >= 1:
        years = rec["year"].to_numpy()
        ylevels = sorted(set(years.tolist()))
        _dummies(years, ylevels, "year", ylevels[0], cols, names, dropped, refs)
        months = rec["month"].to_numpy()
        _dummies(months, list(range(1, 13)), "month", 1, cols, names, dropped, refs)
        zones = rec["zone"].to_numpy()
        _dummies(zones, list(range(1, len(dataset.zone_table) + 1)), "zone", 1, cols, names, dropped, refs)
    if level >= 2:
        _dummies(rec["direction"].to_numpy(), DIRECTIONS, "dir", "Western", cols, names, dropped, refs)
    if level >= 3:
        ff = feature_frame(dataset)
        cols.append(ff["distance_km"].to_numpy())
        names.append("distance_km")
        for end in ("o", "d"):
            sc = ff[f"{end}_size_class"].to_numpy()
            labelled = np.array([SIZE_LABELS[int(v)] for v in sc])
            _dummies(labelled, SIZE_LABELS, f"{end}_size", "None", cols, names, dropped, refs)
        for end in ("o", "d"):
            for k in IV_CONTINUOUS:
                cols.append(ff[f"{end}_{k}"].to_numpy())
                names.append(f"{end}_{k}")
        for c in ff.columns:
            if c.endswith("_missing"):
                cols.append(ff[c].to_numpy())
                names.append(c)
    values = np.column_stack(cols)
    keep = [i for i in range(values.shape[1]) if i < 2 or np.any(values[:, i] != 0)]
    dropped += [names[i] for i in range(values.shape[1]) if i not in keep]
    return DesignMatrix(values[:, keep], [names[i] for i in keep], spec, refs, dropped)
