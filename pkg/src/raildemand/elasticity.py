"""Price elasticities from a fitted forest by counterfactual price perturbation."""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.stats import gaussian_kde

from .data import SORT_KEY, Dataset
from .design import feature_frame
from .forest import BaggedForest, predict_mean

PRICE = "log_real_fare"
INELASTIC_TOL = 0.05
DEFAULT_PERTURBATION = 0.10
# spreads below this (relative) are finite-difference rounding, e.g. a single-leaf forest
POINT_MASS_RTOL = 1e-9


class TripType(str, Enum):
    FROM_TO_PERM = "FromToPerm"
    OUT_OF_PERM = "OutOfPerm"
    WITHIN_PERM = "WithinPerm"


# zone bands per trip type, inclusive on both ends
DEFAULT_BANDS: dict[str, tuple[tuple[int, int], ...]] = {
    TripType.FROM_TO_PERM.value: ((1, 4), (5, 8), (9, 17)),
    TripType.OUT_OF_PERM.value: ((1, 3), (4, 6), (7, 17)),
    TripType.WITHIN_PERM.value: ((1, 1), (2, 2)),
}


def _check_perturbation(perturbation: float) -> float:
    if not perturbation > -1 or perturbation == 0:
        raise ValueError(f"perturbation must be > -1 and nonzero, got {perturbation}")
    return math.log1p(perturbation)


def point_elasticity(forest: BaggedForest, record: Mapping[str, float],
                     perturbation: float = DEFAULT_PERTURBATION) -> float:
    """Log-difference elasticity of the ensemble's mean prediction at one record."""
    step = _check_perturbation(perturbation)
    shifted = dict(record)
    shifted[PRICE] = record[PRICE] + step
    return (predict_mean(forest, shifted) - predict_mean(forest, record)) / step


def record_elasticities(forest: BaggedForest, frame: pd.DataFrame, perturbation: float = DEFAULT_PERTURBATION,
                        threads: int = 1, chunk: int = 20000) -> np.ndarray:
    """Vectorised ``point_elasticity`` over every row of a feature frame."""
    step = _check_perturbation(perturbation)
    need = set()
    for t in forest.trees:
        need.update(t.required_fields())
    missing = sorted(c for c in need if c not in frame.columns)
    if missing:
        raise KeyError(f"records are missing fields {missing}")
    cols = {c: frame[c].to_numpy(dtype=float) for c in need | {PRICE}}
    n = len(frame)

    def run(lo):
        hi = min(lo + chunk, n)
        part = {k: v[lo:hi] for k, v in cols.items()}
        base = forest.predict_columns(part, hi - lo)
        part[PRICE] = part[PRICE] + step
        return (forest.predict_columns(part, hi - lo) - base) / step

    starts = range(0, n, chunk)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(lo) for lo in starts]
    return np.concatenate(parts) if parts else np.zeros(0)


def classify(e: np.ndarray, tol: float = INELASTIC_TOL) -> np.ndarray:
    """'elastic' below -1, 'weakly_elastic' in [-1, -tol), 'inelastic' at or above -tol."""
    e = np.asarray(e, dtype=float)
    return np.where(e < -1.0, "elastic", np.where(e < -tol, "weakly_elastic", "inelastic"))


@dataclass
class ElasticityReport:
    keys: list[tuple]
    values: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    density_x: np.ndarray
    density_y: np.ndarray
    shares: dict[str, float]
    mean: float
    tol: float = INELASTIC_TOL
    perturbation: float = DEFAULT_PERTURBATION
    n_positive: int = 0  # records with elasticity above +tol, counted as inelastic

    @property
    def per_record(self) -> dict[tuple, float]:
        return dict(zip(self.keys, self.values.tolist()))

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.keys, columns=SORT_KEY)
        df["elasticity"] = self.values
        df["class"] = classify(self.values, self.tol)
        return df

    def summary(self) -> dict:
        return {"n_records": len(self.values), "mean": self.mean, "shares": self.shares,
                "tol": self.tol, "perturbation": self.perturbation, "n_positive": self.n_positive,
                "histogram": {"edges": self.bin_edges.tolist(), "counts": self.counts.tolist()}}

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False, lineterminator="\n", float_format="%.17g")

    def to_json(self, path=None) -> str:
        text = json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _is_point_mass(values: np.ndarray) -> bool:
    return len(values) > 0 and np.ptp(values) <= POINT_MASS_RTOL * max(1.0, float(np.abs(values).max()))


def _density(values: np.ndarray, n_points: int = 200) -> tuple[np.ndarray, np.ndarray]:
    if len(values) < 2 or _is_point_mass(values):
        return np.zeros(0), np.zeros(0)  # a point mass has no kernel density
    kde = gaussian_kde(values, bw_method="silverman")
    pad = 3 * kde.factor * values.std(ddof=1)
    grid = np.linspace(values.min() - pad, values.max() + pad, n_points)
    return grid, kde(grid)


def build_report(keys: Sequence[tuple], values: np.ndarray, bins: int | Sequence[float] = 50,
                 tol: float = INELASTIC_TOL, perturbation: float = DEFAULT_PERTURBATION) -> ElasticityReport:
    values = np.asarray(values, dtype=float)
    n = len(values)
    if _is_point_mass(values) and np.ndim(bins) == 0:
        v = float(values.mean())
        edges, counts = np.array([v - 0.5, v + 0.5]), np.array([n])
    else:
        counts, edges = np.histogram(values, bins=bins)
    labels = classify(values, tol)
    shares = {k: float(np.mean(labels == k)) if n else 0.0 for k in ("elastic", "weakly_elastic", "inelastic")}
    dx, dy = _density(values)
    return ElasticityReport(list(keys), values, edges, counts, dx, dy, shares,
                            float(values.mean()) if n else float("nan"), tol, perturbation, int(np.sum(values > tol)))


def elasticity_distribution(forest: BaggedForest, dataset: Dataset, bins: int | Sequence[float] = 50,
                            tol: float = INELASTIC_TOL, perturbation: float = DEFAULT_PERTURBATION,
                            threads: int = 1) -> ElasticityReport:
    """Elasticity of every record, its class shares, histogram and Silverman-bandwidth density."""
    values = record_elasticities(forest, feature_frame(dataset), perturbation, threads)
    return build_report(dataset.record_keys(), values, bins, tol, perturbation)


# -- grouping ----------------------------------------------------------------

def trip_types(dataset: Dataset) -> np.ndarray:
    rec = dataset.records
    perm = {sid: s.is_perm for sid, s in dataset.stations.items()}
    o = np.array([perm[s] for s in rec["origin"]], dtype=int)
    d = np.array([perm[s] for s in rec["destination"]], dtype=int)
    both = o + d
    out = np.where(both == 2, TripType.WITHIN_PERM.value,
                   np.where(both == 1, TripType.FROM_TO_PERM.value, TripType.OUT_OF_PERM.value))
    return out.astype(object)


def band_label(band: tuple[int, int]) -> str:
    lo, hi = band
    return str(lo) if lo == hi else f"{lo}-{hi}"


def _validate_bands(bands: Mapping[str, Sequence[tuple[int, int]]]) -> None:
    for tt, bs in bands.items():
        TripType(tt)
        spans = sorted((int(a), int(b)) for a, b in bs)
        for a, b in spans:
            if a > b:
                raise ValueError(f"{tt}: band {a}-{b} is empty")
        for (a1, b1), (a2, b2) in zip(spans, spans[1:]):
            if a2 <= b1:
                raise ValueError(f"{tt}: bands {a1}-{b1} and {a2}-{b2} overlap")


def parse_bands(text: str) -> dict[str, tuple[tuple[int, int], ...]]:
    """Parse 'FromToPerm=1-4,5-8,9-17;OutOfPerm=1-3,4-6,7-17;WithinPerm=1,2'."""
    out = dict(DEFAULT_BANDS)
    for part in filter(None, (p.strip() for p in text.split(";"))):
        name, _, spec = part.partition("=")
        bands = []
        for tok in spec.split(","):
            lo, _, hi = tok.strip().partition("-")
            bands.append((int(lo), int(hi or lo)))
        out[TripType(name.strip()).value] = tuple(bands)
    _validate_bands(out)
    return out


@dataclass
class GroupElasticityTable:
    """Mean elasticity per (direction, trip type, zone band) with per-direction marginals.

    ``cells`` lists every band of every observed direction, empty ones with
    count 0 and a NaN mean.
    """

    cells: pd.DataFrame  # direction, trip_type, band, mean, count
    by_type: pd.DataFrame  # direction, trip_type, mean, count
    by_direction: pd.DataFrame  # direction, mean, count
    overall_mean: float
    bands: dict[str, tuple[tuple[int, int], ...]] = field(default_factory=dict)

    def mean(self, direction: str, trip_type: str | None = None, band: str | None = None) -> float:
        if trip_type is None:
            row = self.by_direction[self.by_direction["direction"] == direction]
        elif band is None:
            row = self.by_type[(self.by_type["direction"] == direction) & (self.by_type["trip_type"] == trip_type)]
        else:
            c = self.cells
            row = c[(c["direction"] == direction) & (c["trip_type"] == trip_type) & (c["band"] == band)]
        return float(row["mean"].iloc[0]) if len(row) else float("nan")

    def layout(self, digits: int = 2) -> pd.DataFrame:
        """Wide table: one row per direction, a column per (trip type, band), then 'All types'.
        Empty cells are shown as '-'."""
        cols = [(tt, band_label(b)) for tt in self.bands for b in self.bands[tt]]
        rows = []
        for d in self.by_direction["direction"]:
            row = {}
            for tt, bl in cols:
                m = self.mean(d, tt, bl)
                row[f"{tt} {bl}"] = "-" if np.isnan(m) else f"{m:.{digits}f}"
            row["All types"] = f"{self.mean(d):.{digits}f}"
            rows.append(pd.Series(row, name=d))
        out = pd.DataFrame(rows)
        out.index.name = "direction"
        return out

    def to_csv(self, path) -> None:
        self.layout().to_csv(path, lineterminator="\n")


def _mean_count(df: pd.DataFrame, keys: list[str]) -> pd.DataFrame:
    g = df.groupby(keys, sort=True)["e"]
    return pd.DataFrame({"mean": g.mean(), "count": g.size()}).reset_index()


def group_elasticity(report: ElasticityReport, dataset: Dataset,
                     bands: Mapping[str, Sequence[tuple[int, int]]] | None = None) -> GroupElasticityTable:
    """Group the report's elasticities by direction, trip type and zone band."""
    bands = {k: tuple((int(a), int(b)) for a, b in v) for k, v in (bands or DEFAULT_BANDS).items()}
    _validate_bands(bands)
    if len(report.values) != len(dataset):
        raise ValueError(f"report has {len(report.values)} records, dataset has {len(dataset)}")
    rec = dataset.records
    tt = trip_types(dataset)
    zone = rec["zone"].to_numpy(dtype=int)
    band = np.empty(len(rec), dtype=object)
    for t in np.unique(tt):
        sel = tt == t
        spans = bands.get(t, ())
        for lo, hi in spans:
            band[sel & (zone >= lo) & (zone <= hi)] = band_label((lo, hi))
        uncovered = sel & pd.isna(band)
        if uncovered.any():
            z = sorted(set(zone[uncovered].tolist()))
            raise ValueError(f"zone bands for {t} do not cover observed zones {z}")
    df = pd.DataFrame({"direction": rec["direction"].to_numpy(), "trip_type": tt, "band": band, "e": report.values})
    observed = _mean_count(df, ["direction", "trip_type", "band"])
    grid = pd.DataFrame([(d, t, band_label(b)) for d in sorted(df["direction"].unique())
                         for t in bands for b in bands[t]], columns=["direction", "trip_type", "band"])
    cells = grid.merge(observed, how="left", on=["direction", "trip_type", "band"])
    cells["count"] = cells["count"].fillna(0).astype(int)
    by_type = _mean_count(df, ["direction", "trip_type"])
    by_dir = _mean_count(df, ["direction"])
    return GroupElasticityTable(cells, by_type, by_dir, float(df["e"].mean()), bands)


def plot_histogram(report: ElasticityReport, path) -> None:
    """Histogram with density overlay, written as a reproducible SVG."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "raildemand", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        widths = np.diff(report.bin_edges)
        total = report.counts.sum()
        heights = report.counts / (total * widths) if total else report.counts
        ax.bar(report.bin_edges[:-1], heights, width=widths, align="edge", color="#9ab", edgecolor="#567")
        if len(report.density_x):
            ax.plot(report.density_x, report.density_y, color="#a22")
        ax.axvline(-1.0, color="k", linestyle=":", linewidth=1)
        ax.set_xlabel("price elasticity")
        ax.set_ylabel("density")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
