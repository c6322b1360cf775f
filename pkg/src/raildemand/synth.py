"""Synthetic ticket-sales data with known, segment-level price elasticities.

Stations sit along lines radiating from the Perm hub. A route joins two
stations on the same line, or a Perm station to any other station. Fares
follow a zone tariff that grows every year with zone-year shocks, and
monthly log demand is

    log q = log_scale + sum(beta_f * feature_f) + alpha * log real_fare
            + gamma_cos * season_cos + gamma_sin * season_sin
            + loading * log(zone base fare) + noise

with (log_scale, alpha, gamma) taken from the segment the record falls in.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Mapping

import numpy as np
import pandas as pd

from .data import (DIRECTIONS, SORT_KEY, Dataset, Direction, FareCategory, Station, aggregate_tickets,
                   make_route, write_cpi, write_stations, write_tariffs, write_tickets, write_zone_table)
from .design import feature_frame

ZONE_TABLE = (13.0, 25.0, 38.0, 50.0, 63.0, 75.0, 88.0, 100.0, 113.0, 125.0, 138.0, 150.0, 163.0, 175.0, 188.0,
              200.0, 213.0)

# direction -> (n_stations, first_km, last_km); lines starting at 0 get Perm stations near the hub
DEFAULT_LINES = {
    "Western": (30, 0.0, 200.0),
    "Kungur": (30, 0.0, 200.0),
    "GornozavodskChusovoy": (24, 0.0, 130.0),
    "GornozavodskKizel": (24, 0.0, 200.0),
    "GornozavodskBranch": (24, 100.0, 200.0),
    "Agglomeration": (24, 0.0, 45.0),
}
PERM_RADIUS_KM = 12.0
AGGLOMERATION_RADIUS_KM = 45.0
PERM_STATIONS_PER_LINE = 3
HUB = (58.01, 56.23)
PREFIX = {"Western": "W", "Kungur": "K", "GornozavodskChusovoy": "GC", "GornozavodskKizel": "GK",
          "GornozavodskBranch": "GB", "Agglomeration": "A"}
BEARINGS = {"Western": 270.0, "Kungur": 200.0, "GornozavodskChusovoy": 60.0, "GornozavodskKizel": 30.0,
            "GornozavodskBranch": 80.0, "Agglomeration": 140.0}


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class Segment:
    """A demand regime. ``where`` maps a feature name to a list of admitted
    values or to bounds {gt, ge, lt, le}; an empty ``where`` admits everything."""

    name: str
    alpha: float
    log_scale: float
    gamma: tuple[float, float] = (0.0, 0.0)
    where: Mapping[str, object] = field(default_factory=dict)

    def mask(self, features: pd.DataFrame) -> np.ndarray:
        m = np.ones(len(features), dtype=bool)
        for var, cond in self.where.items():
            if var not in features.columns:
                raise SynthError(f"segment {self.name!r}: unknown feature {var!r}")
            col = features[var].to_numpy()
            if isinstance(cond, Mapping):
                ops = {"gt": np.greater, "ge": np.greater_equal, "lt": np.less, "le": np.less_equal}
                for op, bound in cond.items():
                    if op not in ops:
                        raise SynthError(f"segment {self.name!r}: unknown bound {op!r}")
                    m &= ops[op](col.astype(float), float(bound))
            else:
                m &= np.isin(col, list(cond))
        return m


@dataclass(frozen=True)
class FareRule:
    """Full fare of zone z in year y: zone1_fare * z**exponent * (1+growth)**(y-base_year),
    scaled down by a zone-year shock exp(-U(0, shock)) and made non-decreasing in zone.
    The unshocked value is the regulator's upper bound."""

    zone1_fare: float = 26.0
    exponent: float = 0.75
    growth: float = 0.085
    base_year: int = 2016
    shock: float = 0.6

    def bound(self, zone, year):
        return self.zone1_fare * np.power(zone, self.exponent) * (1 + self.growth) ** (year - self.base_year)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    lines: Mapping[str, tuple[int, float, float]] = field(default_factory=lambda: dict(DEFAULT_LINES))
    n_routes: int = 500
    direction_weights: Mapping[str, float] = field(default_factory=lambda: {d: 1.0 for d in DIRECTIONS})
    years: tuple[int, int] = (2013, 2017)
    segments: tuple[Segment, ...] = (Segment("all", -1.5, 12.0),)
    feature_effects: Mapping[str, float] = field(default_factory=dict)
    noise_sigma: float = 0.3
    fare_rule: FareRule = FareRule()
    confounding: float = 1.0
    categories: Mapping[str, float] = field(default_factory=lambda: {"FullSingle": 1.0})
    population_log_mean: float = 7.5
    population_log_sd: float = 1.8
    p_no_settlement: float = 0.1
    cpi_monthly_sd: float = 0.003

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise SynthError("noise_sigma must be non-negative")
        if self.n_routes < 1:
            raise SynthError("n_routes must be positive")
        if self.years[1] < self.years[0]:
            raise SynthError("years must be (first, last) with first <= last")
        for c in self.categories:
            FareCategory(c)
        for d in list(self.lines) + list(self.direction_weights):
            Direction(d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["segments"] = [asdict(s) for s in self.segments]
        return json.loads(json.dumps(d))

    @classmethod
    def from_dict(cls, d: Mapping) -> "SynthConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise SynthError(f"unknown synth config keys: {sorted(unknown)}")
        if "segments" in d:
            d["segments"] = tuple(Segment(**{**s, "gamma": tuple(s.get("gamma", (0.0, 0.0)))}) for s in d["segments"])
        if "fare_rule" in d:
            d["fare_rule"] = FareRule(**d["fare_rule"])
        if "lines" in d:
            d["lines"] = {k: tuple(v) for k, v in d["lines"].items()}
        if "years" in d:
            d["years"] = tuple(d["years"])
        return cls(**d)


@dataclass
class GroundTruth:
    """Per-record truth, aligned row for row with the generated dataset's records."""

    table: pd.DataFrame  # SORT_KEY columns + segment, true_elasticity, log_demand

    def __len__(self) -> int:
        return len(self.table)

    def keys(self) -> list[tuple]:
        return list(self.table[SORT_KEY].itertuples(index=False, name=None))

    @property
    def elasticity(self) -> np.ndarray:
        return self.table["true_elasticity"].to_numpy()

    def elastic_share(self, mask=None) -> float:
        e = self.elasticity if mask is None else self.elasticity[np.asarray(mask, dtype=bool)]
        return float(np.mean(e < -1.0))


# -- generation --------------------------------------------------------------

def _stations(config: SynthConfig, rng: np.random.Generator) -> dict[str, Station]:
    out = {}
    for direction, (n, first, last) in config.lines.items():
        if first == 0.0:
            n_perm = min(PERM_STATIONS_PER_LINE, n)
            near = np.sort(rng.uniform(1.0, PERM_RADIUS_KM - 1.0, n_perm))
            far = np.sort(rng.uniform(PERM_RADIUS_KM + 1.0, last, n - n_perm))
            kms = np.concatenate([near, far])
        else:
            kms = np.sort(rng.uniform(first, last, n))
        kms = np.round(kms, 1)
        for i in range(1, n):  # distinct positions along the line
            kms[i] = max(kms[i], round(kms[i - 1] + 0.1, 1))
        bearing = math.radians(BEARINGS.get(direction, 0.0))
        for i, km in enumerate(kms):
            pop = 0.0 if rng.random() < config.p_no_settlement else float(
                np.round(np.exp(rng.normal(config.population_log_mean, config.population_log_sd))))
            d1 = float(np.round(rng.exponential(1.5), 2))
            sid = f"{PREFIX[direction]}{i + 1:03d}"
            out[sid] = Station(
                id=sid, name=f"{direction} km {km:.1f}", direction=Direction(direction),
                latitude=round(HUB[0] + km * math.cos(bearing) / 111.0, 5),
                longitude=round(HUB[1] + km * math.sin(bearing) / 62.0, 5),
                population_within_5km=pop,
                dist_nearest_settlement_km=d1,
                dist_second_settlement_km=float(np.round(d1 + rng.exponential(3.0), 2)),
                dist_bus_stop_km=float(np.round(rng.exponential(2.0), 2)),
                dist_highway_km=float(np.round(rng.exponential(4.0), 2)),
                has_summer_gardens=bool(rng.random() < 0.3),
                is_perm=bool(first == 0.0 and km <= PERM_RADIUS_KM),
                is_agglomeration=bool(first == 0.0 and km <= AGGLOMERATION_RADIUS_KM),
                line_km=float(km),
            )
    return out


def _routes(config: SynthConfig, stations: dict[str, Station], rng: np.random.Generator) -> list[tuple[str, str]]:
    by_dir: dict[str, list[tuple[str, str]]] = {}
    ids = list(stations)
    for a in ids:
        for b in ids:
            if a == b:
                continue
            sa, sb = stations[a], stations[b]
            if sa.direction != sb.direction and not (sa.is_perm or sb.is_perm):
                continue
            route = make_route(sa, sb, ZONE_TABLE)
            by_dir.setdefault(route.direction.value, []).append((a, b))
    weights = {d: w for d, w in config.direction_weights.items() if w > 0}
    total = sum(weights.values())
    counts = {d: int(round(config.n_routes * w / total)) for d, w in weights.items()}
    chosen = []
    for d in DIRECTIONS:
        if d not in counts:
            continue
        pool = by_dir.get(d, [])
        if counts[d] > len(pool):
            raise SynthError(f"direction {d}: {counts[d]} routes requested, only {len(pool)} available")
        pick = rng.choice(len(pool), size=counts[d], replace=False)
        chosen += [pool[i] for i in sorted(pick)]
    return chosen


def _tariffs(config: SynthConfig, rng: np.random.Generator) -> tuple[pd.DataFrame, pd.DataFrame]:
    rule = config.fare_rule
    zones = np.arange(1, len(ZONE_TABLE) + 1)
    rows, bounds = [], []
    for year in range(config.years[0], config.years[1] + 1):
        bound = rule.bound(zones, year)
        fare = np.maximum.accumulate(np.round(bound * np.exp(-rng.uniform(0, rule.shock, len(zones))), 2))
        fare = np.minimum(fare, np.floor(bound * 100) / 100)
        rows += [(year, int(z), float(f)) for z, f in zip(zones, fare)]
        bounds += [(year, int(z), float(np.round(b, 2))) for z, b in zip(zones, bound)]
    return (pd.DataFrame(rows, columns=["year", "zone", "full_fare"]),
            pd.DataFrame(bounds, columns=["year", "zone", "upper_bound"]))


def _cpi(config: SynthConfig, rng: np.random.Generator) -> dict[tuple[int, int], float]:
    periods = [(y, m) for y in range(config.years[0], config.years[1] + 1) for m in range(1, 13)]
    steps = np.log1p(config.fare_rule.growth) / 12 + rng.normal(0, config.cpi_monthly_sd, len(periods))
    steps[0] = 0.0
    level = 100.0 * np.exp(np.cumsum(steps))
    return {p: float(np.round(v, 4)) for p, v in zip(periods, level)}


def _skeleton_rows(config, routes, tariffs, rng):
    fare = {(y, z): f for y, z, f in tariffs.itertuples(index=False)}
    cats = [c for c in FareCategory if c.value in config.categories]
    carries = {c: rng.random(len(routes)) < config.categories[c.value] for c in cats}
    rows = []
    for r, (o, d) in enumerate(routes):
        for c in cats:
            if not carries[c][r]:
                continue
            for y in range(config.years[0], config.years[1] + 1):
                for m in range(1, 13):
                    rows.append([0, o, d, y, m, c.value, 1, None])
    return rows, fare


def generate(config: SynthConfig) -> tuple[Dataset, GroundTruth]:
    """Draw a dataset and its ground truth. Identical configs give identical output."""
    rng = np.random.default_rng(config.seed)
    stations = _stations(config, rng)
    routes = _routes(config, stations, rng)
    tariffs, _ = _tariffs(config, rng)
    cpi = _cpi(config, rng)
    base = (config.years[0], 1)
    rows, _ = _skeleton_rows(config, routes, tariffs, rng)
    skeleton = aggregate_tickets(rows, stations, ZONE_TABLE, cpi, base, tariffs)
    ds0 = Dataset(skeleton, stations, ZONE_TABLE, cpi, base, tariffs)
    feats = feature_frame(ds0)
    feats["direction"] = skeleton["direction"].to_numpy()
    feats["fare_category"] = skeleton["fare_category"].to_numpy()

    n = len(skeleton)
    seg_id = np.full(n, -1)
    for k, seg in enumerate(config.segments):
        m = seg.mask(feats)
        if np.any(m & (seg_id >= 0)):
            raise SynthError(f"segment {seg.name!r} overlaps an earlier segment")
        seg_id[m] = k
    if np.any(seg_id < 0):
        i = int(np.flatnonzero(seg_id < 0)[0])
        raise SynthError(f"no segment covers record {tuple(skeleton.loc[i, SORT_KEY])}")
    alpha = np.array([s.alpha for s in config.segments])[seg_id]
    scale = np.array([s.log_scale for s in config.segments])[seg_id]
    g = np.array([s.gamma for s in config.segments], dtype=float).reshape(-1, 2)[seg_id]
    log_q = scale + alpha * feats["log_real_fare"].to_numpy() + g[:, 0] * feats["season_cos"].to_numpy() \
        + g[:, 1] * feats["season_sin"].to_numpy()
    for name, beta in config.feature_effects.items():
        if name not in feats.columns:
            raise SynthError(f"unknown feature in feature_effects: {name!r}")
        log_q = log_q + beta * feats[name].to_numpy(dtype=float)
    if config.confounding:
        rule = config.fare_rule
        log_q = log_q + config.confounding * np.log(rule.bound(skeleton["zone"].to_numpy(dtype=float),
                                                               rule.base_year))
    noisy = log_q + rng.normal(0.0, config.noise_sigma, n) if config.noise_sigma > 0 else log_q
    tickets = np.maximum(1, np.round(np.exp(noisy))).astype(np.int64)

    raw = [(0, o, d, int(y), int(m), c, int(q), float(f)) for o, d, y, m, c, q, f in zip(
        skeleton["origin"], skeleton["destination"], skeleton["year"], skeleton["month"],
        skeleton["fare_category"], tickets, skeleton["nominal_fare"])]
    records = aggregate_tickets(raw, stations, ZONE_TABLE, cpi, base, tariffs)
    dataset = Dataset(records, stations, ZONE_TABLE, cpi, base, tariffs)
    truth = skeleton[SORT_KEY].copy()
    truth["segment"] = [config.segments[k].name for k in seg_id]
    truth["true_elasticity"] = alpha
    truth["log_demand"] = log_q
    return dataset, GroundTruth(truth.reset_index(drop=True))


def rst_bounds(config: SynthConfig) -> pd.DataFrame:
    """Regulator upper bounds per (year, zone) implied by the fare rule."""
    zones = np.arange(1, len(ZONE_TABLE) + 1)
    rows = [(y, int(z), float(np.round(b, 2)))
            for y in range(config.years[0], config.years[1] + 1)
            for z, b in zip(zones, config.fare_rule.bound(zones, y))]
    return pd.DataFrame(rows, columns=["year", "zone", "upper_bound"])


def write_bundle(dataset: Dataset, truth: GroundTruth, directory, config: SynthConfig | None = None) -> Path:
    """Write the five input CSVs, ground_truth.csv and (if given) rst_bounds.csv and the config."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_tickets(dataset, directory / "tickets.csv")
    write_stations(dataset.stations, directory / "stations.csv")
    write_tariffs(dataset.tariffs, directory / "tariffs.csv")
    write_cpi(dataset.cpi, directory / "cpi.csv")
    write_zone_table(dataset.zone_table, directory / "zones.csv")
    gt = truth.table[SORT_KEY + ["segment", "true_elasticity", "log_demand"]]
    gt.to_csv(directory / "ground_truth.csv", index=False, lineterminator="\n", float_format="%.17g")
    if config is not None:
        rst_bounds(config).to_csv(directory / "rst_bounds.csv", index=False, lineterminator="\n")
        (directory / "synth_config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
    return directory


# -- presets -----------------------------------------------------------------

TABLE_ELASTICITY = {
    "Western": -1.75,
    "Kungur": -1.34,
    "GornozavodskChusovoy": -1.26,
    "GornozavodskKizel": -1.26,
    "GornozavodskBranch": -0.89,
    "Agglomeration": -1.21,
}
POOLED_ELASTICITY = -1.981
SEASON = {
    "Western": (-0.10, 0.05), "Kungur": (-0.15, 0.05), "GornozavodskChusovoy": (-0.20, 0.0),
    "GornozavodskKizel": (-0.05, 0.05), "GornozavodskBranch": (0.05, -0.05), "Agglomeration": (-0.30, 0.10),
}


def _log_scale_for(alpha: float, rule: FareRule, first_year: int, level: float = 5.0, ref_zone: int = 6) -> float:
    """Intercept that puts mean log demand near ``level`` at the reference zone's real fare."""
    ref = float(rule.bound(ref_zone, first_year)) * math.exp(-rule.shock / 2)
    return level - alpha * math.log(ref)


def paper_calibrated_preset(seed: int = 0, n_routes: int = 700, noise_sigma: float = 0.3,
                            children_share: float = 0.2) -> SynthConfig:
    """One elasticity per direction, with a quarter of routes on the branch line (the only
    direction with elasticity above -1) so three quarters of full-fare records are elastic.
    Children tickets, on ``children_share`` of routes, have zero elasticity."""
    rule = FareRule()
    years = (2013, 2017)
    segs = [Segment(f"{d}", a, _log_scale_for(a, rule, years[0]), SEASON[d],
                    {"direction": [d], "fare_category": ["FullSingle"]}) for d, a in TABLE_ELASTICITY.items()]
    segs.append(Segment("Children", 0.0, 1.5, (0.2, 0.0), {"fare_category": ["Children"]}))
    weights = {"Western": 0.2, "Kungur": 0.15, "GornozavodskChusovoy": 0.1, "GornozavodskKizel": 0.1,
               "GornozavodskBranch": 0.25, "Agglomeration": 0.2}
    cats = {"FullSingle": 1.0}
    if children_share > 0:
        cats["Children"] = children_share
    # no station-level demand shifters: leaves do not carry them, and any that
    # correlate with fare within a direction would leak into the leaf slopes
    return SynthConfig(seed=seed, n_routes=n_routes, direction_weights=weights, years=years, segments=tuple(segs),
                       noise_sigma=noise_sigma, fare_rule=rule, confounding=0.0, categories=cats)


def two_segment_preset(seed: int = 0, n_routes: int = 200, noise_sigma: float = 0.3,
                       alphas: tuple[float, float] = (-2.0, -0.5), threshold: float = 10000.0) -> SynthConfig:
    """Elasticity switches at destination population ``threshold``: alphas[0] at or below,
    alphas[1] above. Demand also rises with destination population, so that variable
    carries both the slope break and a level gradient. Fares are proportional to the
    zone and settlement sizes are centred on the threshold, so both regimes are well
    populated across a wide price range."""
    rule = FareRule(exponent=1.0)
    years = (2013, 2017)
    lo, hi = alphas
    segs = (Segment("small_destination", lo, _log_scale_for(lo, rule, years[0], 3.0), (-0.1, 0.0),
                    {"d_population": {"le": threshold}}),
            Segment("large_destination", hi, _log_scale_for(hi, rule, years[0], 3.0), (-0.1, 0.0),
                    {"d_population": {"gt": threshold}}))
    return SynthConfig(seed=seed, n_routes=n_routes, years=years, segments=segs,
                       feature_effects={"d_log_population": 0.4}, noise_sigma=noise_sigma, fare_rule=rule,
                       confounding=0.0, population_log_mean=math.log(threshold), population_log_sd=2.0,
                       p_no_settlement=0.05)


def confounded_preset(seed: int = 0, n_routes: int = 100, noise_sigma: float = 0.3, alpha: float = -1.8,
                      loading: float = 1.6) -> SynthConfig:
    """Single elasticity; demand also rises with the zone's base fare, so a regression without
    zone controls understates the price response."""
    rule = FareRule()
    years = (2013, 2017)
    seg = Segment("all", alpha, _log_scale_for(alpha + loading, rule, years[0]), (-0.1, 0.05))
    return SynthConfig(seed=seed, n_routes=n_routes, years=years, segments=(seg,), noise_sigma=noise_sigma,
                       fare_rule=rule, confounding=loading)


def single_segment_preset(seed: int = 0, n_routes: int = 167, noise_sigma: float = 0.3,
                          alpha: float = POOLED_ELASTICITY) -> SynthConfig:
    """One elasticity everywhere, with station-level demand shifters and zone confounding
    (both absorbed by the full set of controls)."""
    rule = FareRule()
    years = (2013, 2017)
    seg = Segment("all", alpha, _log_scale_for(alpha + 1.0, rule, years[0]), (-0.15, 0.05))
    return SynthConfig(seed=seed, n_routes=n_routes, years=years, segments=(seg,), noise_sigma=noise_sigma,
                       fare_rule=rule, confounding=1.0,
                       feature_effects={"o_dist_bus": -0.05, "d_dist_highway": -0.02, "o_summer_gardens": 0.2})


PRESETS = {
    "paper": paper_calibrated_preset,
    "two_segment": two_segment_preset,
    "confounded": confounded_preset,
    "single": single_segment_preset,
}


def config_from_mapping(d: Mapping) -> SynthConfig:
    """Build a config from a parsed config-file section: ``preset`` names a starting
    point, ``preset_args`` are passed to it, and remaining keys override fields."""
    d = dict(d)
    preset = d.pop("preset", None)
    args = d.pop("preset_args", {})
    if preset is None:
        if args:
            raise SynthError("preset_args given without a preset")
        return SynthConfig.from_dict(d)
    if preset not in PRESETS:
        raise SynthError(f"unknown preset {preset!r}; valid presets: {', '.join(PRESETS)}")
    base = PRESETS[preset](**args)
    if not d:
        return base
    merged = base.to_dict()
    merged.update(d)
    return SynthConfig.from_dict(merged)
