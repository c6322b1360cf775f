"""Tariff advice from elasticities: direction of change, constant-elasticity optimum, revenue deltas."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from .data import DEFAULT_MULTIPLIERS, Dataset, DataError, FareCategory, deflate
from .design import feature_frame
from .forest import BaggedForest

HOLD_BAND = 0.05
# categories whose demand does not respond to the full fare
ZERO_ELASTICITY_CATEGORIES = (FareCategory.CHILDREN.value, FareCategory.PPK_RR_EMPLOYEE.value)


class Action(str, Enum):
    REDUCE = "Reduce"
    HOLD = "Hold"
    INCREASE = "Increase"


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class TariffSchedule:
    """Full fare and regulator ceiling per zone for one year."""

    year: int
    full_fare: Mapping[int, float]
    rst_upper_bound: Mapping[int, float]
    category_multipliers: Mapping[str, float] = field(
        default_factory=lambda: {c.value: m for c, m in DEFAULT_MULTIPLIERS.items()})

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        prev = None
        for z in sorted(self.full_fare):
            f = self.full_fare[z]
            if not f > 0:
                raise ScheduleError(f"zone {z}: full fare must be positive, got {f}")
            if z not in self.rst_upper_bound:
                raise ScheduleError(f"zone {z}: no regulator upper bound")
            if f > self.rst_upper_bound[z]:
                raise ScheduleError(f"zone {z}: full fare {f} exceeds the upper bound {self.rst_upper_bound[z]}")
            if prev is not None and f < prev[1]:
                raise ScheduleError(f"zone {z}: full fare {f} is below zone {prev[0]}'s {prev[1]}")
            prev = (z, f)

    @property
    def zones(self) -> list[int]:
        return sorted(self.full_fare)

    def fare(self, zone: int, category: str = "FullSingle") -> float:
        if zone not in self.full_fare:
            raise ScheduleError(f"zone {zone}: not covered by the {self.year} schedule")
        return self.full_fare[zone] * self.category_multipliers[category]

    def scaled(self, change: float | Mapping[int, float]) -> "TariffSchedule":
        """Multiply fares by (1 + change), uniformly or per zone; the result is re-validated."""
        if isinstance(change, Mapping):
            fares = {z: f * (1 + change.get(z, 0.0)) for z, f in self.full_fare.items()}
        else:
            fares = {z: f * (1 + change) for z, f in self.full_fare.items()}
        return TariffSchedule(self.year, fares, dict(self.rst_upper_bound), dict(self.category_multipliers))

    @classmethod
    def from_tables(cls, tariffs: pd.DataFrame, bounds: pd.DataFrame | None, year: int) -> "TariffSchedule":
        """Build from a tariffs table (year, zone, full_fare) and a bounds table
        (year, zone, upper_bound). Without bounds the ceiling equals the fare."""
        t = tariffs[tariffs["year"] == year]
        if t.empty:
            raise ScheduleError(f"no tariffs for year {year}")
        fares = {int(z): float(f) for z, f in zip(t["zone"], t["full_fare"])}
        if bounds is None:
            ceiling = dict(fares)
        else:
            b = bounds[bounds["year"] == year]
            ceiling = {int(z): float(u) for z, u in zip(b["zone"], b["upper_bound"])}
        return cls(int(year), fares, ceiling)


def read_bounds(path) -> pd.DataFrame:
    df = pd.read_csv(path, float_precision="round_trip")
    missing = {"year", "zone", "upper_bound"} - set(df.columns)
    if missing:
        raise DataError(f"missing columns {sorted(missing)}", str(path))
    return df


def recommend_direction(elasticity: float, hold_band: float = HOLD_BAND) -> Action:
    """Reduce fares where demand is elastic, raise them where it is weakly elastic."""
    if not np.isfinite(elasticity):
        raise ValueError(f"elasticity must be finite, got {elasticity}")
    if elasticity < -1.0 - hold_band:
        return Action.REDUCE
    if elasticity > -1.0 + hold_band:
        return Action.INCREASE
    return Action.HOLD


def optimal_tariff(scale: float, alpha: float, bounds: tuple[float, float], marginal_cost: float = 0.0,
                   current: float | None = None) -> float:
    """Price maximising (p - c) * scale * p**alpha over ``bounds``.

    With unit elasticity and zero cost every price earns the same; ``current``
    (clamped) is returned then, or the lower bound if it is not given.
    """
    lo, hi = bounds
    if not scale > 0:
        raise ValueError("scale must be positive")
    if lo > hi or lo <= 0:
        raise ValueError(f"bounds must satisfy 0 < p_min <= p_max, got {bounds}")
    if alpha > 0:
        raise ValueError("alpha must be non-positive")
    if marginal_cost < 0:
        raise ValueError("marginal cost must be non-negative")
    if marginal_cost == 0:
        if alpha < -1:
            return lo
        if alpha > -1:
            return hi
        return lo if current is None else min(max(current, lo), hi)
    if alpha < -1:
        return min(max(marginal_cost * alpha / (1 + alpha), lo), hi)
    return hi  # profit rises with price when demand is not elastic


def revenue_factor(price_change: float, elasticity: float) -> float:
    return (1 + price_change) ** (1 + elasticity)


def category_revenue_projection(full_fare_change: float, category: str,
                                category_elasticities: Mapping[str, float] | None = None) -> float:
    """Fractional revenue change of a fare category when the full fare changes by ``full_fare_change``."""
    category = FareCategory(category).value
    elasticities = category_elasticities or {}
    if category in elasticities:
        e = elasticities[category]
    elif category in ZERO_ELASTICITY_CATEGORIES:
        e = 0.0
    else:
        raise KeyError(f"no elasticity given for fare category {category}")
    return revenue_factor(full_fare_change, e) - 1.0


@dataclass
class PricingRecommendation:
    group: str
    elasticity: float
    action: Action
    optimal_fare: float
    predicted_revenue_change_pct: float
    current_fare: float = float("nan")
    bound_limited: bool = False


def recommend(group_elasticity: Mapping[str, float], current_fare: Mapping[str, float],
              fare_bounds: Mapping[str, tuple[float, float]], hold_band: float = HOLD_BAND,
              marginal_cost: float = 0.0) -> list[PricingRecommendation]:
    """Per-group action and constant-elasticity optimum within each group's fare bounds."""
    out = []
    for g in sorted(group_elasticity):
        e = float(group_elasticity[g])
        p0 = float(current_fare[g])
        lo, hi = fare_bounds[g]
        alpha = min(e, 0.0)
        action = recommend_direction(e, hold_band)
        if action is Action.HOLD:
            # too close to unit elasticity to act on: keep the fare, clamped into the bounds
            p = min(max(p0, lo), hi)
        else:
            p = optimal_tariff(1.0, alpha, (lo, hi), marginal_cost, current=p0)
        change = revenue_factor(p / p0 - 1.0, alpha) - 1.0
        out.append(PricingRecommendation(g, e, action, p, 100.0 * change, p0,
                                         bool(np.isclose(p, lo) or np.isclose(p, hi))))
    return out


def recommendations_frame(recs: Sequence[PricingRecommendation]) -> pd.DataFrame:
    return pd.DataFrame([(r.group, r.elasticity, r.action.value, r.current_fare, r.optimal_fare, r.bound_limited,
                          r.predicted_revenue_change_pct) for r in recs],
                        columns=["group", "elasticity", "action", "current_fare", "optimal_fare", "bound_limited",
                                 "delta_pct"])


def summary_text(recs: Sequence[PricingRecommendation]) -> str:
    lines = []
    for r in recs:
        lines.append(f"{r.group}: elasticity {r.elasticity:.3f} -> {r.action.value}; "
                     f"fare {r.current_fare:.2f} -> {r.optimal_fare:.2f}"
                     f"{' (at bound)' if r.bound_limited else ''}, revenue {r.predicted_revenue_change_pct:+.1f}%")
    return "\n".join(lines) + "\n"


@dataclass
class RevenueDelta:
    groups: pd.DataFrame  # group, baseline_revenue, proposed_revenue, delta, delta_pct
    baseline_total: float
    proposed_total: float

    @property
    def delta(self) -> float:
        return self.proposed_total - self.baseline_total

    @property
    def delta_pct(self) -> float:
        return 100.0 * self.delta / self.baseline_total if self.baseline_total else 0.0


def _counterfactual(forest, frame, rec, schedule, cpi, base_period):
    zones = rec["zone"].to_numpy(dtype=int)
    cats = rec["fare_category"].to_numpy()
    nominal = np.array([schedule.fare(z, c) for z, c in zip(zones, cats)])
    real = np.array([deflate(p, y, m, cpi, base_period)
                     for p, y, m in zip(nominal, rec["year"].to_numpy(), rec["month"].to_numpy())])
    cols = {c: frame[c].to_numpy(dtype=float) for c in frame.columns}
    cols["log_real_fare"] = np.log(real)
    q = np.exp(forest.predict_columns(cols, len(rec)))
    return q * nominal


def revenue_delta(forest: BaggedForest, dataset: Dataset, proposed: TariffSchedule, baseline: TariffSchedule,
                  group_by: str = "direction") -> RevenueDelta:
    """Predicted revenue under ``proposed`` against predicted revenue under ``baseline``,
    both schedules applied to every record of ``dataset``."""
    rec = dataset.records
    for sched in (baseline, proposed):
        sched.validate()
        missing = sorted(set(rec["zone"].astype(int)) - set(sched.full_fare))
        if missing:
            raise ScheduleError(f"zone {missing[0]}: not covered by the {sched.year} schedule")
    frame = feature_frame(dataset)
    base = _counterfactual(forest, frame, rec, baseline, dataset.cpi, dataset.base_period)
    if proposed == baseline:
        prop = base.copy()
    else:
        prop = _counterfactual(forest, frame, rec, proposed, dataset.cpi, dataset.base_period)
    df = pd.DataFrame({"group": rec[group_by].to_numpy(), "baseline_revenue": base, "proposed_revenue": prop})
    g = df.groupby("group", sort=True).sum().reset_index()
    g["delta"] = g["proposed_revenue"] - g["baseline_revenue"]
    g["delta_pct"] = 100.0 * g["delta"] / g["baseline_revenue"]
    return RevenueDelta(g, float(base.sum()), float(prop.sum()))
