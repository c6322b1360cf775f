"""Descriptive ticket tables: shares and year-on-year growth by group."""
from __future__ import annotations

import numpy as np
import pandas as pd

from .data import Dataset
from .design import SIZE_LABELS, feature_frame

GROUPINGS = ("direction", "zone", "settlement_pair")


def _group_key(dataset: Dataset, grouping: str) -> pd.Series:
    rec = dataset.records
    if grouping == "direction":
        return rec["direction"].astype(str)
    if grouping == "zone":
        return rec["zone"].astype(int)
    if grouping == "settlement_pair":
        ff = feature_frame(dataset)
        o = [SIZE_LABELS[int(v)] for v in ff["o_size_class"]]
        d = [SIZE_LABELS[int(v)] for v in ff["d_size_class"]]
        return pd.Series([f"{a}->{b}" for a, b in zip(o, d)], index=rec.index)
    raise ValueError(f"unknown grouping {grouping!r}; valid groupings: {', '.join(GROUPINGS)}")


def share_growth_table(dataset: Dataset, grouping: str = "direction") -> pd.DataFrame:
    """Tickets per (group, year) with growth over the previous year and the group's overall share.

    ``growth_pct`` is NaN for a group's first year. ``share_pct`` is the
    group's all-years total over the grand total, repeated on every row of
    the group.
    """
    key = _group_key(dataset, grouping)
    df = pd.DataFrame({"group": key, "year": dataset.records["year"].astype(int),
                       "count": dataset.records["tickets"].astype(np.int64)})
    counts = df.groupby(["group", "year"], sort=True)["count"].sum().reset_index()
    prev = counts.groupby("group")["count"].shift(1)
    prev_year = counts.groupby("group")["year"].shift(1)
    growth = 100.0 * (counts["count"] / prev - 1.0)
    counts["growth_pct"] = growth.where(prev_year == counts["year"] - 1)
    totals = counts.groupby("group")["count"].transform("sum")
    grand = counts["count"].sum()
    counts["share_pct"] = 100.0 * totals / grand if grand else np.nan
    return counts[["group", "year", "count", "growth_pct", "share_pct"]]


def settlement_pair_matrix(dataset: Dataset) -> pd.DataFrame:
    """Share of tickets (percent) by origin x destination settlement size class, with totals."""
    ff = feature_frame(dataset)
    o = pd.Categorical([SIZE_LABELS[int(v)] for v in ff["o_size_class"]], categories=SIZE_LABELS)
    d = pd.Categorical([SIZE_LABELS[int(v)] for v in ff["d_size_class"]], categories=SIZE_LABELS)
    tab = pd.crosstab(o, d, values=dataset.records["tickets"].to_numpy(), aggfunc="sum", dropna=False).fillna(0)
    tab = 100.0 * tab / tab.to_numpy().sum()
    tab["Total"] = tab.sum(axis=1)
    tab.loc["Total"] = tab.sum(axis=0)
    tab.index.name = "from"
    tab.columns.name = "to"
    return tab
