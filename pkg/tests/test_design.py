import numpy as np
import pytest

from raildemand.data import SizeClass
from raildemand.design import build_design_matrix, feature_frame, split_candidate_columns
from raildemand.synth import generate, paper_calibrated_preset


@pytest.fixture(scope="module")
def full_span():
    ds, _ = generate(paper_calibrated_preset(0, n_routes=150, children_share=0.0))
    return ds


def test_spec_one_has_two_columns(small_synth):
    ds, _ = small_synth
    d = build_design_matrix(ds, "I")
    assert d.column_names == ["intercept", "log_real_fare"]
    np.testing.assert_array_equal(d.values[:, 1], ds.records["log_real_fare"].to_numpy())


def test_degenerate_categories_drop(small_synth):
    ds, _ = small_synth
    rec = ds.records
    one = ds.subset((rec.year == 2015) & (rec.month == 3) & (rec.zone == rec.zone.iloc[0]))
    d = build_design_matrix(one, "II")
    assert d.shape[1] == 2
    assert "month_1" in d.dropped and "year" in d.reference_levels


def test_column_counts_follow_layout(full_span):
    rec = full_span.records
    assert rec.year.nunique() == 5 and rec.month.nunique() == 12
    assert rec.zone.nunique() == 17 and rec.direction.nunique() == 6
    ff = feature_frame(full_span)
    size_dummies = sum(len(np.unique(ff[f"{e}_size_class"])) - 1 for e in ("o", "d"))
    missing_flags = sum(c.endswith("_missing") for c in ff.columns)
    n_characteristics = 1 + size_dummies + 2 * 8 + missing_flags
    counts = {s: build_design_matrix(full_span, s).shape[1] for s in ("I", "II", "III", "IV")}
    assert counts["I"] == 2
    assert counts["II"] == 2 + 4 + 11 + 16
    assert counts["III"] == counts["II"] + 5
    assert counts["IV"] == 2 + 4 + 11 + 16 + 5 + n_characteristics


def test_reference_levels(full_span):
    d = build_design_matrix(full_span, "IV")
    assert d.reference_levels["year"] == "2013"
    assert d.reference_levels["month"] == "1"
    assert d.reference_levels["zone"] == "1"
    assert d.reference_levels["dir"] == "Western"
    for name in ("year_2013", "month_1", "zone_1", "dir_Western"):
        assert name not in d.column_names


def test_no_constant_zero_columns(full_span):
    d = build_design_matrix(full_span, "IV")
    assert np.all(np.any(d.values != 0, axis=0))


def test_deterministic(small_synth):
    ds, _ = small_synth
    a, b = build_design_matrix(ds, "IV"), build_design_matrix(ds, "IV")
    assert a.column_names == b.column_names
    np.testing.assert_array_equal(a.values, b.values)


def test_empty_dataset_rejected(small_synth):
    ds, _ = small_synth
    with pytest.raises(ValueError):
        build_design_matrix(ds.subset(np.zeros(len(ds), bool)), "I")


def test_feature_frame_matches_stations(small_synth):
    ds, _ = small_synth
    ff = feature_frame(ds)
    assert len(ff) == len(ds)
    i = 17
    o = ds.stations[ds.records.origin.iloc[i]]
    d = ds.stations[ds.records.destination.iloc[i]]
    assert ff["o_population"].iloc[i] == o.population_within_5km
    assert ff["d_dist_bus"].iloc[i] == d.dist_bus_stop_km
    assert ff["d_size_class"].iloc[i] == int(d.size_class)
    assert ff["d_log_population"].iloc[i] == pytest.approx(np.log1p(d.population_within_5km))
    m = ds.records.month.iloc[i]
    assert ff["season_cos"].iloc[i] == pytest.approx(np.cos(2 * np.pi * (m - 1) / 12))
    assert ff[[f"dir_{x}" for x in sorted(set(ds.records.direction))]].sum(axis=1).eq(1).all()


def test_split_candidates_exclude_price_and_time(small_synth):
    ff = feature_frame(small_synth[0])
    cands = split_candidate_columns(ff)
    for c in ("log_real_fare", "year", "month", "intercept", "season_cos"):
        assert c not in cands
    assert "d_population" in cands and "dir_Western" in cands


def test_size_class_codes_ordered():
    assert [int(c) for c in SizeClass] == [0, 1, 2, 3, 4]
