from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import make_dataset
from hypothesis import given
from hypothesis import strategies as st
from oracles import mdl_oracle, scan_bin

from arffml.filters import (
    WEEKDAYS,
    ClassRemap,
    FilterError,
    FilterStep,
    apply_class_remap,
    apply_discretization,
    apply_imputation,
    fit_equal_width,
    fit_imputation,
    fit_pipeline,
    fit_supervised_mdl,
    interval_labels,
    load_pipeline,
    mdl_cut_points,
    parse_interval_label,
)

# Imputation ----------------------------------------------------------------


def test_imputation_means_and_modes():
    d = make_dataset(
        {"x": [1.0, np.nan, 3.0, 8.0], "c": (("a", "b", "c"), [1, 2, np.nan, 2])}
    )
    m = fit_imputation(d)
    out = apply_imputation(d, m)
    assert out.values[1, 0] == 4.0
    assert out.values[2, 1] == 2.0


def test_imputation_mode_ties_go_to_lowest_label():
    d = make_dataset({"c": (("a", "b", "c"), [2, 1, 2, 1, np.nan])})
    assert apply_imputation(d, fit_imputation(d)).values[4, 0] == 1.0


def test_imputation_ignores_listed_attributes_and_empty_columns():
    d = make_dataset({"x": [np.nan, np.nan], "y": [1.0, np.nan], "c": (("a",), [0, np.nan])})
    out = apply_imputation(d, fit_imputation(d, ignore=["c"]))
    assert np.isnan(out.values[:, 0]).all()
    assert out.values[1, 1] == 1.0
    assert np.isnan(out.values[1, 2])


@given(st.lists(st.one_of(st.floats(-1e6, 1e6), st.just(math.nan)), min_size=1, max_size=30))
def test_imputation_is_idempotent(xs):
    d = make_dataset({"x": xs})
    once = apply_imputation(d, fit_imputation(d))
    twice = apply_imputation(once, fit_imputation(once))
    assert once == twice


def test_imputation_rejects_other_schema():
    d = make_dataset({"x": [1.0]})
    with pytest.raises(FilterError, match="attribute 'y'"):
        apply_imputation(make_dataset({"y": [1.0]}), fit_imputation(d))


# Interval labels -----------------------------------------------------------


def test_interval_label_format():
    assert interval_labels([0.05, 0.4, 1.05]) == [
        "(-inf-0.05]",
        "(0.05-0.4]",
        "(0.4-1.05]",
        "(1.05-inf)",
    ]
    assert interval_labels([]) == ["(-inf-inf)"]
    assert interval_labels([-2.5, 3]) == ["(-inf--2.5]", "(-2.5-3]", "(3-inf)"]


@given(st.lists(st.floats(-1e12, 1e12), min_size=1, max_size=6, unique=True))
def test_labels_parse_back_to_cut_points(cuts):
    cuts = sorted(c + 0.0 for c in cuts)  # fold -0.0 into 0.0
    if len(set(cuts)) != len(cuts):
        return
    bounds = [parse_interval_label(lab) for lab in interval_labels(cuts)]
    assert [lo for lo, _ in bounds] == [-math.inf] + cuts
    assert [hi for _, hi in bounds] == cuts + [math.inf]


def test_parse_interval_label_rejects_garbage():
    for bad in ["(1-2)", "[1-2]", "abc", "(1-inf]"]:
        with pytest.raises(ValueError):
            parse_interval_label(bad)


# Equal width ---------------------------------------------------------------


def test_equal_width_cuts_and_labels():
    d = make_dataset({"x": [0.0, 1.0, 10.0], "y": [5.0, 5.0, 5.0]})
    m = fit_equal_width(d, None, 4)
    assert m.cuts[0] == (2.5, 5.0, 7.5)
    assert m.cuts[1] == ()
    out = apply_discretization(d, m)
    assert out.attributes[0].labels == ("(-inf-2.5]", "(2.5-5]", "(5-7.5]", "(7.5-inf)")
    assert out.values[:, 0].tolist() == [0.0, 0.0, 3.0]
    assert out.attributes[1].labels == ("(-inf-inf)",)
    assert out.values[:, 1].tolist() == [0.0, 0.0, 0.0]


def test_boundary_values_fall_in_lower_bin():
    d = make_dataset({"x": [0.0, 10.0]})
    m = fit_equal_width(d, None, 2)
    probe = make_dataset({"x": [5.0, 5.000000001, -100.0, 100.0, np.nan]})
    assert apply_discretization(probe, m).values[:4, 0].tolist() == [0.0, 1.0, 0.0, 1.0]
    assert np.isnan(apply_discretization(probe, m).values[4, 0])


def test_equal_width_selected_attributes_only():
    d = make_dataset({"x": [0.0, 1.0], "y": [0.0, 1.0]})
    out = apply_discretization(d, fit_equal_width(d, ["y"], 2))
    assert out.attributes[0].is_numeric and out.attributes[1].is_nominal


def test_equal_width_errors():
    d = make_dataset({"x": [1.0, 2.0], "c": (("a",), [0, 0])})
    with pytest.raises(FilterError):
        fit_equal_width(d, None, 0)
    with pytest.raises(FilterError, match="nominal"):
        fit_equal_width(d, ["c"], 2)
    with pytest.raises(FilterError, match="entirely missing"):
        fit_equal_width(make_dataset({"x": [np.nan]}), None, 2)


@given(
    st.floats(-1e6, 1e6),
    st.floats(1e-3, 1e6),
    st.integers(1, 12),
)
def test_equal_width_bins_have_equal_width(lo, span, k):
    d = make_dataset({"x": [lo, lo + span]})
    cuts = fit_equal_width(d, None, k).cuts[0]
    edges = np.array([lo, *cuts, lo + span])
    widths = np.diff(edges)
    assert len(cuts) == k - 1
    np.testing.assert_allclose(widths, (edges[-1] - edges[0]) / k, rtol=1e-9, atol=1e-9 * abs(lo))


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=40), st.integers(1, 10))
def test_assignment_matches_interval_scan(xs, k):
    d = make_dataset({"x": xs})
    out = apply_discretization(d, fit_equal_width(d, None, k))
    labels = list(out.attributes[0].labels)
    assert [scan_bin(x, labels) for x in xs] == out.values[:, 0].astype(int).tolist()


# Supervised MDL ------------------------------------------------------------


def test_mdl_single_cut_on_separable_data(rng):
    x = rng.uniform(-1, 1, 200)
    y = (x > 0.1).astype(float)
    cuts = mdl_cut_points(x, y, 2)
    assert len(cuts) == 1
    assert x[y == 0].max() < cuts[0] < x[y == 1].min()


def test_mdl_no_cut_on_single_class():
    assert mdl_cut_points(np.arange(10.0), np.zeros(10), 2) == []


def test_mdl_three_class_staircase(rng):
    x = rng.uniform(0, 3, 300)
    y = np.floor(x)
    assert len(mdl_cut_points(x, y, 3)) == 2


@pytest.mark.parametrize("seed", range(25))
def test_mdl_matches_plain_python_oracle(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(10, 120))
    n_classes = int(r.integers(2, 4))
    y = r.integers(0, n_classes, n)
    x = np.round(r.normal(y * r.uniform(0, 2), 1.0, n), int(r.integers(0, 3)))
    got = mdl_cut_points(x.astype(float), y.astype(float), n_classes)
    want = mdl_oracle(list(zip(x.tolist(), y.tolist())), n_classes)
    assert got == pytest.approx(want, abs=1e-12)


def test_mdl_ignores_missing(rng):
    x = np.array([0.0, 1.0, np.nan, 2.0, 3.0, 4.0] * 20)
    y = np.array([0, 0, 0, 1, 1, np.nan] * 20, dtype=float)
    assert mdl_cut_points(x, y, 2) == [1.5]


def test_supervised_mdl_skips_class_and_nominals():
    d = make_dataset(
        {"x": [0.0, 1.0] * 20, "k": (("p", "q"), [0, 1] * 20), "c": (("a", "b"), [0, 1] * 20)}
    )
    m = fit_supervised_mdl(d, None, "c")
    assert list(m.cuts) == [0]
    with pytest.raises(FilterError):
        fit_supervised_mdl(make_dataset({"x": [1.0], "y": [2.0]}), None, "y")


# Class remapping ---------------------------------------------------------


def weekday_data(labels=WEEKDAYS):
    return make_dataset({"x": np.arange(8.0), "day": (labels, [0, 1, 2, 3, 4, 5, 6, np.nan])})


def test_remap_schemes():
    d = weekday_data()
    assert apply_class_remap(d, ClassRemap("day", "seven_day")) is d
    three = apply_class_remap(d, ClassRemap("day", "weekday_sat_sun"))
    assert three.attributes[1].labels == ("Weekday", "Sat", "Sun")
    assert three.values[:7, 1].tolist() == [0, 0, 0, 0, 0, 1, 2]
    assert np.isnan(three.values[7, 1])
    two = apply_class_remap(d, ClassRemap("day", "weekday_weekend"))
    assert two.attributes[1].labels == ("Weekday", "Weekend")
    assert two.values[:7, 1].tolist() == [0, 0, 0, 0, 0, 1, 1]


def test_remap_accepts_long_day_names():
    names = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")
    two = apply_class_remap(weekday_data(names), ClassRemap("day", "weekday_weekend"))
    assert two.values[:7, 1].tolist() == [0, 0, 0, 0, 0, 1, 1]


def test_remap_rejects_non_weekday_attributes():
    with pytest.raises(FilterError, match="7 weekday labels"):
        apply_class_remap(make_dataset({"c": (("a", "b"), [0, 1])}), ClassRemap("c", "weekday_weekend"))
    shuffled = ("Tue", "Mon", "Wed", "Thu", "Fri", "Sat", "Sun")
    with pytest.raises(FilterError, match="Mon..Sun"):
        apply_class_remap(weekday_data(shuffled), ClassRemap("day", "weekday_weekend"))
    with pytest.raises(FilterError, match="unknown remap scheme"):
        ClassRemap("day", "fortnight")


# Pipelines -----------------------------------------------------------------


def test_pipeline_fits_on_train_and_applies_to_dev(rng):
    train = make_dataset({"x": [0.0, 10.0, np.nan], "c": (("a", "b"), [0, 1, 1])})
    dev = make_dataset({"x": [np.nan, 2.0, 20.0], "c": (("a", "b"), [0, 0, 1])})
    p = fit_pipeline([FilterStep("replace_missing"), FilterStep("equal_width", bins=2)], train, "c")
    out = p.apply(dev)
    # dev gap is filled with the train mean (5) which lands in the lower bin
    assert out.values[:, 0].tolist() == [0.0, 0.0, 1.0]
    assert out.attributes[0].labels == ("(-inf-5]", "(5-inf)")


def test_pipeline_save_load_roundtrip(rng):
    x = rng.normal(size=60)
    d = make_dataset(
        {"x": np.where(rng.random(60) < 0.1, np.nan, x), "y": rng.normal(size=60),
         "day": (WEEKDAYS, rng.integers(0, 7, 60))}
    )
    steps = [
        FilterStep("class_remap", scheme="weekday_weekend", attribute="day"),
        FilterStep("replace_missing"),
        FilterStep("supervised_mdl", attributes=["x"]),
        FilterStep("equal_width", bins=3, attributes=["y"]),
    ]
    p = fit_pipeline(steps, d, "day")
    q = load_pipeline(p.dumps())
    assert q.apply(d) == p.apply(d)
    assert p.dumps().startswith("# arffml-filter 1\n")


def test_pipeline_numeric_class_is_binned_by_equal_width_only():
    d = make_dataset({"x": [0.0, 1.0, 2.0, 3.0], "t": [0.0, 1.0, 2.0, 4.0]})
    p = fit_pipeline([FilterStep("equal_width", bins=2)], d, "t")
    out = p.apply(d)
    assert out.attributes[1].is_nominal
    assert out.values[:, 1].tolist() == [0.0, 0.0, 0.0, 1.0]


def test_pipeline_errors():
    with pytest.raises(FilterError, match="unknown filter"):
        FilterStep("smooth")
    with pytest.raises(FilterError, match="bins"):
        FilterStep("equal_width")
    with pytest.raises(FilterError, match="not a filter model"):
        load_pipeline("{}")
    with pytest.raises(FilterError, match="malformed"):
        load_pipeline("# arffml-filter 1\n{\"steps\": [{}]}")
