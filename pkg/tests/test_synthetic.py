from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import chisquare

from arffml.arff import parse_arff, write_arff
from arffml.synthetic import CITIES, SyntheticConfig, generate


def test_shape_and_schema():
    d = generate(SyntheticConfig(500, seed=3, city="adelaide"))
    assert d.n_rows == 500 and d.n_attributes == 21
    assert [a.name for a in d.attributes] == [f"F{i}" for i in range(1, 22)]
    assert d.attributes[20].labels == ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
    assert d.relation == "adelaide-weather"
    assert not np.isnan(d.values).any()


def test_calendar_columns_are_consistent():
    d = generate(SyntheticConfig(2000, seed=1))
    year, month, week, rain = d.values[:, 0], d.values[:, 1], d.values[:, 2], d.values[:, 3]
    assert year.min() >= 1995 and year.max() <= 2014
    assert set(np.unique(month)) <= set(range(1, 13))
    assert week.min() >= 1 and week.max() <= 53
    assert (rain >= 0).all() and (rain == 0).mean() > 0.4


@pytest.mark.parametrize("rate", [0.02, 0.1, 0.3])
def test_missing_rate_within_one_point(rate):
    d = generate(SyntheticConfig(5000, seed=9, missing_rate=rate))
    assert abs(np.isnan(d.values[:, :20]).mean() - rate) <= 0.01
    assert not np.isnan(d.values[:, 20]).any()


def test_weekday_is_uniform():
    d = generate(SyntheticConfig(10_000, seed=4))
    counts = np.bincount(d.values[:, 20].astype(int), minlength=7)
    assert chisquare(counts).pvalue > 0.001


def test_same_seed_same_bytes_and_different_seed_differs():
    cfg = SyntheticConfig(300, seed=11, city="hobart", missing_rate=0.05)
    assert write_arff(generate(cfg)) == write_arff(generate(cfg))
    assert write_arff(generate(cfg)) != write_arff(generate(SyntheticConfig(300, seed=12, city="hobart")))


def test_zero_rows_gives_header_only():
    text = write_arff(generate(SyntheticConfig(0)))
    assert text.rstrip().endswith("@data")
    assert parse_arff(text).n_rows == 0


def test_coupling_controls_seasonal_temperature():
    def explained(coupling):
        # Share of temperature variance explained by the month means.
        d = generate(SyntheticConfig(4000, seed=2, coupling=coupling))
        month, temp = d.values[:, 1].astype(int), d.values[:, 6]
        means = np.bincount(month, weights=temp) / np.maximum(np.bincount(month), 1)
        return means[month].var() / temp.var()

    assert explained("weather_coupled") > 0.5
    assert explained("independent") < 0.02


def test_weekday_independent_of_weather_under_any_coupling():
    d = generate(SyntheticConfig(8000, seed=6))
    day = d.values[:, 20]
    for j in range(20):
        assert abs(np.corrcoef(d.values[:, j], day)[0, 1]) < 0.06


@pytest.mark.parametrize(
    "kwargs, match",
    [
        ({"n_rows": -1}, "n_rows"),
        ({"n_rows": 5, "missing_rate": 1.0}, "missing_rate"),
        ({"n_rows": 5, "coupling": "loose"}, "coupling"),
        ({"n_rows": 5, "city": "sydney"}, "unknown city"),
        ({"n_rows": 5, "first_year": 2020, "last_year": 2000}, "first_year"),
    ],
)
def test_config_validation(kwargs, match):
    with pytest.raises(ValueError, match=match):
        SyntheticConfig(**kwargs)


def test_every_city_generates():
    for city in CITIES:
        assert generate(SyntheticConfig(10, city=city)).n_rows == 10
