"""Seeded synthetic daily-weather datasets with the F1..F21 column layout.

F21 (weekday) is drawn from its own random stream, so it is independent of
every other column by construction. Under ``weather_coupled`` rainfall (F4),
mean temperature (F7) and maximum wind (F8) follow the season; under
``independent`` they ignore it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arff import AttributeSpec, Dataset
from .filters import WEEKDAYS

COUPLINGS = ("independent", "weather_coupled")
N_WEATHER = 20  # F1..F20; F21 is the weekday
_MONTH_ENDS = np.cumsum([31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31])


@dataclass(frozen=True)
class CityProfile:
    name: str
    temp_mean: float
    temp_amp: float
    temp_noise: float
    rain_prob: float
    rain_prob_amp: float
    rain_scale: float
    wind_median: float
    wind_amp: float
    # Day of year at which the temperature peaks.
    warm_day: int = 15
    # Day of year at which rain is most likely.
    wet_day: int = 180


CITIES = {
    "brisbane": CityProfile("brisbane", 21.0, 4.5, 1.8, 0.30, 0.12, 7.0, 30.0, 0.10, 20, 45),
    "adelaide": CityProfile("adelaide", 17.5, 5.5, 2.4, 0.28, 0.18, 3.5, 38.0, 0.15, 25, 180),
    "perth": CityProfile("perth", 19.0, 5.0, 2.0, 0.22, 0.20, 4.5, 35.0, 0.12, 30, 190),
    "hobart": CityProfile("hobart", 12.5, 4.0, 2.2, 0.38, 0.08, 3.0, 42.0, 0.18, 20, 200),
}


@dataclass(frozen=True)
class SyntheticConfig:
    n_rows: int
    seed: int = 0
    city: str = "brisbane"
    missing_rate: float = 0.0
    coupling: str = "weather_coupled"
    first_year: int = 1995
    last_year: int = 2014

    def __post_init__(self):
        if self.n_rows < 0:
            raise ValueError(f"n_rows must be >= 0, got {self.n_rows}")
        if not 0 <= self.missing_rate < 1:
            raise ValueError(f"missing_rate must lie in [0, 1), got {self.missing_rate}")
        if self.coupling not in COUPLINGS:
            raise ValueError(f"coupling must be one of {list(COUPLINGS)}, got {self.coupling!r}")
        if self.city not in CITIES:
            raise ValueError(f"unknown city {self.city!r}; expected one of {sorted(CITIES)}")
        if self.first_year > self.last_year:
            raise ValueError("first_year must not exceed last_year")


def attributes() -> tuple[AttributeSpec, ...]:
    return tuple(AttributeSpec.numeric(f"F{i}") for i in range(1, 21)) + (
        AttributeSpec.nominal("F21", WEEKDAYS),
    )


def _noise_params(city: str) -> dict[int, tuple[float, float]]:
    """Per-column (centre, spread) of the noise features; fixed for a city so
    that every split drawn for it shares one distribution."""
    rng = np.random.default_rng(sorted(CITIES).index(city))
    return {k: (rng.uniform(-50, 50), rng.uniform(1, 20)) for k in (5, 6, *range(9, 21))}


def _season(day: np.ndarray, peak: int) -> np.ndarray:
    return np.cos(2 * math.pi * (day - peak) / 365.0)


def generate(cfg: SyntheticConfig) -> Dataset:
    city = CITIES[cfg.city]
    n = cfg.n_rows
    weather_seq, weekday_seq, missing_seq = np.random.SeedSequence(cfg.seed & (2**64 - 1)).spawn(3)
    rng = np.random.default_rng(weather_seq)

    year = rng.integers(cfg.first_year, cfg.last_year + 1, size=n).astype(float)
    day = rng.integers(1, 366, size=n)
    month = np.searchsorted(_MONTH_ENDS, day) + 1.0
    week = (day - 1) // 7 + 1.0

    coupled = cfg.coupling == "weather_coupled"
    warm = _season(day, city.warm_day) if coupled else np.zeros(n)
    wet = _season(day, city.wet_day) if coupled else np.zeros(n)

    temp = city.temp_mean + city.temp_amp * warm + rng.normal(0.0, city.temp_noise, n)
    p_rain = np.clip(city.rain_prob + city.rain_prob_amp * wet, 0.02, 0.98)
    rains = rng.random(n) < p_rain
    # Gamma with shape < 1 gives a heavy right tail of large falls.
    amount = rng.gamma(0.6, city.rain_scale * (1.0 + 0.5 * wet), n)
    rain = np.where(rains, amount, 0.0)
    wind = city.wind_median * (1.0 + city.wind_amp * wet) * rng.lognormal(0.0, 0.35, n)

    noise = _noise_params(cfg.city)
    noise_cols = {k: rng.normal(centre, spread, n) for k, (centre, spread) in noise.items()}

    cols = {1: year, 2: month, 3: week, 4: rain, 7: temp, 8: wind, **noise_cols}
    weather = np.column_stack([cols[k] for k in range(1, 21)])
    weather[:, 3:] = np.round(weather[:, 3:], 1)
    weather[:, 3] = np.maximum(weather[:, 3], 0.0)  # rounding never makes rain negative
    weather[weather == 0] = 0.0  # normalise -0.0

    weekday = np.random.default_rng(weekday_seq).integers(0, 7, size=n).astype(float)

    if cfg.missing_rate > 0:
        mask = np.random.default_rng(missing_seq).random((n, N_WEATHER)) < cfg.missing_rate
        weather[mask] = np.nan

    values = np.column_stack([weather, weekday]) if n else np.zeros((0, N_WEATHER + 1))
    return Dataset(f"{cfg.city}-weather", attributes(), values)
