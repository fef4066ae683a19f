"""Synthetic monthly revenue series for experiments.

A deterministic trend with multiplicative growth and a yearly seasonal
swing, plus Gaussian noise, clipped at zero so values stay interpretable
as revenue.  Everything is seeded, so a config generates byte-identical
series on every run.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np

from .linsys import TimeSeries, add_months

MONTHS_PER_YEAR = 12


@dataclass(frozen=True)
class GeneratorConfig:
    start: date = date(2019, 1, 1)
    num_months: int = 67
    base: float = 1.2e6
    trend: float = 25_000.0
    growth: float = 1.008
    amplitude: float = 0.25
    phase: float = 0.0
    noise_std: float = 1.2e5
    seed: int = 0

    def __post_init__(self):
        if self.num_months < 2:
            raise ValueError("num_months must be at least 2")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        if self.growth <= 0:
            raise ValueError("growth must be positive")


def generate(config: GeneratorConfig = GeneratorConfig()) -> TimeSeries:
    """Sample one series: (base + trend t) growth^t seasonal(t) + noise.

    The seasonal factor is 1 + amplitude sin(2 pi (t + phase) / 12).  Noise
    is drawn even when noise_std is zero, so toggling the noise level never
    changes which random numbers later consumers see.
    """
    rng = np.random.default_rng(config.seed)
    t = np.arange(config.num_months, dtype=float)
    level = (config.base + config.trend * t) * config.growth ** t
    seasonal = 1.0 + config.amplitude * np.sin(
        2.0 * np.pi * (t + config.phase) / MONTHS_PER_YEAR)
    noise = config.noise_std * rng.standard_normal(config.num_months)
    values = np.clip(level * seasonal + noise, 0.0, None)
    dates = tuple(add_months(config.start, int(k))
                  for k in range(config.num_months))
    return TimeSeries(dates, values)


def geometric_series(ratio: float, start: date = date(2019, 1, 1),
                     initial: float = 100.0,
                     num_months: int = 24) -> TimeSeries:
    """Noise-free series value_t = initial * ratio^t, for solver sanity runs."""
    if initial <= 0 or ratio <= 0:
        raise ValueError("initial value and ratio must be positive")
    t = np.arange(num_months, dtype=float)
    dates = tuple(add_months(start, int(k)) for k in range(num_months))
    return TimeSeries(dates, initial * ratio ** t)


def trending_series(slope: float, start: date = date(2019, 1, 1),
                    initial: float = 1000.0, num_months: int = 24,
                    noise_std: float = 0.0,
                    seed: int | None = None) -> TimeSeries:
    """Linear-trend series with optional noise, for direction checks."""
    rng = np.random.default_rng(seed)
    t = np.arange(num_months, dtype=float)
    values = initial + slope * t + noise_std * rng.standard_normal(num_months)
    dates = tuple(add_months(start, int(k)) for k in range(num_months))
    return TimeSeries(dates, values)
