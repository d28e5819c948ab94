"""Synthetic panels with planted forward-looking structure.

The monthly rate of component k is

    r[k, t] = f[t] + b[k] + e[k, t] + s[k, t]

with ``f`` a persistent AR(1) trend shared by all components, ``b`` fixed
component offsets, ``e`` Gaussian idiosyncratic noise and ``s`` rare
negative one-month spikes (transitory: they move the level once and the
rate reverts). The headline rate is the weighted average of component
rates. The future average of headline rates is predictable only through
``f``, so an index that filters out the noise and the spikes beats
equal weighting.

The signal-to-noise ratio ``snr`` divides every idiosyncratic term: ``e``
has standard deviation ``trend_sd / snr`` (the stationary sd of ``f``
over ``snr``) and spikes have mean magnitude ``spike_mean / snr``.
``noise_scale`` scales every random term; at 0 the world is constant and the conditional
expectation index predicts the target without error.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .estimators import Dataset
from .transforms import GrowthPanel, PriceIndexPanel, to_month

SPIKE_CAP = 600.0


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_components: int = 20
    n_months: int = 480
    start: str = "1985-01"
    trend_mean: float = 2.5
    trend_rho: float = 0.98
    trend_sd: float = 1.5       # stationary sd of f
    snr: float = 1.5
    offset_sd: float = 0.5
    spike_prob: float = 0.05
    spike_mean: float = 60.0    # mean magnitude at snr = 1, exponential
    noise_scale: float = 1.0
    base_level: float = 100.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> SynthConfig:
        known = set(cls.__dataclass_fields__)
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True, eq=False)
class SynthData:
    config: SynthConfig
    data: Dataset
    trend: np.ndarray        # f, one value per month
    offsets: np.ndarray      # b
    rates: np.ndarray        # component MoM rates (T x K)
    headline_rates: np.ndarray

    def expected_target(self, h: int) -> np.ndarray:
        """Conditional mean of the h-month forward headline average given f[t]."""
        c = self.config
        mu = c.trend_mean
        rho = c.trend_rho
        hw = self.data.panel.headline_weights
        m = c.spike_mean / c.snr
        spike = -c.noise_scale * c.spike_prob * m * (1.0 - np.exp(-SPIKE_CAP / m))
        level = mu + float(hw @ self.offsets) + spike
        decay = np.mean(rho ** np.arange(1, h + 1))
        return level + decay * (self.trend - mu)


def generate(config: SynthConfig = SynthConfig()) -> SynthData:
    """Draw one synthetic component panel, deterministic in ``config.seed``."""
    c = config
    if c.n_components < 1 or c.n_months < 48:
        raise ValueError("need at least one component and 48 months")
    if c.snr <= 0:
        raise ValueError("snr must be positive")
    rng = np.random.default_rng(c.seed)
    T, K = c.n_months, c.n_components
    s = c.noise_scale
    innov_sd = c.trend_sd * np.sqrt(1.0 - c.trend_rho ** 2)
    f = np.empty(T)
    f[0] = c.trend_mean + s * c.trend_sd * rng.standard_normal()
    shocks = rng.standard_normal(T)
    for t in range(1, T):
        f[t] = c.trend_mean + c.trend_rho * (f[t - 1] - c.trend_mean) + s * innov_sd * shocks[t]
    b = s * c.offset_sd * rng.standard_normal(K)
    b -= b.mean()
    e = s * (c.trend_sd / c.snr) * rng.standard_normal((T, K))
    hit = rng.random((T, K)) < c.spike_prob
    # magnitudes are capped at 600 (a 50% monthly fall) to keep levels positive
    spikes = -np.minimum(rng.exponential(c.spike_mean / c.snr, (T, K)), SPIKE_CAP) * hit * s
    rates = f[:, None] + b[None, :] + e + spikes
    hw = rng.dirichlet(np.full(K, 2.0))
    head = rates @ hw
    if np.any(rates <= -1200) or np.any(head <= -1200):
        raise ValueError("a monthly rate below -100% makes levels nonpositive")
    levels = c.base_level * np.cumprod(1.0 + rates / 1200.0, axis=0)
    hl = c.base_level * np.cumprod(1.0 + head / 1200.0)
    start = to_month(c.start)
    dates = start + np.arange(T)
    labels = tuple(f"C{k + 1:02d}" for k in range(K))
    panel = PriceIndexPanel(dates, levels, labels, hw, hl)
    # benchmarks: a noisy trend reading and a lagged headline 12-month average
    bench = np.column_stack([
        f + s * 0.5 * c.trend_sd * rng.standard_normal(T),
        np.convolve(head, np.ones(12) / 12.0, mode="full")[:T],
    ])
    bench[:11, 1] = np.nan
    benchmarks = GrowthPanel(dates, bench, None, ("trend_survey", "headline_ma12"))
    return SynthData(c, Dataset(panel, benchmarks), f, b, rates, head)


def planted_components(seed: int = 0, n_obs: int = 240, h: int = 12, noise: float = 0.1,
                       loadings=None, rho: float = 0.95):
    """Design-level planted signal: ``y[t] = sum_k a_k x_k[t] + N(0, noise^2)``.

    Regressors are persistent AR(1) series around distinct means; the
    target at origin t is built from regressors ``h`` periods earlier than
    the outcome it averages, which is what a forward target looks like
    after alignment. Default loadings put 0.7 on the third and 0.3 on the
    fifth of five components.
    """
    a = np.array([0.0, 0.0, 0.7, 0.0, 0.3]) if loadings is None else np.asarray(loadings, float)
    rng = np.random.default_rng(seed)
    K = a.size
    X = np.empty((n_obs + h, K))
    means = 2.0 + rng.normal(0.0, 0.5, K)
    X[0] = means + rng.standard_normal(K)
    for t in range(1, n_obs + h):
        X[t] = means + rho * (X[t - 1] - means) + np.sqrt(1 - rho ** 2) * rng.standard_normal(K)
    X = X[h:]
    y = X @ a + noise * rng.standard_normal(n_obs)
    return X, y, a
