from __future__ import annotations

import numpy as np
import pytest

from assemblage.estimators import EstimatorSpec, prepare
from assemblage.synthetic import SPIKE_CAP, SynthConfig, generate, planted_components


def oracle_vs_equal_weight(cfg: SynthConfig, h: int = 12) -> float:
    sd = generate(cfg)
    task = prepare(EstimatorSpec("fixed", horizon=h), sd.data)
    ok = np.isfinite(task.y)
    rows = np.searchsorted(sd.data.panel.dates, task.dates[ok])
    oracle = sd.expected_target(h)[rows]
    equal = task.X[ok].mean(axis=1)
    y = task.y[ok]
    return float(np.sqrt(np.mean((y - oracle) ** 2) / np.mean((y - equal) ** 2)))


def test_generation_is_deterministic():
    a, b = generate(SynthConfig(seed=4)), generate(SynthConfig(seed=4))
    assert a.data.panel.levels.tobytes() == b.data.panel.levels.tobytes()
    c = generate(SynthConfig(seed=5))
    assert a.data.panel.levels.tobytes() != c.data.panel.levels.tobytes()


def test_headline_is_the_weighted_component_rate():
    sd = generate(SynthConfig(seed=1, n_months=120))
    np.testing.assert_allclose(sd.rates @ sd.data.panel.headline_weights, sd.headline_rates)
    assert np.all(np.isnan(sd.data.benchmarks.rates[:11, 1]))


def test_zero_noise_oracle_is_exact():
    sd = generate(SynthConfig(seed=2, noise_scale=0.0, n_months=120))
    task = prepare(EstimatorSpec("fixed", horizon=12), sd.data)
    ok = np.isfinite(task.y)
    rows = np.searchsorted(sd.data.panel.dates, task.dates[ok])
    np.testing.assert_allclose(sd.expected_target(12)[rows], task.y[ok], atol=1e-10)


def test_spikes_are_capped():
    # uncapped exponential spikes at this snr would push some levels negative
    sd = generate(SynthConfig(seed=3, snr=0.25, spike_prob=0.2))
    assert sd.rates.min() > -1200.0
    assert np.all(sd.data.panel.levels > 0)
    assert SPIKE_CAP < 1200.0


@pytest.mark.slow
def test_relative_error_rises_with_snr():
    # more idiosyncratic noise leaves more for the oracle index to filter out
    for seed in range(3):
        r = [oracle_vs_equal_weight(SynthConfig(seed=seed, snr=s)) for s in (0.5, 1.5, 4.5)]
        assert r[0] < r[1] < r[2] < 1.0


def test_planted_components_shape():
    X, y, a = planted_components(seed=0, n_obs=100)
    assert X.shape == (100, 5) and y.shape == (100,)
    np.testing.assert_allclose(a, [0, 0, 0.7, 0, 0.3])
    with pytest.raises(ValueError):
        generate(SynthConfig(n_months=12))
