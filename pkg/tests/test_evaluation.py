from __future__ import annotations

import numpy as np
import pytest

from assemblage.errors import (DegenerateSeries, EmptyIntersection, InsufficientHistory,
                               MeanNearZero, UnmappedComponent)
from assemblage.estimators import VARIANTS, Dataset, EstimatorSpec, fit, predict, prepare
from assemblage.evaluation import (decompose_contributions, fit_benchmark, quantile_score,
                                   relative_rmse, rmse, run_pseudo_oos, score_table,
                                   series_properties)
from assemblage.synthetic import SynthConfig, generate
from assemblage.transforms import MONTH, PriceIndexPanel, WindowScheme, to_month


@pytest.fixture(scope="module")
def synth():
    return generate(SynthConfig(seed=2, n_components=6, n_months=200, spike_prob=0.01))


def test_single_origin_matches_direct_fit(synth):
    spec = EstimatorSpec("albacore_comps", lam=0.5)
    origin = synth.data.panel.dates[150]
    run = run_pseudo_oos(spec, synth.data, WindowScheme.rolling(96), (origin, origin))
    assert run.origins.size == 1
    whi = origin - MONTH
    wlo = whi - 95 * MONTH
    f = fit(spec, synth.data, start=wlo, end=whi)
    assert f.row_dates[-1] == whi - 12 * MONTH
    task = prepare(spec, synth.data)
    i = int(np.flatnonzero(task.dates == origin)[0])
    assert run.predictions[0] == pytest.approx(predict(f, task.X[i]), abs=1e-12)
    assert run.train_end[0] == whi
    assert run.train_start[0] == wlo
    assert run.actuals[0] == task.y[i]


def test_future_data_cannot_leak(synth):
    spec = EstimatorSpec("albacore_ranks")
    panel = synth.data.panel
    k = 140
    origin = panel.dates[k]
    levels = panel.levels.copy()
    hl = panel.headline_levels.copy()
    levels[k + 1:] *= np.linspace(1.0, 3.0, levels.shape[0] - k - 1)[:, None]
    hl[k + 1:] *= 0.5
    other = Dataset(PriceIndexPanel(panel.dates, levels, panel.labels, panel.headline_weights, hl))
    scheme = WindowScheme.rolling(96)
    a = run_pseudo_oos(spec, synth.data, scheme, (origin, origin))
    b = run_pseudo_oos(spec, other, scheme, (origin, origin))
    assert a.predictions[0] == b.predictions[0]
    assert a.lambdas[0] == b.lambdas[0]


def test_retune_cadence_and_window_ends(synth):
    spec = EstimatorSpec("albacore_comps")
    dates = synth.data.panel.dates
    run = run_pseudo_oos(spec, synth.data, WindowScheme.expanding(dates[0]),
                         (dates[120], dates[150]), retune_every=12)
    assert run.origins.size == 31
    assert np.all(run.train_end < run.origins)
    # lambda can only change at origins 0, 12, 24
    changes = np.flatnonzero(np.diff(run.lambdas) != 0) + 1
    assert set(changes) <= {12, 24}
    assert np.all(np.isnan(run.actuals[-13:]) | (run.origins[-13:] <= dates[-13]))


def test_empty_test_range(synth):
    with pytest.raises(EmptyIntersection):
        run_pseudo_oos(EstimatorSpec("fixed"), synth.data, WindowScheme.rolling(96),
                       ("2200-01", "2200-12"))


def test_rmse_examples():
    assert rmse(([1.0, 2.0], [1.0, 2.0])) == 0.0
    assert rmse(([0.0, 0.0], [3.0, -3.0])) == pytest.approx(3.0)
    assert relative_rmse(([1.0, 1.0], [0.0, 0.0]), ([2.0, -2.0], [0.0, 0.0])) == pytest.approx(0.5)
    assert rmse(([1.0, np.nan], [1.0, 5.0])) == 0.0
    with pytest.raises(EmptyIntersection):
        rmse(([np.nan], [1.0]))


def test_quantile_score_examples():
    a = np.array([1.0, 2.0, 4.0])
    assert quantile_score((a, a), 0.3) == 0.0
    p = np.array([0.0, 3.0, 3.0])
    assert quantile_score((p, a), 0.5) == pytest.approx(0.5 * np.mean(np.abs(a - p)))
    assert quantile_score(([0.0], [1.0]), 0.85) == pytest.approx(0.85)
    assert quantile_score(([1.0], [0.0]), 0.85) == pytest.approx(0.15)


def test_score_table_numeraire_is_one(synth):
    dates = synth.data.panel.dates
    rng = (dates[130], dates[150])
    runs = {m: run_pseudo_oos(EstimatorSpec(v, lam=1.0 if v != "fixed" else None, tau=t),
                              synth.data, WindowScheme.rolling(96), rng)
            for m, v, t in [("ew", "fixed", None), ("ranks", "albacore_ranks", None),
                            ("q", "qualbacore_ranks", 0.5)]}
    table = score_table(runs, "ew")
    by = {r["model"]: r for r in table}
    assert by["ew"]["relative_rmse"] == 1.0
    assert by["ranks"]["relative_rmse"] == pytest.approx(by["ranks"]["rmse"] / by["ew"]["rmse"])
    assert "pinball" in by["q"] and "pinball" not in by["ranks"]
    with pytest.raises(KeyError):
        score_table(runs, "missing")


def test_benchmark_examples():
    rng = np.random.default_rng(0)
    y = np.cumsum(rng.normal(size=100))
    f = fit_benchmark(np.column_stack([y - 3.0, rng.normal(size=100)]), y)
    assert f.weights[0] == pytest.approx(1.0, abs=1e-8)
    assert f.intercept == pytest.approx(3.0, abs=1e-8)
    x = rng.normal(size=100)
    B = np.column_stack([x, x])
    a, b = fit_benchmark(B, 2 * x), fit_benchmark(B, 2 * x)
    assert a.weights.tobytes() == b.weights.tobytes()
    assert a.weights.sum() == pytest.approx(2.0, abs=1e-6)


def test_properties_examples():
    rng = np.random.default_rng(1)
    h = 2.0 + np.sin(np.arange(120) / 5.0) + rng.normal(0, 0.1, 120)
    same = series_properties(h, h)
    assert same.bias == 0.0 and same.volatility_ratio == 1.0 and same.lead_lag == 0
    up = series_properties(h + 2.0, h)
    assert up.bias == pytest.approx(2.0) and up.volatility_ratio == pytest.approx(1.0)
    half = series_properties(0.5 * h + 1.0, h)
    assert half.volatility_ratio == pytest.approx(0.5)
    # a candidate that shows today what the headline shows in three months leads by 3
    lead = series_properties(h[3:], h[:-3])
    assert lead.lead_lag == 3
    lag = series_properties(h[:-3], h[3:])
    assert lag.lead_lag == -3


def test_properties_errors():
    h = np.linspace(1.0, 2.0, 30)
    with pytest.raises(InsufficientHistory):
        series_properties(h[:10], h[:10])
    with pytest.raises(DegenerateSeries):
        series_properties(np.ones(30), h)
    with pytest.raises(MeanNearZero):
        series_properties(h - h.mean(), h)


def test_decompose_single_group_and_zero_weight(synth):
    spec = EstimatorSpec("albacore_comps", lam=1e-3)
    f = fit(spec, synth.data)
    one = decompose_contributions(f, synth.data, {c: "all" for c in synth.data.panel.labels})
    np.testing.assert_allclose(one.contributions[:, 0], one.index, atol=1e-12)
    task = prepare(spec, synth.data)
    np.testing.assert_allclose(one.index, task.X @ f.weights, atol=1e-12)
    each = decompose_contributions(f, synth.data)
    for k in np.flatnonzero(f.weights == 0):
        assert np.all(each.contributions[:, k] == 0)


def test_decompose_unmapped(synth):
    f = fit(EstimatorSpec("albacore_comps", lam=1.0), synth.data)
    with pytest.raises(UnmappedComponent):
        decompose_contributions(f, synth.data, {"C01": "a"})


def test_decompose_ranks_round_trip(synth):
    spec = EstimatorSpec("albacore_ranks", lam=1.0)
    f = fit(spec, synth.data)
    dec = decompose_contributions(f, synth.data)
    task = prepare(spec, synth.data)
    np.testing.assert_allclose(dec.contributions.sum(axis=1), task.X @ f.weights, atol=1e-10)
    assert dec.groups == synth.data.panel.labels


@pytest.mark.parametrize("variant", [v for v in VARIANTS if v != "benchmark"])
def test_decompose_is_additive_for_every_variant(variant, synth):
    spec = EstimatorSpec(variant, lam=1.0 if variant != "fixed" else None,
                         tau=0.5 if variant.startswith("qual") else None,
                         constrained=variant != "lag_ar")
    f = fit(spec, synth.data)
    dec = decompose_contributions(f, synth.data, start=f.train_start, end=f.train_end)
    np.testing.assert_allclose(dec.contributions.sum(axis=1), dec.index, atol=1e-10)
    rows = np.isin(dec.dates, f.row_dates)
    np.testing.assert_allclose(dec.index[rows], f.fitted, atol=1e-10)
    assert dec.dates[0] >= to_month(f.train_start)
