from __future__ import annotations

import numpy as np
import pytest

from assemblage.errors import (EmptyIntersection, InsufficientFuture, InsufficientHistory,
                               NonPositiveLevel, WindowTooLong)
from assemblage.transforms import (GrowthKind, GrowthPanel, PriceIndexPanel, WindowScheme, align,
                                   growth_rate, growth_rates, month_str, parse_range, target_path,
                                   to_month, window_for, windows)


def panel_from(levels, start="2000-01"):
    levels = np.asarray(levels, dtype=float)
    if levels.ndim == 1:
        levels = levels[:, None]
    T, K = levels.shape
    dates = to_month(start) + np.arange(T)
    return PriceIndexPanel(dates, levels, tuple(f"c{k}" for k in range(K)), np.full(K, 1 / K),
                           levels.mean(axis=1))


@pytest.mark.parametrize("kind", list(GrowthKind))
def test_constant_levels_have_zero_growth(kind):
    g = growth_rate(panel_from(np.full((40, 3), 50.0)), kind)
    assert np.all(g.rates == 0.0)
    assert g.rates.shape[0] == 40 - (2 * kind.span - 1)


def test_one_percent_monthly_growth():
    lv = 100 * 1.01 ** np.arange(40)
    np.testing.assert_allclose(growth_rates(lv, 1), 12.0, rtol=1e-12)
    # 3-month means of a geometric series keep the ratio 1.01^3 exactly
    expected = (1.01 ** 3 - 1) * 100 * 4
    assert expected == pytest.approx(12.1204, abs=1e-12)
    np.testing.assert_allclose(growth_rates(lv, 3), expected, rtol=1e-12)


def test_growth_is_scale_invariant():
    rng = np.random.default_rng(0)
    lv = 100 * np.cumprod(1 + rng.normal(0.002, 0.01, (60, 4)), axis=0)
    for m in (1, 3, 6, 12):
        np.testing.assert_allclose(growth_rates(7.3 * lv, m), growth_rates(lv, m), rtol=1e-12,
                                   atol=1e-12)


def test_growth_errors():
    with pytest.raises(InsufficientHistory):
        growth_rates(np.ones(5), 3)
    with pytest.raises(NonPositiveLevel):
        growth_rates(np.array([1.0, 0.0, 2.0, 3.0]), 1)
    with pytest.raises(NonPositiveLevel):
        panel_from(np.array([1.0, -1.0, 2.0]))


def test_panel_validation():
    with pytest.raises(ValueError):
        PriceIndexPanel(["2000-01", "2000-03"], np.ones((2, 1)), ("a",), [1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        PriceIndexPanel(["2000-01", "2000-02"], np.ones((2, 2)), ("a", "b"), [0.5, 0.6], [1.0, 1.0])


def test_target_path_examples():
    t = target_path([1.0, 2.0, 3.0, 4.0], 2)
    assert t.values[0] == 2.5
    np.testing.assert_array_equal(t.values, [2.5, 3.5])
    x = np.arange(10.0)
    np.testing.assert_array_equal(target_path(x, 1).values, x[1:])
    for h in (1, 3, 12):
        np.testing.assert_allclose(target_path(np.full(30, 2.2), h).values, 2.2)
    with pytest.raises(InsufficientFuture):
        target_path([1.0, 2.0], 2)


def test_align():
    dates = to_month("2001-01") + np.arange(24)
    g = GrowthPanel(dates, np.arange(48.0).reshape(24, 2))
    X, y, d = align(g, target_path(np.arange(24.0), 3, dates))
    assert X.shape == (21, 2) and y.shape == (21,)
    assert d[0] == dates[0] and d[-1] == dates[20]
    other = GrowthPanel(dates + 100, np.zeros((24, 2)))
    with pytest.raises(EmptyIntersection):
        align(other, target_path(np.arange(24.0), 3, dates))


def test_windows_match_calendar_examples():
    dates = to_month("1980-01") + np.arange(600)
    idx = window_for(dates, WindowScheme.rolling(240), "2020-01")
    assert idx.size == 240
    assert month_str(dates[idx[0]]) == "2000-01" and month_str(dates[idx[-1]]) == "2019-12"
    idx = window_for(dates, WindowScheme.expanding("1990-01"), "2010-01")
    assert month_str(dates[idx[0]]) == "1990-01" and month_str(dates[idx[-1]]) == "2009-12"
    short = to_month("2010-01") + np.arange(130)
    with pytest.raises(WindowTooLong):
        window_for(short, WindowScheme.rolling(240), short[120])


def test_windows_never_leak():
    dates = to_month("1990-01") + np.arange(400)
    for train, origin in windows(dates, WindowScheme.parse("rolling:120"), parse_range("2005-01:2015-12")):
        assert dates[train].max() < origin


def test_scheme_parsing():
    assert str(WindowScheme.parse("rolling:240")) == "rolling:240"
    assert str(WindowScheme.parse("expanding:1990-01")) == "expanding:1990-01"
    with pytest.raises(ValueError):
        WindowScheme.rolling(12)
    with pytest.raises(ValueError):
        WindowScheme.parse("sliding:10")
    assert GrowthKind.parse("qoq") is GrowthKind.THREE_MO_THREE
    assert to_month("2003-04-01") == to_month("2003-04")
