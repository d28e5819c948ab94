"""Price-index panels, growth rates, forward targets and training windows.

Dates are ``numpy.datetime64`` values at monthly resolution (``'M'``).
Growth rates are annualized percentages under simple scaling: an
m-over-m rate is ``(M_t / M_{t-m} - 1) * 100 * 12 / m``, where ``M_t``
is the trailing m-month arithmetic mean of index levels.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (EmptyIntersection, InsufficientFuture, InsufficientHistory,
                     NonPositiveLevel, ShapeMismatch, WindowTooLong)

MONTH = np.timedelta64(1, "M")


def to_month(value) -> np.datetime64:
    """Parse ``YYYY-MM`` or ``YYYY-MM-DD`` (or a datetime64) to a month."""
    if isinstance(value, np.datetime64):
        return value.astype("datetime64[M]")
    text = str(value).strip()
    if len(text) == 10:
        text = text[:7]
    if len(text) != 7 or text[4] != "-":
        raise ValueError(f"unrecognized date {value!r}; expected YYYY-MM or YYYY-MM-DD")
    return np.datetime64(text, "M")


def to_months(values) -> np.ndarray:
    if isinstance(values, np.ndarray) and values.dtype.kind == "M":
        return values.astype("datetime64[M]")
    return np.array([to_month(v) for v in values], dtype="datetime64[M]")


def month_str(d) -> str:
    return str(np.datetime64(d, "M"))


def check_monthly(dates: np.ndarray) -> None:
    if dates.size > 1 and np.any(np.diff(dates) != MONTH):
        raise ValueError("dates must be strictly increasing, monthly and gap-free")


class GrowthKind(enum.Enum):
    MOM = "mom"
    THREE_MO_THREE = "3m3m"
    SIX_MO_SIX = "6m6m"
    YOY = "yoy"

    @property
    def span(self) -> int:
        return {"mom": 1, "3m3m": 3, "6m6m": 6, "yoy": 12}[self.value]

    @classmethod
    def parse(cls, text) -> GrowthKind:
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        aliases = {"qoq": "3m3m", "3mo3": "3m3m", "month": "mom"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True, eq=False)
class PriceIndexPanel:
    dates: np.ndarray
    levels: np.ndarray
    labels: tuple
    headline_weights: np.ndarray
    headline_levels: np.ndarray

    def __post_init__(self):
        dates = to_months(self.dates)
        levels = np.asarray(self.levels, dtype=float)
        if levels.ndim == 1:
            levels = levels[:, None]
        hw = np.asarray(self.headline_weights, dtype=float).reshape(-1)
        hl = np.asarray(self.headline_levels, dtype=float).reshape(-1)
        T, K = levels.shape
        if dates.shape[0] != T or hl.shape[0] != T:
            raise ShapeMismatch("dates, levels and headline levels must have the same length")
        if hw.shape[0] != K or len(self.labels) != K:
            raise ShapeMismatch("labels and headline weights must have one entry per component")
        if not (np.all(np.isfinite(levels)) and np.all(np.isfinite(hl))):
            raise ValueError("missing values in the panel; impute or trim before loading")
        if np.any(levels <= 0) or np.any(hl <= 0):
            raise NonPositiveLevel("index levels must be strictly positive")
        check_monthly(dates)
        if np.any(hw < 0) or abs(hw.sum() - 1.0) > 1e-9:
            raise ValueError("headline weights must be nonnegative and sum to 1")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        object.__setattr__(self, "headline_weights", hw)
        object.__setattr__(self, "headline_levels", hl)

    @property
    def n_components(self) -> int:
        return self.levels.shape[1]


@dataclass(frozen=True, eq=False)
class GrowthPanel:
    dates: np.ndarray
    rates: np.ndarray
    kind: GrowthKind | None = None
    labels: tuple = ()

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=float)
        if rates.ndim == 1:
            rates = rates[:, None]
        dates = to_months(self.dates)
        if dates.shape[0] != rates.shape[0]:
            raise ShapeMismatch("one date per row required")
        labels = tuple(self.labels) or tuple(f"c{k + 1}" for k in range(rates.shape[1]))
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "labels", labels)


@dataclass(frozen=True, eq=False)
class TargetSeries:
    origin_dates: np.ndarray
    values: np.ndarray
    horizon: int


def _trailing_mean(levels: np.ndarray, m: int) -> np.ndarray:
    if m == 1:
        return levels
    win = np.lib.stride_tricks.sliding_window_view(levels, m, axis=0)
    return win.mean(axis=-1)


def growth_rates(levels, m: int) -> np.ndarray:
    """m-over-m annualized percent changes; output is ``2m - 1`` rows shorter."""
    levels = np.asarray(levels, dtype=float)
    if np.any(levels <= 0):
        raise NonPositiveLevel("index levels must be strictly positive")
    if levels.shape[0] < 2 * m:
        raise InsufficientHistory(f"{levels.shape[0]} observations; need {2 * m} for span {m}")
    M = _trailing_mean(levels, m)
    return (M[m:] / M[:-m] - 1.0) * 100.0 * (12.0 / m)


def growth_rate(panel: PriceIndexPanel, kind: GrowthKind | str) -> GrowthPanel:
    kind = GrowthKind.parse(kind)
    m = kind.span
    rates = growth_rates(panel.levels, m)
    return GrowthPanel(panel.dates[2 * m - 1:], rates, kind, panel.labels)


def headline_growth(panel: PriceIndexPanel, kind: GrowthKind | str = GrowthKind.MOM
                    ) -> tuple[np.ndarray, np.ndarray]:
    kind = GrowthKind.parse(kind)
    m = kind.span
    return panel.dates[2 * m - 1:], growth_rates(panel.headline_levels, m)


def target_path(headline_mom, h: int, dates=None) -> TargetSeries:
    """Average of the next ``h`` monthly rates at every origin that has them."""
    if h < 1:
        raise ValueError("horizon must be at least 1")
    x = np.asarray(headline_mom, dtype=float).reshape(-1)
    if x.shape[0] <= h:
        raise InsufficientFuture(f"series of length {x.shape[0]} cannot support horizon {h}")
    n = x.shape[0] - h
    if h == 1:
        values = x[1:].copy()
    else:
        values = np.lib.stride_tricks.sliding_window_view(x[1:], h).mean(axis=-1)
    if dates is None:
        origin = np.arange(n)
    else:
        origin = to_months(dates)[:n]
    return TargetSeries(origin, values, h)


def align(panel: GrowthPanel, target: TargetSeries):
    """Pair regressor rows with targets by origin date.

    Returns
    -------
    design : (n, K) array
    response : (n,) array
    dates : (n,) datetime64[M] array
    """
    tdates = to_months(target.origin_dates)
    common, ip, it = np.intersect1d(panel.dates, tdates, return_indices=True)
    if common.size == 0:
        raise EmptyIntersection("regressor and target dates do not overlap")
    return panel.rates[ip], np.asarray(target.values, dtype=float)[it], common


@dataclass(frozen=True)
class WindowScheme:
    """``Rolling(months)`` or ``Expanding(start)`` training windows."""

    kind: str = "rolling"
    months: int | None = 240
    start: np.datetime64 | None = field(default=None)

    def __post_init__(self):
        if self.kind == "rolling":
            if self.months is None or self.months < 24:
                raise ValueError("rolling windows need at least 24 months")
        elif self.kind == "expanding":
            if self.start is None:
                raise ValueError("expanding windows need a start date")
            object.__setattr__(self, "start", to_month(self.start))
        else:
            raise ValueError(f"unknown window kind {self.kind!r}")

    @classmethod
    def rolling(cls, months: int) -> WindowScheme:
        return cls("rolling", int(months))

    @classmethod
    def expanding(cls, start) -> WindowScheme:
        return cls("expanding", None, to_month(start))

    @classmethod
    def parse(cls, text: str) -> WindowScheme:
        kind, _, arg = str(text).partition(":")
        kind = kind.strip().lower()
        if kind == "rolling":
            return cls.rolling(int(arg))
        if kind == "expanding":
            return cls.expanding(arg)
        raise ValueError(f"window must be rolling:N or expanding:YYYY-MM, got {text!r}")

    def __str__(self) -> str:
        if self.kind == "rolling":
            return f"rolling:{self.months}"
        return f"expanding:{month_str(self.start)}"


def window_for(dates, scheme: WindowScheme, origin) -> np.ndarray:
    """Indices into ``dates`` of the training months for one test origin."""
    dates = to_months(dates)
    origin = to_month(origin)
    end = origin - MONTH
    if scheme.kind == "rolling":
        start = origin - scheme.months * MONTH
    else:
        start = scheme.start
    if dates.size == 0 or start < dates[0]:
        raise WindowTooLong(f"window {scheme} for origin {month_str(origin)} starts before the data")
    if start > end:
        raise WindowTooLong(f"window {scheme} for origin {month_str(origin)} is empty")
    return np.flatnonzero((dates >= start) & (dates <= end))


def windows(dates, scheme: WindowScheme, test_range) -> list[tuple[np.ndarray, np.datetime64]]:
    """One ``(train indices, origin)`` pair per date in the inclusive test range."""
    dates = to_months(dates)
    lo, hi = (to_month(x) for x in test_range)
    origins = dates[(dates >= lo) & (dates <= hi)]
    return [(window_for(dates, scheme, o), o) for o in origins]


def parse_range(text: str) -> tuple[np.datetime64, np.datetime64]:
    lo, sep, hi = str(text).partition(":")
    if not sep:
        raise ValueError(f"range must be YYYY-MM:YYYY-MM, got {text!r}")
    return to_month(lo), to_month(hi)
