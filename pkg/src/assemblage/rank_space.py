"""Order statistics of a component panel and weight maps between spaces.

Rank 0 is the smallest value of the period (ascending sort); ties keep
component order. ``ranks[t, k]`` is the rank of component ``k`` at ``t``
and ``order[t, r]`` the component holding rank ``r``, so the two are
inverse permutations. Reported ranks are 0-based; CSV output adds one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientHistory, ShapeMismatch
from .transforms import GrowthPanel, to_months


@dataclass(frozen=True, eq=False)
class OrderedPanel:
    dates: np.ndarray
    order_stats: np.ndarray
    ranks: np.ndarray
    labels: tuple = ()
    window: int = 1
    source: OrderedPanel | None = None

    @property
    def order(self) -> np.ndarray:
        return np.argsort(self.ranks, axis=1, kind="stable")

    @property
    def n_ranks(self) -> int:
        return self.order_stats.shape[1]

    def raw_values(self) -> np.ndarray:
        """Component-space values recovered by undoing the sort."""
        if self.window != 1:
            raise ValueError("smoothed order statistics are not a permutation of a raw row")
        return np.take_along_axis(self.order_stats, self.ranks, axis=1)


def to_order_statistics(panel: GrowthPanel | np.ndarray, dates=None) -> OrderedPanel:
    """Sort each period's components ascending, remembering the permutation."""
    if isinstance(panel, GrowthPanel):
        values, dates, labels = panel.rates, panel.dates, panel.labels
    else:
        values = np.asarray(panel, dtype=float)
        labels = tuple(f"c{k + 1}" for k in range(values.shape[1]))
        dates = to_months(dates) if dates is not None else np.arange(values.shape[0])
    if not np.all(np.isfinite(values)):
        raise ValueError("order statistics need a panel without missing values")
    order = np.argsort(values, axis=1, kind="stable")
    stats = np.take_along_axis(values, order, axis=1)
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(values.shape[1])[None, :].repeat(values.shape[0], 0),
                      axis=1)
    return OrderedPanel(dates, stats, ranks, labels)


def smooth_order_stats(ordered: OrderedPanel, window: int = 3) -> OrderedPanel:
    """Trailing moving average of each rank's series; drops ``window - 1`` periods."""
    if ordered.window != 1:
        raise ValueError("panel is already smoothed")
    T = ordered.order_stats.shape[0]
    if T < window:
        raise InsufficientHistory(f"{T} periods cannot fill a {window}-period average")
    if window == 1:
        return ordered
    sm = np.lib.stride_tricks.sliding_window_view(ordered.order_stats, window, axis=0).mean(axis=-1)
    return OrderedPanel(ordered.dates[window - 1:], sm, ordered.ranks[window - 1:], ordered.labels,
                        window, ordered)


def rank_to_component_weights(w_r, ordered: OrderedPanel) -> np.ndarray:
    """Time-varying component weights implied by fixed rank weights (T x K)."""
    w_r = np.asarray(w_r, dtype=float).reshape(-1)
    if w_r.shape[0] != ordered.n_ranks:
        raise ShapeMismatch(f"{w_r.shape[0]} rank weights for {ordered.n_ranks} ranks")
    return w_r[ordered.ranks]


def component_to_rank_weights(w_c, ordered: OrderedPanel) -> np.ndarray:
    """Time-varying rank weights implied by fixed component weights (T x K)."""
    w_c = np.asarray(w_c, dtype=float).reshape(-1)
    if w_c.shape[0] != ordered.n_ranks:
        raise ShapeMismatch(f"{w_c.shape[0]} component weights for {ordered.n_ranks} components")
    return w_c[ordered.order]


def rank_contributions(w_r, ordered: OrderedPanel) -> np.ndarray:
    """Per-period, per-component contributions to ``w_r' O_t``.

    For a smoothed panel each contribution averages the component-space
    contributions over the smoothing window, so rows still sum to the
    rank-space index value.
    """
    base = ordered if ordered.window == 1 else ordered.source
    W = rank_to_component_weights(w_r, base)
    C = W * base.raw_values()
    if ordered.window == 1:
        return C
    return np.lib.stride_tricks.sliding_window_view(C, ordered.window, axis=0).mean(axis=-1)
