"""Pseudo-out-of-sample runs, scores, series properties and contribution decompositions."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (AssemblageError, DegenerateSeries, EmptyIntersection, InsufficientHistory,
                     MeanNearZero, UnmappedComponent)
from .estimators import (AssemblageFit, Dataset, EstimatorSpec, fit_benchmark, fit_task, predict,
                         prepare)
from .rank_space import rank_contributions
from .solver import pinball_loss
from .transforms import MONTH, WindowScheme, month_str, to_month, to_months, window_for

LOGGER = logging.getLogger(__name__)

__all__ = ["OosRun", "run_pseudo_oos", "rmse", "relative_rmse", "quantile_score", "score_table",
           "fit_benchmark", "PropertyReport", "series_properties", "Decomposition",
           "decompose_contributions"]


@dataclass(frozen=True, eq=False)
class OosRun:
    """Per-origin predictions of one estimator.

    ``actuals`` is NaN where the target runs past the sample end; such
    origins are kept for inspection but never scored.
    """

    spec: EstimatorSpec
    origins: np.ndarray
    predictions: np.ndarray
    actuals: np.ndarray
    lambdas: np.ndarray
    train_start: np.ndarray
    train_end: np.ndarray
    weights: np.ndarray
    labels: tuple = ()
    skipped: tuple = field(default=())

    def scored(self) -> np.ndarray:
        return np.isfinite(self.actuals) & np.isfinite(self.predictions)

    def rows(self) -> list[dict]:
        out = []
        for i, o in enumerate(self.origins):
            out.append({"date": month_str(o), "prediction": float(self.predictions[i]),
                        "actual": None if not np.isfinite(self.actuals[i]) else float(self.actuals[i]),
                        "lambda": float(self.lambdas[i]),
                        "train_start": month_str(self.train_start[i]),
                        "train_end": month_str(self.train_end[i])})
        return out

    def manifest(self) -> dict:
        return {"spec": self.spec.to_dict(), "n_origins": int(self.origins.size),
                "n_scored": int(self.scored().sum()),
                "first_origin": month_str(self.origins[0]) if self.origins.size else None,
                "last_origin": month_str(self.origins[-1]) if self.origins.size else None,
                "skipped": [{"date": d, "reason": r} for d, r in self.skipped]}


def _train_rows(task, panel_dates, scheme, origin):
    months = window_for(panel_dates, scheme, origin)
    lo, hi = panel_dates[months[0]], panel_dates[months[-1]]
    # the target of row t is known once month t + h has been observed
    ok = (task.dates >= lo) & (task.dates + task.spec.horizon * MONTH <= hi) & np.isfinite(task.y)
    return np.flatnonzero(ok), lo, hi


def run_pseudo_oos(spec: EstimatorSpec, data: Dataset, scheme: WindowScheme, test_range, *,
                   retune_every: int = 12, threads: int = 1, task=None) -> OosRun:
    """Refit at every origin of ``test_range`` on its training window and predict.

    The penalty is cross-validated at the first origin and then every
    ``retune_every`` origins, carried forward in between; a spec with a
    fixed ``lam`` never re-tunes. Origins whose window cannot be built or
    fitted are skipped and logged.
    """
    if isinstance(data, Dataset) is False:
        data = Dataset(data)
    if retune_every < 1:
        raise ValueError("retune_every must be at least 1")
    task = prepare(spec, data) if task is None else task
    panel_dates = data.panel.dates
    lo, hi = (to_month(x) for x in test_range)
    candidates = np.flatnonzero((task.dates >= lo) & (task.dates <= hi))
    if candidates.size == 0:
        raise EmptyIntersection(f"no regressor rows in {month_str(lo)}:{month_str(hi)}")
    K = task.X.shape[1]
    origins, preds, actuals, lams, t0, t1, W = [], [], [], [], [], [], []
    skipped = []
    lam = spec.lam
    since_tune = None
    for i in candidates:
        origin = task.dates[i]
        try:
            rows, wlo, whi = _train_rows(task, panel_dates, scheme, origin)
            if rows.size == 0:
                raise InsufficientHistory("no realized targets inside the window")
            retune = spec.lam is None and (since_tune is None or since_tune >= retune_every)
            f = fit_task(task, rows, lam=None if retune else lam, train_range=(wlo, whi),
                         threads=threads)
        except AssemblageError as exc:
            reason = f"{type(exc).__name__}: {exc}"
            LOGGER.warning("origin %s skipped: %s", month_str(origin), reason)
            skipped.append((month_str(origin), reason))
            continue
        if retune:
            since_tune = 0
        if since_tune is not None:
            since_tune += 1
        lam = f.chosen_lambda
        assert whi < origin
        origins.append(origin)
        preds.append(predict(f, task.X[i]))
        actuals.append(task.y[i])
        lams.append(np.nan if f.chosen_lambda is None else f.chosen_lambda)
        t0.append(wlo)
        t1.append(whi)
        W.append(f.weights)
    W = np.array(W) if W else np.zeros((0, K))
    return OosRun(spec, to_months(origins), np.array(preds, dtype=float),
                  np.array(actuals, dtype=float), np.array(lams, dtype=float), to_months(t0),
                  to_months(t1), W, task.labels, tuple(skipped))


def _pairs(run):
    if isinstance(run, OosRun):
        m = run.scored()
        return run.origins[m], run.predictions[m], run.actuals[m]
    pred, actual = (np.asarray(a, dtype=float) for a in run)
    m = np.isfinite(pred) & np.isfinite(actual)
    return np.arange(pred.size)[m], pred[m], actual[m]


def rmse(run) -> float:
    """Root mean squared error over scored origins.

    ``run`` is an OosRun or a ``(predictions, actuals)`` pair.
    """
    _, p, a = _pairs(run)
    if p.size == 0:
        raise EmptyIntersection("no scored origins")
    return float(np.sqrt(np.mean((a - p) ** 2)))


def relative_rmse(run, numeraire) -> float:
    """RMSE ratio on the origins both runs scored."""
    o1, p1, a1 = _pairs(run)
    o2, p2, a2 = _pairs(numeraire)
    _, i1, i2 = np.intersect1d(o1, o2, return_indices=True)
    if i1.size == 0:
        raise EmptyIntersection("the two runs share no scored origins")
    num = np.sqrt(np.mean((a1[i1] - p1[i1]) ** 2))
    den = np.sqrt(np.mean((a2[i2] - p2[i2]) ** 2))
    if den == 0:
        return 1.0 if num == 0 else float("inf")
    return float(num / den)


def quantile_score(run, tau: float) -> float:
    """Mean pinball loss of realized minus predicted."""
    _, p, a = _pairs(run)
    if p.size == 0:
        raise EmptyIntersection("no scored origins")
    return float(np.mean(pinball_loss(a - p, tau)))


def score_table(runs: dict, numeraire: str, *, taus=None) -> list[dict]:
    """One row per model: RMSE, relative RMSE vs ``numeraire``, origin count.

    Pinball scores are added for every quantile model, or at the ``taus``
    given (one column per tau) for all models.
    """
    if numeraire not in runs:
        raise KeyError(f"numeraire {numeraire!r} is not among the runs")
    base = runs[numeraire]
    table = []
    for name, run in runs.items():
        row = {"model": name, "n_origins": int(run.scored().sum()), "rmse": rmse(run),
               "relative_rmse": 1.0 if name == numeraire else relative_rmse(run, base)}
        for tau in taus or ():
            row[f"pinball_{tau:g}"] = quantile_score(run, tau)
        if run.spec.tau is not None and not taus:
            row["pinball"] = quantile_score(run, run.spec.tau)
        table.append(row)
    return table


@dataclass(frozen=True)
class PropertyReport:
    bias: float
    volatility_ratio: float
    coefficient_of_variation: float
    lead_lag: int
    n_obs: int

    def to_dict(self) -> dict:
        return {"bias": self.bias, "volatility_ratio": self.volatility_ratio,
                "coefficient_of_variation": self.coefficient_of_variation,
                "lead_lag": self.lead_lag, "n_obs": self.n_obs}


def _pearson(a, b):
    a = a - a.mean()
    b = b - b.mean()
    den = np.sqrt(np.sum(a * a) * np.sum(b * b))
    return float(np.sum(a * b) / den) if den > 0 else -np.inf


def series_properties(candidate, headline, max_offset: int = 12, *, min_obs: int = 24
                      ) -> PropertyReport:
    """Bias, relative volatility, coefficient of variation and lead/lag offset.

    The offset ``k`` maximizes the correlation of ``candidate[t]`` with
    ``headline[t + k]`` over the overlap, so a positive offset means the
    candidate leads. Ties go to the smallest ``|k|``, then to the lead.
    """
    c = np.asarray(candidate, dtype=float).reshape(-1)
    h = np.asarray(headline, dtype=float).reshape(-1)
    if c.shape != h.shape:
        raise ValueError("candidate and headline must cover the same dates")
    m = np.isfinite(c) & np.isfinite(h)
    c, h = c[m], h[m]
    n = c.size
    if n < min_obs:
        raise InsufficientHistory(f"{n} overlapping observations; need {min_obs}")
    sd_c, sd_h = float(np.std(c, ddof=1)), float(np.std(h, ddof=1))
    if sd_c == 0 or sd_h == 0:
        raise DegenerateSeries("a series has zero variance")
    mean_c = float(np.mean(c))
    if abs(mean_c) <= 1e-6:
        raise MeanNearZero("candidate mean too close to zero for a coefficient of variation")
    max_offset = min(int(max_offset), n - 3)
    best_k, best_r = 0, -np.inf
    for k in sorted(range(-max_offset, max_offset + 1), key=lambda j: (abs(j), -j)):
        if k >= 0:
            r = _pearson(c[:n - k], h[k:])
        else:
            r = _pearson(c[-k:], h[:n + k])
        if r > best_r:
            best_k, best_r = k, r
    return PropertyReport(mean_c - float(np.mean(h)), sd_c / sd_h, sd_c / mean_c, int(best_k), n)


@dataclass(frozen=True, eq=False)
class Decomposition:
    dates: np.ndarray
    groups: tuple
    contributions: np.ndarray  # (T, n_groups)
    index: np.ndarray

    def long_rows(self) -> list[tuple]:
        out = []
        for t, d in enumerate(self.dates):
            for g, name in enumerate(self.groups):
                out.append((month_str(d), name, float(self.contributions[t, g])))
        return out


def decompose_contributions(fit: AssemblageFit, data: Dataset, grouping: dict | None = None, *,
                            start=None, end=None) -> Decomposition:
    """Split the fitted index into group contributions.

    Rank-space fits are first mapped to period-varying component weights.
    Rows always sum to the index; an intercept, if any, is its own group.
    ``grouping=None`` puts every regressor in its own group.
    """
    task = prepare(fit.spec, data)
    rows = np.arange(task.dates.size)
    if start is not None:
        rows = rows[task.dates[rows] >= to_month(start)]
    if end is not None:
        rows = rows[task.dates[rows] <= to_month(end)]
    if task.ordered is not None:
        base = task.ordered if task.ordered.window == 1 else task.ordered.source
        members = base.labels
        C = rank_contributions(fit.weights, task.ordered)[rows]
    else:
        members = task.labels
        X = task.X[rows]
        if fit.shift is not None:
            X = X + fit.shift
        C = X * fit.weights[None, :]
    if grouping is None:
        grouping = {m: m for m in members}
    missing = [m for m in members if m not in grouping]
    if missing:
        raise UnmappedComponent(f"no group for {', '.join(missing)}")
    groups = tuple(dict.fromkeys(grouping[m] for m in members))
    G = np.zeros((len(members), len(groups)))
    for k, m in enumerate(members):
        G[k, groups.index(grouping[m])] = 1.0
    contrib = C @ G
    index = C.sum(axis=1)
    if fit.intercept is not None:
        contrib = np.column_stack([contrib, np.full(rows.size, fit.intercept)])
        groups = groups + ("intercept",)
        index = index + fit.intercept
    return Decomposition(task.dates[rows], groups, contrib, index)
