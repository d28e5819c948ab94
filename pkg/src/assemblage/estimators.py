"""Assemblage estimators: build each variant's penalized problem and fit it.

Variants
--------
albacore_comps     components, squared loss, ridge toward headline weights,
                   w >= 0, sum(w) = 1
albacore_ranks     smoothed order statistics, squared loss, fused ridge,
                   w >= 0, fitted training mean = target training mean
qualbacore_comps   as albacore_comps with pinball loss and
                   sum(w) = Q_tau(target) / mean(target)
qualbacore_ranks   as albacore_ranks with pinball loss and fitted training
                   mean = Q_tau(target)
rank_ar            sorted lags of headline MoM, albacore_ranks constraints
lag_ar             lags of headline MoM; OLS with intercept, or w >= 0 and
                   no intercept when ``constrained``
geo_comps          country rates shifted to a common mean, ridge toward
                   expenditure shares, w >= 0 only
geo_ranks          albacore_ranks on the country panel
benchmark          nonnegative regression on benchmark series, optional
                   free intercept, no penalty
fixed              fixed equal or headline weights on components (numeraire)
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import solver as slv
from .errors import MeanNearZero, ShapeMismatch
from .model_selection import CvReport, blocked_folds, cross_validate, default_grid
from .rank_space import OrderedPanel, smooth_order_stats, to_order_statistics
from .solver import (ConstraintSet, LossSpec, PenalizedProblem, PenaltySpec, WeightSolution,
                     pinball_loss)
from .transforms import (GrowthKind, GrowthPanel, MONTH, PriceIndexPanel, growth_rate,
                         headline_growth, month_str, target_path, to_month, to_months)

VARIANTS = ("albacore_comps", "albacore_ranks", "qualbacore_comps", "qualbacore_ranks",
            "rank_ar", "lag_ar", "geo_comps", "geo_ranks", "benchmark", "fixed")
PENALIZED = frozenset({"albacore_comps", "albacore_ranks", "qualbacore_comps", "qualbacore_ranks",
                       "rank_ar", "geo_comps", "geo_ranks"})
RANK_LIKE = frozenset({"albacore_ranks", "qualbacore_ranks", "rank_ar", "geo_ranks"})
QUANTILE = frozenset({"qualbacore_comps", "qualbacore_ranks"})
MEAN_TOL = 1e-6


@dataclass(frozen=True)
class EstimatorSpec:
    variant: str = "albacore_comps"
    horizon: int = 12
    growth_kind: str = "3m3m"
    lam: float | None = None
    lambda_grid: tuple | None = None
    tau: float | None = None
    lags: int = 12
    constrained: bool = True
    with_intercept: bool = False
    folds: int = 10
    smoothing: int = 3
    fixed_weights: str = "equal"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {', '.join(VARIANTS)}")
        if int(self.horizon) < 1:
            raise ValueError("horizon must be at least 1")
        if int(self.lags) < 1:
            raise ValueError("lags must be at least 1")
        if self.variant in QUANTILE and (self.tau is None or not 0 < self.tau < 1):
            raise ValueError(f"{self.variant} needs tau in (0, 1)")
        if self.lam is not None and self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.fixed_weights not in ("equal", "headline"):
            raise ValueError("fixed_weights must be 'equal' or 'headline'")
        object.__setattr__(self, "growth_kind", GrowthKind.parse(self.growth_kind).value)
        object.__setattr__(self, "horizon", int(self.horizon))
        if self.lambda_grid is not None:
            object.__setattr__(self, "lambda_grid", tuple(float(x) for x in self.lambda_grid))

    @property
    def loss(self) -> LossSpec:
        if self.variant in QUANTILE:
            return LossSpec.pinball(self.tau)
        return LossSpec.squared()

    @property
    def penalized(self) -> bool:
        return self.variant in PENALIZED

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["lambda_grid"] is not None:
            d["lambda_grid"] = list(d["lambda_grid"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> EstimatorSpec:
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True, eq=False)
class Dataset:
    """A component panel plus optional benchmark series (already rates)."""

    panel: PriceIndexPanel
    benchmarks: GrowthPanel | None = None


@dataclass(frozen=True, eq=False)
class Task:
    """Regressor rows and targets for one estimator spec on one dataset.

    ``y`` is NaN where the target's horizon runs past the sample end.
    """

    spec: EstimatorSpec
    dates: np.ndarray
    X: np.ndarray
    y: np.ndarray
    labels: tuple
    index_kind: str
    center: np.ndarray | None = None
    ordered: OrderedPanel | None = None
    aggregate: np.ndarray | None = None

    def rows_between(self, start, end) -> np.ndarray:
        return np.flatnonzero((self.dates >= to_month(start)) & (self.dates <= to_month(end)))

    def realized_rows(self, upto=None) -> np.ndarray:
        """Rows whose target is fully observed by month ``upto`` (inclusive)."""
        ok = np.isfinite(self.y)
        if upto is not None:
            ok &= self.dates + self.spec.horizon * MONTH <= to_month(upto)
        return np.flatnonzero(ok)


def lag_matrix(x, p: int) -> np.ndarray:
    """Row t holds ``x[t], x[t-1], ..., x[t-p+1]``; the first p-1 rows are dropped."""
    x = np.asarray(x, dtype=float)
    win = np.lib.stride_tricks.sliding_window_view(x, p)
    return win[:, ::-1].copy()


def empirical_quantile(y, tau: float) -> float:
    """Inverse-CDF quantile: the smallest sample value with ``F(x) >= tau``."""
    return float(np.quantile(np.asarray(y, dtype=float), tau, method="inverted_cdf"))


def _on_dates(values, dates, target_dates):
    out = np.full(len(target_dates), np.nan)
    _, i_src, i_dst = np.intersect1d(dates, target_dates, return_indices=True)
    out[i_dst] = np.asarray(values)[i_src]
    return out


def prepare(spec: EstimatorSpec, data: Dataset | PriceIndexPanel) -> Task:
    """Build the regressor matrix and aligned target for ``spec``."""
    if isinstance(data, PriceIndexPanel):
        data = Dataset(data)
    panel = data.panel
    mom_dates, mom = headline_growth(panel, GrowthKind.MOM)
    target = target_path(mom, spec.horizon, mom_dates)
    v = spec.variant
    center = aggregate = ordered = None
    if v in ("albacore_comps", "qualbacore_comps", "geo_comps", "fixed"):
        g = growth_rate(panel, spec.growth_kind)
        dates, X, labels, kind = g.dates, g.rates, panel.labels, "components"
        center = panel.headline_weights
        if v == "geo_comps":
            agg_dates, agg = headline_growth(panel, spec.growth_kind)
            aggregate = _on_dates(agg, agg_dates, dates)
    elif v in ("albacore_ranks", "qualbacore_ranks", "geo_ranks"):
        raw = to_order_statistics(growth_rate(panel, GrowthKind.MOM))
        ordered = smooth_order_stats(raw, spec.smoothing)
        dates, X, kind = ordered.dates, ordered.order_stats, "ranks"
        labels = tuple(f"rank{r + 1}" for r in range(X.shape[1]))
    elif v in ("rank_ar", "lag_ar"):
        L = lag_matrix(mom, spec.lags)
        dates = mom_dates[spec.lags - 1:]
        if v == "rank_ar":
            ordered = to_order_statistics(L, dates)
            ordered = replace(ordered, labels=tuple(f"lag{j}" for j in range(spec.lags)))
            X, kind = ordered.order_stats, "ranks"
            labels = tuple(f"rank{r + 1}" for r in range(spec.lags))
        else:
            X, kind = L, "lags"
            labels = tuple(f"lag{j}" for j in range(spec.lags))
    else:  # benchmark
        if data.benchmarks is None:
            raise ValueError("the benchmark variant needs benchmark series")
        b = data.benchmarks
        dates, X, labels, kind = b.dates, b.rates, b.labels, "benchmarks"
        keep = np.all(np.isfinite(X), axis=1)
        dates, X = dates[keep], X[keep]
    y = _on_dates(target.values, target.origin_dates, dates)
    return Task(spec, dates, X, y, tuple(labels), kind, center, ordered, aggregate)


def build_problem(spec: EstimatorSpec, X, y, lam: float, center=None) -> PenalizedProblem:
    """The penalized problem for one variant on given training rows."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    K = X.shape[1]
    v = spec.variant
    loss = spec.loss
    if v in ("albacore_comps", "qualbacore_comps", "geo_comps"):
        if center is None or len(center) != K:
            raise ShapeMismatch("component variants need one center weight per component")
        penalty = PenaltySpec.centered(center)
    elif v in RANK_LIKE:
        penalty = PenaltySpec.fused()
    else:
        penalty = PenaltySpec.none()
        lam = 0.0
    if v == "albacore_comps":
        cons = ConstraintSet.simplex(K)
    elif v == "qualbacore_comps":
        mean = float(np.mean(y))
        if abs(mean) <= MEAN_TOL:
            raise MeanNearZero(f"target mean {mean:.3g} too close to zero for the quantile ratio")
        cons = ConstraintSet.simplex(K, empirical_quantile(y, spec.tau) / mean)
    elif v in ("albacore_ranks", "rank_ar", "geo_ranks"):
        cons = ConstraintSet(True, ((X.mean(axis=0), float(np.mean(y))),))
    elif v == "qualbacore_ranks":
        cons = ConstraintSet(True, ((X.mean(axis=0), empirical_quantile(y, spec.tau)),))
    elif v == "geo_comps":
        cons = ConstraintSet(True)
    elif v == "lag_ar":
        cons = ConstraintSet(True) if spec.constrained else ConstraintSet(False, include_intercept=True)
    elif v == "benchmark":
        cons = ConstraintSet(True, include_intercept=spec.with_intercept)
    else:
        raise ValueError(f"variant {v!r} has no optimization problem")
    return PenalizedProblem(X, y, loss, penalty, cons, lam)


@dataclass(frozen=True, eq=False)
class RowFit:
    solution: WeightSolution
    shift: np.ndarray | None


class RowFitter:
    """Fits one spec on subsets of a fixed block of rows (used by CV)."""

    def __init__(self, spec: EstimatorSpec, X, y, center=None, aggregate=None):
        self.spec = spec
        self.X = np.asarray(X, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.center = center
        self.aggregate = None if aggregate is None else np.asarray(aggregate, dtype=float)

    def shift(self, rows) -> np.ndarray | None:
        if self.spec.variant != "geo_comps":
            return None
        if self.aggregate is None:
            raise ValueError("geo_comps needs the aggregate series")
        return float(np.mean(self.aggregate[rows])) - self.X[rows].mean(axis=0)

    def design(self, rows, shift) -> np.ndarray:
        X = self.X[rows]
        return X if shift is None else X + shift

    def problem(self, rows, lam) -> PenalizedProblem:
        sh = self.shift(rows)
        return build_problem(self.spec, self.design(rows, sh), self.y[rows], lam, self.center)

    def fit_rows(self, rows, lam, warm_start=None) -> RowFit:
        sh = self.shift(rows)
        prob = build_problem(self.spec, self.design(rows, sh), self.y[rows], lam, self.center)
        ws = warm_start.solution if isinstance(warm_start, RowFit) else warm_start
        return RowFit(slv.solve(prob, warm_start=ws), sh)

    def predict_rows(self, fit: RowFit, rows) -> np.ndarray:
        pred = self.design(rows, fit.shift) @ fit.solution.weights
        if fit.solution.intercept is not None:
            pred = pred + fit.solution.intercept
        return pred

    def score_rows(self, fit: RowFit, rows) -> float:
        err = self.y[rows] - self.predict_rows(fit, rows)
        if self.spec.loss.kind == "squared":
            return float(np.mean(err * err))
        return float(np.mean(pinball_loss(err, self.spec.tau)))


@dataclass(frozen=True, eq=False)
class AssemblageFit:
    spec: EstimatorSpec
    weights: np.ndarray
    intercept: float | None
    chosen_lambda: float | None
    train_start: np.datetime64 | None
    train_end: np.datetime64 | None
    row_dates: np.ndarray
    fitted: np.ndarray
    labels: tuple
    index_kind: str = "components"
    shift: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)
    cv: CvReport | None = None

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "index_kind": self.index_kind,
            "labels": list(self.labels),
            "weights": [float(x) for x in self.weights],
            "intercept": None if self.intercept is None else float(self.intercept),
            "chosen_lambda": None if self.chosen_lambda is None else float(self.chosen_lambda),
            "train_start": None if self.train_start is None else month_str(self.train_start),
            "train_end": None if self.train_end is None else month_str(self.train_end),
            "row_dates": [month_str(d) for d in self.row_dates],
            "fitted": [float(x) for x in self.fitted],
            "shift": None if self.shift is None else [float(x) for x in self.shift],
            "diagnostics": self.diagnostics,
            "cv": None if self.cv is None else self.cv.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> AssemblageFit:
        return cls(
            spec=EstimatorSpec.from_dict(d["spec"]),
            weights=np.array(d["weights"], dtype=float),
            intercept=d["intercept"],
            chosen_lambda=d["chosen_lambda"],
            train_start=None if d["train_start"] is None else to_month(d["train_start"]),
            train_end=None if d["train_end"] is None else to_month(d["train_end"]),
            row_dates=to_months(d["row_dates"]),
            fitted=np.array(d["fitted"], dtype=float),
            labels=tuple(d["labels"]),
            index_kind=d.get("index_kind", "components"),
            shift=None if d.get("shift") is None else np.array(d["shift"], dtype=float),
            diagnostics=d.get("diagnostics", {}),
            cv=None if d.get("cv") is None else CvReport.from_dict(d["cv"]),
        )


def _diagnostics(sol: WeightSolution) -> dict:
    return {
        "objective": float(sol.objective),
        "kkt_stationarity": float(sol.kkt_stationarity),
        "kkt_feasibility": float(sol.kkt_feasibility),
        "iterations": int(sol.iterations),
        "converged": bool(sol.converged),
        "method": sol.method,
    }


def fit_design(spec: EstimatorSpec, X, y, *, center=None, aggregate=None, lam=None,
               dates=None, labels=None, index_kind="components", train_range=None,
               threads: int = 1) -> AssemblageFit:
    """Fit ``spec`` on prepared regressor rows.

    ``lam=None`` falls back to ``spec.lam``; if that is also None the penalty
    is chosen by blocked cross-validation over ``spec.lambda_grid`` (or the
    default data-scaled grid).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeMismatch("design rows must match the target length")
    n, K = X.shape
    rows = np.arange(n)
    dates = np.arange(n) if dates is None else to_months(dates)
    labels = tuple(labels) if labels is not None else tuple(f"x{k + 1}" for k in range(K))
    if train_range is None and dates.dtype.kind == "M" and n:
        train_range = (dates[0], dates[-1])
    train_start, train_end = train_range if train_range is not None else (None, None)

    if spec.variant == "fixed":
        if spec.fixed_weights == "equal":
            w = np.full(K, 1.0 / K)
        else:
            if center is None:
                raise ValueError("headline weights needed for fixed headline weighting")
            w = np.asarray(center, dtype=float)
        return AssemblageFit(spec, w, None, None, train_start, train_end, dates, X @ w, labels,
                             index_kind)

    fitter = RowFitter(spec, X, y, center, aggregate)
    cv = None
    if lam is None:
        lam = spec.lam
    if not spec.penalized:
        lam = 0.0
    elif lam is None:
        grid = spec.lambda_grid
        if grid is None:
            grid = default_grid(fitter.design(rows, fitter.shift(rows)))
        plan = blocked_folds(n, spec.folds)
        cv = cross_validate(fitter, grid, plan, threads=threads)
        lam = cv.chosen_lambda
    fit = fitter.fit_rows(rows, float(lam))
    fitted = fitter.predict_rows(fit, rows)
    sol = fit.solution
    return AssemblageFit(spec, sol.weights, sol.intercept, float(lam), train_start, train_end,
                         dates, fitted, labels, index_kind, fit.shift, _diagnostics(sol), cv)


def fit_task(task: Task, rows, *, lam=None, train_range=None, threads: int = 1) -> AssemblageFit:
    rows = np.asarray(rows, dtype=int)
    agg = None if task.aggregate is None else task.aggregate[rows]
    return fit_design(task.spec, task.X[rows], task.y[rows], center=task.center, aggregate=agg,
                      lam=lam, dates=task.dates[rows], labels=task.labels,
                      index_kind=task.index_kind, train_range=train_range, threads=threads)


def fit(spec: EstimatorSpec, data: Dataset | PriceIndexPanel, *, start=None, end=None,
        lam=None, threads: int = 1) -> AssemblageFit:
    """Fit on every row whose target is realized inside ``[start, end]``."""
    task = prepare(spec, data)
    rows = task.realized_rows(upto=end)
    if start is not None:
        rows = rows[task.dates[rows] >= to_month(start)]
    if rows.size == 0:
        raise ValueError("no training rows with realized targets in the requested range")
    lo = to_month(start) if start is not None else task.dates[rows[0]]
    hi = to_month(end) if end is not None else task.dates[rows[-1]] + spec.horizon * MONTH
    return fit_task(task, rows, lam=lam, train_range=(lo, hi), threads=threads)


def predict(fit: AssemblageFit, row) -> float:
    """Index value ``w'(x + shift) + b`` for one regressor row."""
    x = np.asarray(row, dtype=float).reshape(-1)
    if x.shape[0] != fit.weights.shape[0]:
        raise ShapeMismatch(f"row has {x.shape[0]} entries, fit has {fit.weights.shape[0]} weights")
    if fit.shift is not None:
        x = x + fit.shift
    value = float(x @ fit.weights)
    if fit.intercept is not None:
        value += fit.intercept
    return value


def predict_rows(fit: AssemblageFit, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if fit.shift is not None:
        X = X + fit.shift
    out = X @ fit.weights
    if fit.intercept is not None:
        out = out + fit.intercept
    return out


# Per-variant entry points on design-level inputs.

def fit_albacore_comps(X, y, headline_weights, lam=None, **kw) -> AssemblageFit:
    spec = kw.pop("spec", None) or EstimatorSpec("albacore_comps", **_spec_kw(kw))
    return fit_design(spec, X, y, center=headline_weights, lam=lam, **kw)


def fit_albacore_ranks(O, y, lam=None, **kw) -> AssemblageFit:
    spec = kw.pop("spec", None) or EstimatorSpec("albacore_ranks", **_spec_kw(kw))
    kw.setdefault("index_kind", "ranks")
    return fit_design(spec, O, y, lam=lam, **kw)


def fit_qualbacore_comps(X, y, headline_weights, lam=None, tau=0.5, **kw) -> AssemblageFit:
    spec = kw.pop("spec", None) or EstimatorSpec("qualbacore_comps", tau=tau, **_spec_kw(kw))
    return fit_design(spec, X, y, center=headline_weights, lam=lam, **kw)


def fit_qualbacore_ranks(O, y, lam=None, tau=0.5, **kw) -> AssemblageFit:
    spec = kw.pop("spec", None) or EstimatorSpec("qualbacore_ranks", tau=tau, **_spec_kw(kw))
    kw.setdefault("index_kind", "ranks")
    return fit_design(spec, O, y, lam=lam, **kw)


def fit_geo(X, y, expenditure_shares, lam=None, variant="geo_comps", aggregate=None, **kw
            ) -> AssemblageFit:
    """Country-panel assemblage.

    For ``geo_comps`` each country series is shifted so its training mean
    equals that of ``aggregate`` (the area-wide rate on the same dates).
    For ``geo_ranks`` pass the smoothed order statistics of the countries.
    """
    if variant not in ("geo_comps", "geo_ranks"):
        raise ValueError("variant must be geo_comps or geo_ranks")
    spec = kw.pop("spec", None) or EstimatorSpec(variant, **_spec_kw(kw))
    if variant == "geo_comps":
        if aggregate is None:
            raise ValueError("geo_comps needs the aggregate series")
        return fit_design(spec, X, y, center=expenditure_shares, aggregate=aggregate, lam=lam, **kw)
    kw.setdefault("index_kind", "ranks")
    return fit_design(spec, X, y, lam=lam, **kw)


def fit_rank_ar(headline_mom, h: int, p: int = 12, lam=None, variant="rank_ar",
                constrained: bool = True, **kw) -> AssemblageFit:
    """Autoregression on ``p`` lags of monthly headline rates, in lag or rank space."""
    if variant not in ("rank_ar", "lag_ar"):
        raise ValueError("variant must be rank_ar or lag_ar")
    mom = np.asarray(headline_mom, dtype=float)
    L = lag_matrix(mom, p)
    target = target_path(mom, h)
    # lag row j corresponds to origin j + p - 1
    rows = np.arange(L.shape[0])
    origin = rows + p - 1
    keep = origin < target.values.shape[0]
    X = L[keep]
    y = target.values[origin[keep]]
    spec = EstimatorSpec(variant, horizon=h, lags=p, constrained=constrained, **_spec_kw(kw))
    if variant == "rank_ar":
        X = np.sort(X, axis=1, kind="stable")
        kw.setdefault("index_kind", "ranks")
        kw.setdefault("labels", tuple(f"rank{r + 1}" for r in range(p)))
    else:
        kw.setdefault("index_kind", "lags")
        kw.setdefault("labels", tuple(f"lag{j}" for j in range(p)))
    return fit_design(spec, X, y, lam=lam, **kw)


def fit_benchmark(B, y, with_intercept: bool = True, **kw) -> AssemblageFit:
    """Nonnegative least-squares combination of benchmark series."""
    spec = EstimatorSpec("benchmark", with_intercept=with_intercept, **_spec_kw(kw))
    kw.setdefault("index_kind", "benchmarks")
    return fit_design(spec, B, y, **kw)


_SPEC_KEYS = ("horizon", "growth_kind", "lambda_grid", "folds", "smoothing")


def _spec_kw(kw: dict) -> dict:
    return {k: kw.pop(k) for k in _SPEC_KEYS if k in kw}


def relative_weights(fit: AssemblageFit, center=None) -> np.ndarray:
    """Weights relative to the penalty center, in percent (100 = no deviation).

    Ridge-to-center variants divide by the center weight (NaN where it is
    zero); other variants divide by the uniform weight ``1/K``.
    """
    w = fit.weights
    if center is not None and fit.spec.variant in ("albacore_comps", "qualbacore_comps",
                                                   "geo_comps"):
        c = np.asarray(center, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(c > 0, 100.0 * w / np.where(c > 0, c, 1.0), np.nan)
    return 100.0 * w * w.shape[0]


def weights_curve(spec: EstimatorSpec, data: Dataset | PriceIndexPanel, horizons, *,
                  start=None, end=None, threads: int = 1) -> list[dict]:
    """One fit per horizon on a common set of origins, each with its own CV.

    The common origins are those whose target is realized for the longest
    horizon, so every horizon sees the same regressor rows.
    """
    horizons = sorted({int(h) for h in horizons})
    if not horizons:
        raise ValueError("need at least one horizon")
    if isinstance(data, PriceIndexPanel):
        data = Dataset(data)
    hmax = horizons[-1]
    base = prepare(replace(spec, horizon=hmax), data)
    common = base.dates[base.realized_rows(upto=end)]
    if start is not None:
        common = common[common >= to_month(start)]
    out = []
    for h in horizons:
        task = prepare(replace(spec, horizon=h), data)
        rows = np.flatnonzero(np.isin(task.dates, common) & np.isfinite(task.y))
        f = fit_task(task, rows, threads=threads)
        rel = relative_weights(f, task.center)
        for k, label in enumerate(f.labels):
            key = k + 1 if f.index_kind == "ranks" else label
            out.append({"h": h, "index": key, "weight": float(f.weights[k]),
                        "relative_weight": float(rel[k]),
                        "lambda": None if f.chosen_lambda is None else float(f.chosen_lambda)})
    return out
