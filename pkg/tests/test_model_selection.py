from __future__ import annotations

import doctest

import numpy as np
import pytest

from assemblage import model_selection
from assemblage.errors import AssemblageError, InfeasibleConstraints, TooFewObservations
from assemblage.estimators import EstimatorSpec, RowFitter
from assemblage.model_selection import blocked_folds, cross_validate, default_grid


def test_doctests():
    assert doctest.testmod(model_selection).failed == 0


@pytest.mark.parametrize("n, folds, sizes", [
    (240, 10, [24] * 10),
    (10, 10, [1] * 10),
    (23, 10, [3, 3, 3, 2, 2, 2, 2, 2, 2, 2]),
])
def test_fold_sizes(n, folds, sizes):
    plan = blocked_folds(n, folds)
    assert [len(b) for b in plan.blocks] == sizes
    joined = np.concatenate(plan.blocks)
    np.testing.assert_array_equal(joined, np.arange(n))
    for b in plan.blocks:
        assert np.all(np.diff(b) == 1)


def test_too_few_observations():
    with pytest.raises(TooFewObservations):
        blocked_folds(9, 10)


def test_train_test_split_is_a_partition():
    plan = blocked_folds(57, 10)
    for i in range(10):
        train, test = plan.train_test(i)
        assert set(train).isdisjoint(test)
        assert set(train) | set(test) == set(range(57))


def comps_fitter(y_fn, seed=0, T=120, K=4):
    rng = np.random.default_rng(seed)
    X = rng.normal(2.0, 1.0, size=(T, K))
    center = np.full(K, 1.0 / K)
    return RowFitter(EstimatorSpec("albacore_comps"), X, y_fn(X, rng), center), X


def test_single_lambda_grid():
    f, X = comps_fitter(lambda X, rng: rng.normal(size=X.shape[0]))
    rep = cross_validate(f, [3.0], blocked_folds(120, 10))
    assert rep.chosen_lambda == 3.0


def test_exact_target_selects_smallest_lambda():
    w = np.array([0.7, 0.0, 0.3, 0.0])
    f, X = comps_fitter(lambda X, rng: X @ w)
    grid = default_grid(X)
    rep = cross_validate(f, grid, blocked_folds(120, 10))
    assert rep.chosen_lambda == grid[0]


def test_limit_lambda_scores_the_center():
    f, X = comps_fitter(lambda X, rng: rng.normal(2.0, 1.0, size=X.shape[0]))
    plan = blocked_folds(120, 10)
    rep = cross_validate(f, [1e-2, 1e10], plan)
    center = np.full(4, 0.25)
    limit = np.mean([np.mean((f.y[te] - f.X[te] @ center) ** 2)
                     for te in plan.blocks])
    assert rep.mean_scores[-1] == pytest.approx(limit, abs=1e-4)


def test_report_is_deterministic_and_thread_independent():
    f, X = comps_fitter(lambda X, rng: X[:, 0] + rng.normal(0, 0.5, X.shape[0]))
    grid = default_grid(X, 8)
    plan = blocked_folds(120, 10)
    a = cross_validate(f, grid, plan)
    b = cross_validate(f, grid, plan, threads=4)
    assert a.to_dict() == b.to_dict()


class FlakyBuilder:
    """Fails for one lambda to exercise the failure path."""

    def __init__(self, inner, bad):
        self.inner = inner
        self.bad = bad

    def fit_rows(self, rows, lam, warm_start=None):
        if lam == self.bad:
            raise InfeasibleConstraints("planted failure")
        return self.inner.fit_rows(rows, lam, warm_start)

    def score_rows(self, fit, rows):
        return self.inner.score_rows(fit, rows)


def test_failed_lambda_scores_infinity():
    f, X = comps_fitter(lambda X, rng: X[:, 1] + rng.normal(0, 0.5, X.shape[0]))
    rep = cross_validate(FlakyBuilder(f, 1.0), [0.1, 1.0, 10.0], blocked_folds(120, 10))
    assert np.isinf(rep.mean_scores[1])
    assert rep.chosen_lambda != 1.0
    assert len(rep.warnings) == 10
    with pytest.raises(AssemblageError):
        cross_validate(FlakyBuilder(f, 1.0), [1.0], blocked_folds(120, 10))


def test_ties_go_to_the_larger_lambda():
    class Constant:
        def fit_rows(self, rows, lam, warm_start=None):
            return type("F", (), {"solution": None})()

        def score_rows(self, fit, rows):
            return 1.0

    rep = cross_validate(Constant(), [0.1, 1.0, 10.0], blocked_folds(30, 10))
    assert rep.chosen_lambda == 10.0


def test_grid_validation():
    f, _ = comps_fitter(lambda X, rng: rng.normal(size=X.shape[0]))
    with pytest.raises(ValueError):
        cross_validate(f, [], blocked_folds(120, 10))
    with pytest.raises(ValueError):
        cross_validate(f, [2.0, 1.0], blocked_folds(120, 10))


def test_default_grid_scale():
    X = np.full((10, 2), 3.0)
    g = default_grid(X)
    assert g.size == 20
    assert g[0] == pytest.approx(9.0 * 10 * 1e-4)
    assert g[-1] == pytest.approx(9.0 * 10 * 1e4)
