from __future__ import annotations

import numpy as np
import pytest

from assemblage.errors import InfeasibleConstraints, NotConverged, ShapeMismatch
from assemblage.oracle import brute_force_oracle, random_problem
from assemblage.solver import (FEASIBILITY_TOL, STATIONARITY_TOL_PINBALL,
                               STATIONARITY_TOL_SQUARED, ConstraintSet, LossSpec,
                               PenalizedProblem, PenaltySpec, WeightSolution, data_fit,
                               kkt_report, objective, pinball_loss, solve, solve_penalized_ls,
                               solve_penalized_quantile)

SIMPLEX2 = ConstraintSet.simplex(2)


def toy_problem(lam=0.5):
    X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.0]])
    y = np.ones(4)
    return PenalizedProblem(X, y, LossSpec.squared(), PenaltySpec.centered([0.5, 0.5]), SIMPLEX2, lam)


def test_exact_fit_picks_the_matching_column():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(20, 2))
    prob = PenalizedProblem(X, X[:, 0], LossSpec.squared(), PenaltySpec.centered([0.5, 0.5]),
                            SIMPLEX2, 0.0)
    sol = solve_penalized_ls(prob)
    np.testing.assert_allclose(sol.weights, [1.0, 0.0], atol=1e-9)
    assert sol.objective == pytest.approx(0.0, abs=1e-12)


def test_huge_lambda_returns_the_center():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(30, 2))
    y = rng.normal(size=30)
    prob = PenalizedProblem(X, y, LossSpec.squared(), PenaltySpec.centered([0.6, 0.4]), SIMPLEX2, 1e10)
    np.testing.assert_allclose(solve(prob).weights, [0.6, 0.4], atol=1e-4)


def test_four_row_example_against_grid():
    prob = toy_problem()
    sol = solve(prob)
    grid = brute_force_oracle(prob, step=1e-5)
    np.testing.assert_allclose(sol.weights, grid.weights, atol=1e-4)
    # closed form on the simplex: the objective is 0.5 at w = (0.5, 0.5)
    np.testing.assert_allclose(sol.weights, [0.5, 0.5], atol=1e-10)
    assert sol.objective == pytest.approx(0.5, abs=1e-12)


def test_pinball_values():
    assert pinball_loss(1.0, 0.85) == pytest.approx(0.85)
    assert pinball_loss(-1.0, 0.85) == pytest.approx(0.15)
    assert pinball_loss(0.0, 0.85) == 0.0


def test_median_objective_is_half_lad():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(25, 3))
    y = rng.normal(size=25)
    prob = PenalizedProblem(X, y, LossSpec.pinball(0.5), PenaltySpec.fused(),
                            ConstraintSet.simplex(3), 0.3)
    sol = solve(prob)
    w = sol.weights
    lad = np.sum(np.abs(y - X @ w))
    assert sol.objective == pytest.approx(0.5 * lad + 0.3 * np.sum(np.diff(w) ** 2), rel=1e-12)


def test_pinball_six_rows_against_grid():
    X = np.array([[1.0, 2.0], [2.0, 0.5], [0.0, 1.0], [3.0, 1.0], [1.5, 2.5], [0.5, 0.0]])
    y = np.array([1.2, 1.0, 0.4, 2.0, 2.1, 0.1])
    prob = PenalizedProblem(X, y, LossSpec.pinball(0.85), PenaltySpec.centered([0.5, 0.5]),
                            SIMPLEX2, 0.0)
    sol = solve_penalized_quantile(prob)
    grid = brute_force_oracle(prob, step=1e-5)
    assert abs(sol.objective - grid.objective) <= 1e-3
    assert sol.objective <= grid.objective + 1e-12
    rep = kkt_report(grid, prob)
    assert rep.feasibility <= 1e-6


def test_kkt_normal_equations():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(40, 3))
    y = rng.normal(size=40)
    w = np.linalg.lstsq(X, y, rcond=None)[0]
    prob = PenalizedProblem(X, y, LossSpec.squared(), PenaltySpec.none(), ConstraintSet(False), 0.0)
    sol = WeightSolution(w, None, objective(prob, w), np.nan, np.nan, 0, True)
    assert kkt_report(sol, prob).stationarity <= 1e-9


def test_kkt_reports_negative_weights():
    prob = toy_problem()
    bad = WeightSolution(np.array([1.2, -0.2]), None, 0.0, np.nan, np.nan, 0, True)
    rep = kkt_report(bad, prob)
    assert rep.bound_gap > 0


def test_kkt_shape_mismatch():
    prob = toy_problem()
    bad = WeightSolution(np.ones(3), None, 0.0, np.nan, np.nan, 0, True)
    with pytest.raises(ShapeMismatch):
        kkt_report(bad, prob)


def test_infeasible_equalities():
    X = np.ones((5, 2))
    cons = ConstraintSet(True, ((np.array([1.0, 1.0]), -1.0),))
    prob = PenalizedProblem(X, np.ones(5), LossSpec.squared(), PenaltySpec.fused(), cons, 1.0)
    with pytest.raises(InfeasibleConstraints):
        solve(prob)
    with pytest.raises(InfeasibleConstraints):
        solve(PenalizedProblem(X, np.ones(5), LossSpec.pinball(0.3), PenaltySpec.fused(), cons, 1.0))


def test_shape_checks():
    with pytest.raises(ShapeMismatch):
        PenalizedProblem(np.ones((4, 2)), np.ones(5))
    with pytest.raises(ShapeMismatch):
        PenalizedProblem(np.ones((4, 2)), np.ones(4), penalty=PenaltySpec.centered([1.0, 0, 0]))
    with pytest.raises(ValueError):
        PenalizedProblem(np.ones((4, 2)), np.ones(4), lam=-1.0)
    with pytest.raises(ValueError):
        LossSpec.pinball(1.0)


def test_not_converged_carries_the_solution():
    err = NotConverged("cap hit", solution="s")
    assert err.solution == "s"


def test_intercept_is_free_and_unpenalized():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(50, 2))
    y = X @ [0.3, 0.7] - 4.0
    prob = PenalizedProblem(X, y, LossSpec.squared(), PenaltySpec.none(),
                            ConstraintSet(True, include_intercept=True), 0.0)
    sol = solve(prob)
    assert sol.intercept == pytest.approx(-4.0, abs=1e-8)
    np.testing.assert_allclose(sol.weights, [0.3, 0.7], atol=1e-8)


def test_single_component_simplex():
    rng = np.random.default_rng(6)
    prob = PenalizedProblem(rng.normal(size=(10, 1)), rng.normal(size=10), LossSpec.squared(),
                            PenaltySpec.centered([1.0]), ConstraintSet.simplex(1), 2.0)
    np.testing.assert_allclose(solve(prob).weights, [1.0])


@pytest.mark.parametrize("loss", ["squared", "pinball"])
def test_random_problems_meet_kkt_tolerances(loss):
    tol = STATIONARITY_TOL_SQUARED if loss == "squared" else STATIONARITY_TOL_PINBALL
    for seed in range(40):
        prob = random_problem(seed, loss)
        sol = solve(prob)
        rep = kkt_report(sol, prob)
        assert sol.converged
        assert rep.stationarity <= tol
        assert rep.feasibility <= FEASIBILITY_TOL
        if prob.constraints.nonnegative:
            assert sol.weights.min() >= -1e-9


def test_data_fit_nondecreasing_in_lambda():
    rng = np.random.default_rng(7)
    X = rng.normal(2, 1, size=(60, 6))
    y = X @ rng.dirichlet(np.ones(6)) + rng.normal(0, 0.5, 60)
    base = PenalizedProblem(X, y, LossSpec.squared(), PenaltySpec.centered(np.full(6, 1 / 6)),
                            ConstraintSet.simplex(6), 0.0)
    for loss in (LossSpec.squared(), LossSpec.pinball(0.7)):
        fits = []
        for lam in np.logspace(-3, 4, 15):
            p = PenalizedProblem(X, y, loss, base.penalty, base.constraints, lam)
            s = solve(p)
            fits.append(data_fit(p, s.weights))
        tol = 1e-8 if loss.kind == "squared" else 1e-6
        assert np.all(np.diff(fits) >= -tol * (1 + np.abs(fits[1:])))


def test_solutions_are_bitwise_deterministic():
    for loss in ("squared", "pinball"):
        prob = random_problem(11, loss)
        a, b = solve(prob), solve(prob)
        assert a.weights.tobytes() == b.weights.tobytes()
        assert a.objective == b.objective


def test_pinball_finite_difference_gradient():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(30, 3))
    y = rng.normal(size=30)
    tau, lam = 0.3, 0.8
    prob = PenalizedProblem(X, y, LossSpec.pinball(tau), PenaltySpec.fused(), ConstraintSet(False), lam)
    w = rng.normal(size=3)
    r = y - X @ w
    assert np.min(np.abs(r)) > 1e-3
    D = np.diff(np.eye(3), axis=0)
    grad = -X.T @ np.where(r > 0, tau, tau - 1.0) + 2 * lam * D.T @ D @ w
    h = 1e-6
    fd = np.array([(objective(prob, w + h * e) - objective(prob, w - h * e)) / (2 * h)
                   for e in np.eye(3)])
    np.testing.assert_allclose(fd, grad, rtol=1e-5, atol=1e-8)


def test_warm_start_gives_the_same_answer():
    prob = random_problem(21)
    cold = solve(prob)
    warm = solve(prob.with_lambda(prob.lam * 1.5), warm_start=cold)
    ref = solve(prob.with_lambda(prob.lam * 1.5))
    np.testing.assert_allclose(warm.weights, ref.weights, atol=1e-10)


def test_collinear_design_is_deterministic():
    rng = np.random.default_rng(9)
    x = rng.normal(size=40)
    X = np.column_stack([x, x, x])
    prob = PenalizedProblem(X, x + rng.normal(0, 0.1, 40), LossSpec.squared(), PenaltySpec.none(),
                            ConstraintSet(True, include_intercept=True), 0.0)
    a, b = solve(prob), solve(prob)
    assert a.weights.tobytes() == b.weights.tobytes()
    # the ridge floor spreads weight evenly over identical columns
    np.testing.assert_allclose(a.weights, a.weights[0], atol=1e-6)
