"""Exhaustive grid search over small feasible sets, used as a test oracle.

Nothing here touches the active-set or interior-point code: the feasible
set is parametrized directly, the objective is evaluated from its
definition, and the minimum is read off a grid.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg
from scipy.optimize import linprog

from .errors import InfeasibleConstraints, TooManyDimensions
from .solver import (ConstraintSet, LossSpec, PenalizedProblem, PenaltySpec, WeightSolution)

_MAX_SWEEP = 4_000_000
_LEVEL_POINTS = 401
_ZOOM_CELLS = 10


def _objective_batch(problem: PenalizedProblem, W: np.ndarray) -> np.ndarray:
    X, y = problem.design, problem.response
    resid = y[None, :] - W @ X.T
    if problem.loss.kind == "squared":
        fit = np.sum(resid * resid, axis=1)
    else:
        tau = problem.loss.tau
        fit = np.sum(np.where(resid > 0, tau * resid, (tau - 1.0) * resid), axis=1)
    pen = problem.penalty
    if pen.kind == "centered":
        p = np.sum((W - pen.center[None, :]) ** 2, axis=1)
    elif pen.kind == "fused":
        p = np.sum(np.diff(W, axis=1) ** 2, axis=1)
    else:
        p = np.zeros(W.shape[0])
    return fit + problem.lam * p


def _box(w0, N, nonneg, problem):
    """Bounding box of the feasible parameter set, or of the minimizer's location."""
    d = N.shape[1]
    lo = np.full(d, -np.inf)
    hi = np.full(d, np.inf)
    if nonneg:
        for j in range(d):
            c = np.zeros(d)
            for sign in (1.0, -1.0):
                c[j] = sign
                res = linprog(c, A_ub=-N, b_ub=w0, bounds=[(None, None)] * d, method="highs")
                if res.status == 2:
                    raise InfeasibleConstraints("no nonnegative point satisfies the equalities")
                if res.status == 0:
                    if sign > 0:
                        lo[j] = res.x[j]
                    else:
                        hi[j] = res.x[j]
    if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
        return lo, hi
    # unbounded direction: bound the minimizer through strong convexity
    # around a feasible anchor s_ref, |s* - s_ref| <= 2 |subgradient| / m
    if nonneg:
        res = linprog(np.zeros(d), A_ub=-N, b_ub=w0, bounds=[(None, None)] * d, method="highs")
        s_ref = res.x
    else:
        s_ref = np.zeros(d)
    X, y = problem.design, problem.response
    pen = problem.penalty
    k = X.shape[1]
    if pen.kind == "centered":
        P = np.eye(k)
    elif pen.kind == "fused":
        Dm = np.diff(np.eye(k), axis=0)
        P = Dm.T @ Dm
    else:
        P = np.zeros((k, k))
    Q = 2.0 * problem.lam * P
    w_ref = w0 + N @ s_ref
    pen_grad = 2.0 * problem.lam * (P @ (w_ref - (pen.center if pen.kind == "centered" else 0.0)))
    if problem.loss.kind == "squared":
        Q = Q + 2.0 * X.T @ X
        gnorm = float(np.linalg.norm(N.T @ (pen_grad - 2.0 * X.T @ (y - X @ w_ref))))
    else:
        # any pinball subgradient is bounded by sum_t |x_t|
        gnorm = float(np.linalg.norm(np.abs(N.T) @ np.abs(X).sum(axis=0))
                      + np.linalg.norm(N.T @ pen_grad))
    m = float(np.linalg.eigvalsh(N.T @ Q @ N).min())
    if m <= 1e-12:
        raise TooManyDimensions("unbounded feasible set with a flat objective; the grid cannot cover it")
    radius = 2.0 * gnorm / m + 1e-6
    lo = np.where(np.isfinite(lo), lo, s_ref - radius)
    hi = np.where(np.isfinite(hi), hi, s_ref + radius)
    return lo, hi


def _evaluate(problem, w0, N, nonneg, S):
    W = w0[None, :] + S @ N.T
    vals = _objective_batch(problem, W)
    if nonneg:
        vals = np.where(np.all(W >= -1e-12, axis=1), vals, np.inf)
    return vals, W


def brute_force_oracle(problem: PenalizedProblem, step: float = 1e-5) -> WeightSolution:
    """Grid-minimize the objective over the feasible set.

    The feasible set is written as ``w0 + N s`` with ``N`` an orthonormal
    basis of the equality null space, so grid spacing in ``s`` is spacing in
    weight space. One-dimensional sets are swept in full at ``step``;
    two-dimensional ones are searched coarse-to-fine, zooming on a window
    of ``_ZOOM_CELLS`` cells around the incumbent until the spacing reaches
    ``step``.

    Raises
    ------
    TooManyDimensions
        ``K > 3`` or more than two free dimensions, or an unbounded set the
        grid cannot cover.
    """
    if problem.constraints.include_intercept:
        raise TooManyDimensions("the oracle does not handle intercepts")
    k = problem.n_features
    if k > 3:
        raise TooManyDimensions(f"K={k} exceeds the oracle limit of 3")
    E, f = problem.constraints.matrices(k)
    nonneg = problem.constraints.nonnegative
    if E.shape[0]:
        w0 = np.linalg.lstsq(E, f, rcond=None)[0]
        if np.max(np.abs(E @ w0 - f)) > 1e-9 * (1 + np.max(np.abs(f))):
            raise InfeasibleConstraints("equality constraints are inconsistent")
        N = linalg.null_space(E)
    else:
        w0 = np.zeros(k)
        N = np.eye(k)
    d = N.shape[1]
    if d > 2:
        raise TooManyDimensions(f"feasible set has {d} free dimensions")
    if d == 0:
        if nonneg and np.any(w0 < -1e-12):
            raise InfeasibleConstraints("the single equality solution is negative")
        w = np.maximum(w0, 0.0) if nonneg else w0
        obj = float(_objective_batch(problem, w[None, :])[0])
        return WeightSolution(w, None, obj, np.nan, np.nan, 1, True, "grid")

    lo, hi = _box(w0, N, nonneg, problem)
    evaluated = 0
    if d == 1:
        n_pts = int(np.floor((hi[0] - lo[0]) / step)) + 1
        if n_pts <= _MAX_SWEEP:
            S = (lo[0] + step * np.arange(n_pts))[:, None]
            S = np.vstack([S, hi[:, None]])
            vals, W = _evaluate(problem, w0, N, nonneg, S)
            i = int(np.argmin(vals))
            return WeightSolution(W[i], None, float(vals[i]), np.nan, np.nan, S.shape[0], True,
                                  "grid")

    best_s = None
    cur_lo, cur_hi = lo.copy(), hi.copy()
    while True:
        n = _LEVEL_POINTS
        h = np.max(cur_hi - cur_lo) / (n - 1)
        final = h <= step
        if final:
            h = step
            n = int(np.ceil(np.max(cur_hi - cur_lo) / h)) + 1
        axes = [cur_lo[j] + h * np.arange(n) for j in range(d)]
        axes = [np.clip(a, lo[j], hi[j]) for j, a in enumerate(axes)]
        S = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        vals, W = _evaluate(problem, w0, N, nonneg, S)
        evaluated += S.shape[0]
        i = int(np.argmin(vals))
        if not np.isfinite(vals[i]):
            raise InfeasibleConstraints("no feasible grid point found")
        best_s, best_w, best_v = S[i], W[i], float(vals[i])
        if final:
            break
        half = _ZOOM_CELLS * h
        cur_lo = np.maximum(best_s - half, lo)
        cur_hi = np.minimum(best_s + half, hi)
    return WeightSolution(best_w, None, best_v, np.nan, np.nan, evaluated, True, "grid")


def random_problem(seed: int, loss: str = "squared") -> PenalizedProblem:
    """A small random instance within the oracle's reach (K <= 3).

    Constraint sets cycle with ``seed % 4`` through the simplex, a
    mean-match equality, nonnegativity alone (or a scaled simplex at K=3)
    and a sign-free sum-to-one; penalties alternate between fused and
    centered ridge.
    """
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 4))
    t = int(rng.integers(8, 30))
    X = rng.normal(1.0, 1.0, size=(t, k))
    y = rng.normal(1.0, 1.0, size=t)
    kind = seed % 4
    if kind == 0:
        cons = ConstraintSet.simplex(k)
    elif kind == 1:
        cons = ConstraintSet(True, ((X.mean(axis=0), float(y.mean())),))
    elif kind == 2:
        cons = ConstraintSet(True) if k <= 2 else ConstraintSet.simplex(k, 1.5)
    else:
        cons = ConstraintSet(False, ((np.ones(k), 1.0),)) if k > 1 else ConstraintSet(True)
    pen = PenaltySpec.centered(rng.dirichlet(np.ones(k))) if seed % 2 else PenaltySpec.fused()
    lam = float(10 ** rng.uniform(-2, 1.5))
    spec = LossSpec.squared() if loss == "squared" else LossSpec.pinball(float(rng.uniform(0.1, 0.9)))
    return PenalizedProblem(X, y, spec, pen, cons, lam)
