"""Constrained penalized regression: the optimization core of every estimator.

Minimizes a squared or pinball data-fit term plus a quadratic penalty,

    sum_t loss(y_t - w'x_t - b) + lam * p(w)

subject to optional ``w >= 0`` and linear equalities ``a'w = c``. The
penalty is either a centered ridge ``sum_k (w_k - center_k)**2`` or a fused
ridge ``sum_r (w_r - w_{r-1})**2``. Penalties are sums of squares, not
unsquared norms.

A ridge floor of ``1e-10 * max(1, trace(X'X)/K)`` is added in the same
shape as the penalty. It makes the Hessian definite so that collinear or
flat (pinball) problems return a unique, deterministic minimizer: the one
closest to the penalty center. The floor is excluded from the reported
``objective``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.optimize import lsq_linear

from ._qp import solve_qp
from .errors import InfeasibleConstraints, NotConverged, ShapeMismatch

STATIONARITY_TOL_SQUARED = 1e-8
STATIONARITY_TOL_PINBALL = 1e-6
FEASIBILITY_TOL = 1e-7
RIDGE_FLOOR = 1e-10
MAX_ITER = 100_000


@dataclass(frozen=True)
class LossSpec:
    kind: str = "squared"
    tau: float | None = None

    def __post_init__(self):
        if self.kind not in ("squared", "pinball"):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind == "pinball":
            if self.tau is None or not 0.0 < self.tau < 1.0:
                raise ValueError("pinball loss needs tau strictly inside (0, 1)")

    @classmethod
    def squared(cls) -> LossSpec:
        return cls("squared")

    @classmethod
    def pinball(cls, tau: float) -> LossSpec:
        return cls("pinball", float(tau))


@dataclass(frozen=True, eq=False)
class PenaltySpec:
    """Quadratic penalty. ``kind`` is ``"centered"``, ``"fused"`` or ``"none"``."""

    kind: str = "centered"
    center: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("centered", "fused", "none"):
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        if self.kind == "centered":
            if self.center is None:
                raise ValueError("centered ridge needs a center vector")
            c = np.asarray(self.center, dtype=float).reshape(-1)
            if not np.all(np.isfinite(c)):
                raise ValueError("penalty center must be finite")
            object.__setattr__(self, "center", c)

    @classmethod
    def centered(cls, center) -> PenaltySpec:
        return cls("centered", np.asarray(center, dtype=float))

    @classmethod
    def fused(cls) -> PenaltySpec:
        return cls("fused")

    @classmethod
    def none(cls) -> PenaltySpec:
        return cls("none")

    def matrix(self, k: int) -> np.ndarray:
        if self.kind == "centered":
            return np.eye(k)
        if self.kind == "fused":
            D = difference_operator(k)
            return D.T @ D
        return np.zeros((k, k))

    def shift(self, k: int) -> np.ndarray:
        if self.kind == "centered":
            return self.center
        return np.zeros(k)

    def value(self, w) -> float:
        w = np.asarray(w, dtype=float)
        if self.kind == "centered":
            return float(np.sum((w - self.center) ** 2))
        if self.kind == "fused":
            return float(np.sum(np.diff(w) ** 2))
        return 0.0


def difference_operator(k: int) -> np.ndarray:
    """(k-1, k) first-difference matrix."""
    return np.diff(np.eye(k), axis=0)


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    nonnegative: bool = True
    equalities: tuple = ()
    include_intercept: bool = False

    def __post_init__(self):
        eqs = []
        for coeff, rhs in self.equalities:
            a = np.asarray(coeff, dtype=float).reshape(-1)
            if not np.all(np.isfinite(a)) or not np.isfinite(rhs):
                raise ValueError("equality constraints must be finite")
            eqs.append((a, float(rhs)))
        object.__setattr__(self, "equalities", tuple(eqs))

    @classmethod
    def simplex(cls, k: int, total: float = 1.0) -> ConstraintSet:
        return cls(True, ((np.ones(k), total),))

    def matrices(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        if not self.equalities:
            return np.zeros((0, k)), np.zeros(0)
        E = np.vstack([a for a, _ in self.equalities])
        f = np.array([b for _, b in self.equalities])
        if E.shape[1] != k:
            raise ShapeMismatch(f"equality coefficients have length {E.shape[1]}, expected {k}")
        return E, f


@dataclass(frozen=True, eq=False)
class PenalizedProblem:
    design: np.ndarray
    response: np.ndarray
    loss: LossSpec = field(default_factory=LossSpec)
    penalty: PenaltySpec = field(default_factory=PenaltySpec.none)
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    lam: float = 0.0

    def __post_init__(self):
        X = np.asarray(self.design, dtype=float)
        y = np.asarray(self.response, dtype=float).reshape(-1)
        if X.ndim != 2:
            raise ShapeMismatch("design must be a 2-D matrix")
        if X.shape[0] != y.shape[0]:
            raise ShapeMismatch(f"design has {X.shape[0]} rows but response has {y.shape[0]}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("design and response must not contain missing values")
        if not self.lam >= 0:
            raise ValueError("lambda must be nonnegative")
        if self.penalty.kind == "centered" and self.penalty.center.shape[0] != X.shape[1]:
            raise ShapeMismatch("penalty center length does not match the design")
        self.constraints.matrices(X.shape[1])
        object.__setattr__(self, "design", X)
        object.__setattr__(self, "response", y)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def n_features(self) -> int:
        return self.design.shape[1]

    def with_lambda(self, lam: float) -> PenalizedProblem:
        return replace(self, lam=lam)


@dataclass(frozen=True, eq=False)
class WeightSolution:
    weights: np.ndarray
    intercept: float | None
    objective: float
    kkt_stationarity: float
    kkt_feasibility: float
    iterations: int
    converged: bool
    method: str = ""
    active: np.ndarray | None = None


@dataclass(frozen=True)
class KKTReport:
    stationarity: float
    bound_gap: float
    equality_gap: float
    complementarity: float

    @property
    def feasibility(self) -> float:
        return max(self.bound_gap, self.equality_gap)


def pinball_loss(u, tau: float):
    """Elementwise ``(tau - 1{u <= 0}) * u``."""
    u = np.asarray(u, dtype=float)
    return (tau - (u <= 0)) * u


def _augmented(problem: PenalizedProblem) -> np.ndarray:
    X = problem.design
    if problem.constraints.include_intercept:
        return np.hstack([X, np.ones((X.shape[0], 1))])
    return X


def _split(problem: PenalizedProblem, z: np.ndarray):
    k = problem.n_features
    b = float(z[k]) if problem.constraints.include_intercept else None
    return z[:k], b


def residuals(problem: PenalizedProblem, weights, intercept=None) -> np.ndarray:
    r = problem.response - problem.design @ np.asarray(weights, dtype=float)
    if intercept is not None:
        r = r - intercept
    return r


def data_fit(problem: PenalizedProblem, weights, intercept=None) -> float:
    r = residuals(problem, weights, intercept)
    if problem.loss.kind == "squared":
        return float(r @ r)
    return float(np.sum(pinball_loss(r, problem.loss.tau)))


def objective(problem: PenalizedProblem, weights, intercept=None) -> float:
    return data_fit(problem, weights, intercept) + problem.lam * problem.penalty.value(weights)


def ridge_floor(problem: PenalizedProblem) -> float:
    X = problem.design
    k = max(X.shape[1], 1)
    return RIDGE_FLOOR * max(1.0, float(np.einsum("ij,ij->", X, X)) / k)


def _penalty_quadratic(problem: PenalizedProblem):
    """Hessian and linear term of ``lam * p(w) + floor`` over (w, [b])."""
    k = problem.n_features
    n = k + int(problem.constraints.include_intercept)
    eps = ridge_floor(problem)
    pen = problem.penalty
    H = np.zeros((n, n))
    g = np.zeros(n)
    if pen.kind == "centered":
        H[:k, :k] = 2.0 * (problem.lam + eps) * np.eye(k)
        g[:k] = -2.0 * (problem.lam + eps) * pen.center
    elif pen.kind == "fused":
        H[:k, :k] = 2.0 * (problem.lam + eps) * pen.matrix(k) + 2e-3 * eps * np.eye(k)
    else:
        H[:k, :k] = 2.0 * eps * np.eye(k)
    return H, g


def _equalities(problem: PenalizedProblem):
    k = problem.n_features
    E, f = problem.constraints.matrices(k)
    if problem.constraints.include_intercept:
        E = np.hstack([E, np.zeros((E.shape[0], 1))])
    return E, f


def _bounded(problem: PenalizedProblem) -> np.ndarray:
    k = problem.n_features
    mask = np.full(k, problem.constraints.nonnegative)
    if problem.constraints.include_intercept:
        mask = np.append(mask, False)
    return mask


def kkt_report(solution: WeightSolution, problem: PenalizedProblem) -> KKTReport:
    """Stationarity, feasibility and complementarity residuals of a solution.

    Multipliers are recovered from the weights alone by a bound-constrained
    least-squares fit, so the report does not trust anything the solver
    says about its own state. For pinball loss, residuals within
    ``1e-8 * max(1, |y|)`` of zero contribute the whole subdifferential
    interval ``[tau - 1, tau]``. Stationarity is relative to the largest
    gradient term magnitude.
    """
    w = np.asarray(solution.weights, dtype=float).reshape(-1)
    if w.shape[0] != problem.n_features:
        raise ShapeMismatch("solution dimension does not match the problem")
    if problem.constraints.include_intercept:
        if solution.intercept is None:
            raise ShapeMismatch("problem has an intercept but the solution does not")
        z = np.append(w, solution.intercept)
    else:
        z = w
    Xa = _augmented(problem)
    y = problem.response
    Hp, gp = _penalty_quadratic(problem)
    r = y - Xa @ z
    grad = Hp @ z + gp
    scale_terms = [np.abs(Hp @ z), np.abs(gp)]
    cols = []
    lb, ub = [], []
    if problem.loss.kind == "squared":
        data_grad = -2.0 * Xa.T @ r
        grad = grad + data_grad
        scale_terms += [np.abs(2.0 * Xa.T @ (Xa @ z)), np.abs(2.0 * Xa.T @ y)]
    else:
        tau = problem.loss.tau
        zero = np.abs(r) <= 1e-8 * max(1.0, float(np.max(np.abs(y), initial=0.0)))
        slope = np.where(r > 0, tau, tau - 1.0)
        grad = grad - Xa[~zero].T @ slope[~zero]
        scale_terms.append(np.abs(Xa).sum(axis=0))
        if zero.any():
            cols.append(Xa[zero].T)
            lb += [tau - 1.0] * int(zero.sum())
            ub += [tau] * int(zero.sum())
    E, f = _equalities(problem)
    if E.shape[0]:
        cols.append(E.T)
        lb += [-np.inf] * E.shape[0]
        ub += [np.inf] * E.shape[0]
    bounded = _bounded(problem)
    wmax = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    active = bounded & (z <= 1e-9 * wmax)
    n_act = int(active.sum())
    if n_act:
        cols.append(np.eye(z.shape[0])[:, active])
        lb += [0.0] * n_act
        ub += [np.inf] * n_act

    scale = 1.0 + max(float(np.max(t, initial=0.0)) for t in scale_terms)
    complementarity = 0.0
    if cols:
        M = np.hstack(cols)
        fit = lsq_linear(M / scale, grad / scale, bounds=(np.array(lb), np.array(ub)),
                         method="bvls", tol=1e-15)
        theta = fit.x
        resid = grad - M @ theta
        if n_act:
            mu = theta[-n_act:]
            complementarity = float(np.max(np.abs(mu * z[active])))
    else:
        resid = grad
    stationarity = float(np.max(np.abs(resid), initial=0.0)) / scale

    bound_gap = 0.0
    if problem.constraints.nonnegative:
        bound_gap = max(0.0, -float(np.min(w, initial=0.0)))
    Ew, fw = problem.constraints.matrices(problem.n_features)
    equality_gap = float(np.max(np.abs(Ew @ w - fw), initial=0.0))
    return KKTReport(stationarity, bound_gap, equality_gap, complementarity)


def _finish(problem, z, iterations, method, active, tol) -> WeightSolution:
    w, b = _split(problem, z)
    if problem.constraints.nonnegative:
        # clear rounding-level negatives left by the linear solves
        w = np.where((w < 0) & (w > -1e-12), 0.0, w)
    draft = WeightSolution(w.copy(), b, objective(problem, w, b), np.nan, np.nan, iterations,
                           False, method, active)
    rep = kkt_report(draft, problem)
    converged = rep.stationarity <= tol and rep.feasibility <= FEASIBILITY_TOL
    return replace(draft, kkt_stationarity=rep.stationarity, kkt_feasibility=rep.feasibility,
                   converged=converged)


def solve_penalized_ls(problem: PenalizedProblem, *, warm_start: WeightSolution | None = None
                       ) -> WeightSolution:
    """Global minimizer of the squared-loss problem.

    Parameters
    ----------
    problem : PenalizedProblem
        Must use squared loss.
    warm_start : WeightSolution, optional
        A solution of a nearby problem (e.g. the previous lambda on a grid);
        its active set seeds the solver.

    Raises
    ------
    InfeasibleConstraints
        The equalities cannot hold with ``w >= 0``.
    NotConverged
        KKT residuals stay above tolerance; the attempt is attached.
    """
    if problem.loss.kind != "squared":
        raise ValueError("solve_penalized_ls needs squared loss")
    Xa = _augmented(problem)
    Hp, gp = _penalty_quadratic(problem)
    H = 2.0 * Xa.T @ Xa + Hp
    g = -2.0 * Xa.T @ problem.response + gp
    E, f = _equalities(problem)
    bounded = _bounded(problem)
    warm = None
    if warm_start is not None and warm_start.active is not None \
            and warm_start.active.shape == bounded.shape:
        warm = warm_start.active
    res = solve_qp(H, g, E, f, bounded, warm_active=warm, max_iter=MAX_ITER)
    sol = _finish(problem, res.x, res.iterations, res.method, res.active,
                  STATIONARITY_TOL_SQUARED)
    if not sol.converged:
        raise NotConverged(
            f"KKT residuals above tolerance (stationarity={sol.kkt_stationarity:.3g}, "
            f"feasibility={sol.kkt_feasibility:.3g})", sol)
    return sol


def _clarabel_pinball(problem: PenalizedProblem):
    import clarabel

    Xa = _augmented(problem)
    T, n = Xa.shape
    tau = problem.loss.tau
    Hp, gp = _penalty_quadratic(problem)
    E, f = _equalities(problem)
    bounded = _bounded(problem)
    nv = n + 2 * T
    P = sp.block_diag([sp.csc_matrix(np.triu(Hp)), sp.csc_matrix((2 * T, 2 * T))], format="csc")
    q = np.concatenate([gp, np.full(T, tau), np.full(T, 1.0 - tau)])
    eye_T = sp.identity(T, format="csc")
    fit_rows = sp.hstack([sp.csc_matrix(Xa), eye_T, -eye_T])
    eq_rows = sp.hstack([sp.csc_matrix(E), sp.csc_matrix((E.shape[0], 2 * T))])
    sign_idx = np.concatenate([np.flatnonzero(bounded), n + np.arange(2 * T)])
    sign_rows = -sp.identity(nv, format="csr")[sign_idx]
    A = sp.vstack([fit_rows, eq_rows, sign_rows], format="csc")
    b = np.concatenate([problem.response, f, np.zeros(sign_idx.size)])
    cones = [clarabel.ZeroConeT(T + E.shape[0]), clarabel.NonnegativeConeT(sign_idx.size)]
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_threads = 1
    settings.tol_gap_abs = 1e-10
    settings.tol_gap_rel = 1e-10
    settings.tol_feas = 1e-10
    settings.max_iter = 500
    out = clarabel.DefaultSolver(P, q, A, b, cones, settings).solve()
    status = str(out.status)
    if "Infeasible" in status and "Primal" in status:
        raise InfeasibleConstraints("equality constraints incompatible with nonnegativity")
    z = np.asarray(out.x[:n], dtype=float)
    if not np.all(np.isfinite(z)):
        raise NotConverged(f"interior-point solve failed with status {status}")
    return z, int(out.iterations)


def _polish_pinball(problem: PenalizedProblem, z0: np.ndarray):
    """Re-solve exactly on the zero-residual / zero-weight sets guessed from ``z0``."""
    Xa = _augmented(problem)
    y = problem.response
    tau = problem.loss.tau
    Hp, gp = _penalty_quadratic(problem)
    E, f = _equalities(problem)
    bounded = _bounded(problem)
    n = Xa.shape[1]
    r = y - Xa @ z0
    rscale = max(1.0, float(np.max(np.abs(y), initial=0.0)))
    wscale = max(1.0, float(np.max(np.abs(z0), initial=0.0)))
    for rel in (1e-7, 1e-8, 1e-6, 1e-9, 1e-5, 1e-4):
        zero = np.abs(r) <= rel * rscale
        act = bounded & (z0 <= rel * wscale)
        slope = np.where(r > 0, tau, tau - 1.0)
        glin = gp - Xa[~zero].T @ slope[~zero]
        C = np.vstack([Xa[zero], np.eye(n)[act], E])
        d = np.concatenate([y[zero], np.zeros(int(act.sum())), f])
        m = C.shape[0]
        K = np.block([[Hp, -C.T], [C, np.zeros((m, m))]])
        rhs = np.concatenate([-glin, d])
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        if np.max(np.abs(K @ sol - rhs)) > 1e-9 * (1.0 + np.max(np.abs(rhs))):
            continue
        z = sol[:n]
        z[act] = 0.0
        yield z


def solve_penalized_quantile(problem: PenalizedProblem) -> WeightSolution:
    """Minimizer of the pinball-loss problem.

    An interior-point solve of the linear-programming reformulation gives a
    starting point; the zero-residual and zero-weight sets it reveals are
    then re-solved exactly and the candidate is accepted only if its KKT
    report passes. The ridge floor picks the minimizer nearest the penalty
    center when the optimum is a flat face.
    """
    if problem.loss.kind != "pinball":
        raise ValueError("solve_penalized_quantile needs pinball loss")
    z0, iters = _clarabel_pinball(problem)
    best = _finish(problem, z0, iters, "interior-point", None, STATIONARITY_TOL_PINBALL)
    for z in _polish_pinball(problem, z0):
        cand = _finish(problem, z, iters, "interior-point+polish", None, STATIONARITY_TOL_PINBALL)
        if cand.converged and cand.objective <= best.objective + 1e-9 * (1 + abs(best.objective)):
            best = cand
            break
    if not best.converged:
        raise NotConverged(
            f"KKT residuals above tolerance (stationarity={best.kkt_stationarity:.3g}, "
            f"feasibility={best.kkt_feasibility:.3g})", best)
    return best


def solve(problem: PenalizedProblem, *, warm_start: WeightSolution | None = None) -> WeightSolution:
    if problem.loss.kind == "squared":
        return solve_penalized_ls(problem, warm_start=warm_start)
    return solve_penalized_quantile(problem)
