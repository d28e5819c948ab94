"""Dense convex QP with linear equalities and sign constraints.

Solves::

    min  0.5 x'Hx + g'x   s.t.  E x = f,   x[i] >= 0 for i in bounded

with H symmetric positive definite. A primal-dual active-set iteration
(semismooth Newton on the complementarity conditions) is tried first; it
usually terminates in a handful of linear solves and accepts a warm-start
active set. If it cycles or hits a singular working set, a primal
active-set method started from a feasible vertex takes over. Both end on an
exact linear solve for the final working set, so stationarity holds to
rounding error.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.optimize import linprog

from .errors import InfeasibleConstraints, NotConverged

_PDAS_MAX_ITER = 60


@dataclass
class QPResult:
    x: np.ndarray
    nu: np.ndarray  # equality multipliers
    mu: np.ndarray  # bound multipliers (zero off the active set)
    active: np.ndarray  # boolean mask of bounds held at zero
    iterations: int
    method: str


def _kkt_solve(H, E, rhs_x, rhs_e, free):
    """Solve the equality-constrained subproblem on the free variables.

    Returns ``(x_free, nu)`` or ``None`` when the system is singular or the
    equalities cannot be met on this free set.
    """
    Hf = H[np.ix_(free, free)]
    nf = Hf.shape[0]
    m = E.shape[0]
    if m == 0:
        if nf == 0:
            return np.zeros(0), np.zeros(0)
        try:
            c, low = linalg.cho_factor(Hf, check_finite=False)
        except linalg.LinAlgError:
            return None
        return linalg.cho_solve((c, low), rhs_x, check_finite=False), np.zeros(0)
    Ef = E[:, free]
    K = np.zeros((nf + m, nf + m))
    K[:nf, :nf] = Hf
    K[:nf, nf:] = -Ef.T
    K[nf:, :nf] = Ef
    rhs = np.concatenate([rhs_x, rhs_e])
    try:
        with warnings.catch_warnings():
            # singular systems are caught by the residual check below
            warnings.simplefilter("ignore", linalg.LinAlgWarning)
            lu, piv = linalg.lu_factor(K, check_finite=False)
            sol = linalg.lu_solve((lu, piv), rhs, check_finite=False)
    except (linalg.LinAlgError, ValueError):
        return None
    if not np.all(np.isfinite(sol)):
        return None
    # lu_factor does not raise on exact singularity, so check the residual
    resid = K @ sol - rhs
    if np.max(np.abs(resid)) > 1e-9 * (1.0 + np.max(np.abs(rhs))):
        return None
    return sol[:nf], sol[nf:]


def _multipliers(H, g, E, x, nu):
    return H @ x + g - E.T @ nu


def _pdas(H, g, E, f, bounded, active, tol):
    n = H.shape[0]
    seen = set()
    for it in range(1, _PDAS_MAX_ITER + 1):
        key = active.tobytes()
        if key in seen:
            return None, it
        seen.add(key)
        free = ~active
        out = _kkt_solve(H, E, -g[free], f, free)
        if out is None:
            return None, it
        x = np.zeros(n)
        x[free], nu = out
        mu = _multipliers(H, g, E, x, nu)
        mu[free] = 0.0
        new_active = bounded & ((active & (mu > -tol)) | (free & (x < -tol)))
        if np.array_equal(new_active, active):
            if np.all(x[bounded & free] >= -tol) and np.all(mu[active] >= -tol):
                return QPResult(x, nu, mu, active.copy(), it, "pdas"), it
            return None, it
        active = new_active
    return None, _PDAS_MAX_ITER


def _feasible_start(E, f, bounded):
    n = E.shape[1]
    if E.shape[0] == 0:
        return np.zeros(n)
    bounds = [(0, None) if b else (None, None) for b in bounded]
    res = linprog(np.zeros(n), A_eq=E, b_eq=f, bounds=bounds, method="highs")
    if res.status == 2:
        raise InfeasibleConstraints("equality constraints incompatible with nonnegativity")
    if res.status != 0:
        raise InfeasibleConstraints(f"phase-1 feasibility failed: {res.message}")
    x = np.asarray(res.x, dtype=float)
    x[bounded] = np.maximum(x[bounded], 0.0)
    return x


def _independent_working_set(E, x, bounded, tol):
    """Bounds at zero, minus enough columns to keep E full rank on the rest."""
    at_zero = bounded & (np.abs(x) <= tol)
    if E.shape[0] == 0:
        return at_zero
    free = ~at_zero
    r_total = np.linalg.matrix_rank(E)
    r_free = np.linalg.matrix_rank(E[:, free]) if free.any() else 0
    if r_free >= r_total:
        return at_zero
    # free the zero columns that best complete the rank
    idx = np.flatnonzero(at_zero)
    _, _, piv = linalg.qr(E[:, idx], pivoting=True, mode="economic")
    need = r_total - r_free
    for j in idx[piv]:
        if need == 0:
            break
        trial = free.copy()
        trial[j] = True
        if np.linalg.matrix_rank(E[:, trial]) > r_free:
            free = trial
            r_free += 1
            need -= 1
    return bounded & ~free


def _primal_active_set(H, g, E, f, bounded, tol, max_iter):
    n = H.shape[0]
    x = _feasible_start(E, f, bounded)
    work = _independent_working_set(E, x, bounded, tol)
    x[work] = 0.0
    nu = np.zeros(E.shape[0])
    for it in range(1, max_iter + 1):
        free = ~work
        grad = H @ x + g
        out = _kkt_solve(H, E, -grad[free], np.zeros(E.shape[0]), free)
        if out is None:
            Hf = H[np.ix_(free, free)]
            Ef = E[:, free]
            m = E.shape[0]
            nf = Hf.shape[0]
            K = np.block([[Hf, -Ef.T], [Ef, np.zeros((m, m))]])
            sol = np.linalg.lstsq(K, np.concatenate([-grad[free], np.zeros(m)]), rcond=None)[0]
            out = (sol[:nf], sol[nf:])
        p = np.zeros(n)
        p[free], nu_step = out
        if np.max(np.abs(p), initial=0.0) <= tol * (1.0 + np.max(np.abs(x), initial=0.0)):
            nu = nu_step
            mu = grad - E.T @ nu
            mu[free] = 0.0
            if not work.any() or mu[work].min() >= -tol:
                return QPResult(x, nu, mu, work.copy(), it, "primal-active-set")
            j = np.flatnonzero(work)[np.argmin(mu[work])]
            work[j] = False
            continue
        alpha = 1.0
        block = -1
        cand = np.flatnonzero(free & bounded & (p < 0))
        if cand.size:
            ratios = -x[cand] / p[cand]
            k = int(np.argmin(ratios))
            if ratios[k] < 1.0:
                alpha = max(ratios[k], 0.0)
                block = cand[k]
        x = x + alpha * p
        if block >= 0:
            x[block] = 0.0
            work[block] = True
    raise NotConverged(f"active-set QP hit the iteration cap ({max_iter})")


def solve_qp(H, g, E, f, bounded, *, warm_active=None, tol=1e-12, max_iter=100_000):
    """Minimize ``0.5 x'Hx + g'x`` subject to ``Ex = f`` and ``x[bounded] >= 0``.

    Parameters
    ----------
    H : (n, n) array, symmetric positive definite
    g : (n,) array
    E : (m, n) array, may have zero rows
    f : (m,) array
    bounded : (n,) bool array
    warm_active : (n,) bool array, optional
        Initial guess for the set of bounds active at the solution.

    Returns
    -------
    QPResult
    """
    H = np.asarray(H, dtype=float)
    g = np.asarray(g, dtype=float)
    E = np.asarray(E, dtype=float).reshape(-1, H.shape[0])
    f = np.asarray(f, dtype=float).reshape(-1)
    bounded = np.asarray(bounded, dtype=bool)

    # scale the objective to unit diagonal magnitude and equalities to unit rows
    sigma = max(float(np.max(np.abs(np.diag(H)))), 1e-300)
    Hs, gs = H / sigma, g / sigma
    row_norm = np.linalg.norm(E, axis=1) if E.size else np.zeros(0)
    row_norm[row_norm == 0] = 1.0
    Es, fs = E / row_norm[:, None], f / row_norm

    if warm_active is None:
        warm_active = np.zeros_like(bounded)
    active = np.asarray(warm_active, dtype=bool) & bounded

    res, used = _pdas(Hs, gs, Es, fs, bounded, active, tol)
    if res is None and active.any():
        res, more = _pdas(Hs, gs, Es, fs, bounded, np.zeros_like(bounded), tol)
        used += more
    if res is None:
        res = _primal_active_set(Hs, gs, Es, fs, bounded, tol, max_iter)
        res.iterations += used
    else:
        res.iterations = used
    res.nu = res.nu * sigma / row_norm
    res.mu = res.mu * sigma
    return res
