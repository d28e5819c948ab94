"""Penalty selection by cross-validation over contiguous, non-overlapping blocks."""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AssemblageError, TooFewObservations

LOGGER = logging.getLogger(__name__)

GRID_POINTS = 20


@dataclass(frozen=True, eq=False)
class FoldPlan:
    blocks: tuple

    @property
    def n_obs(self) -> int:
        return int(sum(len(b) for b in self.blocks))

    def train_test(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        test = self.blocks[i]
        train = np.concatenate([b for j, b in enumerate(self.blocks) if j != i])
        return train, test


@dataclass(frozen=True, eq=False)
class CvReport:
    grid: np.ndarray
    mean_scores: np.ndarray
    chosen_lambda: float
    fold_scores: np.ndarray  # (n_lambda, n_folds)
    warnings: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "grid": [float(x) for x in self.grid],
            "mean_scores": [float(x) for x in self.mean_scores],
            "chosen_lambda": float(self.chosen_lambda),
            "fold_scores": [[float(x) for x in row] for row in self.fold_scores],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> CvReport:
        return cls(np.array(d["grid"]), np.array(d["mean_scores"]), float(d["chosen_lambda"]),
                   np.array(d["fold_scores"]), tuple(d.get("warnings", ())))


def blocked_folds(n_obs: int, folds: int = 10) -> FoldPlan:
    """Split ``0..n_obs-1`` into ``folds`` contiguous blocks.

    Block sizes differ by at most one; the remainder goes to the earliest
    blocks.

    >>> [len(b) for b in blocked_folds(23, 10).blocks]
    [3, 3, 3, 2, 2, 2, 2, 2, 2, 2]
    """
    if folds < 2:
        raise ValueError("need at least two folds")
    if n_obs < folds:
        raise TooFewObservations(f"{n_obs} observations cannot fill {folds} folds")
    base, extra = divmod(n_obs, folds)
    sizes = [base + 1 if i < extra else base for i in range(folds)]
    edges = np.concatenate([[0], np.cumsum(sizes)])
    return FoldPlan(tuple(np.arange(edges[i], edges[i + 1]) for i in range(folds)))


def default_grid(design: np.ndarray, points: int = GRID_POINTS) -> np.ndarray:
    """Log-spaced grid from 1e-4*s to 1e4*s with ``s = trace(X'X) / K``."""
    X = np.asarray(design, dtype=float)
    s = float(np.einsum("ij,ij->", X, X)) / max(X.shape[1], 1)
    s = s if s > 0 else 1.0
    return s * np.logspace(-4, 4, points)


def _fold_scores(builder, grid, train, test):
    scores = np.full(len(grid), np.inf)
    notes = []
    prev = None
    for j, lam in enumerate(grid):
        try:
            fit = builder.fit_rows(train, lam, warm_start=prev)
        except AssemblageError as exc:
            notes.append(f"lambda={lam:.6g}: {type(exc).__name__}: {exc}")
            prev = None
            continue
        prev = fit.solution
        scores[j] = builder.score_rows(fit, test)
    return scores, notes


def cross_validate(builder, grid, plan: FoldPlan, *, threads: int = 1) -> CvReport:
    """Blocked cross-validation of the penalty strength.

    Parameters
    ----------
    builder
        Object exposing ``fit_rows(rows, lam, warm_start=None)`` and
        ``score_rows(fit, rows)``; equality constraints and any
        sample-dependent transforms are recomputed on each fold's training
        rows by ``fit_rows``. Scores use the estimator's own loss.
    grid : sequence of float
        Ascending penalty values.
    plan : FoldPlan
    threads : int
        Folds are solved concurrently when > 1; the report is assembled in
        fold order either way.

    Returns
    -------
    CvReport
        The chosen lambda minimizes the mean held-out score; ties go to the
        larger lambda. Solver failures give that (lambda, fold) an infinite
        score and a warning line.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty lambda grid")
    if np.any(np.diff(grid) < 0):
        raise ValueError("lambda grid must be sorted ascending")
    tasks = [plan.train_test(i) for i in range(len(plan.blocks))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda tt: _fold_scores(builder, grid, *tt), tasks))
    else:
        results = [_fold_scores(builder, grid, *tt) for tt in tasks]
    fold_scores = np.column_stack([r[0] for r in results])
    notes = tuple(n for r in results for n in r[1])
    for n in notes:
        LOGGER.warning("cross-validation: %s", n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mean = fold_scores.mean(axis=1)
    if not np.any(np.isfinite(mean)):
        raise AssemblageError("every lambda failed in cross-validation")
    best = np.min(mean)
    chosen = int(np.flatnonzero(mean == best)[-1])
    return CvReport(grid, mean, float(grid[chosen]), fold_scores, notes)
