"""Supervised aggregation of price-index components into forward-looking indices."""

from __future__ import annotations

from .errors import (AssemblageError, ConfigError, DegenerateSeries, DimensionMismatch,
                     EmptyIntersection, InfeasibleConstraints, InsufficientFuture,
                     InsufficientHistory, MeanNearZero, NonPositiveLevel, NotConverged,
                     ShapeMismatch, TooFewObservations, TooManyDimensions, UnmappedComponent,
                     WindowTooLong)
from .estimators import (AssemblageFit, Dataset, EstimatorSpec, fit, fit_albacore_comps,
                         fit_albacore_ranks, fit_benchmark, fit_geo, fit_qualbacore_comps,
                         fit_qualbacore_ranks, fit_rank_ar, predict, prepare, weights_curve)
from .evaluation import (OosRun, decompose_contributions, quantile_score, relative_rmse, rmse,
                         run_pseudo_oos, score_table, series_properties)
from .model_selection import CvReport, FoldPlan, blocked_folds, cross_validate, default_grid
from .oracle import brute_force_oracle
from .rank_space import (OrderedPanel, component_to_rank_weights, rank_contributions,
                         rank_to_component_weights, smooth_order_stats, to_order_statistics)
from .solver import (ConstraintSet, KKTReport, LossSpec, PenalizedProblem, PenaltySpec,
                     WeightSolution, kkt_report, solve, solve_penalized_ls,
                     solve_penalized_quantile)
from .synthetic import SynthConfig, SynthData, generate
from .transforms import (GrowthKind, GrowthPanel, PriceIndexPanel, TargetSeries, WindowScheme,
                         align, growth_rate, growth_rates, target_path, window_for, windows)

__version__ = "0.1.0"
