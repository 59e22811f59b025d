"""k-means and k-center clustering with a weak (noisy) and a strong (exact) distance oracle."""

from .brute import ExactSolution, exact_solve
from .datasets import (HardInstanceSpec, SbmSpec, build_experiment_weak_matrix,
                       generate_hard_instance, generate_sbm)
from .errors import (BudgetExceeded, ConfigurationError, DegenerateMetricError, NoFeasibleRadius,
                     ParseError, PreconditionError, UsageError, WSClustError)
from .estimator import (BallSpec, CenterState, EstimatorParams, build_sampling_distribution,
                        point_to_point_estimate, point_to_set_estimate, refresh_balls)
from .kcenter import (CarveOutcome, KCenterWSParams, carve_once, gonzalez_baseline,
                      greedy_carve_exact, kcenter_weak_strong)
from .kmeans import (ClusteringResult, KMeansWSParams, WeightedInstance, kmeans_strong_baseline,
                     kmeans_weak_strong, kmeans_weak_strong_solve, solve_weighted)
from .metric import (Dataset, EuclideanMetric, MatrixMetric, aspect_ratio, distance_range,
                     load_matrix, load_points_csv, true_distance)
from .oracles import (QueryLedger, StrongOracle, WeakOracle, WeakOracleConfig, make_oracles)

__version__ = "0.1.0"

__all__ = [
    "BallSpec", "BudgetExceeded", "CarveOutcome", "CenterState", "ClusteringResult",
    "ConfigurationError", "Dataset", "DegenerateMetricError", "EstimatorParams",
    "EuclideanMetric", "ExactSolution", "HardInstanceSpec", "KCenterWSParams", "KMeansWSParams",
    "MatrixMetric", "NoFeasibleRadius", "ParseError", "PreconditionError", "QueryLedger",
    "SbmSpec", "StrongOracle", "UsageError", "WSClustError", "WeakOracle", "WeakOracleConfig",
    "WeightedInstance", "aspect_ratio", "build_experiment_weak_matrix",
    "build_sampling_distribution", "carve_once", "distance_range", "exact_solve",
    "generate_hard_instance", "generate_sbm", "gonzalez_baseline", "greedy_carve_exact",
    "kcenter_weak_strong", "kmeans_strong_baseline", "kmeans_weak_strong",
    "kmeans_weak_strong_solve", "load_matrix", "load_points_csv", "make_oracles",
    "point_to_point_estimate", "point_to_set_estimate", "refresh_balls", "solve_weighted",
    "true_distance",
]
