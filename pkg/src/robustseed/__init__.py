"""Outlier-robust k-means seeding by thresholded D^2 sampling, with baselines and benchmarks."""
from .core import (
    CostParams,
    PointSet,
    SeedingState,
    kmeans_cost,
    potential_witness,
    robust_cost,
    squared_distance,
    thresholded_potential,
    update_cache,
)
from .evaluate import brute_force_oracle, mark_outliers, precision_recall, summarize
from .seeding import (
    Algorithm,
    RkmConfig,
    RobustSeedConfig,
    TkmConfig,
    kmeanspp_seed,
    random_seed,
    rkmpp_seed,
    robust_seed,
    seed,
    tkmpp_seed,
)

__version__ = "0.1.0"
