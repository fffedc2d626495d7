"""Site percolation on random recursive trees.

Grow uniform recursive trees, mark vertices open with probability p, and
study the resulting clusters: exact small-size laws, the branching-process
embedding, and the limit laws of cluster proportions and largest clusters.
"""
from ._kernels import BACKEND
from .branching import (
    BranchingState,
    Trajectory,
    estimate_malthusian,
    pair_census,
    simulate_Z,
    simulate_Z_truncated,
    solve_truncated_eigenvector,
)
from .limits import (
    LimitLaw,
    beta_series_identity_check,
    bond_yule_simon_pmf,
    ewens_moments,
    ewens_pmf,
    lq_norm,
    rank_descending,
    sample_limit_bond,
    sample_limit_site,
    sample_mittag_leffler,
    sample_stick_breaking,
    yule_simon_pmf,
)
from .oracle import (
    ExactDistribution,
    exact_census_distribution,
    exact_chain_distribution,
    exact_coupling_check,
    exact_ewens_distribution,
)
from .percolation import (
    ClusterCensus,
    ClusterPartition,
    bond_partition,
    census,
    census_chain,
    census_step,
    ranked_sizes,
    root_isolation,
    site_partition,
)
from .rng import make_rng, replicate_rng
from .tree import (
    RecursiveTree,
    SiteMarks,
    enumerate_recursive_trees,
    export_dot,
    grow_uniform,
    grow_yule,
    mark_sites,
)

__all__ = [
    "BACKEND",
    "BranchingState",
    "ClusterCensus",
    "ClusterPartition",
    "ExactDistribution",
    "LimitLaw",
    "RecursiveTree",
    "SiteMarks",
    "Trajectory",
    "beta_series_identity_check",
    "bond_partition",
    "bond_yule_simon_pmf",
    "census",
    "census_chain",
    "census_step",
    "enumerate_recursive_trees",
    "estimate_malthusian",
    "ewens_moments",
    "ewens_pmf",
    "exact_census_distribution",
    "exact_chain_distribution",
    "exact_coupling_check",
    "exact_ewens_distribution",
    "export_dot",
    "grow_uniform",
    "grow_yule",
    "lq_norm",
    "make_rng",
    "mark_sites",
    "pair_census",
    "rank_descending",
    "ranked_sizes",
    "replicate_rng",
    "root_isolation",
    "sample_limit_bond",
    "sample_limit_site",
    "sample_mittag_leffler",
    "sample_stick_breaking",
    "simulate_Z",
    "simulate_Z_truncated",
    "site_partition",
    "solve_truncated_eigenvector",
    "yule_simon_pmf",
]

__version__ = "0.1.0"
