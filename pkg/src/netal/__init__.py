"""Active learning of hidden vertex attributes on networks.

Selects which vertex to query next (mutual information, average agreement,
or simple topological baselines) under a stochastic block model sampled by
constrained heat-bath Gibbs chains, and tracks how prediction accuracy on
the unqueried vertices evolves stage by stage.
"""

from .blockmodel import (
    BlockCounts,
    CountMode,
    PriorSpec,
    UNIFORM_PRIOR,
    apply_move,
    block_counts,
    conditional_type_distribution,
    log_integrated_likelihood,
    log_likelihood_given_p,
    mle_edge_probs,
)
from .graphs import (
    Graph,
    LabelMap,
    betweenness_scores,
    degree_scores,
    dump_edge_list,
    dump_labels,
    load_edge_list,
    load_labels,
)
from .sampler import (
    Constraints,
    ExplicitDistribution,
    GibbsConfig,
    SampleAccumulators,
    exact_posterior,
    marginals,
    run_chain,
    run_ensemble,
)
from .strategies import (
    CriterionScores,
    aa_scores,
    exact_aa,
    exact_mi,
    mi_scores,
    select_query,
)
from .active import (
    ExperimentResult,
    FixedPointResult,
    GroundTruthOracle,
    InteractiveOracle,
    MisfitReport,
    fixed_point_relabel,
    misfit_report,
    run_active_learning,
)
from .metrics import (
    RunCollection,
    accuracy_curves,
    adjusted_mutual_information,
    pearson,
    query_order_stats,
)
from .synth import planted_partition_graph

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
