"""Bayesian graph partitioning via GP-learned local conductance."""

from .conductance import (
    BallProfile,
    BallSearch,
    CutStats,
    VertexSet,
    chain_conductance_exact,
    ergodic_flow,
    induced_conductance,
    induced_conductance_oracle,
    set_conductance,
)
from .embedding import (
    EmbeddingTable,
    ReferenceSet,
    empirical_distortion,
    frechet_embed,
    sample_references,
)
from .gp import (
    GpModel,
    Hyperparams,
    Prediction,
    fit,
    kernel,
    kernel_matrix,
    log_marginal_likelihood,
    predict,
    sample_posterior_functions,
)
from .graph import (
    PointCloud,
    RandomWalk,
    WeightedGraph,
    build_knn_graph,
    connected_components,
    load_edge_list,
    load_point_cloud,
    random_walk,
    shortest_paths,
)
from .mcmc import (
    Diagnostics,
    GammaPrecisionPrior,
    MhConfig,
    PosteriorSamples,
    PriorSet,
    diagnostics,
    log_posterior,
    log_prior,
    mh_chain,
    mh_sample,
    predictive_mixture,
)
from .pipeline import (
    Clustering,
    PipelineConfig,
    PipelineResult,
    adjusted_rand_index,
    build_training_set,
    extract_clusters,
    run_algorithm,
    score_clustering,
    select_training_vertices,
)

__version__ = "0.1.0"
