"""Community-count estimation for multi-layer networks.

Generates and fits multi-layer stochastic block models, computes the
normalized-aggregation cubic-trace goodness-of-fit statistic, and runs
the sequential spectral test (and its eta-ratio variant) to estimate
the number of communities.
"""

from .edgelist import EdgeListError, load_multilayer_edgelist, write_labels, \
    write_multilayer_edgelist
from .estimate import BlockEstimates, ProbabilityMatrices, estimate_connectivity, \
    estimate_parameters, expand_probabilities
from .experiments import ExperimentConfig, ExperimentRecord, ExperimentReport, \
    run_accuracy, run_experiment, run_normality, run_size_power, run_t_profile
from .gof import AggregationMatrix, ideal_aggregation, normalized_aggregation, \
    trace_cubed_statistic, triple_product_trace
from .model import AssumptionReport, CommunityLabels, ConnectivityModel, GeneratorConfig, \
    MisclusterReport, MultiLayerNetwork, check_assumptions, generate_msbm, \
    make_experiment_connectivity, misclustering_error
from .sequential import EtaResult, NastResult, TestOutcome, default_k_max, eta_estimate, \
    eta_from_values, nast, normal_quantile, statistic_at_k0, test_at_k0
from .spectral import EigenConvergenceError, EigenPairs, bias_adjusted_aggregate, \
    detect_communities, kmeans_rows, top_eigenvectors

__version__ = "0.1.0"

__all__ = [
    "AggregationMatrix",
    "AssumptionReport",
    "BlockEstimates",
    "CommunityLabels",
    "ConnectivityModel",
    "EdgeListError",
    "EigenConvergenceError",
    "EigenPairs",
    "EtaResult",
    "ExperimentConfig",
    "ExperimentRecord",
    "ExperimentReport",
    "GeneratorConfig",
    "MisclusterReport",
    "MultiLayerNetwork",
    "NastResult",
    "ProbabilityMatrices",
    "TestOutcome",
    "bias_adjusted_aggregate",
    "check_assumptions",
    "default_k_max",
    "detect_communities",
    "estimate_connectivity",
    "estimate_parameters",
    "eta_estimate",
    "eta_from_values",
    "expand_probabilities",
    "generate_msbm",
    "ideal_aggregation",
    "kmeans_rows",
    "load_multilayer_edgelist",
    "make_experiment_connectivity",
    "misclustering_error",
    "nast",
    "normal_quantile",
    "normalized_aggregation",
    "run_accuracy",
    "run_experiment",
    "run_normality",
    "run_size_power",
    "run_t_profile",
    "statistic_at_k0",
    "test_at_k0",
    "top_eigenvectors",
    "trace_cubed_statistic",
    "triple_product_trace",
    "write_labels",
    "write_multilayer_edgelist",
]
