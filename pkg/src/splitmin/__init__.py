"""Splitting min-sum message passing for discrete MAP problems, with exact oracles."""

from .beliefs import (
    BeliefSet,
    Estimate,
    check_admissible,
    check_min_consistent,
    compute_beliefs,
    extract_estimate,
    local_lower_bound,
    lower_bound,
)
from .comptree import CompTree, TreeTooLarge, build_computation_tree, tree_root_belief
from .covers import (
    CertificateError,
    CoverCertificate,
    CoverMap,
    build_two_cover_certificate,
    disjoint_cover,
    lift_assignment,
    lift_beliefs,
    lift_params,
    pairwise_two_cover,
    verify_cover,
)
from .engine import RunReport, Schedule, Status, async_variable_update, run, sync_sweep
from .fgm import FormatError, parse_model, parse_params, serialize_model, serialize_params
from .graph import (
    FactorGraph,
    GraphError,
    StateSpaceTooLarge,
    brute_force_minimize,
    evaluate_objective,
    oracle_min_marginals,
    split_factor_graph,
    split_variable_graph,
    validate_graph,
)
from .messages import InfiniteMessageError, MessageState, init_messages
from .pairwise import PairwiseModel, extend_partial_solution, pairwise_update
from .params import (
    ConicalWeights,
    Optimality,
    ParamsError,
    SplitParams,
    classify_params,
    conical_from_params,
    make_trmp_params,
    make_uniform_params,
    params_from_conical,
    validate_params,
)

__version__ = "0.1.0"

__all__ = [
    "BeliefSet",
    "CertificateError",
    "CompTree",
    "ConicalWeights",
    "CoverCertificate",
    "CoverMap",
    "Estimate",
    "FactorGraph",
    "FormatError",
    "GraphError",
    "InfiniteMessageError",
    "MessageState",
    "Optimality",
    "PairwiseModel",
    "ParamsError",
    "RunReport",
    "Schedule",
    "SplitParams",
    "StateSpaceTooLarge",
    "Status",
    "TreeTooLarge",
    "async_variable_update",
    "brute_force_minimize",
    "build_computation_tree",
    "build_two_cover_certificate",
    "check_admissible",
    "check_min_consistent",
    "classify_params",
    "compute_beliefs",
    "conical_from_params",
    "disjoint_cover",
    "evaluate_objective",
    "extend_partial_solution",
    "extract_estimate",
    "init_messages",
    "lift_assignment",
    "lift_beliefs",
    "lift_params",
    "local_lower_bound",
    "lower_bound",
    "make_trmp_params",
    "make_uniform_params",
    "oracle_min_marginals",
    "pairwise_two_cover",
    "pairwise_update",
    "params_from_conical",
    "parse_model",
    "parse_params",
    "run",
    "serialize_model",
    "serialize_params",
    "split_factor_graph",
    "split_variable_graph",
    "sync_sweep",
    "tree_root_belief",
    "validate_graph",
    "validate_params",
    "verify_cover",
]
