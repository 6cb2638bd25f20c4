"""Sufficient control of directed complex networks.

Find the minimum number of controllers that make a prescribed number of
nodes structurally controllable (exact, via min-cost flow on a vertex-split
network), and place drivers and controlled nodes so the expected steering
energy is small (projected gradient descent, or the evenly-divided control
path heuristic), with a dense LTI kernel to evaluate and verify everything.
"""

from .edcp import (
    CoverInfeasibleError,
    EdcpResult,
    Stem,
    assign_drivers,
    edcp,
    even_division,
    merge_cycles,
    naive_placement,
    reduce_drivers,
    string_cost,
    trim_to_r,
)
from .elpgm import ElpgmConfig, elpgm_optimize, grad_b, grad_c, importance, project
from .flow import (
    Flow,
    FlowNetwork,
    SufficiencySolver,
    build_sufficiency_flow_network,
    min_cost_flow,
    validate_flow,
)
from .graph import (
    DirectedGraph,
    GraphFormatError,
    classical_driver_count,
    generate_ba,
    generate_er,
    matching_path_cover,
    maximum_matching,
    parse_edge_list,
    serialize_edge_list,
)
from .lti import (
    ControlPlacement,
    UncontrollableError,
    chain_control_cost,
    control_cost,
    control_cost_matrices,
    drive_to_origin,
    gramian,
    mat_exp,
    optimal_input,
    optimal_input_function,
    output_controllable,
    simulate,
)
from .pathcover import (
    CurvePoint,
    PathCover,
    controllability_curve,
    cover_check_matrices,
    curve_to_csv,
    extract_paths_cycles,
    max_controllable_subset,
    min_controllers_for,
)

__version__ = "0.1.0"

__all__ = [
    "ControlPlacement",
    "CoverInfeasibleError",
    "CurvePoint",
    "DirectedGraph",
    "EdcpResult",
    "ElpgmConfig",
    "Flow",
    "FlowNetwork",
    "GraphFormatError",
    "PathCover",
    "Stem",
    "SufficiencySolver",
    "UncontrollableError",
    "assign_drivers",
    "build_sufficiency_flow_network",
    "chain_control_cost",
    "classical_driver_count",
    "control_cost",
    "control_cost_matrices",
    "controllability_curve",
    "cover_check_matrices",
    "curve_to_csv",
    "drive_to_origin",
    "edcp",
    "elpgm_optimize",
    "even_division",
    "extract_paths_cycles",
    "generate_ba",
    "generate_er",
    "grad_b",
    "grad_c",
    "gramian",
    "importance",
    "mat_exp",
    "matching_path_cover",
    "max_controllable_subset",
    "maximum_matching",
    "merge_cycles",
    "min_controllers_for",
    "min_cost_flow",
    "naive_placement",
    "optimal_input",
    "optimal_input_function",
    "output_controllable",
    "parse_edge_list",
    "project",
    "reduce_drivers",
    "serialize_edge_list",
    "simulate",
    "string_cost",
    "trim_to_r",
    "validate_flow",
]
