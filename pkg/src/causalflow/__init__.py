"""causalflow: compile and verify one-way measurement patterns.

Pipeline: represent an open graph state, find a flow, synthesize the
deterministic correction pattern, verify determinism by exhaustive branch
simulation, and extract an equivalent controlled-Z/phase/Hadamard circuit.
"""

from .graph_model import (
    Flow,
    GraphFormatError,
    OpenGraphState,
    ValidationResult,
    flow_from_json_dict,
    graph_from_json,
    graph_from_json_dict,
    neighbors,
    validate_flow,
    validate_graph,
)
from .flow_finder import (
    FlowSearchResult,
    LayeringOutcome,
    OracleSizeError,
    brute_force_flow_oracle,
    dependency_order,
    find_biflow,
    find_flow,
)
from .pattern import (
    Command,
    CorrectX,
    CorrectXPhase,
    CorrectZ,
    Entangle,
    Measure,
    Pattern,
    PatternError,
    PatternFormatError,
    Prepare,
    adjoint,
    check_runnable,
    operator_notation,
    parse_pattern,
    print_pattern,
    relabel,
    synthesize,
    synthesize_stabilizer_form,
)
from .simulator import (
    BranchReport,
    Classification,
    DeterminismVerdict,
    IdentityReport,
    KrausChannel,
    SimulationError,
    Witness,
    check_rewrite_identities,
    classify_determinism,
    enumerate_branches,
    kraus_map,
    max_deviation_up_to_phase,
    realized_embedding,
    rescale_branch_map,
    run_branch,
    simulation_report,
)
from .circuit_extract import (
    Circuit,
    CZGate,
    HadamardGate,
    PhaseGate,
    StarPattern,
    Wire,
    circuit_from_json_dict,
    decompose_stars,
    extract_circuit,
    gate_counts,
    simulate_circuit,
    star_to_gates,
)
from .pauli_rules import (
    classify_loop_pattern,
    drop_x_corrections,
    find_flow_with_loops,
)

__version__ = "0.1.0"

__all__ = [
    "BranchReport",
    "Circuit",
    "CZGate",
    "Classification",
    "Command",
    "CorrectX",
    "CorrectXPhase",
    "CorrectZ",
    "DeterminismVerdict",
    "Entangle",
    "Flow",
    "FlowSearchResult",
    "GraphFormatError",
    "HadamardGate",
    "IdentityReport",
    "KrausChannel",
    "LayeringOutcome",
    "Measure",
    "OpenGraphState",
    "OracleSizeError",
    "Pattern",
    "PatternError",
    "PatternFormatError",
    "PhaseGate",
    "Prepare",
    "SimulationError",
    "StarPattern",
    "ValidationResult",
    "Wire",
    "Witness",
    "adjoint",
    "brute_force_flow_oracle",
    "check_rewrite_identities",
    "check_runnable",
    "circuit_from_json_dict",
    "classify_determinism",
    "classify_loop_pattern",
    "decompose_stars",
    "dependency_order",
    "drop_x_corrections",
    "enumerate_branches",
    "extract_circuit",
    "find_biflow",
    "find_flow",
    "find_flow_with_loops",
    "flow_from_json_dict",
    "gate_counts",
    "graph_from_json",
    "graph_from_json_dict",
    "kraus_map",
    "max_deviation_up_to_phase",
    "neighbors",
    "operator_notation",
    "parse_pattern",
    "print_pattern",
    "realized_embedding",
    "relabel",
    "rescale_branch_map",
    "run_branch",
    "simulation_report",
    "simulate_circuit",
    "star_to_gates",
    "synthesize",
    "synthesize_stabilizer_form",
    "validate_flow",
    "validate_graph",
]
