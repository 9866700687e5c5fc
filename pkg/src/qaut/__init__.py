"""Abstract quantum automata: Kraus families, control graphs, runs and a text format."""

from ._backend import BACKEND
from .automaton import (
    AbstractQuantumAutomaton,
    BranchTree,
    Configuration,
    InvalidAutomaton,
    check_automaton,
    enumerate_runs,
    final_mixture,
    outcome_probabilities,
    partial_trace,
    sample_run,
    step,
    total_mixture,
    validate_automaton,
)
from .classical import (
    StochasticASM,
    check_asm,
    embed_as_quantum,
    enumerate_classical,
    sample_classical_run,
    validate_asm,
)
from .errors import QautError
from .graph import Arc, ControlGraph, make_graph, validate
from .linalg import DEFAULT_TOL
from .quantum import (
    DensityOperator,
    IsometryMatrix,
    KrausFamily,
    OutcomeSet,
    QuantumOperation,
    apply_effect,
    apply_phases,
    embed_outcome,
    inequivalence_witness,
    isometry_to_kraus,
    kraus_to_isometry,
    make_density,
    mix,
    outcome_distribution,
    outcome_probability,
    phase_equivalent,
    pure_state,
    unitary_as_operation,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
