"""Entanglement creation, distribution and phase-flip freezing in XY spin
networks, simulated in the single-excitation subspace."""

from .errors import BudgetError, NumericalError, ParseError, SpinFreezeError, ValidationError
from .evolve import (
    FlipEvent,
    Spectrum,
    Trajectory,
    apply_phase_flip,
    diagonalize,
    evolve_state,
    network_spectrum,
    run_schedule,
    single_excitation_hamiltonian,
    site_state,
)
from .lattice import (
    SpinNetwork,
    YSpec,
    branch_swap_permutation,
    build_bifurcated_y,
    build_chain,
    build_y,
    dump_network,
    equivalent_chain,
    load_network,
    pst_couplings,
    save_network,
)
from .measures import (
    LogicalPairing,
    TargetState,
    concurrence,
    entanglement_of_formation,
    fidelity,
    frozen_logical_rho,
    logical_two_qubit_rho,
    reduced_two_qubit_rho,
    site_probabilities,
)

__version__ = "0.1.0"
