from ..layout import QubitLayout
from .ansatz import (
    PENALTY_KINDS,
    BrickSchedule,
    ExhaustiveSchedule,
    OccupationError,
    basis_index,
    build_bempa,
    build_penalty_ansatz,
    greedy_occupations,
    preparation_circuit,
)
from .frame import (
    PauliFrame,
    SignedPauli,
    UnsupportedGateError,
    b_decomposition,
    b_ladder_decomposition,
    frame_apply,
    stage_axes,
    track,
)
from .gates import A_GENERATOR, B_GENERATOR, a_unitary, b_unitary, gate_matrix
from .ir import Circuit, Gate, circuit_depth, truncate_to_depth
from .verify import phase_distance, verify_decomposition
