import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from bempa.circuit import (
    A_GENERATOR,
    B_GENERATOR,
    Circuit,
    Gate,
    OccupationError,
    PauliFrame,
    QubitLayout,
    UnsupportedGateError,
    a_unitary,
    b_decomposition,
    b_ladder_decomposition,
    b_unitary,
    basis_index,
    build_bempa,
    build_penalty_ansatz,
    circuit_depth,
    frame_apply,
    greedy_occupations,
    stage_axes,
    track,
    truncate_to_depth,
    verify_decomposition,
)
from bempa.circuit.frame import B_CLOSING, B_STAGES
from bempa.model import ModeSystem, total_number_operator
from bempa.pauli import PauliString, to_matrix
from bempa.sim import circuit_unitary, expectation, outside_sector_mass, run_circuit

Z2 = to_matrix(PauliString.from_label("Z2", 3))


def test_a_unitary_examples():
    assert np.allclose(a_unitary(0), np.eye(4))
    u = a_unitary(np.pi / 2)
    # |01> (wire 1 set) is index 2, |10> is index 1
    assert np.allclose(u[:, 2], -np.eye(4)[1])
    assert np.allclose(u[:, 1], np.eye(4)[2])


@pytest.mark.parametrize("theta", [0.3, -1.1, 2.7])
def test_a_unitary_matches_generator_exponential(theta):
    assert np.allclose(a_unitary(theta), expm(-1j * theta * to_matrix(A_GENERATOR)), atol=1e-12)


@pytest.mark.parametrize("alpha", [0.3, -1.1, 2.7])
def test_b_unitary_matches_generator_exponential(alpha):
    assert np.allclose(b_unitary(alpha), expm(-1j * alpha * to_matrix(B_GENERATOR)), atol=1e-12)


def test_b_unitary_sparsity():
    assert np.allclose(b_unitary(0), np.eye(8))
    nz = np.abs(b_unitary(0.7)) > 1e-12
    expected = np.eye(8, dtype=bool)
    expected[1, 6] = expected[6, 1] = True
    assert (nz == expected).all()


def test_a_and_b_preserve_blocks():
    ua = a_unitary(0.9)
    for block in ([0, 3], [1, 2]):
        rest = [i for i in range(4) if i not in block]
        assert np.allclose(ua[np.ix_(rest, block)], 0)
    ub = b_unitary(0.9)
    rest = [i for i in range(8) if i not in (1, 6)]
    assert np.allclose(ub[np.ix_(rest, [1, 6])], 0)
    # wire 0 carries weight 2, wires 1 and 2 weight 1: both mixed states hold two quanta
    quanta = [2 * (i & 1) + ((i >> 1) & 1) + ((i >> 2) & 1) for i in range(8)]
    assert quanta[1] == quanta[6] == 2


def test_frame_rules_examples():
    f = frame_apply(PauliFrame.default(2), Gate("H", (0,)))
    assert str(f.p(0)) == "+X0" and str(f.pt(0)) == "+Z0"
    f = frame_apply(PauliFrame.default(2), Gate("CNOT", (0, 1)))
    assert str(f.p(1)) == "+Z0 Z1" and str(f.pt(0)) == "+X0 X1"


def test_opening_gates_give_third_row():
    f = track(B_STAGES[0][0], 3)
    assert f.p(2).pauli == PauliString.from_label("X0 X1 Y2", 3)
    assert f.p(2).sign == -1
    assert str(f.pt(2)) == "+Z2"
    assert f.check()


def test_frame_rejects_non_clifford():
    with pytest.raises(UnsupportedGateError):
        frame_apply(PauliFrame.default(1), Gate("Rz", (0,), 0))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["H", "S", "Sdg", "X", "CNOT", "CZ"]),
                          st.permutations([0, 1, 2])), max_size=12))
def test_frame_matches_dense_conjugation(seq):
    gates = [Gate(k, tuple(q[: 2 if k in ("CNOT", "CZ") else 1])) for k, q in seq]
    f = track(gates, 3)
    u = circuit_unitary(Circuit(3, gates))
    assert f.check()
    for i in range(3):
        for entry, base in ((f.p(i), "Z"), (f.pt(i), "X")):
            op = to_matrix(PauliString.from_label(f"{base}{i}", 3))
            assert np.allclose(u.conj().T @ op @ u, entry.sign * to_matrix(entry.pauli), atol=1e-12)


def test_stage_axes_match_dense_conjugation():
    axes = stage_axes()
    prefix = []
    for (gates, _), axis in zip(B_STAGES, axes):
        prefix.extend(gates)
        u = circuit_unitary(Circuit(3, prefix))
        assert np.allclose(u.conj().T @ Z2 @ u, axis.sign * to_matrix(axis.pauli), atol=1e-12)
    # every axis is a weight-3 term of the B generator, up to sign
    terms = {p for p, _ in B_GENERATOR.items()}
    assert {a.pauli for a in axes} == terms


def test_closing_sequence_restores_default_frame():
    gates = [g for stage, _ in B_STAGES for g in stage] + list(B_CLOSING)
    assert track(gates, 3).is_default()


def test_b_decomposition_structure():
    c = b_decomposition()
    kinds = [(g.kind, g.qubits) for g in c.gates[:6]]
    assert kinds == [("H", (0,)), ("H", (1,)), ("S", (2,)), ("H", (2,)), ("CNOT", (0, 1)), ("CNOT", (1, 2))]
    rz = [g for g in c if g.kind == "Rz"]
    assert [np.sign(g.scale) for g in rz] == [1, -1, -1, 1]
    assert {g.kind for g in c} <= {"CNOT", "H", "S", "Sdg", "Rz"}
    tail = [(g.kind, g.qubits) for g in c.gates[-9:]]
    assert tail == [("S", (1,)), ("H", (1,)), ("CNOT", (1, 2)), ("H", (2,)), ("H", (1,)),
                    ("S", (1,)), ("S", (1,)), ("S", (1,)), ("CNOT", (1, 0))]


@pytest.mark.parametrize("alpha", [0.0, 0.1, 1.3, -2.0])
def test_b_decomposition_matches_unitary(alpha):
    assert verify_decomposition(b_decomposition(), b_unitary(alpha), [alpha]) < 1e-10


def test_b_ladder_baseline_matches_unitary():
    assert verify_decomposition(b_ladder_decomposition(), b_unitary(0.8), [0.8]) < 1e-10


@pytest.mark.parametrize("flip", range(4))
def test_flipped_stage_is_detected(flip):
    assert verify_decomposition(b_decomposition(flip=flip), b_unitary(1.0), [1.0]) > 0.1


def test_depths():
    assert circuit_depth(b_decomposition()) == 13
    assert circuit_depth(b_ladder_decomposition()) == 25
    assert circuit_depth(Circuit(3)) == 0
    assert circuit_depth(Circuit(3, [Gate("BGate", (0, 1, 2), 0)], 1)) == 13
    assert circuit_depth(Circuit(4, [Gate("AGate", (0, 1), 0), Gate("AGate", (2, 3), 1)], 2)) == 5
    assert circuit_depth(Circuit(2, [Gate("H", (0,)), Gate("S", (0,)), Gate("CNOT", (0, 1))])) == 2
    assert verify_decomposition(Circuit(2), np.eye(4)) == 0


def test_truncate_to_depth():
    c, _ = build_bempa(QubitLayout(3, 2), [2, 1, 0], 3)
    full = circuit_depth(c)
    cut = truncate_to_depth(c, 20)
    assert circuit_depth(cut) <= 20 < circuit_depth(c.gates[: len(cut) + 1])
    assert cut.metadata["truncated_at"] == 20
    assert truncate_to_depth(c, full).gates == c.gates
    assert len(truncate_to_depth(c, 0)) == 0


def test_bempa_initial_state_610():
    layout = QubitLayout(3, 3)
    _, initial = build_bempa(layout, [6, 1, 0], 1)
    bits = {layout.qubit(m, k): (occ >> k) & 1 for m, occ in enumerate([6, 1, 0]) for k in range(3)}
    assert initial == sum(b << q for q, b in bits.items())
    assert basis_index(layout, [6, 1, 0]) == initial


def test_bempa_610_conserves_seven_particles():
    sys = ModeSystem.lattice_system("chain", 3, 8)
    c, initial = build_bempa(sys.layout, [6, 1, 0], 2)
    rng = np.random.default_rng(3)
    psi = run_circuit(c, rng.uniform(-np.pi, np.pi, c.n_params), initial)
    assert np.isclose(np.linalg.norm(psi), 1, atol=1e-10)
    assert abs(expectation(psi, total_number_operator(sys)) - 7) < 1e-10


def test_bempa_zero_layers():
    c, initial = build_bempa(QubitLayout(3, 2), [2, 1, 0], 0)
    assert len(c) == 0 and c.n_params == 0
    assert initial == basis_index(QubitLayout(3, 2), [2, 1, 0])


@pytest.mark.parametrize("variant", ["standard", "exhaustive"])
def test_bempa_gate_placement(variant):
    layout = QubitLayout(3, 3)
    c, _ = build_bempa(layout, [1, 1, 1], 2, variant)
    for g in c:
        assert g.kind in ("AGate", "BGate")
        locs = [layout.locate(q) for q in g.qubits]
        if g.kind == "AGate":
            assert locs[0][1] == locs[1][1] and locs[0][0] != locs[1][0]
        else:
            (_, k_hi), (m_a, k_a), (m_b, k_b) = locs
            assert k_a == k_b and k_hi == k_a + 1 and m_a != m_b


def test_bempa_stays_in_sector_for_random_parameters():
    sys = ModeSystem.lattice_system("chain", 3, 4)
    c, initial = build_bempa(sys.layout, greedy_occupations(3, 4, 3), 3)
    rng = np.random.default_rng(0)
    for _ in range(200):
        psi = run_circuit(c, rng.uniform(-np.pi, np.pi, c.n_params), initial)
        assert outside_sector_mass(psi, sys, 3) < 1e-12


def test_bempa_occupation_errors():
    with pytest.raises(OccupationError):
        build_bempa(QubitLayout(2, 2), [4, 0], 1)
    with pytest.raises(OccupationError):
        build_bempa(QubitLayout(2, 2), [1, 0, 0], 1)
    with pytest.raises(OccupationError):
        greedy_occupations(2, 4, 7)
    assert greedy_occupations(3, 4, 7) == [3, 3, 1]


def test_penalty_ansatz_examples():
    c = build_penalty_ansatz("RyCx", 2, 1)
    assert c.n_params == 2 and c.count("CNOT") == 1
    assert len(build_penalty_ansatz("RxCzRy", 4, 0)) == 0
    with pytest.raises(ValueError):
        build_penalty_ansatz("RyCx", 1, 1)
    with pytest.raises(ValueError):
        build_penalty_ansatz("Nope", 2, 1)


def test_penalty_parameters_independent_per_layer():
    for kind in ("RyCx", "RxCzRy", "XXYYRy"):
        c = build_penalty_ansatz(kind, 4, 3)
        refs = [g.param_ref for g in c if g.parametric]
        assert sorted(refs) == list(range(c.n_params))


def test_xxyy_conserves_only_with_zero_ry():
    sys = ModeSystem.lattice_system("chain", 2, 4)
    n_op = total_number_operator(sys)
    c = build_penalty_ansatz("XXYYRy", sys.n_qubits, 2)
    initial = basis_index(sys.layout, [1, 2])
    rng = np.random.default_rng(1)
    params = rng.uniform(-1, 1, c.n_params)
    ry = [g.param_ref for g in c if g.kind == "Ry"]
    zeroed = params.copy()
    zeroed[ry] = 0
    # XXYY swaps neighbouring qubits, which keeps the Hamming weight but not the weighted count
    hamming = np.array([bin(i).count("1") for i in range(1 << sys.n_qubits)])
    psi0 = run_circuit(c, zeroed, initial)
    assert np.isclose(np.sum(np.abs(psi0) ** 2 * hamming), bin(initial).count("1"))
    psi = run_circuit(c, params, initial)
    assert abs(expectation(psi, n_op) - 3) > 1e-3


def test_circuit_json_roundtrip():
    c, _ = build_bempa(QubitLayout(2, 2), [1, 1], 1)
    back = Circuit.from_json(c.to_json())
    assert back == c
    assert "agate" in c.to_text()
