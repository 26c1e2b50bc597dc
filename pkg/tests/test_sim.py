import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bempa.circuit import Circuit, Gate, b_decomposition, b_unitary, build_bempa, build_penalty_ansatz, greedy_occupations
from bempa.encode import codeword
from bempa.model import (
    BoseHubbardParams,
    ModeSystem,
    SectorSpec,
    build_bh_hamiltonian,
    build_penalty,
    exact_sector_ground_state,
)
from bempa.pauli import PauliSum, ResourceError, to_matrix
from bempa.sim import (
    HermiticityError,
    basis_state,
    circuit_unitary,
    energy,
    expectation,
    gradient,
    outside_sector_mass,
    run_circuit,
    sector_leakage,
)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def test_empty_circuit_keeps_vacuum():
    assert np.allclose(run_circuit(Circuit(3)), basis_state(3))


def test_run_circuit_errors():
    with pytest.raises(ValueError):
        run_circuit(Circuit(1, [Gate("Rx", (0,), 0)], 1), [])
    with pytest.raises(ResourceError):
        run_circuit(Circuit(17))


def test_expectation_examples():
    z = PauliSum.from_labels(1, [("Z0", 1)])
    x = PauliSum.from_labels(1, [("X0", 1)])
    assert expectation(basis_state(1), z) == 1
    plus = np.array([1, 1]) / np.sqrt(2)
    assert np.isclose(expectation(plus, x), 1)
    with pytest.raises(HermiticityError):
        expectation(plus, PauliSum.from_labels(1, [("X0", 1j)]))


def test_b_decomposition_acts_like_b_unitary_on_basis_states():
    c = b_decomposition()
    target = b_unitary(0.4)
    outs = np.column_stack([run_circuit(c, [0.4], b) for b in range(8)])
    phase = np.vdot(target[:, 0], outs[:, 0])
    assert np.allclose(outs, phase * target, atol=1e-10)


@pytest.mark.parametrize("n_modes,d", [(3, 4), (2, 8)])
def test_oracle_ground_state_embedding(n_modes, d):
    p = BoseHubbardParams(1, 1, 5)
    sys = ModeSystem.lattice_system("chain", n_modes, d)
    e0, vec, states = exact_sector_ground_state(p, sys, n_modes + 1)
    psi = np.zeros(1 << sys.n_qubits, dtype=complex)
    for amp, occ in zip(vec, states):
        idx = 0
        for m, lvl in enumerate(occ):
            word = codeword(d, lvl, sys.encoding)
            for j, q in enumerate(sys.layout.mode_qubits(m)):
                idx |= ((word >> j) & 1) << q
        psi[idx] = amp
    assert abs(expectation(psi, build_bh_hamiltonian(p, sys)) - e0) < 1e-10


def test_zero_parameter_gradient_is_empty():
    assert gradient(Circuit(2), PauliSum.from_labels(2, [("Z0", 1)]), []).shape == (0,)


def richardson(c, h, params, step=1e-3):
    def central(k, s):
        e = np.zeros_like(params)
        e[k] = s
        return (energy(c, h, params + e) - energy(c, h, params - e)) / (2 * s)

    return np.array([(4 * central(k, step / 2) - central(k, step)) / 3 for k in range(len(params))])


def random_hamiltonian(n, seed):
    rng = np.random.default_rng(seed)
    labels = ["X0 X1", "Z0", "Y1 Y2", "Z2 Z3", "X3", "Y0 Z1 X2"]
    return PauliSum.from_labels(n, [(lbl, rng.normal()) for lbl in labels])


def test_fd_and_adjoint_match_richardson():
    c = build_penalty_ansatz("RxCzRy", 4, 2)
    h = random_hamiltonian(4, 7)
    params = np.random.default_rng(2).uniform(-1, 1, c.n_params)
    oracle = richardson(c, h, params)
    assert np.max(np.abs(gradient(c, h, params) - oracle)) < 1e-6
    assert np.max(np.abs(gradient(c, h, params, method="adjoint") - oracle)) < 1e-6


def test_adjoint_gradient_handles_composite_and_scaled_gates():
    sys = ModeSystem.lattice_system("chain", 2, 4)
    c, initial = build_bempa(sys.layout, [2, 1], 2)
    c = c.then(Circuit(sys.n_qubits, [Gate("XXYY", (0, 1), 0, 0.5), Gate("Rz", (2,), 1, -2.0)], 2))
    h = build_bh_hamiltonian(BoseHubbardParams(1, 1, 3), sys)
    params = np.random.default_rng(5).uniform(-1, 1, c.n_params)
    fd = gradient(c, h, params, initial)
    adj = gradient(c, h, params, initial, method="adjoint")
    assert np.max(np.abs(fd - adj)) < 1e-7
    with pytest.raises(ValueError):
        gradient(c, h, params, initial, method="nope")


def test_leakage_examples():
    sys = ModeSystem.lattice_system("chain", 3, 4)
    vac = basis_state(sys.n_qubits)
    assert np.isclose(sector_leakage(vac, sys, 3), -3)
    assert np.isclose(outside_sector_mass(vac, sys, 3), 1)
    c, initial = build_bempa(sys.layout, greedy_occupations(3, 4, 3), 2)
    psi = run_circuit(c, np.random.default_rng(0).uniform(-3, 3, c.n_params), initial)
    assert abs(sector_leakage(psi, sys, 3)) < 1e-12
    pen = build_penalty_ansatz("RyCx", sys.n_qubits, 2)
    phi = run_circuit(pen, np.random.default_rng(0).uniform(-3, 3, pen.n_params), initial)
    assert abs(sector_leakage(phi, sys, 3)) > 1e-3
    assert outside_sector_mass(phi, sys, 3) > 1e-3


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_expectation_is_linear(seed):
    sys = ModeSystem.lattice_system("chain", 2, 4)
    h = build_bh_hamiltonian(BoseHubbardParams(1, 1, 2), sys)
    pen = build_penalty(SectorSpec(3, 10), sys)
    psi = random_state(sys.n_qubits, seed)
    assert np.isclose(expectation(psi, h + pen), expectation(psi, h) + expectation(psi, pen), atol=1e-10)
    assert np.isclose(expectation(psi, h + pen), np.real(psi.conj() @ to_matrix(h + pen) @ psi), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_norm_preserved_and_deterministic(seed):
    c = build_penalty_ansatz("XXYYRy", 4, 2)
    params = np.random.default_rng(seed).uniform(-np.pi, np.pi, c.n_params)
    psi0 = random_state(4, seed)
    for g in c:
        psi0 = run_circuit(Circuit(4, [g.with_param(0)] if g.parametric else [g], 1 if g.parametric else 0),
                           [params[g.param_ref]] if g.parametric else [], psi0)
        assert np.isclose(np.linalg.norm(psi0), 1, atol=1e-10)
    a = run_circuit(c, params, 3)
    b = run_circuit(c, params, 3)
    assert np.array_equal(a, b)
    assert np.allclose(circuit_unitary(c, params)[:, 3], a)
