"""Dense statevector simulation, Pauli-sum expectations and parameter gradients.

States are plain complex numpy vectors of length ``2**n``; qubit 0 is the
least-significant bit of the index.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuit.gates import gate_generator, gate_matrix
from .circuit.ir import Circuit, Gate
from .encode import EncodingError, decode_codeword
from .model import total_number_operator
from .pauli import PauliSum, ResourceError

SIM_MAX_QUBITS = 16
FD_STEP = 1e-6
NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10


class HermiticityError(ValueError):
    """Expectation value has a non-negligible imaginary part."""


def basis_state(n_qubits: int, index: int = 0) -> np.ndarray:
    if not 0 <= index < (1 << n_qubits):
        raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def apply_matrix(psi: np.ndarray, u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Apply a local unitary to ``qubits`` (its wire 0 first).  A trailing batch axis is allowed."""
    k = len(qubits)
    batch = psi.shape[1:]
    t = psi.reshape((2,) * n + batch)
    axes = [n - 1 - q for q in reversed(qubits)]
    out = np.tensordot(u.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(psi.shape)


@lru_cache(maxsize=4096)
def _cnot_perm(control: int, target: int, n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return np.where((idx >> control) & 1, idx ^ (1 << target), idx)


def apply_gate(psi: np.ndarray, g: Gate, params: Sequence[float], n: int) -> np.ndarray:
    if g.kind == "CNOT":
        return psi[_cnot_perm(g.qubits[0], g.qubits[1], n)]
    return apply_matrix(psi, gate_matrix(g, params), g.qubits, n)


def _check(c: Circuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.shape[0] != c.n_params:
        raise ValueError(f"circuit takes {c.n_params} parameters, got {params.shape[0]}")
    if c.n_qubits > SIM_MAX_QUBITS:
        raise ResourceError(f"{c.n_qubits} qubits exceeds the simulator cap of {SIM_MAX_QUBITS}")
    return params


def run_circuit(c: Circuit, params: Sequence[float] = (), initial: int | np.ndarray = 0) -> np.ndarray:
    params = _check(c, params)
    if isinstance(initial, (int, np.integer)):
        psi = basis_state(c.n_qubits, int(initial))
    else:
        psi = np.array(initial, dtype=complex)
    for g in c.gates:
        psi = apply_gate(psi, g, params, c.n_qubits)
    return psi


def circuit_unitary(c: Circuit, params: Sequence[float] = ()) -> np.ndarray:
    params = _check(c, params)
    u = np.eye(1 << c.n_qubits, dtype=complex)
    for g in c.gates:
        u = apply_matrix(u, gate_matrix(g, params), g.qubits, c.n_qubits)
    return u


class _PauliKernel:
    """Pauli sum grouped by X-mask: H|b> = sum_x D_x[b] |b ^ x>."""

    def __init__(self, h: PauliSum):
        n = h.n_qubits
        if n > SIM_MAX_QUBITS:
            raise ResourceError(f"{n} qubits exceeds the simulator cap of {SIM_MAX_QUBITS}")
        idx = np.arange(1 << n, dtype=np.int64)
        groups: dict[int, np.ndarray] = {}
        for p, c in h.sorted_terms():
            parity = np.zeros(idx.shape, dtype=np.int64)
            for q in range(n):
                if (p.z >> q) & 1:
                    parity ^= (idx >> q) & 1
            phase = (1j) ** (bin(p.x & p.z).count("1") % 4)
            vec = c * phase * (1 - 2 * parity)
            groups[p.x] = groups.get(p.x, 0) + vec
        self.n = n
        self.xs = np.array(sorted(groups), dtype=np.int64)
        self.diag = np.array([groups[x] for x in self.xs]).reshape(len(self.xs), 1 << n)
        self.perm = idx[None, :] ^ self.xs[:, None]

    def apply(self, psi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(psi, dtype=complex)
        for x, dx, perm in zip(self.xs, self.diag, self.perm):
            out += (dx * psi)[perm]
        return out

    def expectation(self, psi: np.ndarray) -> complex:
        if len(self.xs) == 0:
            return 0j
        return complex(np.sum(np.conj(psi[self.perm]) * self.diag * psi[None, :]))


def _kernel(h: PauliSum) -> _PauliKernel:
    if h._kernel is None:
        h._kernel = _PauliKernel(h)
    return h._kernel


def apply_pauli_sum(h: PauliSum, psi: np.ndarray) -> np.ndarray:
    return _kernel(h).apply(psi)


def expectation(state: np.ndarray, h: PauliSum) -> float:
    """<state|h|state>, term by term; raises if the result is not real."""
    if state.shape[0] != (1 << h.n_qubits):
        raise ValueError(f"state of length {state.shape[0]} does not match {h.n_qubits} qubits")
    value = _kernel(h).expectation(state)
    if abs(value.imag) > HERMITIAN_TOL:
        raise HermiticityError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def energy(c: Circuit, h: PauliSum, params, initial=0) -> float:
    return expectation(run_circuit(c, params, initial), h)


def gradient(
    c: Circuit,
    h: PauliSum,
    params: Sequence[float],
    initial: int | np.ndarray = 0,
    method: str = "fd",
    step: float = FD_STEP,
) -> np.ndarray:
    """dE/dparams by central finite differences (default) or the exact adjoint method."""
    params = _check(c, params)
    if c.n_params == 0:
        return np.zeros(0)
    if method == "adjoint":
        return _adjoint_gradient(c, h, params, initial)
    if method != "fd":
        raise ValueError(f"unknown gradient method {method!r}")
    n = c.n_qubits
    first_use = {}
    for pos, g in enumerate(c.gates):
        if g.parametric:
            first_use.setdefault(g.param_ref, pos)
    # states before each first use, so each shifted run replays only the suffix
    psi = run_circuit(Circuit(n), (), initial)
    checkpoints = {}
    starts = set(first_use.values())
    for pos, g in enumerate(c.gates):
        if pos in starts:
            checkpoints[pos] = psi
        psi = apply_gate(psi, g, params, n)
    grad = np.zeros(c.n_params)
    for k in range(c.n_params):
        if k not in first_use:
            continue
        start = first_use[k]
        values = []
        for sign in (1.0, -1.0):
            shifted = params.copy()
            shifted[k] += sign * step
            phi = checkpoints[start]
            for g in c.gates[start:]:
                phi = apply_gate(phi, g, shifted, n)
            values.append(expectation(phi, h))
        grad[k] = (values[0] - values[1]) / (2 * step)
    return grad


def _adjoint_gradient(c: Circuit, h: PauliSum, params: np.ndarray, initial) -> np.ndarray:
    n = c.n_qubits
    psi = run_circuit(c, params, initial)
    lam = apply_pauli_sum(h, psi)
    grad = np.zeros(c.n_params)
    for g in reversed(c.gates):
        if g.parametric:
            kpsi = apply_matrix(psi, gate_generator(g), g.qubits, n)
            grad[g.param_ref] += 2 * g.scale * np.vdot(lam, kpsi).imag
        u_dag = gate_matrix(g, params).conj().T
        psi = apply_matrix(psi, u_dag, g.qubits, n)
        lam = apply_matrix(lam, u_dag, g.qubits, n)
    return grad


@lru_cache(maxsize=64)
def particle_counts(system) -> np.ndarray:
    """Total particle number of every basis index; -1 where some mode holds an invalid codeword."""
    layout = system.layout
    idx = np.arange(1 << layout.n_qubits, dtype=np.int64)
    total = np.zeros(idx.shape, dtype=np.int64)
    valid = np.ones(idx.shape, dtype=bool)
    for mode in range(system.n_modes):
        word = np.zeros(idx.shape, dtype=np.int64)
        for j, q in enumerate(layout.mode_qubits(mode)):
            word |= ((idx >> q) & 1) << j
        table = np.full(1 << layout.k_per_mode, -1, dtype=np.int64)
        for w in range(table.size):
            try:
                table[w] = decode_codeword(system.d, w, system.encoding)
            except EncodingError:
                pass
        level = table[word]
        valid &= level >= 0
        total += np.maximum(level, 0)
    return np.where(valid, total, -1)


@lru_cache(maxsize=64)
def _number_operator(system) -> PauliSum:
    return total_number_operator(system)


def sector_leakage(state: np.ndarray, system, n_target: int) -> float:
    """<N_tot> - n_target."""
    return expectation(state, _number_operator(system)) - n_target


def outside_sector_mass(state: np.ndarray, system, n_target: int) -> float:
    """Probability of measuring a basis state that is not a valid ``n_target``-particle codeword."""
    counts = particle_counts(system)
    if counts.shape[0] != state.shape[0]:
        raise ValueError("state does not match the mode system")
    inside = counts == n_target
    return float(np.sum(np.abs(state[~inside]) ** 2))
