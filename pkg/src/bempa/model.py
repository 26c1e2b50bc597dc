"""Bose-Hubbard Hamiltonian, penalty operator and the fixed-particle-number oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .encode import Encoding, ModeOperator, annihilation, compile_system_operator, creation, number
from .layout import QubitLayout
from .pauli import PauliSum, ResourceError

SECTOR_ORACLE_MAX_DIM = 20000


@dataclass(frozen=True)
class BoseHubbardParams:
    mu: float = 1.0
    omega_t: float = 1.0
    omega_int: float = 1.0

    def __post_init__(self):
        for name in ("mu", "omega_t", "omega_int"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def from_ratio(cls, ratio: float, mu: float = 1.0, omega_t: float = 1.0) -> "BoseHubbardParams":
        """Fix mu and omega_t; scale omega_int so omega_int / omega_t = ratio."""
        return cls(mu=mu, omega_t=omega_t, omega_int=ratio * omega_t)


def chain_edges(n: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(n - 1)]


def ring_edges(n: int) -> list[tuple[int, int]]:
    return _dedupe([(i, (i + 1) % n) for i in range(n)])


def square_edges(side: int) -> list[tuple[int, int]]:
    """Periodic side x side square lattice, row-major mode numbering."""
    edges = []
    for r in range(side):
        for c in range(side):
            i = r * side + c
            edges.append((i, r * side + (c + 1) % side))
            edges.append((i, ((r + 1) % side) * side + c))
    return _dedupe(edges)


def _dedupe(edges):
    seen, out = set(), []
    for i, j in edges:
        key = (min(i, j), max(i, j))
        if i != j and key not in seen:
            seen.add(key)
            out.append(key)
    return out


LATTICES = ("chain", "ring", "square")


@dataclass(frozen=True)
class ModeSystem:
    n_modes: int
    d: int
    edges: tuple[tuple[int, int], ...] = ()
    encoding: Encoding = Encoding.STD_BINARY
    lattice: str = field(default="custom", compare=False)

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("need at least one mode")
        if self.d < 2:
            raise ValueError(f"truncation d must be at least 2, got {self.d}")
        object.__setattr__(self, "encoding", Encoding.parse(self.encoding))
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        seen = set()
        for i, j in edges:
            if not (0 <= i < self.n_modes and 0 <= j < self.n_modes):
                raise ValueError(f"edge ({i}, {j}) references a missing mode")
            if i == j:
                raise ValueError(f"self-loop on mode {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def lattice_system(cls, kind: str, n_modes: int, d: int, encoding="stdbinary") -> "ModeSystem":
        if kind == "chain":
            edges = chain_edges(n_modes)
        elif kind == "ring":
            edges = ring_edges(n_modes)
        elif kind == "square":
            side = math.isqrt(n_modes)
            if side * side != n_modes:
                raise ValueError(f"square lattice needs a square mode count, got {n_modes}")
            edges = square_edges(side)
        else:
            raise ValueError(f"unknown lattice {kind!r}; choose from {LATTICES}")
        return cls(n_modes, d, tuple(edges), Encoding.parse(encoding), lattice=kind)

    @property
    def qubits_per_mode(self) -> int:
        return self.encoding.qubits_per_mode(self.d)

    @property
    def layout(self) -> QubitLayout:
        return QubitLayout(self.n_modes, self.qubits_per_mode)

    @property
    def n_qubits(self) -> int:
        return self.n_modes * self.qubits_per_mode

    @property
    def max_particles(self) -> int:
        return self.n_modes * (self.d - 1)

    def with_encoding(self, encoding) -> "ModeSystem":
        return ModeSystem(self.n_modes, self.d, self.edges, Encoding.parse(encoding), self.lattice)

    def describe(self) -> str:
        return f"{self.lattice}-n{self.n_modes}-d{self.d}"


@dataclass(frozen=True)
class SectorSpec:
    n_target: int
    eta: float = 10.0

    def validate(self, system: ModeSystem) -> None:
        if not 0 <= self.n_target <= system.max_particles:
            raise SectorError(f"no {self.n_target}-particle states in {system.describe()}")


class SectorError(ValueError):
    """Requested particle-number sector is empty."""


def build_bh_hamiltonian(p: BoseHubbardParams, sys: ModeSystem) -> PauliSum:
    """-mu sum n_i - omega_t sum_edges (a_i^dag a_j + a_j^dag a_i) + omega_int sum n_i (n_i - 1)."""
    d = sys.d
    a, ad, n = annihilation(d), creation(d), number(d)
    onsite = n @ ModeOperator(np.diag(np.arange(d, dtype=float) - 1.0))
    products, coeffs = [], []
    for i in range(sys.n_modes):
        products += [[(i, n)], [(i, onsite)]]
        coeffs += [-p.mu, p.omega_int]
    for i, j in sys.edges:
        products += [[(i, ad), (j, a)], [(j, ad), (i, a)]]
        coeffs += [-p.omega_t, -p.omega_t]
    return compile_system_operator(products, sys, coeffs).real()


def total_number_operator(sys: ModeSystem) -> PauliSum:
    n = number(sys.d)
    return compile_system_operator([[(i, n)] for i in range(sys.n_modes)], sys).real()


def build_penalty(spec: SectorSpec, sys: ModeSystem) -> PauliSum:
    """eta (N_tot - N_target)^2."""
    spec.validate(sys)
    nq = sys.n_qubits
    if spec.eta == 0:
        return PauliSum.zero(nq)
    shifted = total_number_operator(sys) - spec.n_target * PauliSum.from_labels(nq, [("I", 1.0)])
    return (spec.eta * (shifted * shifted)).real()


def sector_states(n_modes: int, d: int, n_target: int) -> list[tuple[int, ...]]:
    """Occupation tuples with the requested total, in lexicographic order."""
    if not 0 <= n_target <= n_modes * (d - 1):
        raise SectorError(f"no {n_target}-particle states for {n_modes} modes of {d} levels")
    return [occ for occ in itertools.product(range(d), repeat=n_modes) if sum(occ) == n_target]


def sector_hamiltonian(p: BoseHubbardParams, sys: ModeSystem, n_target: int) -> tuple[np.ndarray, list]:
    """Dense Hamiltonian on the fixed-N occupation basis, straight from truncated ladder operators."""
    states = sector_states(sys.n_modes, sys.d, n_target)
    if len(states) > SECTOR_ORACLE_MAX_DIM:
        raise ResourceError(f"sector dimension {len(states)} exceeds oracle cap")
    index = {s: k for k, s in enumerate(states)}
    h = np.zeros((len(states), len(states)))
    for col, occ in enumerate(states):
        h[col, col] = sum(-p.mu * m + p.omega_int * m * (m - 1) for m in occ)
        for i, j in sys.edges:
            for src, dst in ((j, i), (i, j)):  # a_dst^dag a_src
                if occ[src] == 0 or occ[dst] == sys.d - 1:
                    continue
                new = list(occ)
                new[src] -= 1
                new[dst] += 1
                amp = math.sqrt(occ[src]) * math.sqrt(occ[dst] + 1)
                h[index[tuple(new)], col] += -p.omega_t * amp
    return h, states


def exact_sector_spectrum(p: BoseHubbardParams, sys: ModeSystem, n_target: int) -> np.ndarray:
    h, _ = sector_hamiltonian(p, sys, n_target)
    return np.linalg.eigvalsh(h)


def exact_sector_ground_energy(p: BoseHubbardParams, sys: ModeSystem, n_target: int) -> float:
    return float(exact_sector_spectrum(p, sys, n_target)[0])


def exact_sector_ground_state(p: BoseHubbardParams, sys: ModeSystem, n_target: int) -> tuple[float, np.ndarray, list]:
    h, states = sector_hamiltonian(p, sys, n_target)
    vals, vecs = np.linalg.eigh(h)
    return float(vals[0]), vecs[:, 0], states


def rule_target(n_modes: int, d: int) -> int:
    """n * k + 1 particles, k = log2(d) qubits per mode."""
    return n_modes * math.ceil(math.log2(d)) + 1


def mean_field_critical_ratio(n: float) -> float:
    """omega_int / omega_t at the mean-field Mott / superfluid transition for filling n."""
    if not n > 0:
        raise ValueError(f"mean filling must be positive, got {n}")
    return n * (1.0 + math.sqrt(1.0 + 1.0 / n)) ** 2
