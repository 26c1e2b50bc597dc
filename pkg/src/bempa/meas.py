"""Measurement-cost analysis: qubit-wise-commuting grouping by sorted insertion, R-hat and N_ungrouped."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .encode import Encoding
from .model import BoseHubbardParams, ModeSystem, build_bh_hamiltonian
from .pauli import PauliString, PauliSum, weight

# coefficients equal to this many decimals count as ties, broken by canonical Pauli order
_TIE_DECIMALS = 12


@dataclass
class Grouping:
    """QWC groups of the non-identity terms of ``source``; ``constant`` is the identity coefficient."""

    groups: list[list[tuple[PauliString, complex]]]
    source: PauliSum
    constant: complex = 0.0

    def __len__(self) -> int:
        return len(self.groups)

    def sizes(self) -> list[int]:
        return [len(g) for g in self.groups]


def sorted_insertion(h: PauliSum) -> Grouping:
    """Greedy QWC grouping: largest |coefficient| first, each term into the first compatible group.

    The identity term needs no measurement and is set aside as ``constant``.
    """
    source = h.without_identity()
    terms = sorted(source.items(), key=lambda t: (-round(abs(t[1]), _TIE_DECIMALS), t[0].sort_key()))
    groups: list[list[tuple[PauliString, complex]]] = []
    # per group: qubits already fixed and the letter (x, z bits) on each of them
    support: list[int] = []
    xs: list[int] = []
    zs: list[int] = []
    for p, c in terms:
        mask = p.x | p.z
        for k in range(len(groups)):
            shared = mask & support[k]
            if (p.x ^ xs[k]) & shared == 0 and (p.z ^ zs[k]) & shared == 0:
                groups[k].append((p, c))
                support[k] |= mask
                xs[k] |= p.x
                zs[k] |= p.z
                break
        else:
            groups.append([(p, c)])
            support.append(mask)
            xs.append(p.x)
            zs.append(p.z)
    return Grouping(groups, source, h.constant())


def r_hat(g: Grouping) -> float:
    """[(sum of all |a|) / (sum over groups of sqrt(sum |a|^2))]^2."""
    if not g.groups:
        raise ValueError("R-hat is undefined for an empty grouping")
    num = sum(abs(c) for group in g.groups for _, c in group)
    den = sum(math.sqrt(sum(abs(c) ** 2 for _, c in group)) for group in g.groups)
    return (num / den) ** 2


def pauli_expectation(state: np.ndarray, p: PauliString) -> complex:
    idx = np.arange(state.shape[0], dtype=np.int64)
    parity = np.zeros(idx.shape, dtype=np.int64)
    for q in range(p.n_qubits):
        if (p.z >> q) & 1:
            parity ^= (idx >> q) & 1
    phase = (1j) ** (bin(p.x & p.z).count("1") % 4)
    return complex(np.vdot(state[idx ^ p.x], phase * (1 - 2 * parity) * state))


def n_ungrouped(h: PauliSum, state: Optional[np.ndarray] = None) -> float:
    """sum_i |a_i| sqrt(Var[P_i]) over non-identity terms, without the 1/eps^2 factor.

    With no state every variance is taken as 1 (maximally mixed convention).
    """
    terms = h.without_identity().items()
    if state is None:
        return float(sum(abs(c) for _, c in terms))
    state = np.asarray(state, dtype=complex)
    if state.shape != (1 << h.n_qubits,):
        raise ValueError(f"state of shape {state.shape} does not match {h.n_qubits} qubits")
    total = 0.0
    for p, c in terms:
        mean = pauli_expectation(state, p).real
        total += abs(c) * math.sqrt(max(0.0, 1.0 - mean * mean))
    return total


def weight_histogram(h: PauliSum) -> dict[int, int]:
    return dict(sorted(Counter(weight(p) for p in h.terms).items()))


@dataclass(frozen=True)
class LatticeTemplate:
    label: str
    kind: str
    n_modes: int

    def system(self, d: int, encoding) -> ModeSystem:
        return ModeSystem.lattice_system(self.kind, self.n_modes, d, encoding)


DEFAULT_TEMPLATES = (
    LatticeTemplate("two-mode", "chain", 2),
    LatticeTemplate("ring", "ring", 4),
    LatticeTemplate("square", "square", 9),
)


def encoding_report(
    p: BoseHubbardParams,
    templates: Sequence[LatticeTemplate] = DEFAULT_TEMPLATES,
    d_list: Iterable[int] = (4, 8, 16),
    encodings: Iterable = (Encoding.STD_BINARY, Encoding.GRAY, Encoding.UNARY),
) -> list[dict]:
    """One row per (lattice, d, encoding): term and qubit counts, weights, R-hat, N_ungrouped.

    R-hat is left empty for unary, whose N_ungrouped differs from the compact codes.
    """
    rows = []
    encodings = [Encoding.parse(e) for e in encodings]
    for tpl in templates:
        for d in d_list:
            for enc in encodings:
                sys = tpl.system(d, enc)
                h = build_bh_hamiltonian(p, sys)
                hist = weight_histogram(h)
                n_terms = len(h)
                grouping = sorted_insertion(h)
                rows.append({
                    "lattice": tpl.label,
                    "n_modes": sys.n_modes,
                    "d": d,
                    "encoding": enc.value,
                    "n_qubits": sys.n_qubits,
                    "n_terms": n_terms,
                    "mean_weight": sum(w * c for w, c in hist.items()) / n_terms if n_terms else 0.0,
                    "weight_histogram": [[w, c] for w, c in hist.items()],
                    "n_groups": len(grouping),
                    "r_hat": None if enc is Encoding.UNARY or not grouping.groups else r_hat(grouping),
                    "n_ungrouped": n_ungrouped(h),
                })
    return rows
