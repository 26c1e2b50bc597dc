"""Qubit encodings of d-level modes and the operator compiler.

Within a mode, codeword bit ``j`` sits on the mode's ``j``-th qubit (for the
compact codes that is the ``2**j`` significant figure; for unary it is level
``j``).  Across modes qubits follow the SFB layout of :mod:`bempa.layout`.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .circuit.ir import Circuit, Gate
from .pauli import PauliString, PauliSum

if TYPE_CHECKING:
    from .model import ModeSystem


class Encoding(str, enum.Enum):
    STD_BINARY = "stdbinary"
    GRAY = "gray"
    UNARY = "unary"

    @classmethod
    def parse(cls, value: "str | Encoding") -> "Encoding":
        if isinstance(value, Encoding):
            return value
        aliases = {"binary": "stdbinary", "std_binary": "stdbinary", "sb": "stdbinary", "onehot": "unary"}
        key = value.strip().lower().replace("-", "_")
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown encoding {value!r}") from None

    def qubits_per_mode(self, d: int) -> int:
        if d < 2:
            raise ValueError(f"truncation d must be at least 2, got {d}")
        if self is Encoding.UNARY:
            return d
        return math.ceil(math.log2(d))


class EncodingError(ValueError):
    """Level or codeword outside the encoded range."""


def codeword(d: int, level: int, enc: Encoding) -> int:
    """Codeword as an integer whose bit ``j`` is the mode's qubit ``j``."""
    enc = Encoding.parse(enc)
    if not 0 <= level < d:
        raise EncodingError(f"level {level} outside [0, {d})")
    if enc is Encoding.STD_BINARY:
        return level
    if enc is Encoding.GRAY:
        return level ^ (level >> 1)
    return 1 << level


def encode_level(d: int, level: int, enc: Encoding) -> str:
    """Codeword written most-significant bit first, e.g. level 6 of d=8 -> ``"110"``."""
    enc = Encoding.parse(enc)
    return format(codeword(d, level, enc), f"0{enc.qubits_per_mode(d)}b")


@lru_cache(maxsize=None)
def _decode_table(d: int, enc: Encoding) -> dict[int, int]:
    return {codeword(d, level, enc): level for level in range(d)}


def decode_codeword(d: int, word: int, enc: Encoding) -> int:
    enc = Encoding.parse(enc)
    try:
        return _decode_table(d, enc)[word]
    except KeyError:
        raise EncodingError(f"{word:b} is not a valid {enc.value} codeword for d={d}") from None


def decode_level(d: int, bits: str, enc: Encoding) -> int:
    return decode_codeword(d, int(bits, 2), enc)


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """A d x d operator on one mode, in the occupation basis."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"mode operator must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "ModeOperator") -> "ModeOperator":
        return ModeOperator(self.matrix @ other.matrix)

    def dag(self) -> "ModeOperator":
        return ModeOperator(self.matrix.conj().T)


def annihilation(d: int) -> ModeOperator:
    """Truncated a: a[k-1, k] = sqrt(k)."""
    return ModeOperator(np.diag(np.sqrt(np.arange(1, d)), k=1))


def creation(d: int) -> ModeOperator:
    return annihilation(d).dag()


def number(d: int) -> ModeOperator:
    return ModeOperator(np.diag(np.arange(d, dtype=float)))


def identity(d: int) -> ModeOperator:
    return ModeOperator(np.eye(d))


# |a><b| on one qubit as {(x, z): coeff}
_PROJ = {
    (0, 0): {(0, 0): 0.5, (0, 1): 0.5},
    (1, 1): {(0, 0): 0.5, (0, 1): -0.5},
    (0, 1): {(1, 0): 0.5, (1, 1): 0.5j},
    (1, 0): {(1, 0): 0.5, (1, 1): -0.5j},
}


def _expand_outer(ket: int, bra: int, qubits: Iterable[int]) -> dict[tuple[int, int], complex]:
    """Pauli expansion of |ket><bra| restricted to ``qubits`` (identity elsewhere)."""
    acc = {(0, 0): 1.0 + 0j}
    for q in qubits:
        local = _PROJ[((ket >> q) & 1, (bra >> q) & 1)]
        nxt: dict[tuple[int, int], complex] = {}
        for (x, z), c in acc.items():
            for (lx, lz), lc in local.items():
                key = (x | (lx << q), z | (lz << q))
                nxt[key] = nxt.get(key, 0) + c * lc
        acc = nxt
    return acc


@lru_cache(maxsize=512)
def _compile_cached(raw: bytes, d: int, enc: Encoding) -> PauliSum:
    matrix = np.frombuffer(raw, dtype=complex).reshape(d, d)
    nq = enc.qubits_per_mode(d)
    acc: dict[tuple[int, int], complex] = {}
    rows, cols = np.nonzero(np.abs(matrix) > 0)
    for i, j in zip(rows.tolist(), cols.tolist()):
        m = matrix[i, j]
        ci, cj = codeword(d, i, enc), codeword(d, j, enc)
        if enc is Encoding.UNARY:
            # valid-subspace form: only the qubits of levels i and j are touched
            qubits = [i] if i == j else [i, j]
        else:
            qubits = range(nq)
        for key, c in _expand_outer(ci, cj, qubits).items():
            acc[key] = acc.get(key, 0) + m * c
    return PauliSum(nq, [(PauliString(nq, x, z), c) for (x, z), c in acc.items()])


def compile_mode_operator(op: ModeOperator, enc: Encoding) -> PauliSum:
    """Pauli form of ``op`` whose action on valid codewords equals ``op.matrix``.

    Each matrix element ``m_ij |i><j|`` becomes a product of one-qubit
    ``|a><b|`` factors, each rewritten as half a sum of Pauli letters.
    """
    enc = Encoding.parse(enc)
    m = np.ascontiguousarray(op.matrix, dtype=complex)
    return _compile_cached(m.tobytes(), op.dim, enc)


def compile_system_operator(
    products: Iterable[Sequence[tuple[int, ModeOperator]]],
    system: "ModeSystem",
    coeffs: Sequence[complex] | None = None,
) -> PauliSum:
    """Sum of (optionally weighted) products of single-mode operators.

    Modes absent from a product act as identity; each product may name a mode once.
    """
    layout = system.layout
    n = layout.n_qubits
    products = list(products)
    coeffs = [1.0] * len(products) if coeffs is None else list(coeffs)
    if len(coeffs) != len(products):
        raise ValueError("one coefficient per product required")
    total = PauliSum.zero(n)
    for coeff, product in zip(coeffs, products):
        modes = [mode for mode, _ in product]
        if len(set(modes)) != len(modes):
            raise EncodingError(f"mode repeated within one product: {modes}")
        term = PauliSum(n, [(PauliString.identity(n), coeff)])
        for mode, op in product:
            if not 0 <= mode < system.n_modes:
                raise EncodingError(f"mode {mode} outside system of {system.n_modes}")
            if op.dim != system.d:
                raise EncodingError(f"operator dim {op.dim} does not match d={system.d}")
            local = compile_mode_operator(op, system.encoding)
            term = term * local.embed(layout.mode_qubits(mode), n)
        total = total + term
    return total


def binary_to_gray_circuit(k: int, modes: Sequence[Sequence[int]], n_qubits: int | None = None) -> Circuit:
    """CNOT network turning binary codewords into Gray codewords, per mode.

    ``modes`` lists each mode's qubits, least significant first.  Gray bit j is
    ``b_j XOR b_{j+1}``, so CNOT(j+1 -> j) runs for ascending j.
    """
    if k < 1:
        raise ValueError("need at least one qubit per mode")
    width = n_qubits if n_qubits is not None else (max((q for m in modes for q in m), default=-1) + 1)
    gates = []
    for qubits in modes:
        if len(qubits) != k:
            raise ValueError(f"mode {list(qubits)} does not have {k} qubits")
        for j in range(k - 1):
            gates.append(Gate("CNOT", (qubits[j + 1], qubits[j])))
    return Circuit(max(width, 1), gates)


def export_json(h: PauliSum, system: "ModeSystem", path=None) -> dict:
    data = h.to_json({"n_modes": system.n_modes, "d": system.d, "encoding": system.encoding.value})
    if path is not None:
        with open(path, "w") as fh:
            json.dump(data, fh, indent=1)
    return data


def import_json(source) -> tuple[PauliSum, dict]:
    """Load a Pauli sum (path or already-parsed dict) and its metadata."""
    if not isinstance(source, dict):
        with open(source) as fh:
            source = json.load(fh)
    return PauliSum.from_json(source), dict(source.get("metadata", {}))
