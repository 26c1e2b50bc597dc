"""Weighted Pauli-string algebra.

A Pauli string is stored in symplectic form as two bit masks ``x`` and ``z``
(bit ``q`` refers to qubit ``q``).  The single-qubit letter at ``q`` is

    (x, z) = (0, 0) -> I,  (1, 0) -> X,  (0, 1) -> Z,  (1, 1) -> Y

and qubit 0 is the least-significant bit of every matrix / state index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

PRUNE_TOL = 1e-12
ORACLE_MAX_QUBITS = 14

_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTER.items()}

# phase exponent (power of i) of the single-qubit product a*b, indexed by letters
_PRODUCT = {
    ("X", "Y"): ("Z", 1), ("Y", "X"): ("Z", 3),
    ("Y", "Z"): ("X", 1), ("Z", "Y"): ("X", 3),
    ("Z", "X"): ("Y", 1), ("X", "Z"): ("Y", 3),
}
_I_POWERS = (1, 1j, -1, -1j)


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class ResourceError(RuntimeError):
    """A dense realization would exceed the configured qubit cap."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    n_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("Pauli masks exceed n_qubits")

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def from_ops(cls, ops: str | Iterable[str]) -> "PauliString":
        """Build from a dense letter sequence, qubit 0 first (``"XIZ"`` = X0 Z2)."""
        ops = list(ops)
        x = z = 0
        for q, letter in enumerate(ops):
            try:
                bx, bz = _BITS[letter.upper()]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {letter!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(len(ops), x, z)

    @classmethod
    def from_label(cls, label: str, n_qubits: int) -> "PauliString":
        """Parse the sparse text form ``"X0 Y1 Z3"``; ``""`` or ``"I"`` is the identity."""
        x = z = 0
        label = label.strip()
        if label in ("", "I"):
            return cls(n_qubits)
        for token in label.split():
            m = re.fullmatch(r"([IXYZ])(\d+)", token.upper())
            if m is None:
                raise ValueError(f"bad Pauli token {token!r}")
            letter, q = m.group(1), int(m.group(2))
            if q >= n_qubits:
                raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
            if (x >> q) & 1 or (z >> q) & 1:
                raise ValueError(f"qubit {q} repeated in {label!r}")
            bx, bz = _BITS[letter]
            x |= bx << q
            z |= bz << q
        return cls(n_qubits, x, z)

    def op(self, q: int) -> str:
        return _LETTER[((self.x >> q) & 1, (self.z >> q) & 1)]

    @property
    def ops(self) -> str:
        return "".join(self.op(q) for q in range(self.n_qubits))

    @property
    def support(self) -> int:
        return self.x | self.z

    @property
    def label(self) -> str:
        parts = [f"{self.op(q)}{q}" for q in range(self.n_qubits) if (self.support >> q) & 1]
        return " ".join(parts) if parts else "I"

    def is_identity(self) -> bool:
        return self.support == 0

    def sort_key(self) -> tuple[int, ...]:
        """Canonical order: per-qubit codes I<X<Y<Z, qubit 0 most significant."""
        code = {"I": 0, "X": 1, "Y": 2, "Z": 3}
        return tuple(code[self.op(q)] for q in range(self.n_qubits))

    def commutes(self, other: "PauliString") -> bool:
        _check_dims(self, other)
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def __mul__(self, other: "PauliString") -> tuple[complex, "PauliString"]:
        return multiply(self, other)

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r}, n_qubits={self.n_qubits})"


def _check_dims(a, b) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, p)`` with ``phase * p == a @ b`` and phase in {1, -1, i, -i}."""
    _check_dims(a, b)
    power = 0
    both = a.support & b.support
    q = 0
    while both:
        if both & 1:
            la, lb = a.op(q), b.op(q)
            if la != lb:
                power += _PRODUCT[(la, lb)][1]
        both >>= 1
        q += 1
    return _I_POWERS[power % 4], PauliString(a.n_qubits, a.x ^ b.x, a.z ^ b.z)


def weight(p: PauliString) -> int:
    return _popcount(p.support)


def qubit_wise_commutes(a: PauliString, b: PauliString) -> bool:
    _check_dims(a, b)
    both = a.support & b.support
    return ((a.x ^ b.x) | (a.z ^ b.z)) & both == 0


class PauliSum:
    """Immutable weighted sum of Pauli strings on a fixed number of qubits."""

    __slots__ = ("n_qubits", "_terms", "_kernel")

    def __init__(self, n_qubits: int, terms: Mapping[PauliString, complex] | Iterable[tuple[PauliString, complex]] = ()):
        if n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {n_qubits}")
        self.n_qubits = n_qubits
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[PauliString, complex] = {}
        for p, c in items:
            if p.n_qubits != n_qubits:
                raise DimensionError(f"term on {p.n_qubits} qubits in a {n_qubits}-qubit sum")
            acc[p] = acc.get(p, 0.0) + complex(c)
        self._terms = {p: c for p, c in acc.items() if abs(c) >= PRUNE_TOL}
        self._kernel = None

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    @classmethod
    def from_labels(cls, n_qubits: int, pairs: Iterable[tuple[str, complex]]) -> "PauliSum":
        return cls(n_qubits, [(PauliString.from_label(s, n_qubits), c) for s, c in pairs])

    @property
    def terms(self) -> dict[PauliString, complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[PauliString, complex]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[PauliString]:
        return iter(self._terms)

    def coeff(self, p: PauliString | str) -> complex:
        if isinstance(p, str):
            p = PauliString.from_label(p, self.n_qubits)
        return self._terms.get(p, 0.0)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        _check_dims(self, other)
        return PauliSum(self.n_qubits, list(self.items()) + list(other.items()))

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __neg__(self) -> "PauliSum":
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            _check_dims(self, other)
            out = []
            for pa, ca in self.items():
                for pb, cb in other.items():
                    phase, p = multiply(pa, pb)
                    out.append((p, phase * ca * cb))
            return PauliSum(self.n_qubits, out)
        if isinstance(other, (int, float, complex, np.number)):
            return PauliSum(self.n_qubits, [(p, c * other) for p, c in self.items()])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.close_to(other, 0.0)

    __hash__ = None

    def close_to(self, other: "PauliSum", atol: float = 1e-10) -> bool:
        if self.n_qubits != other.n_qubits:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coeff(p) - other.coeff(p)) <= atol for p in keys)

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n_qubits, [(p, c.conjugate()) for p, c in self.items()])

    def is_hermitian(self, atol: float = 1e-10) -> bool:
        return all(abs(c.imag) <= atol for c in self._terms.values())

    def real(self) -> "PauliSum":
        """Drop imaginary parts of coefficients (for Hermitian sums with residue)."""
        return PauliSum(self.n_qubits, [(p, c.real) for p, c in self.items()])

    def constant(self) -> complex:
        return self._terms.get(PauliString.identity(self.n_qubits), 0.0)

    def without_identity(self) -> "PauliSum":
        return PauliSum(self.n_qubits, [(p, c) for p, c in self.items() if not p.is_identity()])

    def embed(self, qubit_map: list[int], n_qubits: int) -> "PauliSum":
        """Relabel qubit ``q`` to ``qubit_map[q]`` inside a register of ``n_qubits``."""
        out = []
        for p, c in self.items():
            x = z = 0
            for q, target in enumerate(qubit_map):
                x |= ((p.x >> q) & 1) << target
                z |= ((p.z >> q) & 1) << target
            out.append((PauliString(n_qubits, x, z), c))
        return PauliSum(n_qubits, out)

    def sorted_terms(self) -> list[tuple[PauliString, complex]]:
        return sorted(self.items(), key=lambda t: t[0].sort_key())

    def __repr__(self) -> str:
        body = " + ".join(f"({c:.6g})*[{p.label}]" for p, c in self.sorted_terms()[:8])
        more = "" if len(self) <= 8 else f" + ... ({len(self)} terms)"
        return f"PauliSum(n_qubits={self.n_qubits}: {body or '0'}{more})"

    # JSON interchange: list of {pauli, coeff_re, coeff_im} plus metadata
    def to_json(self, metadata: Mapping | None = None) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "metadata": dict(metadata or {}),
            "terms": [
                {"pauli": p.label, "coeff_re": float(c.real), "coeff_im": float(c.imag)}
                for p, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PauliSum":
        n = int(data["n_qubits"])
        return cls(n, [
            (PauliString.from_label(t["pauli"], n), complex(t["coeff_re"], t.get("coeff_im", 0.0)))
            for t in data["terms"]
        ])


def _single_action(p: PauliString, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Columns ``b`` map to rows ``b ^ x`` with the returned phases."""
    basis = np.arange(1 << n, dtype=np.int64)
    zmask = p.z
    parity = np.zeros(basis.shape, dtype=np.int64)
    q = 0
    while zmask:
        if zmask & 1:
            parity ^= (basis >> q) & 1
        zmask >>= 1
        q += 1
    phase = _I_POWERS[_popcount(p.x & p.z) % 4] * (1 - 2 * parity)
    return basis ^ p.x, phase


def to_matrix(s: PauliSum | PauliString, max_qubits: int = ORACLE_MAX_QUBITS) -> np.ndarray:
    """Dense ``2^n x 2^n`` realization (qubit 0 least significant)."""
    if isinstance(s, PauliString):
        s = PauliSum(s.n_qubits, [(s, 1.0)])
    n = s.n_qubits
    if n > max_qubits:
        raise ResourceError(f"{n} qubits exceeds the dense cap of {max_qubits}")
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for p, c in s.items():
        rows, phase = _single_action(p, n)
        mat[rows, cols] += c * phase
    return mat
