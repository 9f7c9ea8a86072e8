"""Unary (one-hot) qubit encoding of truncated bosonic operators.

Boson level ``i`` of a mode with cutoff ``d`` is the basis state with a single
excited qubit at position ``offset + i``, so a mode uses ``d + 1`` qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import EmptyOperator

_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    "Z": np.diag([1.0, -1.0]),
}


@dataclass(frozen=True)
class PauliTerm:
    """``coefficient * prod_q P_q``; an empty ``ops`` map is the identity."""

    coefficient: float
    ops: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.coefficient == 0:
            raise ValueError("PauliTerm coefficient must be nonzero")
        if any(p not in "XYZ" or len(p) != 1 for p in self.ops.values()):
            raise ValueError(f"invalid Pauli labels in {self.ops}")

    def label(self) -> str:
        return " ".join(f"{p}{q}" for q, p in sorted(self.ops.items())) or "I"


def q_pauli_terms(d: int, mode_offset: int = 0) -> list[PauliTerm]:
    """Position operator ``(a + a^dag)/sqrt(2)`` as XX and YY hopping terms."""
    if d < 1:
        raise EmptyOperator("position operator needs cutoff d >= 1")
    terms = []
    for i in range(d):
        c = math.sqrt(i + 1) / (2 * math.sqrt(2))
        a, b = mode_offset + i, mode_offset + i + 1
        terms.append(PauliTerm(c, {a: "X", b: "X"}))
        terms.append(PauliTerm(c, {a: "Y", b: "Y"}))
    return terms


def number_op_pauli_terms(d: int, mode_offset: int = 0) -> list[PauliTerm]:
    """Number operator ``sum_i i (I - Z_i)/2``; the merged identity term comes first."""
    if d < 1:
        raise EmptyOperator("number operator needs cutoff d >= 1")
    identity = sum(i / 2 for i in range(1, d + 1))
    return [PauliTerm(identity)] + [PauliTerm(-i / 2, {mode_offset + i: "Z"}) for i in range(1, d + 1)]


def pauli_1norm(terms) -> float:
    return float(sum(abs(t.coefficient) for t in terms))


def q_1norm(d: int) -> float:
    """Pauli 1-norm of the unary position operator, ``sum_i sqrt(i+1)/sqrt(2)``."""
    return sum(math.sqrt(i + 1) for i in range(d)) / math.sqrt(2)


def number_op_1norm(d: int) -> float:
    """Pauli 1-norm of the unary number operator, ``d (d + 1) / 2``."""
    return d * (d + 1) / 2


def pauli_matrix(terms, n_qubits: int) -> np.ndarray:
    """Dense matrix of a Pauli sum; qubit 0 is the most significant tensor factor."""
    dim = 2**n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for t in terms:
        mats = [_PAULI[t.ops.get(q, "I")] for q in range(n_qubits)]
        out += t.coefficient * reduce(np.kron, mats)
    return out


def unary_projector(d: int) -> np.ndarray:
    """Columns are the unary basis states of ``d + 1`` qubits, level 0 first."""
    n = d + 1
    P = np.zeros((2**n, n))
    for level in range(n):
        P[1 << (n - 1 - level), level] = 1.0
    return P
