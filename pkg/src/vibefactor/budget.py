"""Error budget for qubitized phase estimation.

Half of the squared relative error goes to the phase register, the other half
is split evenly between state preparation, factorization and the QFT.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import InvalidBudget, NoTensorsToDecompose

CHEMICAL_ACCURACY = 1.6e-3  # Hartree


@dataclass(frozen=True)
class ErrorBudget:
    delta_e: float
    lam: float
    m: int
    eps_prep: float
    eps_f: float
    eps_qft: float
    eps_prime: float | None = None
    per_tensor_eps_f: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def make_budget(lam: float, delta_e: float) -> ErrorBudget:
    if not lam > 0:
        raise InvalidBudget(f"lambda must be positive, got {lam}")
    if not 0 < delta_e < lam:
        raise InvalidBudget(f"need 0 < delta_e < lambda, got delta_e={delta_e}, lambda={lam}")
    m = math.ceil(math.log2(math.sqrt(2) * math.pi * lam / (2 * delta_e)))
    eps = delta_e / (3 * math.sqrt(2) * lam)
    return ErrorBudget(delta_e, lam, m, eps, eps, eps)


def eps_prime_cp(b: ErrorBudget, r: int, lv: int, lvc: int) -> float:
    """Per-Prepare precision when ``r`` CP terms are kept per order."""
    denom = r * (lv**2 + lvc**2)
    if denom <= 0:
        raise ValueError("rank and truncation orders give no Prepare operations")
    return b.eps_prep / denom


def eps_prime_tucker(b: ErrorBudget, modes: int, lv: int, lvc: int) -> float:
    denom = lv * modes**lv + lvc * modes**lvc
    if denom <= 0:
        raise ValueError("truncation orders give no Prepare operations")
    return b.eps_prep / denom


def per_tensor_eps_f(b: ErrorBudget, lv: int, lvc: int, n_orbitals: int) -> float:
    """Factorization error allowed for each decomposed tensor."""
    count = lv - 2 + n_orbitals**2 * (lvc - 1)
    if count <= 0:
        raise NoTensorsToDecompose(f"tensor count {count} for Lv={lv}, Lvc={lvc}, N={n_orbitals}")
    return b.delta_e / (3 * math.sqrt(2) * count * b.lam)


def phase_rms_error(b: ErrorBudget) -> float:
    """RMS phase error implied by the budget; at most ``delta_e / lam``."""
    return math.hypot(math.pi / 2 ** (b.m + 1), b.eps_prep + b.eps_f + b.eps_qft)
