"""T-gate and qubit accounting for recursive LCU block encodings.

Conventions
-----------
* Select uses unary iteration: ``4L - 4`` T gates and ``ceil(log2 L)`` work qubits.
* Prepare uses a SELECT-SWAP QROM whose T count is minimized over
  power-of-two swap factors.
* All Select costs of the nested encodings are summed into ``S`` and all
  Prepare costs into ``P``; the walk needs ``ceil(sqrt(2) pi lambda / dE)``
  applications of a block encoding costing ``S + 2P``.
* Qubits: system register, plus the largest sum of index and flag registers
  along any nesting path, plus the widest QROM swap register.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import budget as _budget
from .decomp import core_nonzeros
from .errors import SizeGuardExceeded
from .hamiltonian import (FactorizedModel, HamiltonianModel, NormMode, one_norm_cp,
                          one_norm_tucker, one_norm_unfactorized, pair_multiplicity)
from .symtensor import orbit_size

TERM_GUARD = 10**8
FERMION_STRINGS = 2  # Jordan-Wigner Pauli strings per orbital transition


def ceil_log2(x) -> int:
    """Exact ``ceil(log2(x))`` for positive ints and floats (0 for x <= 1)."""
    if x <= 1:
        return 0
    if isinstance(x, (int, np.integer)):
        return int(x - 1).bit_length()
    mant, exp = math.frexp(x)
    return exp - 1 if mant == 0.5 else exp


def select_cost(L: int) -> tuple[int, int]:
    """Unary iteration over ``L`` elements: (T count, ancilla)."""
    if L < 1:
        raise ValueError("select needs L >= 1")
    return max(0, 4 * L - 4), ceil_log2(L)


def multicontrolled_x_cost(n_controls: int) -> int:
    """Temporary-AND ladder with measurement-based uncompute."""
    return 4 * (n_controls - 1) if n_controls >= 2 else 0


def qrom_bits(n_terms: int, eps_prime: float) -> int:
    return ceil_log2(n_terms / eps_prime)


def _qrom(n_terms: int, eps_prime: float) -> tuple[int, int, int]:
    if n_terms < 1:
        raise ValueError("prepare needs at least one term")
    if not 0 < eps_prime < 1:
        raise ValueError("eps_prime must lie in (0, 1)")
    b = qrom_bits(n_terms, eps_prime)
    best_t, best_k = None, 1
    k = 1
    while k <= n_terms:
        t = 4 * math.ceil(n_terms / k) - 4 + 4 * b * (k - 1)
        if best_t is None or t < best_t:
            best_t, best_k = t, k
        k *= 2
    return best_t, ceil_log2(n_terms) + b * best_k, b * best_k


def qrom_prepare_cost(n_terms: int, eps_prime: float) -> tuple[int, int]:
    """SELECT-SWAP state preparation over ``n_terms`` amplitudes: (T count, ancilla)."""
    t, anc, _ = _qrom(n_terms, eps_prime)
    return t, anc


def linear_combo_encoding_cost(n_unitaries: int, eps_prime: float) -> tuple[int, int, int]:
    """Block encoding of a linear combination: (select T, prepare T, ancilla).

    Prepare is counted once; the factor 2 for Prepare and its inverse is
    applied when forming the total cost.
    """
    s_t, s_anc = select_cost(n_unitaries)
    p_t, p_anc = qrom_prepare_cost(n_unitaries, eps_prime)
    return s_t, p_t, s_anc + p_anc


def product_encoding_cost(j: int, sub_ancilla: int, sub_select_T: int,
                          sub_prepare_T: int) -> tuple[int, int, int]:
    """Product of ``j`` block encodings with one flag qubit per factor."""
    if j < 1:
        raise ValueError("product needs j >= 1")
    select_t = j * sub_select_T + j * multicontrolled_x_cost(sub_ancilla)
    return select_t, j * sub_prepare_T, sub_ancilla + j


def phase_estimation_steps(lam: float, delta_e: float) -> int:
    return math.ceil(math.sqrt(2) * math.pi * lam / delta_e)


@dataclass
class CostReport:
    method: str
    lam: float
    select_t: int
    prepare_t: int
    qubits: int
    total_t: int
    delta_e: float
    norm_mode: str = "coefficient"
    eps_prime: float | None = None
    budget: _budget.ErrorBudget | None = None
    breakdown: list = field(default_factory=list)  # (label, select_T, prepare_T, terms)

    @property
    def steps(self) -> int:
        return phase_estimation_steps(self.lam, self.delta_e)

    def identity_holds(self) -> bool:
        return self.total_t == self.steps * (self.select_t + 2 * self.prepare_t)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["budget"] = self.budget.to_dict() if self.budget else None
        out["breakdown"] = [dict(zip(("label", "select_t", "prepare_t", "terms"), row))
                            for row in self.breakdown]
        return out


class _Tally:
    """Accumulates nested Select/Prepare costs and register widths."""

    def __init__(self, eps_prime: float):
        self.eps_prime = eps_prime
        self.select_t = 0
        self.prepare_t = 0
        self.path = 0
        self.swap = 0
        self.rows = []

    def lcu(self, n: int):
        """Cost of one LCU level; returns (select T, prepare T, index width)."""
        s_t, _ = select_cost(n)
        p_t, _, swap = _qrom(n, self.eps_prime)
        self.swap = max(self.swap, swap)
        return s_t, p_t, ceil_log2(n)

    def add(self, label, select_t, prepare_t, terms, copies=1):
        self.select_t += copies * select_t
        self.prepare_t += copies * prepare_t
        self.rows.append((label, copies * select_t, copies * prepare_t, copies * terms))

    def report(self, method, lam, delta_e, system_qubits, norm_mode, b) -> CostReport:
        steps = phase_estimation_steps(lam, delta_e)
        return CostReport(method, lam, self.select_t, self.prepare_t,
                          system_qubits + self.path + self.swap,
                          steps * (self.select_t + 2 * self.prepare_t), delta_e,
                          norm_mode, self.eps_prime, b, self.rows)


def _harmonic_terms(h: HamiltonianModel) -> int:
    return h.modes * (h.cutoff + 1)


def count_pauli_terms(h: HamiltonianModel) -> dict:
    """LCU term count of the unfactorized model, by component."""
    counts = {"harmonic": _harmonic_terms(h)}
    per_q = 2 * h.cutoff
    for tid, key, t in h.tensors():
        dense = sum(orbit_size(idx) for idx in t.entries)
        mult = 1 if isinstance(key, int) else pair_multiplicity(key[1], key[2]) * FERMION_STRINGS
        counts[tid] = dense * per_q**t.order * mult
    return counts


def estimate_unfactorized(h: HamiltonianModel, delta_e: float,
                          norm_mode: NormMode = "coefficient") -> CostReport:
    """One LCU over every Pauli product of every dense monomial."""
    counts = count_pauli_terms(h)
    n = sum(counts.values())
    if n > TERM_GUARD:
        raise SizeGuardExceeded(f"{n} LCU terms exceed the guard of {TERM_GUARD}")
    lam = one_norm_unfactorized(h, norm_mode)
    b = _budget.make_budget(lam, delta_e)
    tally = _Tally(b.eps_prep)
    s_t, p_t, width = tally.lcu(n)
    for label, c in counts.items():
        tally.rows.append((label, 0, 0, c))
    tally.add("outer", s_t, p_t, n)
    tally.path = 2 * width
    return tally.report("unfactorized", lam, delta_e, h.system_qubits, norm_mode,
                        replace(b, eps_prime=b.eps_prep))


def _factor_terms(f: FactorizedModel):
    """``(tensor_id, key, order, n_products)`` for every factored tensor."""
    for tid, key, fac in f.factors():
        if f.method == "cp":
            n = int(np.count_nonzero(fac.weights))
        else:
            n = len(core_nonzeros(fac))
        yield tid, key, fac.order, n


def _estimate_factorized(f: FactorizedModel, delta_e: float, norm_mode, eps_prime,
                         lam: float, eps_prime_rule) -> CostReport:
    h = f.base
    b = _budget.make_budget(lam, delta_e)
    terms = list(_factor_terms(f))
    if eps_prime is None:
        eps_prime = eps_prime_rule(b, terms) if any(n for *_, n in terms) else b.eps_prep
    tally = _Tally(eps_prime)

    s_h, p_h, w_h = tally.lcu(_harmonic_terms(h))
    tally.add("harmonic", s_h, p_h, _harmonic_terms(h))
    path = 2 * w_h

    n_s = 2 * h.modes * h.cutoff
    s_s, p_s, w_s = tally.lcu(n_s)
    n_outer = 1
    for tid, key, k, n in terms:
        if n == 0:
            continue
        sel, prep, anc = product_encoding_cost(k, w_s, s_s, p_s)
        copies = n if isinstance(key, int) else n * pair_multiplicity(key[1], key[2])
        tally.add(tid, sel, prep, 1, copies)
        n_outer += n if isinstance(key, int) else n * pair_multiplicity(key[1], key[2]) * FERMION_STRINGS
        path = max(path, anc + w_s)

    s_o, p_o, w_o = tally.lcu(n_outer)
    tally.add("outer", s_o, p_o, n_outer)
    tally.path = 2 * w_o + path
    return tally.report(f.method, lam, delta_e, h.system_qubits, norm_mode, replace(b, eps_prime=eps_prime))


def estimate_cp(f: FactorizedModel, delta_e: float, norm_mode: NormMode = "coefficient",
                eps_prime: float | None = None) -> CostReport:
    """Cost of the CP-factorized encoding.

    Each rank-one term ``Lambda (s)^k`` is a product of ``k`` block encodings
    of ``s = sum_a Q_a q_a`` (``2 M d`` unitaries).  Vibronic terms appear once
    per spin and hermitian copy.  ``eps_prime`` overrides the per-Prepare
    precision derived from the error budget.
    """
    if f.method != "cp":
        raise ValueError("estimate_cp needs a CP factorized model")
    h = f.base

    def rule(b, terms):
        r = max(n for *_, n in terms)
        return _budget.eps_prime_cp(b, r, h.lv, h.lvc)

    return _estimate_factorized(f, delta_e, norm_mode, eps_prime, one_norm_cp(f, norm_mode), rule)


def estimate_tucker(f: FactorizedModel, delta_e: float, norm_mode: NormMode = "coefficient",
                    eps_prime: float | None = None) -> CostReport:
    """Cost of the Tucker-factorized encoding: one product per nonzero dense core entry."""
    if f.method != "tucker":
        raise ValueError("estimate_tucker needs a Tucker factorized model")
    h = f.base

    def rule(b, terms):
        return _budget.eps_prime_tucker(b, h.modes, h.lv, h.lvc)

    return _estimate_factorized(f, delta_e, norm_mode, eps_prime, one_norm_tucker(f, norm_mode), rule)


def estimate(model, delta_e: float, norm_mode: NormMode = "coefficient") -> CostReport:
    if isinstance(model, HamiltonianModel):
        return estimate_unfactorized(model, delta_e, norm_mode)
    if model.method == "cp":
        return estimate_cp(model, delta_e, norm_mode)
    return estimate_tucker(model, delta_e, norm_mode)
