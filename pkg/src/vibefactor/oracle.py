"""Brute-force dense matrices of small models, used as ground truth.

Basis ordering: bosonic Fock states in lexicographic order with mode 0 the
slowest index, followed by ``2N`` fermionic spin orbitals under the
Jordan-Wigner mapping (spin orbital ``2 i + sigma``, bit set = occupied).
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .decomp import CPFactors
from .errors import SizeGuardExceeded
from .hamiltonian import N_SPIN, FactorizedModel, HamiltonianModel
from .symtensor import orbit_size

DIM_GUARD = 4096


def dense_q(d: int) -> np.ndarray:
    """Truncated position operator on levels 0..d."""
    if d < 1:
        raise ValueError("cutoff d must be >= 1")
    off = np.sqrt(np.arange(1, d + 1) / 2.0)
    return np.diag(off, 1) + np.diag(off, -1)


def dense_number(d: int) -> np.ndarray:
    return np.diag(np.arange(d + 1, dtype=float))


def model_dimension(h: HamiltonianModel) -> int:
    return (h.cutoff + 1) ** h.modes * 2 ** (N_SPIN * h.orbitals)


def _check_size(h: HamiltonianModel) -> None:
    dim = model_dimension(h)
    if dim > DIM_GUARD:
        raise SizeGuardExceeded(f"dense dimension {dim} exceeds {DIM_GUARD}")


def _on_mode(op: np.ndarray, mode: int, modes: int) -> np.ndarray:
    eye = np.eye(op.shape[0])
    return reduce(np.kron, [op if a == mode else eye for a in range(modes)])


def _monomial(idx, q: np.ndarray, modes: int) -> np.ndarray:
    """``q_{a1} ... q_{ak}`` as a Kronecker product of per-mode powers."""
    counts = np.bincount(idx, minlength=modes)
    return reduce(np.kron, [np.linalg.matrix_power(q, int(c)) for c in counts])


def _annihilation(p: int, n_so: int) -> np.ndarray:
    z = np.diag([1.0, -1.0])
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    return reduce(np.kron, [z] * p + [lower] + [np.eye(2)] * (n_so - p - 1), np.eye(1))


def transition_operator(i: int, j: int, n_orbitals: int) -> np.ndarray:
    """``sum_sigma c^dag_{i sigma} c_{j sigma}`` plus its conjugate when ``i != j``."""
    n_so = N_SPIN * n_orbitals
    out = np.zeros((2**n_so, 2**n_so))
    for sigma in range(N_SPIN):
        ci = _annihilation(N_SPIN * i + sigma, n_so)
        cj = _annihilation(N_SPIN * j + sigma, n_so)
        term = ci.T @ cj
        out += term if i == j else term + term.T
    return out


def _harmonic(h: HamiltonianModel) -> np.ndarray:
    n = dense_number(h.cutoff)
    return sum(w * _on_mode(n, a, h.modes) for a, w in enumerate(h.omega))


def _assemble(h: HamiltonianModel, boson_parts) -> np.ndarray:
    """Harmonic part plus ``sum_key B_key (x) F_key`` over the given boson operators."""
    f_dim = 2 ** (N_SPIN * h.orbitals)
    f_eye = np.eye(f_dim)
    H = np.kron(_harmonic(h), f_eye)
    for key, B in boson_parts:
        if isinstance(key, int):
            H += np.kron(B, f_eye)
        else:
            _, i, j = key
            H += np.kron(B, transition_operator(i, j, h.orbitals))
    return H


def dense_hamiltonian(h: HamiltonianModel) -> np.ndarray:
    _check_size(h)
    q = dense_q(h.cutoff)

    def parts():
        for _, key, t in h.tensors():
            B = 0.0
            for idx, v in t.entries.items():
                B = B + v * orbit_size(idx) * _monomial(idx, q, h.modes)
            yield key, B

    return _assemble(h, parts())


def s_operators(vectors: np.ndarray, cutoff: int) -> np.ndarray:
    """Stack of ``sum_a vectors[a, l] q_a`` over columns l, shape (r, D, D)."""
    modes = vectors.shape[0]
    q = dense_q(cutoff)
    qs = np.stack([_on_mode(q, a, modes) for a in range(modes)])
    return np.einsum("al,aij->lij", vectors, qs)


def _cp_boson(f: CPFactors, cutoff: int) -> np.ndarray:
    S = s_operators(f.factors, cutoff)
    return sum(w * np.linalg.matrix_power(s, f.order) for w, s in zip(f.weights, S))


def _tucker_boson(f, cutoff: int) -> np.ndarray:
    S = s_operators(f.factor, cutoff)
    # right-to-left: Z[b1..b_{m}] = sum_{b_{m+1}} S[b_{m+1}] @ Z[b1..b_{m+1}]
    Z = np.einsum("...b,bij->...ij", f.core, S)
    for _ in range(f.order - 1):
        Z = np.einsum("bij,...bjk->...ik", S, Z)
    return Z


def dense_from_factorized(f: FactorizedModel) -> np.ndarray:
    h = f.base
    _check_size(h)
    build = _cp_boson if f.method == "cp" else _tucker_boson
    return _assemble(h, ((key, build(fac, h.cutoff)) for _, key, fac in f.factors()))


def spectral_norm(H: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh(H)).max())


def block_norm_check(h: HamiltonianModel, lam: float) -> float:
    """Spectral norm of ``H / lam``; at most 1 when ``lam`` is a valid LCU normalization."""
    return spectral_norm(dense_hamiltonian(h)) / lam


def operator_relative_error(H: np.ndarray, H_f: np.ndarray) -> float:
    return float(np.linalg.norm(H - H_f) / np.linalg.norm(H))


def dump_csv(matrix: np.ndarray, path) -> None:
    np.savetxt(path, np.asarray(matrix), fmt="%.17g", delimiter=",")
