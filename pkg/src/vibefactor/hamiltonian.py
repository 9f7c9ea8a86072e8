"""Vibrational/vibronic Hamiltonian models, their factorized forms and 1-norms.

Vibronic tensors are stored once per orbital pair ``i <= j`` and shared by
both spins.  An off-diagonal pair stands for the term plus its hermitian
conjugate, so it is counted twice in norms and term counts; every pair is
counted once more per spin.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import decomp
from .decomp import CPFactors, CPOptions, TuckerFactors
from .errors import RankSearchExhausted, ShapeError
from .pauli import number_op_1norm, q_1norm
from .symtensor import SymTensor, coefficient_1norm, frobenius

log = logging.getLogger(__name__)

NormMode = Literal["coefficient", "encoding"]
Method = Literal["cp", "tucker"]
N_SPIN = 2
SEED_STRIDE = 1000


def pair_multiplicity(i: int, j: int) -> int:
    """Hermitian copies times spins for orbital pair (i, j)."""
    return N_SPIN * (1 if i == j else 2)


@dataclass(frozen=True)
class HamiltonianModel:
    modes: int
    orbitals: int
    cutoff: int
    omega: tuple
    lv: int
    lvc: int
    vib: dict = field(default_factory=dict)  # order -> SymTensor
    vibc: dict = field(default_factory=dict)  # (order, i, j) with i <= j -> SymTensor

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        if len(self.omega) != self.modes:
            raise ShapeError(f"{len(self.omega)} frequencies for {self.modes} modes")
        if any(w <= 0 for w in self.omega):
            raise ValueError("harmonic frequencies must be positive")
        if self.cutoff < 1:
            raise ValueError("Fock cutoff d must be >= 1")
        for k, t in self.vib.items():
            if not 3 <= k <= self.lv or t.order != k or t.modes != self.modes:
                raise ShapeError(f"vibrational tensor of order {k} inconsistent with model")
        for (k, i, j), t in self.vibc.items():
            if not 1 <= k <= self.lvc or t.order != k or t.modes != self.modes:
                raise ShapeError(f"vibronic tensor {(k, i, j)} inconsistent with model")
            if not 0 <= i <= j < self.orbitals:
                raise ShapeError(f"vibronic orbital pair ({i}, {j}) must satisfy 0 <= i <= j < N")

    @property
    def system_qubits(self) -> int:
        return self.modes * (self.cutoff + 1) + N_SPIN * self.orbitals

    def tensors(self):
        """``(tensor_id, key, tensor)`` for every stored tensor, vibrational first."""
        for k in sorted(self.vib):
            yield f"v{k}", k, self.vib[k]
        for key in sorted(self.vibc):
            k, i, j = key
            yield f"vc{k}_{i}_{j}", key, self.vibc[key]

    def scaled(self, c: float) -> "HamiltonianModel":
        return replace(self, vib={k: t * c for k, t in self.vib.items()},
                       vibc={k: t * c for k, t in self.vibc.items()})

    def permute_modes(self, perm) -> "HamiltonianModel":
        perm = list(perm)
        omega = [0.0] * self.modes
        for a, w in enumerate(self.omega):
            omega[perm[a]] = w
        return replace(self, omega=tuple(omega),
                       vib={k: t.permute_modes(perm) for k, t in self.vib.items()},
                       vibc={k: t.permute_modes(perm) for k, t in self.vibc.items()})


@dataclass(frozen=True)
class FactorizedModel:
    """A model whose anharmonic tensors are replaced by CP or Tucker factors.

    Zero tensors are dropped from ``vib`` / ``vibc``; they contribute nothing.
    """

    base: HamiltonianModel
    method: str
    vib: dict = field(default_factory=dict)
    vibc: dict = field(default_factory=dict)
    ranks: dict = field(default_factory=dict)  # tensor_id -> rank (CP) or core nonzeros (Tucker)
    eps: dict = field(default_factory=dict)  # tensor_id -> achieved relative error

    def __post_init__(self):
        if self.method not in ("cp", "tucker"):
            raise ValueError(f"unknown factorization method {self.method!r}")
        kind = CPFactors if self.method == "cp" else TuckerFactors
        for key, f in list(self.vib.items()) + list(self.vibc.items()):
            k = key if isinstance(key, int) else key[0]
            if not isinstance(f, kind) or f.order != k or f.modes != self.base.modes:
                raise ShapeError(f"factors for {key} do not match the replaced tensor")

    def factors(self):
        for k in sorted(self.vib):
            yield f"v{k}", k, self.vib[k]
        for key in sorted(self.vibc):
            k, i, j = key
            yield f"vc{k}_{i}_{j}", key, self.vibc[key]


def _multiplicity(key) -> int:
    return 1 if isinstance(key, int) else pair_multiplicity(key[1], key[2])


def _harmonic_norm(h: HamiltonianModel, mode: NormMode) -> float:
    weight = 1.0 if mode == "coefficient" else number_op_1norm(h.cutoff)
    return weight * sum(abs(w) for w in h.omega)


def _check_mode(mode):
    if mode not in ("coefficient", "encoding"):
        raise ValueError(f"unknown norm mode {mode!r}")


def one_norm_unfactorized(h: HamiltonianModel, mode: NormMode = "coefficient") -> float:
    _check_mode(mode)
    qn = q_1norm(h.cutoff)
    total = _harmonic_norm(h, mode)
    for _, key, t in h.tensors():
        w = 1.0 if mode == "coefficient" else qn**t.order
        total += _multiplicity(key) * w * coefficient_1norm(t)
    return total


def s_operator_1norms(vectors: np.ndarray, cutoff: int) -> np.ndarray:
    """Pauli 1-norms of ``sum_a vectors[a, l] q_a`` for each column l."""
    return np.abs(vectors).sum(axis=0) * q_1norm(cutoff)


def one_norm_cp(f: FactorizedModel, mode: NormMode = "coefficient") -> float:
    _check_mode(mode)
    if f.method != "cp":
        raise ValueError("one_norm_cp needs a CP factorized model")
    total = _harmonic_norm(f.base, mode)
    for _, key, cp in f.factors():
        w = np.abs(cp.weights)
        if mode == "encoding":
            w = w * s_operator_1norms(cp.factors, f.base.cutoff) ** cp.order
        total += _multiplicity(key) * float(w.sum())
    return total


def one_norm_tucker(f: FactorizedModel, mode: NormMode = "coefficient") -> float:
    _check_mode(mode)
    if f.method != "tucker":
        raise ValueError("one_norm_tucker needs a Tucker factorized model")
    total = _harmonic_norm(f.base, mode)
    for _, key, tk in f.factors():
        if mode == "coefficient":
            contrib = decomp.core_coefficient_1norm(tk)
        else:
            s = s_operator_1norms(tk.factor, f.base.cutoff)
            weights = np.ones(())
            for _ in range(tk.order):
                weights = np.multiply.outer(weights, s)
            contrib = float((np.abs(tk.core) * weights).sum())
        total += _multiplicity(key) * contrib
    return total


def one_norm(model, mode: NormMode = "coefficient") -> float:
    """1-norm of a raw or factorized model."""
    if isinstance(model, HamiltonianModel):
        return one_norm_unfactorized(model, mode)
    if model.method == "cp":
        return one_norm_cp(model, mode)
    return one_norm_tucker(model, mode)


def synth_vibronic(h: HamiltonianModel, n_orbitals: int, seed: int = 0) -> HamiltonianModel:
    """Synthetic vibronic couplings derived from the vibrational tensors.

    Each nonzero vibrational entry ``E`` of order ``k`` yields, for every
    orbital pair ``i <= j``, the entry ``(E + eta) * 2**-k / max(1, |i - j|)``
    with ``eta`` uniform on [-1/40, 1/40].
    """
    if n_orbitals < 1:
        raise ValueError("need at least one orbital")
    rng = np.random.default_rng(seed)
    vibc = {}
    for k in sorted(h.vib):
        t = h.vib[k]
        for i in range(n_orbitals):
            for j in range(i, n_orbitals):
                damp = 2.0**-k / max(1, abs(i - j))
                eta = rng.uniform(-1 / 40, 1 / 40, size=t.nnz)
                vibc[(k, i, j)] = SymTensor(k, h.modes, {
                    idx: (v + e) * damp for (idx, v), e in zip(t.entries.items(), eta)})
    lvc = max(h.vib, default=0)
    return replace(h, orbitals=n_orbitals, lvc=lvc, vibc=vibc)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("VIBEFACTOR_THREADS", "1")))
    except ValueError:
        return 1


def factorize(h: HamiltonianModel, method: Method, eps_per_tensor: float | None = None,
              seed: int = 0, opts: CPOptions | None = None, rank: int | None = None,
              threads: int | None = None) -> FactorizedModel:
    """Replace every nonzero anharmonic tensor with CP or Tucker factors.

    CP uses the smallest rank meeting ``eps_per_tensor`` (or the fixed
    ``rank``); tensor number ``n`` in ``h.tensors()`` order gets seed
    ``seed + 1000 * n``.  Tucker is exact and ignores the error target.
    """
    if method == "cp" and rank is None and not (eps_per_tensor and eps_per_tensor > 0):
        raise ValueError("CP factorization needs eps_per_tensor > 0 or a fixed rank")
    opts = opts or CPOptions()
    jobs = [(n, tid, key, t) for n, (tid, key, t) in enumerate(h.tensors()) if frobenius(t) > 0]

    def work(job):
        n, tid, key, t = job
        if method == "tucker":
            f = decomp.tucker_decompose(t)
            return f, decomp.tucker_error(t, f), len(decomp.core_nonzeros(f))
        sub_seed = seed + SEED_STRIDE * n
        if rank is not None:
            f = decomp.cp_decompose(t, rank, sub_seed, opts)
            return f, decomp.cp_error(t, f), f.rank
        try:
            f, err = decomp.rank_for_error(t, eps_per_tensor, sub_seed, opts, tensor_id=tid)
        except RankSearchExhausted as exc:
            exc.tensor_id = tid
            raise
        return f, err, f.rank

    threads = threads or default_threads()
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    vib, vibc, ranks, eps = {}, {}, {}, {}
    for (n, tid, key, _), (f, err, r) in zip(jobs, results):
        (vib if isinstance(key, int) else vibc)[key] = f
        ranks[tid] = r
        eps[tid] = err
        log.info("%s %s: rank %d, eps_F %.3e", method, tid, r, err)
    return FactorizedModel(h, method, vib, vibc, ranks, eps)


def reconstruct_tensor(f) -> SymTensor:
    if isinstance(f, CPFactors):
        return decomp.cp_reconstruct(f)
    return decomp.tucker_reconstruct(f)
