"""Symmetric CP (alternating least squares) and full-rank Tucker/HOSVD."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import RankSearchExhausted, ShapeError, ZeroReferenceError
from .symtensor import SymTensor, check_dense_size, frobenius, orbit_size, symmetrize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CPOptions:
    restarts: int = 5
    max_iter: int = 500
    tol: float = 1e-10
    rank_cap: int | None = None
    polish: bool = True
    als_iter: int = 20
    polish_evals: int = 10


@dataclass(frozen=True, eq=False)
class CPFactors:
    """``E = sum_l weights[l] * factors[:, l]^{(x) order}`` with unit columns."""

    order: int
    modes: int
    weights: np.ndarray
    factors: np.ndarray  # modes x rank, column l is Q_l
    converged: bool = True
    iterations: int = 0

    @property
    def rank(self) -> int:
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class TuckerFactors:
    """``E[a..] = sum_b core[b..] * prod_m factor[a_m, b_m]`` with orthogonal ``factor``.

    ``factor[:, b]`` is the b-th basis vector; the same matrix acts on every mode.
    """

    order: int
    modes: int
    core: np.ndarray
    factor: np.ndarray


def _sign_fix(Q: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each column made positive
    pivots = Q[np.argmax(np.abs(Q), axis=0), np.arange(Q.shape[1])]
    return Q * np.where(pivots < 0, -1.0, 1.0)


def _contract(T: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Contract every mode but the first of ``T`` with column l of ``Q``, for each l."""
    k = T.ndim
    Y = np.tensordot(T, Q, axes=([k - 1], [0]))
    for _ in range(k - 2):
        Y = np.einsum("...ar,ar->...r", Y, Q)
    return Y


def _rank1_stack(Q: np.ndarray, k: int) -> np.ndarray:
    """Dense stack of Q_l^{(x) k}, shape (modes,)*k + (rank,)."""
    P = Q
    for _ in range(k - 1):
        P = P[..., None, :] * Q
    return P


def _refit_weights(Q, Y, k):
    y = np.einsum("ar,ar->r", Q, Y)
    G = (Q.T @ Q) ** k
    lam, *_ = np.linalg.lstsq(G, y, rcond=1e-13)
    return lam


def _error(T, norm_t, Q, lam, k):
    return float(np.linalg.norm(T - _rank1_stack(Q, k) @ lam) / norm_t)


def _als(T: np.ndarray, Q: np.ndarray, opts: CPOptions, max_iter: int):
    k = T.ndim
    norm_t = np.linalg.norm(T)
    Q = _sign_fix(Q / np.linalg.norm(Q, axis=0))
    Y = _contract(T, Q)
    lam = _refit_weights(Q, Y, k)
    err = _error(T, norm_t, Q, lam, k)
    best = (err, Q, lam)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        G = (Q.T @ Q) ** (k - 1)
        B = np.linalg.lstsq(G, Y.T, rcond=1e-13)[0].T
        norms = np.linalg.norm(B, axis=0)
        ok = norms > 1e-300
        Qn = Q.copy()
        Qn[:, ok] = B[:, ok] / norms[ok]
        Q = _sign_fix(Qn)
        Y = _contract(T, Q)
        lam = _refit_weights(Q, Y, k)
        prev = err
        err = _error(T, norm_t, Q, lam, k)
        if err < best[0]:
            best = (err, Q, lam)
        if err < 1e-14 or abs(prev - err) <= opts.tol * max(prev, 1e-300):
            converged = True
            break
    return best, converged, it


class _CanonicalProblem:
    """Orbit-weighted residuals over canonical entries, for Gauss-Newton polishing.

    The model is ``sum_l s_l a_l^{(x) k}`` with fixed signs ``s_l`` and free,
    unnormalized vectors ``a_l``.  The squared residual norm equals the squared
    dense Frobenius error, with one residual per canonical index.
    """

    def __init__(self, t: SymTensor):
        idx = list(itertools.combinations_with_replacement(range(t.modes), t.order))
        self.mult = np.zeros((len(idx), t.modes), dtype=int)
        for c, i in enumerate(idx):
            for a in i:
                self.mult[c, a] += 1
        self.sqrt_orbit = np.sqrt([float(orbit_size(i)) for i in idx])
        self.target = self.sqrt_orbit * np.array([t[i] for i in idx])
        self.modes = t.modes
        self.order = t.order
        self._cols = np.arange(t.modes)[None, :]
        self._lowered = np.maximum(self.mult - 1, 0)

    def _factors(self, A):
        powers = A[None, :, :] ** np.arange(self.order + 1)[:, None, None]  # (k+1) x M x r
        return powers, powers[self.mult, self._cols]  # C x M x r

    def residual(self, x, signs):
        A = x.reshape(self.modes, -1)
        _, F = self._factors(A)
        res = self.sqrt_orbit * (F.prod(axis=1) @ signs) - self.target
        return np.concatenate([res, np.zeros(max(0, x.size - res.size))])

    def jacobian(self, x, signs):
        A = x.reshape(self.modes, -1)
        powers, F = self._factors(A)
        C = len(self.target)
        ones = np.ones_like(F[:, :1])
        before = np.cumprod(np.concatenate([ones, F[:, :-1]], axis=1), axis=1)
        after = np.cumprod(np.concatenate([ones, F[:, :0:-1]], axis=1), axis=1)[:, ::-1]
        J = before * after * self.mult[:, :, None] * powers[self._lowered, self._cols] * signs
        J = self.sqrt_orbit[:, None] * J.reshape(C, -1)
        return np.vstack([J, np.zeros((max(0, x.size - C), x.size))])

    def polish(self, Q, lam, max_evals):
        k = self.order
        signs = np.where(lam < 0, -1.0, 1.0) if k % 2 == 0 else np.ones_like(lam)
        scale = np.abs(lam) ** (1.0 / k)
        A0 = Q * (scale if k % 2 == 0 else np.sign(lam) * scale)
        out = least_squares(self.residual, A0.ravel(), jac=self.jacobian, args=(signs,), method="lm",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_evals * A0.size)
        A = out.x.reshape(A0.shape)
        norms = np.linalg.norm(A, axis=0)
        keep = norms > 0
        A[:, keep] /= norms[keep]
        A[:, ~keep] = Q[:, ~keep]
        w = np.where(keep, signs * norms**k, 0.0)
        return _sign_fix_weights(A, w, k)


def _sign_fix_weights(Q, lam, k):
    pivots = Q[np.argmax(np.abs(Q), axis=0), np.arange(Q.shape[1])]
    s = np.where(pivots < 0, -1.0, 1.0)
    return Q * s, lam * s**k


def cp_decompose(t: SymTensor, rank: int, seed: int = 0, opts: CPOptions | None = None,
                 init: CPFactors | None = None) -> CPFactors:
    """Best-of-restarts symmetric CP decomposition at a fixed rank.

    Restart ``i`` draws its initial factors from ``default_rng(seed + i)``.
    When ``init`` is given (for instance the best lower-rank solution) it is
    padded with random columns and tried as one extra candidate; because the
    best iterate of every run is kept, the result is never worse than ``init``.
    Non-convergence is reported through ``converged`` rather than raised.
    """
    opts = opts or CPOptions()
    if rank < 1:
        raise ValueError("rank must be >= 1")
    norm_t = frobenius(t)
    if norm_t == 0.0:
        raise ZeroReferenceError("cannot decompose a zero tensor")
    M, k = t.modes, t.order
    T = t.to_dense()

    if k == 1:
        rng = np.random.default_rng(seed)
        Q = rng.standard_normal((M, rank))
        Q[:, 0] = T
        Q = _sign_fix(Q / np.linalg.norm(Q, axis=0))
        lam = np.zeros(rank)
        lam[0] = T @ Q[:, 0]
        return CPFactors(k, M, lam, Q, True, 0)

    starts = []
    for i in range(opts.restarts):
        starts.append(np.random.default_rng(seed + i).standard_normal((M, rank)))
    if init is not None and init.rank <= rank:
        pad = np.random.default_rng(seed).standard_normal((M, rank - init.rank))
        starts.append(np.hstack([init.factors, pad]))

    problem = _CanonicalProblem(t) if opts.polish else None
    best = None
    for Q0 in starts:
        als_iter = min(opts.als_iter, opts.max_iter) if problem is not None else opts.max_iter
        (err, Q, lam), conv, its = _als(T, Q0, opts, als_iter)
        if problem is not None and err > 1e-13:
            Qp, lamp = problem.polish(Q, lam, opts.polish_evals)
            errp = _error(T, np.linalg.norm(T), Qp, lamp, k)
            if errp < err:
                err, Q, lam = errp, Qp, lamp
        if best is None or err < best[0]:
            best = (err, Q, lam, conv, its)
    err, Q, lam, conv, its = best
    Q = Q / np.linalg.norm(Q, axis=0)
    return CPFactors(k, M, lam, Q, conv, its)


def cp_reconstruct(f: CPFactors) -> SymTensor:
    dense = _rank1_stack(f.factors, f.order) @ f.weights
    return symmetrize(dense)


def cp_error(t: SymTensor, f: CPFactors) -> float:
    """Relative Frobenius error of ``f`` against ``t`` computed on dense arrays."""
    T = t.to_dense()
    return _error(T, np.linalg.norm(T), f.factors, f.weights, f.order)


def rank_for_error(t: SymTensor, eps_target: float, seed: int = 0,
                   opts: CPOptions | None = None, tensor_id=None) -> tuple[CPFactors, float]:
    """Smallest rank (searched 1, 2, ...) whose best-of-restarts error meets ``eps_target``."""
    if not 0.0 < eps_target:
        raise ValueError("eps_target must be positive")
    opts = opts or CPOptions()
    cap = opts.rank_cap or t.modes * t.order * 10
    best, best_err = None, np.inf
    for r in range(1, cap + 1):
        f = cp_decompose(t, r, seed, opts, init=best)
        err = cp_error(t, f)
        log.debug("rank %d: eps_F=%.3e", r, err)
        if err < best_err:
            best, best_err = f, err
        if err <= eps_target:
            return f, err
    raise RankSearchExhausted(
        f"rank cap {cap} reached with eps_F={best_err:.3e} > {eps_target:.3e}",
        best=best, best_error=best_err, tensor_id=tensor_id)


def rank_sweep(t: SymTensor, ranks, seed: int = 0, opts: CPOptions | None = None):
    """Best-of-restarts error for each rank, warm-starting from the previous rank.

    Returns a list of ``(rank, eps_F)``.  Every rank is seeded with the best
    lower-rank solution, and the reported error is the best over ranks <= r (a
    lower-rank solution padded with zero weights is a rank-r decomposition), so
    the curve is non-increasing even at the round-off floor.
    """
    ranks = sorted(ranks)
    out = []
    best, best_err = None, np.inf
    for r in range(1, ranks[-1] + 1):
        f = cp_decompose(t, r, seed, opts, init=best)
        err = cp_error(t, f)
        if err < best_err:
            best, best_err = f, err
        if r in ranks:
            out.append((r, best_err))
    return out


def tucker_decompose(t: SymTensor) -> TuckerFactors:
    """Full-rank HOSVD with one factor matrix shared by all modes."""
    if frobenius(t) == 0.0:
        raise ZeroReferenceError("cannot decompose a zero tensor")
    check_dense_size(t.modes, t.order)
    T = t.to_dense()
    U, _, _ = np.linalg.svd(T.reshape(t.modes, -1), full_matrices=True)
    U = _sign_fix(U)
    return TuckerFactors(t.order, t.modes, _multilinear(T, U, transpose=True), U)


def _multilinear(T: np.ndarray, U: np.ndarray, transpose: bool) -> np.ndarray:
    # transpose=True contracts a_m with U[a_m, b]; otherwise contracts b_m with U[a, b_m]
    axis = 0 if transpose else 1
    out = T
    for _ in range(T.ndim):
        out = np.tensordot(out, U, axes=([0], [axis]))
    return out


def tucker_reconstruct(f: TuckerFactors) -> SymTensor:
    core = np.asarray(f.core)
    if core.shape != (f.modes,) * f.order:
        raise ShapeError(f"core shape {core.shape} does not match ({f.modes},)*{f.order}")
    return symmetrize(_multilinear(core, f.factor, transpose=False))


def tucker_error(t: SymTensor, f: TuckerFactors) -> float:
    T = t.to_dense()
    return float(np.linalg.norm(T - _multilinear(f.core, f.factor, transpose=False)) / np.linalg.norm(T))


def core_coefficient_1norm(f: TuckerFactors) -> float:
    return float(np.abs(f.core).sum())


def core_nonzeros(f: TuckerFactors, rtol: float = 1e-12) -> list[tuple[tuple[int, ...], float]]:
    """Dense core entries above ``rtol * max|core|``, in row-major order."""
    core = np.asarray(f.core)
    if core.size == 0 or not np.any(core):
        return []
    mask = np.abs(core) > rtol * np.abs(core).max()
    return [(tuple(int(i) for i in idx), float(core[idx])) for idx in zip(*np.nonzero(mask))]
