"""Totally symmetric coefficient tensors with canonical sparse storage.

Only index tuples sorted in non-decreasing order are stored.  Every dense
quantity (norms, reconstruction, dense export) weights a stored entry by the
size of its permutation orbit, ``k! / prod(m_j!)``.
"""

from __future__ import annotations

import math
from collections import Counter
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidIndex, ShapeError, SizeGuardExceeded, ZeroReferenceError

DENSE_GUARD = 10**6
DROP_TOL = 1e-14


def canonical_index(idx: Iterable[int], modes: int | None = None) -> tuple[int, ...]:
    """Sorted copy of ``idx``; raises InvalidIndex for entries outside 0..modes-1."""
    out = tuple(sorted(int(a) for a in idx))
    if out and out[0] < 0:
        raise InvalidIndex(f"negative mode index in {tuple(idx)}")
    if modes is not None and out and out[-1] >= modes:
        raise InvalidIndex(f"mode index {out[-1]} out of range for {modes} modes")
    return out


def orbit_size(idx: tuple[int, ...]) -> int:
    """Number of distinct permutations of ``idx``."""
    n = math.factorial(len(idx))
    for m in Counter(idx).values():
        n //= math.factorial(m)
    return n


def check_dense_size(modes: int, order: int) -> None:
    if modes**order > DENSE_GUARD:
        raise SizeGuardExceeded(f"dense size {modes}^{order} exceeds {DENSE_GUARD}")


@lru_cache(maxsize=64)
def _dense_codes(order: int, modes: int) -> np.ndarray:
    # canonical code (base-`modes` integer of the sorted tuple) of every dense flat index
    grid = np.indices((modes,) * order).reshape(order, -1).T
    grid = np.sort(grid, axis=1)
    weights = modes ** np.arange(order - 1, -1, -1)
    codes = grid @ weights
    codes.setflags(write=False)
    return codes


def _encode(idx: tuple[int, ...], modes: int) -> int:
    code = 0
    for a in idx:
        code = code * modes + a
    return code


def _decode(code: int, order: int, modes: int) -> tuple[int, ...]:
    out = []
    for _ in range(order):
        code, a = divmod(code, modes)
        out.append(a)
    return tuple(reversed(out))


class SymTensor:
    """Symmetric order-``k`` tensor over ``modes`` vibrational modes.

    ``entries`` maps index tuples to real values.  Unsorted tuples are
    canonicalized; two keys that collapse onto the same canonical tuple raise
    ``ValueError``.  Instances are immutable.
    """

    __slots__ = ("order", "modes", "_entries")

    def __init__(self, order: int, modes: int, entries: Mapping[Iterable[int], float] | None = None):
        if order < 1 or modes < 1:
            raise ShapeError(f"order and modes must be >= 1, got {order}, {modes}")
        store: dict[tuple[int, ...], float] = {}
        for idx, val in (entries or {}).items():
            idx = tuple(idx)
            if len(idx) != order:
                raise ShapeError(f"index {idx} does not have order {order}")
            key = canonical_index(idx, modes)
            if key in store:
                raise ValueError(f"duplicate canonical index {key}")
            val = float(val)
            if val != 0.0:
                store[key] = val
        self.order = order
        self.modes = modes
        self._entries = MappingProxyType(dict(sorted(store.items())))

    @classmethod
    def zeros(cls, order: int, modes: int) -> "SymTensor":
        return cls(order, modes)

    @property
    def entries(self) -> Mapping[tuple[int, ...], float]:
        return self._entries

    @property
    def nnz(self) -> int:
        return len(self._entries)

    def __getitem__(self, idx: Iterable[int]) -> float:
        return self._entries.get(canonical_index(idx, self.modes), 0.0)

    def __repr__(self) -> str:
        return f"SymTensor(order={self.order}, modes={self.modes}, nnz={self.nnz})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymTensor):
            return NotImplemented
        return (self.order, self.modes, dict(self._entries)) == (
            other.order, other.modes, dict(other._entries))

    def _check_compatible(self, other: "SymTensor") -> None:
        if (self.order, self.modes) != (other.order, other.modes):
            raise ShapeError(
                f"incompatible tensors: ({self.order}, {self.modes}) vs ({other.order}, {other.modes})")

    def __add__(self, other: "SymTensor") -> "SymTensor":
        self._check_compatible(other)
        out = dict(self._entries)
        for k, v in other._entries.items():
            out[k] = out.get(k, 0.0) + v
        return SymTensor(self.order, self.modes, out)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        return self + other * -1.0

    def __mul__(self, c: float) -> "SymTensor":
        return SymTensor(self.order, self.modes, {k: c * v for k, v in self._entries.items()})

    __rmul__ = __mul__

    def permute_modes(self, perm: Iterable[int]) -> "SymTensor":
        """Relabel mode ``a`` as ``perm[a]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.modes)):
            raise ValueError("perm must be a permutation of range(modes)")
        return SymTensor(self.order, self.modes,
                         {tuple(perm[a] for a in k): v for k, v in self._entries.items()})

    def to_dense(self) -> np.ndarray:
        check_dense_size(self.modes, self.order)
        codes = _dense_codes(self.order, self.modes)
        lookup = np.zeros(self.modes**self.order)
        for k, v in self._entries.items():
            lookup[_encode(k, self.modes)] = v
        return lookup[codes].reshape((self.modes,) * self.order)

    def orbit_weighted(self) -> tuple[np.ndarray, np.ndarray]:
        """Canonical values and their orbit sizes as parallel arrays."""
        vals = np.fromiter(self._entries.values(), dtype=float, count=self.nnz)
        orbits = np.fromiter((orbit_size(k) for k in self._entries), dtype=float, count=self.nnz)
        return vals, orbits


def symmetrize(dense) -> SymTensor:
    """Average a hypercubic array over all index permutations."""
    dense = np.asarray(dense, dtype=float)
    order = dense.ndim
    if order < 1 or len(set(dense.shape)) != 1:
        raise ShapeError(f"expected a hypercubic array, got shape {dense.shape}")
    modes = dense.shape[0]
    check_dense_size(modes, order)
    codes = _dense_codes(order, modes)
    sums = np.bincount(codes, weights=dense.ravel(), minlength=modes**order)
    counts = np.bincount(codes, minlength=modes**order)
    entries = {}
    for code in np.flatnonzero(counts):
        val = sums[code] / counts[code]
        if abs(val) >= DROP_TOL:
            entries[_decode(int(code), order, modes)] = val
    return SymTensor(order, modes, entries)


def frobenius(t: SymTensor) -> float:
    if t.nnz == 0:
        return 0.0
    vals, orbits = t.orbit_weighted()
    return float(np.sqrt(np.sum(orbits * vals**2)))


def coefficient_1norm(t: SymTensor) -> float:
    if t.nnz == 0:
        return 0.0
    vals, orbits = t.orbit_weighted()
    return float(np.sum(orbits * np.abs(vals)))


def relative_error(t: SymTensor, approx: SymTensor) -> float:
    """Frobenius norm of ``t - approx`` relative to that of ``t``."""
    ref = frobenius(t)
    if ref == 0.0:
        raise ZeroReferenceError("relative error against a zero tensor")
    return frobenius(t - approx) / ref
