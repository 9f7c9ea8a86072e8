"""Regenerate the SYNTHETIC example models shipped in src/vibefactor/data."""

from pathlib import Path

import numpy as np

from vibefactor.hamiltonian import HamiltonianModel
from vibefactor.io import save_model
from vibefactor.symtensor import SymTensor, symmetrize

DATA = Path(__file__).resolve().parents[1] / "src" / "vibefactor" / "data"
WATER_OMEGA = (0.00727, 0.01744, 0.01791)  # Hartree, roughly the H2O normal modes


def toy_cubic() -> HamiltonianModel:
    v3 = SymTensor(3, 2, {(0, 0, 0): 4e-4, (0, 0, 1): -2.5e-4, (0, 1, 1): 1.5e-4, (1, 1, 1): -3e-4})
    return HamiltonianModel(2, 0, 2, WATER_OMEGA[:2], 3, 0, {3: v3})


def water_like(seed: int = 7) -> HamiltonianModel:
    # SYNTHETIC: cubic ~ 1e-3 Eh, quartic ~ 1e-4 Eh, i.e. 10^-(k-2) relative decay
    rng = np.random.default_rng(seed)
    vib = {k: symmetrize(rng.uniform(-1, 1, (3,) * k) * 10.0 ** -(k - 2) * 1e-3) for k in (3, 4)}
    return HamiltonianModel(3, 0, 4, WATER_OMEGA, 4, 0, vib)


def sparse_coupling(modes: int = 6) -> HamiltonianModel:
    # isolated q_a^2 q_b pair couplings with distinct strengths
    pairs = [(a, a + 1) for a in range(0, modes - 1, 2)]
    entries = {(a, a, b): 1e-3 * (1 + 0.37 * n) for n, (a, b) in enumerate(pairs)}
    omega = tuple(0.005 + 0.002 * a for a in range(modes))
    return HamiltonianModel(modes, 0, 2, omega, 3, 0, {3: SymTensor(3, modes, entries)})


def dense_coupling(modes: int = 6, seed: int = 3) -> HamiltonianModel:
    # two collective coordinates coupling every mode
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((modes, 2))
    V /= np.linalg.norm(V, axis=0)
    dense = sum(w * np.einsum("a,b,c->abc", v, v, v) for w, v in zip((1.2e-3, -0.7e-3), V.T))
    omega = tuple(0.005 + 0.002 * a for a in range(modes))
    return HamiltonianModel(modes, 0, 2, omega, 3, 0, {3: symmetrize(dense)})


if __name__ == "__main__":
    DATA.mkdir(exist_ok=True)
    for name, h in [("toy_cubic", toy_cubic()), ("water_like", water_like()),
                    ("sparse_coupling", sparse_coupling()), ("dense_coupling", dense_coupling())]:
        save_model(h, DATA / f"{name}.json")
        print(DATA / f"{name}.json")
