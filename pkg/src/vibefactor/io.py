"""JSON file formats for tensors, factors and models.

Floats are written with Python's shortest round-tripping repr, so factors
survive a save/load cycle bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .decomp import CPFactors, TuckerFactors
from .errors import ModelFormatError
from .hamiltonian import FactorizedModel, HamiltonianModel
from .symtensor import SymTensor


def tensor_to_dict(t: SymTensor) -> dict:
    return {"order": t.order, "modes": t.modes,
            "entries": [{"idx": list(idx), "val": v} for idx, v in t.entries.items()]}


def tensor_from_dict(data: dict, where: str = "tensor") -> SymTensor:
    try:
        order, modes = int(data["order"]), int(data["modes"])
        entries = {}
        for n, e in enumerate(data["entries"]):
            idx = tuple(sorted(int(i) for i in e["idx"]))
            if idx in entries:
                raise ModelFormatError(f"{where}.entries[{n}]: duplicate canonical index {list(idx)}")
            entries[idx] = float(e["val"])
        return SymTensor(order, modes, entries)
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ModelFormatError(f"{where}: {exc}") from exc


def save_tensor(t: SymTensor, path) -> None:
    Path(path).write_text(json.dumps(tensor_to_dict(t), indent=1))


def load_tensor(path) -> SymTensor:
    return tensor_from_dict(_read_json(path), str(path))


def factors_to_dict(f) -> dict:
    if isinstance(f, CPFactors):
        return {"kind": "cp", "order": f.order, "modes": f.modes,
                "weights": f.weights.tolist(), "factors": f.factors.tolist(),
                "converged": f.converged, "iterations": f.iterations}
    return {"kind": "tucker", "order": f.order, "modes": f.modes,
            "core": np.asarray(f.core).tolist(), "factors": f.factor.tolist()}


def factors_from_dict(data: dict, where: str = "factors"):
    try:
        kind = data["kind"]
        order, modes = int(data["order"]), int(data["modes"])
        Q = np.array(data["factors"], dtype=float)
        if kind == "cp":
            w = np.array(data["weights"], dtype=float)
            if Q.shape != (modes, len(w)):
                raise ModelFormatError(f"{where}: factors shape {Q.shape} vs {len(w)} weights")
            return CPFactors(order, modes, w, Q, bool(data.get("converged", True)),
                             int(data.get("iterations", 0)))
        if kind == "tucker":
            core = np.array(data["core"], dtype=float)
            if core.shape != (modes,) * order or Q.shape != (modes, modes):
                raise ModelFormatError(f"{where}: core/factor shapes do not match order and modes")
            return TuckerFactors(order, modes, core, Q)
        raise ModelFormatError(f"{where}: unknown kind {kind!r}")
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{where}: {exc}") from exc


def save_factors(f, path) -> None:
    Path(path).write_text(json.dumps(factors_to_dict(f)))


def load_factors(path):
    return factors_from_dict(_read_json(path), str(path))


def model_to_dict(h: HamiltonianModel) -> dict:
    return {
        "modes": h.modes, "orbitals": h.orbitals, "cutoff_d": h.cutoff,
        "omega": list(h.omega), "Lv": h.lv, "Lvc": h.lvc,
        "vib": [{"order": k, "tensor": tensor_to_dict(h.vib[k])} for k in sorted(h.vib)],
        "vibc": [{"order": k, "i": i, "j": j, "tensor": tensor_to_dict(h.vibc[(k, i, j)])}
                 for (k, i, j) in sorted(h.vibc)],
    }


def model_from_dict(data: dict, base_dir=None, where: str = "model") -> HamiltonianModel:
    base_dir = Path(base_dir or ".")
    try:
        vib = {}
        for n, item in enumerate(data.get("vib", [])):
            loc = f"{where}.vib[{n}]"
            if "tensorfile" in item:
                t = tensor_from_dict(_read_json(base_dir / item["tensorfile"]), loc)
            else:
                t = tensor_from_dict(item["tensor"], loc)
            k = int(item["order"])
            if k in vib:
                raise ModelFormatError(f"{loc}: order {k} given twice")
            vib[k] = t
        vibc = {}
        for n, item in enumerate(data.get("vibc", [])):
            loc = f"{where}.vibc[{n}]"
            key = (int(item["order"]), int(item["i"]), int(item["j"]))
            if key in vibc:
                raise ModelFormatError(f"{loc}: tensor {key} given twice")
            vibc[key] = tensor_from_dict(item["tensor"], loc)
        return HamiltonianModel(int(data["modes"]), int(data.get("orbitals", 0)),
                                int(data["cutoff_d"]), tuple(data["omega"]),
                                int(data["Lv"]), int(data.get("Lvc", 0)), vib, vibc)
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{where}: {exc}") from exc


def save_model(h: HamiltonianModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(h), indent=1) + "\n")


def load_model(path) -> HamiltonianModel:
    path = Path(path)
    return model_from_dict(_read_json(path), path.parent, str(path))


def model_digest(h: HamiltonianModel) -> str:
    """sha256 of the canonical JSON form of ``h``."""
    blob = json.dumps(model_to_dict(h), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def factorized_to_dict(f: FactorizedModel) -> dict:
    return {"method": f.method, "model_sha256": model_digest(f.base),
            "factors": {tid: factors_to_dict(fac) for tid, _, fac in f.factors()},
            "ranks": dict(f.ranks), "eps": dict(f.eps)}


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ModelFormatError(f"{path}: {exc.strerror}") from exc
