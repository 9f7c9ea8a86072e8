import json

import numpy as np
import pytest

from oracles import random_symmetric
from vibefactor import bundled_model_path
from vibefactor.decomp import cp_decompose, tucker_decompose
from vibefactor.errors import ModelFormatError
from vibefactor.hamiltonian import HamiltonianModel, synth_vibronic
from vibefactor.io import (factors_from_dict, factors_to_dict, load_factors, load_model,
                           load_tensor, model_digest, save_factors, save_model, save_tensor)
from vibefactor.symtensor import SymTensor, symmetrize


def test_tensor_roundtrip_and_canonicalization(tmp_path):
    p = tmp_path / "t.json"
    p.write_text(json.dumps({"order": 3, "modes": 3, "entries": [{"idx": [2, 0, 1], "val": 0.1},
                                                                 {"idx": [1, 1, 0], "val": -2}]}))
    t = load_tensor(p)
    assert dict(t.entries) == {(0, 1, 1): -2.0, (0, 1, 2): 0.1}
    save_tensor(t, tmp_path / "u.json")
    assert load_tensor(tmp_path / "u.json") == t


@pytest.mark.parametrize("payload", [
    {"order": 2, "modes": 2, "entries": [{"idx": [0, 1], "val": 1}, {"idx": [1, 0], "val": 2}]},
    {"order": 2, "modes": 2, "entries": [{"idx": [0, 2], "val": 1}]},
    {"order": 2, "modes": 2, "entries": [{"idx": [0], "val": 1}]},
    {"modes": 2, "entries": []},
])
def test_tensor_load_errors(tmp_path, payload):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(payload))
    with pytest.raises(ModelFormatError):
        load_tensor(p)


def test_bad_json_reports_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"order": 2,\n "modes": }')
    with pytest.raises(ModelFormatError, match="line 2"):
        load_model(p)


def test_factor_roundtrip_bit_exact(tmp_path):
    t = symmetrize(random_symmetric(3, 4, 0))
    for f in (cp_decompose(t, 3, seed=1), tucker_decompose(t)):
        save_factors(f, tmp_path / "f.json")
        g = load_factors(tmp_path / "f.json")
        for a, b in zip(factors_to_dict(f).items(), factors_to_dict(g).items()):
            assert a == b
        if hasattr(f, "weights"):
            assert np.array_equal(f.weights, g.weights) and np.array_equal(f.factors, g.factors)
        else:
            assert np.array_equal(f.core, g.core) and np.array_equal(f.factor, g.factor)
    with pytest.raises(ModelFormatError):
        factors_from_dict({"kind": "tt", "order": 3, "modes": 3, "factors": []})
    with pytest.raises(ModelFormatError):
        factors_from_dict({"kind": "cp", "order": 3, "modes": 3, "weights": [1.0], "factors": [[1.0]]})


def test_model_roundtrip(tmp_path):
    h = HamiltonianModel(2, 0, 2, (0.01, 0.02), 4, 0,
                         {3: symmetrize(random_symmetric(2, 3, 0)), 4: symmetrize(random_symmetric(2, 4, 1))})
    h = synth_vibronic(h, 2, 3)
    save_model(h, tmp_path / "m.json")
    g = load_model(tmp_path / "m.json")
    assert g == h and model_digest(g) == model_digest(h)
    assert model_digest(h.scaled(2.0)) != model_digest(h)


def test_model_with_tensorfile(tmp_path):
    save_tensor(SymTensor(3, 2, {(0, 0, 1): 0.5}), tmp_path / "v3.json")
    (tmp_path / "m.json").write_text(json.dumps({
        "modes": 2, "orbitals": 0, "cutoff_d": 1, "omega": [1, 2], "Lv": 3, "Lvc": 0,
        "vib": [{"order": 3, "tensorfile": "v3.json"}], "vibc": []}))
    h = load_model(tmp_path / "m.json")
    assert h.vib[3][(1, 0, 0)] == 0.5


def test_model_errors(tmp_path):
    base = {"modes": 2, "orbitals": 0, "cutoff_d": 1, "omega": [1, 2], "Lv": 3, "Lvc": 0, "vib": []}
    for bad in ({**base, "omega": [1]}, {k: v for k, v in base.items() if k != "modes"},
                {**base, "vib": [{"order": 3}]}):
        (tmp_path / "m.json").write_text(json.dumps(bad))
        with pytest.raises(ModelFormatError):
            load_model(tmp_path / "m.json")


@pytest.mark.parametrize("name", ["toy_cubic", "water_like", "sparse_coupling", "dense_coupling"])
def test_bundled_models_load(name):
    h = load_model(bundled_model_path(name))
    assert h.vib and all(w > 0 for w in h.omega)
