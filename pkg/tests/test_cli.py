import csv
import itertools
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from vibefactor import bundled_model_path
from vibefactor.cli import CSV_COLUMNS, SWEEP_COLUMNS, main
from vibefactor.hamiltonian import HamiltonianModel
from vibefactor.io import load_model, save_model
from vibefactor.symtensor import SymTensor, symmetrize

WATER = str(bundled_model_path("water_like"))
TOY = str(bundled_model_path("toy_cubic"))


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def write_model(tmp_path, h, name="m.json"):
    save_model(h, tmp_path / name)
    return str(tmp_path / name)


def test_estimate_three_methods(tmp_path, capsys):
    assert main(["estimate", "--model", WATER, "--delta-e-rel", "0.01", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "comparison.csv")
    assert [r["method"] for r in rows] == ["unfactorized", "cp", "tucker"]
    assert list(rows[0]) == list(CSV_COLUMNS) and rows[0]["relative_cost"] == "1.0"
    for r in rows:
        rep = json.loads((tmp_path / f"report_{r['method']}.json").read_text())
        steps = math.ceil(math.sqrt(2) * math.pi * rep["lam"] / rep["delta_e"])
        assert rep["total_t"] == steps * (rep["select_t"] + 2 * rep["prepare_t"]) == int(r["total_T"])
        assert rep["input"]["model_sha256"] and rep["input"]["norm_mode"] == "coefficient"
        assert rep["input"]["delta_e_over_lambda"] == pytest.approx(rep["delta_e"] / rep["lam"])
    assert "unfactorized" in capsys.readouterr().out


def test_estimate_single_method_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["estimate", "--model", TOY, "--methods", "cp", "--seed", "5", "--out", str(out)]) == 0
    rows = read_csv(a / "comparison.csv")
    assert len(rows) == 1 and rows[0]["method"] == "cp" and rows[0]["relative_cost"] == ""
    assert (a / "comparison.csv").read_bytes() == (b / "comparison.csv").read_bytes()
    assert not (a / "report_unfactorized.json").exists()


def test_estimate_encoding_mode(tmp_path):
    assert main(["estimate", "--model", TOY, "--norm-mode", "encoding", "--delta-e", "1e-3",
                 "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report_tucker.json").read_text())
    assert rep["norm_mode"] == "encoding" and rep["delta_e"] == 1e-3


def test_sweep_rank_exact_rank1(tmp_path):
    v = np.array([0.6, 0.8])
    h = HamiltonianModel(2, 0, 1, (1.0, 1.0), 3, 0, {3: symmetrize(np.einsum("a,b,c->abc", v, v, v))})
    assert main(["sweep-rank", "--model", write_model(tmp_path, h), "--ranks", "1-3", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert list(rows[0]) == list(SWEEP_COLUMNS)
    assert [int(r["rank"]) for r in rows] == [1, 2, 3]
    assert all(float(r["eps_F"]) < 1e-6 for r in rows)


def test_sweep_rank_monotone_on_bundled(tmp_path):
    assert main(["sweep-rank", "--model", TOY, "--out", str(tmp_path), "--restarts", "3"]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    for _, grp in itertools.groupby(rows, key=lambda r: r["tensor_id"]):
        errs = [float(r["eps_F"]) for r in grp]
        assert all(b <= a for a, b in zip(errs, errs[1:]))
    assert len(rows) == 4  # C(2 + 3 - 1, 3) ranks for the single cubic tensor


def test_validate_toy_passes(tmp_path, capsys):
    assert main(["validate", "--model", TOY, "--methods", "tucker", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "validate.json").read_text())
    assert summary["ok"] and {c["status"] for c in summary["checks"]} == {"PASS"}
    assert "oracle_tucker" in capsys.readouterr().out


def test_validate_truncated_cp_fails(tmp_path):
    c = 0.3 / math.sqrt(1 - 0.09)  # best rank-1 error of e0^3 + c e1^3 is c / sqrt(1 + c^2) = 0.3
    h = HamiltonianModel(2, 0, 2, (1.0, 1.0), 3, 0, {3: SymTensor(3, 2, {(0, 0, 0): 1.0, (1, 1, 1): c})})
    path = write_model(tmp_path, h)
    assert main(["validate", "--model", path, "--methods", "cp", "--rank", "1", "--out", str(tmp_path)]) == 1
    checks = {c["check"]: c for c in json.loads((tmp_path / "validate.json").read_text())["checks"]}
    assert checks["oracle_cp"]["status"] == "FAIL"
    assert main(["validate", "--model", path, "--methods", "cp", "--out", str(tmp_path)]) == 0


def test_validate_harmonic_only_is_vacuous(tmp_path):
    path = write_model(tmp_path, HamiltonianModel(2, 0, 2, (1.0, 2.0), 3, 0))
    assert main(["validate", "--model", path, "--delta-e-rel", "0.01", "--out", str(tmp_path)]) == 0
    checks = {c["check"]: c["status"] for c in json.loads((tmp_path / "validate.json").read_text())["checks"]}
    assert checks["oracle_cp"] == checks["oracle_tucker"] == "VACUOUS"
    assert checks["block_norm"] == "PASS"


def test_validate_skips_large_models(tmp_path):
    h = HamiltonianModel(7, 0, 3, (1.0,) * 7, 3, 0, {3: SymTensor(3, 7, {(0, 1, 2): 0.1})})
    assert main(["validate", "--model", write_model(tmp_path, h), "--methods", "tucker",
                 "--delta-e-rel", "0.01", "--out", str(tmp_path)]) == 0
    checks = {c["check"]: c["status"] for c in json.loads((tmp_path / "validate.json").read_text())["checks"]}
    assert checks["block_norm"] == checks["oracle_tucker"] == "SKIPPED"


def test_gen_vibronic(tmp_path):
    h = HamiltonianModel(2, 0, 1, (1.0, 1.0), 3, 0, {3: SymTensor(3, 2, {(0, 0, 1): 0.5})})
    src = write_model(tmp_path, h, "src.json")
    outs = [tmp_path / "a.json", tmp_path / "b.json"]
    for out in outs:
        assert main(["gen-vibronic", "--model", src, "--orbitals", "2", "--seed", "0", "--out", str(out)]) == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()
    g = load_model(outs[0])
    assert sorted(g.vibc) == [(3, 0, 0), (3, 0, 1), (3, 1, 1)]
    for (k, i, j), t in g.vibc.items():
        damp = 2.0**-k / max(1, abs(i - j))
        assert abs(t[(0, 0, 1)] - 0.5 * damp) <= damp / 40 + 1e-15
    assert main(["gen-vibronic", "--model", src, "--orbitals", "2", "--out", str(tmp_path / "dir")]) == 0
    assert (tmp_path / "dir" / "src_N2_seed0.json").exists()


def test_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["estimate", "--model", TOY, "--delta-e", "1", "--delta-e-rel", "0.1"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["estimate", "--model", TOY, "--methods", "dmrg"])
    assert info.value.code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["estimate", "--model", str(bad), "--out", str(tmp_path)]) == 2
    assert "bad.json: line 1" in capsys.readouterr().err
    entries = {idx: 1.0 for idx in itertools.combinations_with_replacement(range(20), 4)}
    huge = HamiltonianModel(20, 0, 8, (1.0,) * 20, 4, 0, {4: SymTensor(4, 20, entries)})
    assert main(["estimate", "--model", write_model(tmp_path, huge), "--methods", "unfactorized",
                 "--delta-e-rel", "0.01", "--out", str(tmp_path)]) == 3
    assert main(["estimate", "--model", TOY, "--delta-e", "5", "--out", str(tmp_path)]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "vibefactor.cli", "estimate", "--model", TOY,
                           "--methods", "unfactorized", "--out", str(tmp_path)],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith(",".join(CSV_COLUMNS))
