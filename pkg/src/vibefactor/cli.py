"""Command line front end: ``estimate``, ``sweep-rank``, ``validate``, ``gen-vibronic``.

Exit codes: 0 success, 1 a validation check failed, 2 bad input (arguments,
model file, error budget), 3 a size guard was exceeded, 4 the CP rank search
hit its cap.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from math import comb
from pathlib import Path

import numpy as np

from . import budget, costmodel, io, oracle
from .decomp import CPOptions, rank_sweep
from .errors import (InvalidBudget, ModelFormatError, NoTensorsToDecompose,
                     RankSearchExhausted, SizeGuardExceeded)
from .hamiltonian import (HamiltonianModel, default_threads, factorize,
                          one_norm_unfactorized, synth_vibronic)
from .pauli import pauli_matrix, q_pauli_terms, unary_projector
from .symtensor import frobenius

log = logging.getLogger("vibefactor")

METHODS = ("unfactorized", "cp", "tucker")
CSV_COLUMNS = ("method", "lambda", "qubits", "S", "P", "total_T", "relative_cost")
SWEEP_COLUMNS = ("tensor_id", "order", "rank", "eps_F")
ORACLE_TOL = 1e-6
VALIDATE_CP_EPS = 1e-9  # validation checks the machinery, not the budget truncation
BLOCK_NORM_SLACK = 1e-10


class UsageError(Exception):
    pass


def _methods(text: str) -> list[str]:
    out = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in out if m not in METHODS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"methods must be a non-empty subset of {','.join(METHODS)}")
    return [m for m in METHODS if m in out]


def _rank_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("-")
    try:
        lo, hi = int(lo), int(hi or lo)
    except ValueError:
        raise argparse.ArgumentTypeError("rank range must look like 1-10") from None
    if not 1 <= lo <= hi:
        raise argparse.ArgumentTypeError("rank range needs 1 <= lo <= hi")
    return lo, hi


def _add_common(p: argparse.ArgumentParser, delta=True):
    p.add_argument("--model", required=True, type=Path, help="model JSON file")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=CPOptions.restarts)
    p.add_argument("--rank-cap", type=int, default=None)
    if delta:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--delta-e", type=float,
                       help="target energy error in Hartree (default 1.6e-3, chemical accuracy)")
        g.add_argument("--delta-e-rel", type=float,
                       help="target error as a fraction of the unfactorized 1-norm")
        p.add_argument("--norm-mode", choices=("coefficient", "encoding"), default="coefficient")
        p.add_argument("--methods", type=_methods, default=list(METHODS))
        p.add_argument("--rank", type=int, default=None,
                       help="fixed CP rank instead of the error-targeted search")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vibefactor", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="resource estimates and method comparison")
    _add_common(p)

    p = sub.add_parser("sweep-rank", help="CP error versus rank for every tensor")
    _add_common(p, delta=False)
    p.add_argument("--ranks", type=_rank_range, default=None,
                   help="rank range lo-hi (default 1 to the number of canonical entries)")

    p = sub.add_parser("validate", help="dense-oracle and formula checks")
    _add_common(p)

    p = sub.add_parser("gen-vibronic", help="add synthetic vibronic couplings to a model")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--orbitals", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="output file or directory")
    return parser


def _opts(args) -> CPOptions:
    if args.restarts < 1:
        raise UsageError("--restarts must be >= 1")
    return CPOptions(restarts=args.restarts, rank_cap=args.rank_cap)


def _delta_e(args, h: HamiltonianModel) -> float:
    if args.delta_e_rel is not None:
        return args.delta_e_rel * one_norm_unfactorized(h, args.norm_mode)
    return budget.CHEMICAL_ACCURACY if args.delta_e is None else args.delta_e


def _eps_target(h: HamiltonianModel, delta_e: float, norm_mode) -> float | None:
    """Per-tensor CP target from the budget of the unfactorized 1-norm."""
    b = budget.make_budget(one_norm_unfactorized(h, norm_mode), delta_e)
    try:
        return budget.per_tensor_eps_f(b, h.lv, h.lvc, h.orbitals)
    except NoTensorsToDecompose:
        return None


def _factorize(h, method, args, delta_e, eps=None):
    if method == "cp":
        if eps is None and not args.rank:
            eps = _eps_target(h, delta_e, args.norm_mode)
        if args.rank is None and eps is None:
            eps = 1.0  # nothing to decompose
        return factorize(h, "cp", eps, args.seed, _opts(args), rank=args.rank)
    return factorize(h, "tucker")


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def _report_json(report, h, f, args) -> dict:
    out = report.to_dict()
    out["input"] = {
        "model_sha256": io.model_digest(h),
        "method": report.method,
        "ranks": dict(f.ranks) if f else {},
        "eps_F": dict(f.eps) if f else {},
        "delta_e": report.delta_e,
        "delta_e_over_lambda": report.delta_e / report.lam,
        "norm_mode": report.norm_mode,
        "seed": args.seed,
    }
    return out


def comparison_rows(reports: dict) -> list[dict]:
    """CSV rows; ``relative_cost`` is empty when no unfactorized report is present."""
    ref = reports.get("unfactorized")
    rows = []
    for method in METHODS:
        r = reports.get(method)
        if r is None:
            continue
        rel = "" if ref is None else _fmt(r.total_t / ref.total_t)
        rows.append({"method": method, "lambda": _fmt(r.lam), "qubits": r.qubits,
                     "S": r.select_t, "P": r.prepare_t, "total_T": r.total_t,
                     "relative_cost": rel})
    return rows


def _write_csv(path: Path, columns, rows) -> str:
    buf = _stdio.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    path.write_text(buf.getvalue())
    return buf.getvalue()


def run_estimate(h: HamiltonianModel, args) -> tuple[dict, dict]:
    delta_e = _delta_e(args, h)
    reports, factored = {}, {}
    for method in args.methods:
        if method == "unfactorized":
            reports[method] = costmodel.estimate_unfactorized(h, delta_e, args.norm_mode)
            continue
        f = _factorize(h, method, args, delta_e)
        factored[method] = f
        reports[method] = costmodel.estimate(f, delta_e, args.norm_mode)
    return reports, factored


def cmd_estimate(args) -> int:
    h = io.load_model(args.model)
    reports, factored = run_estimate(h, args)
    args.out.mkdir(parents=True, exist_ok=True)
    for method, r in reports.items():
        data = _report_json(r, h, factored.get(method), args)
        (args.out / f"report_{method}.json").write_text(json.dumps(data, indent=1) + "\n")
    text = _write_csv(args.out / "comparison.csv", CSV_COLUMNS, comparison_rows(reports))
    sys.stdout.write(text)
    return 0


def sweep_rows(h: HamiltonianModel, args) -> list[dict]:
    opts = _opts(args)
    jobs = [(n, tid, t) for n, (tid, _, t) in enumerate(h.tensors()) if frobenius(t) > 0]

    def work(job):
        n, tid, t = job
        lo, hi = args.ranks or (1, comb(t.modes + t.order - 1, t.order))
        if args.rank_cap:
            hi = min(hi, args.rank_cap)
        curve = rank_sweep(t, range(lo, hi + 1), args.seed + 1000 * n, opts)
        return [{"tensor_id": tid, "order": t.order, "rank": r, "eps_F": repr(float(e))}
                for r, e in curve]

    threads = default_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(work, jobs))
    else:
        chunks = [work(j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


def cmd_sweep_rank(args) -> int:
    h = io.load_model(args.model)
    rows = sweep_rows(h, args)
    args.out.mkdir(parents=True, exist_ok=True)
    sys.stdout.write(_write_csv(args.out / "sweep.csv", SWEEP_COLUMNS, rows))
    return 0


def _check(name, status, detail="") -> dict:
    return {"check": name, "status": status, "detail": detail}


def _q_encoding_check(d: int) -> dict:
    worst = 0.0
    for dd in range(1, d + 1):
        P = unary_projector(dd)
        proj = P.T @ pauli_matrix(q_pauli_terms(dd), dd + 1) @ P
        worst = max(worst, float(np.abs(proj - oracle.dense_q(dd)).max()))
    return _check("q_encoding", "PASS" if worst <= 1e-12 else "FAIL", f"max |diff| {worst:.3e}")


def _budget_check(lam: float, delta_e: float) -> dict:
    b = budget.make_budget(lam, delta_e)
    eps = delta_e / (3 * math.sqrt(2) * lam)
    ok = (b.m == math.ceil(math.log2(math.sqrt(2) * math.pi * lam / (2 * delta_e)))
          and math.isclose(b.eps_prep, eps, rel_tol=1e-12)
          and budget.phase_rms_error(b) <= delta_e / lam)
    return _check("budget_identities", "PASS" if ok else "FAIL", f"m={b.m} eps_prep={b.eps_prep:.3e}")


def validate_checks(h: HamiltonianModel, args) -> list[dict]:
    checks = [_q_encoding_check(h.cutoff)]
    delta_e = _delta_e(args, h)
    checks.append(_budget_check(one_norm_unfactorized(h, args.norm_mode), delta_e))
    anharmonic = any(frobenius(t) > 0 for _, _, t in h.tensors())

    try:
        H = oracle.dense_hamiltonian(h)
    except SizeGuardExceeded as exc:
        H = None
        checks.append(_check("block_norm", "SKIPPED", str(exc)))
    if H is not None:
        ratio = oracle.spectral_norm(H) / one_norm_unfactorized(h, "encoding")
        status = "PASS" if ratio <= 1 + BLOCK_NORM_SLACK else "FAIL"
        checks.append(_check("block_norm", status, f"||H||/lambda_enc = {ratio:.6f}"))

    for method in (m for m in args.methods if m != "unfactorized"):
        name = f"oracle_{method}"
        if not anharmonic:
            checks.append(_check(name, "VACUOUS", "no anharmonic tensors"))
            continue
        f = _factorize(h, method, args, delta_e, VALIDATE_CP_EPS)
        if H is None:
            checks.append(_check(name, "SKIPPED", "dense size guard exceeded"))
        else:
            err = oracle.operator_relative_error(H, oracle.dense_from_factorized(f))
            status = "PASS" if err < ORACLE_TOL else "FAIL"
            checks.append(_check(name, status, f"relative Frobenius difference {err:.3e}"))
        try:
            r = costmodel.estimate(f, delta_e, args.norm_mode)
            checks.append(_check(f"cost_identity_{method}", "PASS" if r.identity_holds() else "FAIL",
                                 f"total_T={r.total_t}"))
        except SizeGuardExceeded as exc:
            checks.append(_check(f"cost_identity_{method}", "SKIPPED", str(exc)))

    if "unfactorized" in args.methods:
        try:
            r = costmodel.estimate_unfactorized(h, delta_e, args.norm_mode)
            checks.append(_check("cost_identity_unfactorized",
                                 "PASS" if r.identity_holds() else "FAIL", f"total_T={r.total_t}"))
        except SizeGuardExceeded as exc:
            checks.append(_check("cost_identity_unfactorized", "SKIPPED", str(exc)))
    return checks


def cmd_validate(args) -> int:
    h = io.load_model(args.model)
    checks = validate_checks(h, args)
    failed = any(c["status"] == "FAIL" for c in checks)
    args.out.mkdir(parents=True, exist_ok=True)
    summary = {"model_sha256": io.model_digest(h), "ok": not failed, "checks": checks}
    (args.out / "validate.json").write_text(json.dumps(summary, indent=1) + "\n")
    for c in checks:
        print(f"{c['check']:<28} {c['status']:<8} {c['detail']}")
    return 1 if failed else 0


def cmd_gen_vibronic(args) -> int:
    h = io.load_model(args.model)
    if not h.vib:
        raise UsageError("model has no vibrational tensors to derive couplings from")
    if args.orbitals < 1:
        raise UsageError("--orbitals must be >= 1")
    out = args.out
    if out.is_dir() or not out.suffix:
        out.mkdir(parents=True, exist_ok=True)
        out = out / f"{args.model.stem}_N{args.orbitals}_seed{args.seed}.json"
    io.save_model(synth_vibronic(h, args.orbitals, args.seed), out)
    print(out)
    return 0


COMMANDS = {"estimate": cmd_estimate, "sweep-rank": cmd_sweep_rank,
            "validate": cmd_validate, "gen-vibronic": cmd_gen_vibronic}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ModelFormatError, InvalidBudget, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SizeGuardExceeded as exc:
        print(f"size guard: {exc}", file=sys.stderr)
        return 3
    except RankSearchExhausted as exc:
        print(f"rank search failed for {exc.tensor_id}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
