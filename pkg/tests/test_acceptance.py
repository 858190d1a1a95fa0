"""Acceptance criteria 1-8, each at its stated tolerance and runtime budget.

Run under pytest, or directly with ``python3 tests/test_acceptance.py`` for
the one-line-per-criterion summary only.
"""

import json
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import pytest

from wdwkit import checks

CRITERIA = {
    1: ("Clifford suite", 1.0, ["clifford.anticommutator.relations", "clifford.hermiticity.products"]),
    2: ("CAR suite", 10.0, ["grassmann.car.relations", "grassmann.adjoint.operators",
                            "grassmann.real_imag.identity"]),
    3: ("Hamiltonian suite", None, ["hamiltonian.legendre.gravity", "hamiltonian.legendre.yang_mills",
                                    "hamiltonian.legendre.higgs", "hamiltonian.dirac.hermitian",
                                    "hamiltonian.dirac.fock_self_adjoint", "hamiltonian.dirac.mass_spectrum",
                                    "hamiltonian.dirac.rep_independence"]),
    4: ("Geometry suite", None, ["geometry.dewitt.signature", "geometry.fiber.lorentzian",
                                 "geometry.dewitt.trace_direction", "geometry.spin_connection.constant",
                                 "geometry.spin_connection.symbolic_family"]),
    5: ("Green/symplectic suite", 120.0, ["hyperbolic.green.inverse", "hyperbolic.green.support",
                                          "hyperbolic.green.skew", "hyperbolic.pairing.identity",
                                          "hyperbolic.pairing.row_independence", "hyperbolic.green.null_space"]),
    6: ("CCR suite", 180.0, ["ccr.commutator.central", "ccr.field.range_null", "ccr.weyl.commutation",
                             "ccr.surface_independence"]),
    7: ("Haag-Kastler suite", 180.0, ["localnets.isotony", "localnets.causality.spacelike",
                                      "localnets.second_causality", "localnets.primitivity"]),
}
FULL_SUITE_BUDGET = 600.0


def _line(n, name, ok, elapsed, detail=""):
    status = "PASS" if ok else "FAIL"
    return f"criterion {n} [{status}] {name}: {elapsed:.2f} s{detail}"


def evaluate(n):
    name, budget, ids = CRITERIA[n]
    t0 = time.perf_counter()
    records = [checks.run_check(cid) for cid in ids]
    elapsed = time.perf_counter() - t0
    failed = [r["id"] for r in records if not r["pass"]]
    ok = not failed and (budget is None or elapsed < budget)
    detail = f" (budget {budget:.0f} s)" if budget else ""
    if failed:
        detail += f" failing: {', '.join(failed)}"
    return ok, _line(n, name, ok, elapsed, detail), records


def _run_full_suite(out_dir, parallel=False):
    cmd = [sys.executable, "-m", "wdwkit", "run", "full-suite.json", "--out", str(out_dir)]
    if parallel:
        cmd.append("--parallel")
    t0 = time.perf_counter()
    proc = subprocess.run(cmd, capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    report = json.loads((Path(out_dir) / "report.json").read_text()) if proc.returncode in (0, 1) else None
    return proc, elapsed, report


def evaluate_full_suite():
    with tempfile.TemporaryDirectory() as tmp:
        p1, e1, r1 = _run_full_suite(Path(tmp) / "a")
        p2, e2, r2 = _run_full_suite(Path(tmp) / "b", parallel=True)
    same = r1 is not None and r2 is not None and r1["body"] == r2["body"]
    ok = p1.returncode == 0 and p2.returncode == 0 and same and e1 < FULL_SUITE_BUDGET
    detail = f" (exit {p1.returncode}/{p2.returncode}, identical bodies: {same}, budget {FULL_SUITE_BUDGET:.0f} s)"
    return ok, _line(8, "full-suite scenario", ok, e1, detail)


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    ok, line, records = evaluate(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, [r for r in records if not r["pass"]]


def test_criterion_8_full_suite(capsys):
    ok, line = evaluate_full_suite()
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = []
    for n in sorted(CRITERIA):
        ok, line, _ = evaluate(n)
        print(line, flush=True)
        results.append(ok)
    ok, line = evaluate_full_suite()
    print(line)
    results.append(ok)
    sys.exit(0 if all(results) else 1)
