"""Acceptance criteria, one test per criterion.

Each test runs named registry checks through the same runner as ``xyzbethe
verify`` and records a PASS/FAIL line; the lines are printed together at the
end of the session by the hook in conftest.py.
"""

import subprocess
import sys
import time

import pytest

from xyzbethe import checks as registry
from xyzbethe.cli import DEFAULT_CONFIG, run_checks, validate_config

RESULTS: dict = {}


def _cfg(Ns):
    return validate_config({**DEFAULT_CONFIG, "N": list(Ns)})


def run_criterion(bounds, Ns=(2, 4)):
    """``bounds`` maps check names (without the .N suffix) to the criterion bound."""
    pool = {c.check_id: c for c in registry.build_checks(list(Ns))}
    chosen = []
    for name, bound in bounds.items():
        hits = [c for cid, c in pool.items() if cid == name or cid.rsplit(".N", 1)[0] == name]
        assert hits, f"no check named {name}"
        for c in hits:
            # the registry may be stricter than the criterion, never looser
            if c.compare == "le":
                assert c.tolerance <= bound, f"{c.check_id}: tolerance {c.tolerance} above {bound}"
            else:
                assert c.tolerance >= bound, f"{c.check_id}: floor {c.tolerance} below {bound}"
        chosen.extend(hits)
    t0 = time.perf_counter()
    records = run_checks(sorted(chosen, key=lambda c: c.check_id), _cfg(Ns))
    elapsed = time.perf_counter() - t0
    bad = [r for r in records if r["status"] != "pass"]
    return records, bad, elapsed


def report(number, title, ok, info):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}  ({info})"
    RESULTS[number] = line
    print(line)


def check_criterion(number, title, bounds, Ns=(2, 4), max_seconds=None):
    records, bad, elapsed = run_criterion(bounds, Ns)
    slow = max_seconds is not None and elapsed >= max_seconds
    info = f"{len(records)} checks, {elapsed:.2f} s"
    if bad:
        info += "; failing: " + ", ".join(
            f"{r['check_id']} ({r['status']}, residual {r['residual']}, {r['error'] or r['detail']})" for r in bad
        )
    if slow:
        info += f"; slower than {max_seconds} s"
    report(number, title, not bad and not slow, info)
    assert not bad, info
    assert not slow, info
    return records


def test_criterion_01_theta_identities():
    bounds = {name: 1e-11 for name in (
        "theta.shift", "theta.sum-product", "theta.product-split",
        "theta.double-angle", "theta.derivative-ratio",
    )}
    assert registry.THETA_POINTS == 100
    check_criterion(1, "theta identity suite", bounds, max_seconds=1.0)


def test_criterion_02_rtt():
    check_criterion(2, "RTT relation, N in {2, 4}", {"vertex.rtt": 1e-10}, max_seconds=10.0)


def test_criterion_03_hamiltonian():
    check_criterion(3, "Hamiltonian consistency and J_z at eta = 1/2",
                    {"vertex.hamiltonian": 1e-8, "vertex.free-fermion": 1e-12})


def test_criterion_04_vacuum_actions():
    recs = check_criterion(4, "gauge vacuum actions", {"gauge.vacuum-actions": 1e-10})
    for r in recs:
        assert len(r["detail"]["by_relation"]) == 6


def test_criterion_05_on_shell():
    recs = check_criterion(5, "on-shell roots and eigenvectors, N in {4, 6}", {
        "bethe.roots": 1e-9, "bethe.eigen": 1e-9, "bethe.eigen-zero": 1e-9,
    }, Ns=(4, 6))
    for r in recs:
        if r["check_id"].startswith("bethe.roots"):
            N = r["N"]
            assert r["detail"]["roots"] == N and r["detail"]["twin_pairs"] == N // 2


def test_criterion_06_balanced():
    check_criterion(6, "balanced scalar products vs brute force, N in {4, 6}", {
        "scalar.balanced-eps": 1e-8, "scalar.balanced-components": 1e-8,
    }, Ns=(4, 6))


def test_criterion_07_kappa_two_vanishing():
    check_criterion(7, "kappa = +-2 scalar products vanish, N in {4, 6}",
                    {"scalar.prop1": 1e-10}, Ns=(4, 6))


def test_criterion_08_imbalanced():
    check_criterion(8, "imbalanced scalar products, N in {4, 6}", {
        "scalar.plus1": 1e-8, "scalar.plus1-route": 1e-10, "scalar.minus1": 1e-7,
    }, Ns=(4, 6))


def test_criterion_09_cascade():
    check_criterion(9, "cascade systems at N = 4", {
        "cascade.sandwich": 1e-8, "cascade.inhomogeneous": 1e-7, "cascade.direct-expression": 1e-8,
    }, Ns=(4,))


def test_criterion_10_structured_matrices():
    recs = check_criterion(10, "structured-matrix suite, N in {4, 6}", {
        "cascade.omega-product": 1e-9,
        "cascade.hh-sum": 1e-10,
        "cascade.cauchy-inverse": 1e-9,
        "cascade.rank-one-trace": 1e-8,
        "cascade.rank-one-degenerate": 1e-6,
        "cascade.zero-eigenvectors": 1e-9,
        "cascade.contour-g": 1e-10,
    }, Ns=(4, 6))
    for r in recs:
        if r["check_id"].startswith("cascade.zero-eigenvectors"):
            assert r["detail"]["null_dim"] == [3]


def test_criterion_11_grading_and_selection():
    check_criterion(11, "U3 grading and selection rule, N in {2, 4, 6}", {
        "bethe.u3-grading": 1e-11, "scalar.selection-rule": 1e-11,
    }, Ns=(2, 4, 6))


def _verify(path):
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "xyzbethe.cli", "verify", "--out", str(path)],
        capture_output=True,
        text=True,
    )
    return proc, time.perf_counter() - t0


def test_criterion_12_full_verify(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    first, t1 = _verify(a)
    second, t2 = _verify(b)
    identical = a.read_bytes() == b.read_bytes()
    ok = first.returncode == 0 and second.returncode == 0 and identical and max(t1, t2) < 300
    info = f"{first.stderr.strip()}; {t1:.0f} s and {t2:.0f} s; byte-identical: {identical}"
    report(12, "full default verify, zero failures, reproducible", ok, info)
    assert ok, info
