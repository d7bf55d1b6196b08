"""Acceptance suite: one test and one printed PASS/FAIL line per criterion.

All comparisons are exact.  Criteria 1-8 run in-process once (module fixture) with
wall-clock timing; criterion 9 runs ``verify-all`` as a separate process and
compares its report byte for byte with the in-process run.
"""

from __future__ import annotations

import subprocess
import sys
import time

import pytest

from wallcross import cli, suite

SEED = suite.DEFAULT_SEED
# criterion number -> runtime limit in seconds (None: no stated limit)
RUNTIME_LIMITS = {1: 10, 2: None, 3: 300, 4: 60, 5: 30, 6: None, 7: None, 8: None}


@pytest.fixture(scope="module")
def results():
    out = {}
    for index in range(len(suite.CRITERIA)):
        start = time.perf_counter()
        name, report = suite.run_criterion(index, SEED)
        out[index + 1] = (name, report, time.perf_counter() - start)
    return out


def announce(capsys, number, ok, message):
    with capsys.disabled():
        print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'} {message}")


def evaluate(results, number, extra=lambda report: True):
    name, report, elapsed = results[number]
    limit = RUNTIME_LIMITS[number]
    ok = report.ok and extra(report) and (limit is None or elapsed < limit)
    bound = f" (limit {limit} s)" if limit else ""
    return ok, f"{name}: {report.compared} compared, {elapsed:.1f} s{bound}"


def check(capsys, results, number, extra=lambda report: True):
    ok, message = evaluate(results, number, extra)
    announce(capsys, number, ok, message)
    assert ok, results[number][1].to_json()


def test_criterion_1_mu_aggregation(capsys, results):
    check(capsys, results, 1, lambda r: r.details["max_degree"] >= 5)


def test_criterion_2_single_entry(capsys, results):
    check(capsys, results, 2, lambda r: r.compared == sum(m.r for m in suite.MODEL_MATRIX))


def test_criterion_3_wallcrossing(capsys, results):
    def extra(report):
        runs = report.details["runs"]
        return (
            len(runs) == 8
            and all(run["ok"] for run in runs)
            and report.details["negative_control"]["detected"]
            and report.details["bounds"] == {"t": 6, "u": 2, "psi": 3}
        )

    check(capsys, results, 3, extra)


def test_criterion_4_dilaton(capsys, results):
    def extra(report):
        runs = {run["genus"]: run for run in report.details["runs"]}
        return (
            set(runs) == {1, 2, 3}
            and all(run["resummation_identity"] for run in runs.values())
            and runs[1]["log_identity"]
        )

    check(capsys, results, 4, extra)


def test_criterion_5_residue(capsys, results):
    check(capsys, results, 5, lambda r: r.compared >= 500)


def test_criterion_6_genus_zero(capsys, results):
    check(capsys, results, 6, lambda r: len(r.details["runs"]) == sum(m.r <= 5 for m in suite.MODEL_MATRIX))


def test_criterion_7_scalar(capsys, results):
    check(capsys, results, 7, lambda r: r.compared >= 200 and r.details["k_equals_r_cases"] > 0)


def test_criterion_8_twisted(capsys, results):
    check(capsys, results, 8)


def test_criterion_9_determinism(capsys, results):
    in_process = [(name, report) for name, report, _ in results.values()]
    expected, status = cli.format_verify_all(in_process, SEED, "text")
    proc = subprocess.run(
        [sys.executable, "-m", "wallcross.cli", "verify-all", "--seed", str(SEED)],
        capture_output=True, check=False,
    )
    ok = proc.returncode == status == 0 and proc.stdout == (expected + "\n").encode()
    announce(capsys, 9, ok, f"verify-all report identical across two runs ({len(proc.stdout)} bytes)")
    assert ok, proc.stdout.decode()
