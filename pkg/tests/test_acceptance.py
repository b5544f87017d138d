"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criteria 3 to 10 read the report of the bundled desk-scale suite, produced
once per session through the command line; criterion 11 runs it again and
compares bytes.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from ou_brunn import bodies as cb
from ou_brunn.concavity import check_midpoint_logconcavity
from ou_brunn.config import parse_body
from ou_brunn.grid import GridFunction, build_grid, converged_eigenvalue, solve_body
from ou_brunn.shooting import solve_halfline, solve_interval, solve_radial

pytestmark = pytest.mark.slow


def _verdict(verdicts, n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    verdicts[n] = line
    print(line)
    assert ok, line


def _run_suite(out):
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "ou_brunn.cli", "suite", "--out", str(out)],
                          capture_output=True, text=True)
    return proc, time.perf_counter() - start


@pytest.fixture(scope="session")
def suite(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite_a")
    proc, elapsed = _run_suite(out)
    report = json.loads((out / "report.json").read_text())
    return {"proc": proc, "elapsed": elapsed, "out": out, "report": report["experiments"]}


def _cases(suite, name, **match):
    cases = suite["report"][name]["cases"]
    return [c for c in cases if all(c.get(k) == v for k, v in match.items())]


def _bodies(suite, name, pairs):
    lit = suite["report"][name]["config"]["bodies"]
    return [parse_body(lit[n]) for p in pairs for n in p]


def _clean(cases):
    return all(c.get("pass") is True and "error" not in c for c in cases)


def test_criterion_01_oracle_equivalence(verdicts):
    start = time.perf_counter()
    disk = solve_body(cb.Ball(1.0), 0.02).lam
    disk_ref = solve_radial(2, 1.0).lam
    _, disk_bud = converged_eigenvalue(cb.Ball(1.0), [0.08, 0.04, 0.02])
    line = solve_body(cb.Interval(-1.0, 1.0), 0.005).lam
    line_ref = solve_interval(-1.0, 1.0).lam
    _, line_bud = converged_eigenvalue(cb.Interval(-1.0, 1.0), [0.02, 0.01, 0.005])
    elapsed = time.perf_counter() - start
    rel2, rel1 = abs(disk - disk_ref) / disk_ref, abs(line - line_ref) / line_ref
    ok = rel2 <= 1e-2 and disk_bud.order >= 1 and rel1 <= 1e-3 and abs(line_bud.order - 2) <= 0.2 and elapsed <= 120
    _verdict(verdicts, 1, ok, f"disk rel {rel2:.2e} order {disk_bud.order:.2f}; "
                              f"interval rel {rel1:.2e} order {line_bud.order:.2f}; {elapsed:.1f}s")


def test_criterion_02_halfline_anchor(verdicts):
    start = time.perf_counter()
    lam = solve_halfline(0.0, T=8).lam
    elapsed = time.perf_counter() - start
    ok = abs(lam - 1.0) <= 1e-6 and elapsed <= 10
    _verdict(verdicts, 2, ok, f"lambda {lam:.10f}, |err| {abs(lam - 1):.1e}; {elapsed:.1f}s")


def test_criterion_03_brunn_minkowski(suite, verdicts):
    cases = _cases(suite, "bm-sweep")
    pairs = {tuple(c["bodies"]) for c in cases}
    ts = {c["t"] for c in cases}
    kinds = {type(b).__name__ for b in _bodies(suite, "bm-sweep", pairs)}
    ok = (len(pairs) >= 20 and {0.25, 0.5, 0.75} <= ts and len(cases) == len(pairs) * len(ts)
          and _clean(cases) and {"Interval", "Ball", "Polygon", "SmoothBody"} <= kinds
          and suite["elapsed"] <= 600)
    worst = min(c["margin"] for c in cases)
    _verdict(verdicts, 3, ok, f"{len(pairs)} pairs x {len(ts)} t, {len(cases)} cases, "
                              f"worst margin {worst:.2e}; suite {suite['elapsed']:.0f}s")


def test_criterion_04_sup_convolution(suite, verdicts):
    chain = _cases(suite, "supconv", kind="chain")
    oracle = _cases(suite, "supconv", kind="oracle")
    bm_pairs = {tuple(c["bodies"]) for c in _cases(suite, "bm-sweep")}
    same = {tuple(c["bodies"]) for c in chain} == bm_pairs
    coarse = all(c["nodes"][0] == 41 for c in oracle if c["bodies"][0] == "i1")
    worst_rel = max(c["rel_diff"] for c in oracle)
    ok = same and _clean(chain) and _clean(oracle) and coarse and worst_rel <= 1e-3 and len(oracle) > 0
    _verdict(verdicts, 4, ok, f"{len(chain)} chain cases, worst margin {min(c['margin'] for c in chain):.2e}; "
                              f"{len(oracle)} oracle cases, worst rel {worst_rel:.1e}")


def test_criterion_05_log_concavity(suite, verdicts):
    cases = _cases(suite, "logconc")
    h_ok = all(c["tol"] == pytest.approx(10 * c["h"] ** 2) and c["tau"] == 0.01 for c in cases)
    violations = sum(c["midpoint_violations"] for c in cases)
    grid = build_grid(cb.Interval(-2.0, 2.0), 0.02)
    x = grid.points[:, 0]
    bimodal = GridFunction(grid, np.exp(-((x - 1) ** 2) / 0.1) + np.exp(-((x + 1) ** 2) / 0.1))
    flagged = check_midpoint_logconcavity(bimodal, tau=0.01, tol=10 * 0.02**2).violations
    ok = len(cases) > 0 and violations == 0 and h_ok and flagged > 0 and all("error" not in c for c in cases)
    _verdict(verdicts, 5, ok, f"{len(cases)} bodies, {violations} violations; bimodal flagged {flagged} pairs")


def test_criterion_06_strong_log_concavity(suite, verdicts):
    cases = [c for c in _cases(suite, "logconc") if c.get("symmetric_smooth")]
    names = {c["body"] for c in cases}
    lit = suite["report"]["logconc"]["config"]["bodies"]
    kinds = {lit[n].split("{")[0] for n in names}
    strong = min(c["strong_margin"] for c in cases)
    lap = max(c["laplacian_max"] for c in cases)
    radial = max(c["radial_max"] - c["tol"] for c in cases)
    ok = {"interval", "ball", "smooth"} <= kinds and strong > 0 and lap < 0 and radial <= 0 and _clean(cases)
    _verdict(verdicts, 6, ok, f"{sorted(names)}: min eig {strong:.3g}, max lap {lap:.3g}, "
                              f"max <x,grad u> - tol {radial:.2e}")


def test_criterion_07_faber_krahn(suite, verdicts):
    cases = _cases(suite, "faber-krahn")
    dims = {c.get("dim") for c in cases}
    ok = _clean(cases) and dims == {1, 2}
    _verdict(verdicts, 7, ok, f"{len(cases)} bodies (dims {sorted(dims)}), "
                              f"worst margin {min(c['margin'] for c in cases):.3g}")


def test_criterion_08_urysohn(suite, verdicts):
    balls = _cases(suite, "urysohn", kind="ball")
    rots = _cases(suite, "urysohn", kind="rotations")
    ms_ok = all([s["m"] for s in c["sequence"]] == [1, 2, 4, 8, 16] for c in rots)
    square = [c for c in rots if suite["report"]["urysohn"]["config"]["bodies"][c["body"]].startswith("box{1")]
    ratio = max((c["hausdorff_ratio"] for c in square), default=math.inf)
    ok = _clean(balls) and _clean(rots) and ms_ok and ratio < 0.25 and len(balls) > 0
    _verdict(verdicts, 8, ok, f"{len(balls)} ball comparisons, worst margin {min(c['margin'] for c in balls):.3g}; "
                              f"rotation tracks {len(rots)}, square Hausdorff ratio {ratio:.3f}")


def test_criterion_09_equality_probes(suite, verdicts):
    cases = _cases(suite, "equality-probe")
    identical = [c for c in cases if c.get("rule") == "identical"]
    distinct = [c for c in cases if c.get("rule") == "distinct"]
    translate = [c for c in cases if c.get("kind") == "translate"]
    diag_ok = all(c["asserted"] is False and math.isfinite(c["deficit"]) for c in translate)
    ok = (identical and distinct and translate and _clean(identical) and _clean(distinct) and diag_ok
          and all("error" not in c for c in cases))
    _verdict(verdicts, 9, bool(ok), f"{len(identical)} identical, {len(distinct)} distinct "
                                    f"(min deficit/eps {min(c['deficit'] / c['eps'] for c in distinct):.1f}), "
                                    f"translate deficits {[round(c['deficit'], 5) for c in translate]}")


def test_criterion_10_matrix_lemma(suite, verdicts):
    hand = _cases(suite, "matrix-lemma", kind="hand")[0]
    equal = _cases(suite, "matrix-lemma", kind="equal")[0]
    rand = _cases(suite, "matrix-lemma", kind="random")[0]
    ok = (hand["lhs"] == pytest.approx(2.6, abs=1e-12) and hand["rhs"] == pytest.approx(3.5, abs=1e-12)
          and equal["max_rel_gap"] <= 1e-12 and rand["samples"] == 1000 and rand["max_lhs_minus_rhs"] <= 1e-12
          and suite["report"]["matrix-lemma"]["config"]["params"]["max_dim"] <= 5)
    _verdict(verdicts, 10, ok, f"hand ({hand['lhs']:.12g}, {hand['rhs']:.12g}); equality gap {equal['max_rel_gap']:.1e}; "
                               f"{rand['samples']} random, max lhs-rhs {rand['max_lhs_minus_rhs']:.2e}")


def test_criterion_11_determinism(suite, verdicts, tmp_path):
    proc, elapsed = _run_suite(tmp_path)
    first = (suite["out"] / "report.json").read_bytes()
    second = (tmp_path / "report.json").read_bytes()
    ok = suite["proc"].returncode == 0 and proc.returncode == 0 and first == second
    _verdict(verdicts, 11, ok, f"exit codes {suite['proc'].returncode}/{proc.returncode}, "
                               f"report.json {len(first)} bytes, identical {first == second}")
