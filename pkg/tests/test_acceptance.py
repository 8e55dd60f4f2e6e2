"""Acceptance criteria 1-8, each at its stated tolerance.

Every test records one line ``criterion N: PASS|FAIL ...``; the lines are
printed together in the terminal summary (see conftest.py) and also
immediately with ``pytest -s``.
"""

import time

import pytest

from ddr.geometry import flip_edge_orientation, load_cell
from ddr.shapes import shape_document
from ddr.verify import (
    VerifyConfig,
    dof_table,
    run_commutation,
    run_consistency,
    run_dof_table,
    run_exactness,
    run_surjectivity,
    tolerance_sanity,
)

from conftest import ACCEPTANCE, TEST_2D, TEST_3D

KS = range(4)
CFG = VerifyConfig(tol=1e-10, gram_tol=1e-11, n_samples=20, n_surjectivity=10)


def cell(name):
    return load_cell(shape_document(name))


def record(n, ok, t0, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.2f} s) {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return ok


def failed(results):
    return [f"{r.cell} k={r.k} {r.name} ({r.residual:.1e} {r.detail})".strip() for r in results if not r.passed]


def summary(results, bad):
    worst = max((r.residual for r in results if r.expected is None), default=0.0)
    msg = f"{len(results) - len(bad)}/{len(results)} checks, max residual {worst:.1e}"
    return msg + ("; first failure: " + bad[0] if bad else "")


def test_criterion_1_dof_tables():
    t0 = time.perf_counter()
    results = []
    for shape in ("triangle", "rectangle", "tetra", "hexa"):
        for k in KS:
            results += run_dof_table(cell(shape), k, shape)
    tri3 = dof_table("triangle", 3).counts["Xrot"]["total"]
    t2 = dof_table("tetra", 2).counts["Xgrad"]["total"]
    t1 = dof_table("tetra", 1).counts
    examples = (tri3, t2, t1["Xcurl"]["T"], t1["Xcurl"]["total"], t1["Xdiv"]["T"], t1["Xdiv"]["total"])
    bad = failed(results)
    elapsed = time.perf_counter() - t0
    ok = not bad and examples == (27, 32, 4, 28, 6, 18) and elapsed < 5.0
    assert record(1, ok, t0, summary(results, bad) + f"; examples {examples}"), bad or examples


def test_criterion_2_exactness_2d():
    t0 = time.perf_counter()
    results = [r for name in TEST_2D for k in KS for r in run_exactness(cell(name), k, CFG)]
    bad = failed(results)
    elapsed = time.perf_counter() - t0
    assert record(2, not bad and elapsed < 10.0, t0, summary(results, bad)), bad or elapsed


def test_criterion_3_exactness_3d():
    t0 = time.perf_counter()
    results, slowest = [], 0.0
    for name in TEST_3D:
        for k in KS:
            t = time.perf_counter()
            results += run_exactness(cell(name), k, CFG)
            slowest = max(slowest, time.perf_counter() - t)
    euler = [r for r in results if r.name == "3d:euler"]
    bad = failed(results)
    ok = not bad and len(euler) == len(TEST_3D) * len(KS) and slowest < 120.0
    assert record(3, ok, t0, summary(results, bad) + f"; slowest (cell, k) {slowest:.1f} s"), bad


def test_criterion_4_commutation():
    t0 = time.perf_counter()
    results = [r for name in TEST_2D + TEST_3D for k in KS for r in run_commutation(cell(name), k, 0, CFG)]
    bad = failed(results)
    assert record(4, not bad and results, t0, summary(results, bad)), bad


CONSISTENCY = ("trace", "ttrace", "Pgrad", "Pcurl", "Pdiv", "fullgrad", "fullcurl", "D(Iv)", "link", "uG(I1)",
               "uC(uG)", "D(uC)", "face restriction", "characterization", "dim ")


def test_criterion_5_consistency():
    t0 = time.perf_counter()
    results = [r for name in TEST_2D + TEST_3D for k in KS for r in run_consistency(cell(name), k, 0, CFG)
               if "product" not in r.name and "lift" not in r.name and "reject" not in r.name]
    covered = {key for key in CONSISTENCY if any(key in r.name for r in results)}
    bad = failed(results)
    ok = not bad and covered == set(CONSISTENCY)
    assert record(5, ok, t0, summary(results, bad)), bad or set(CONSISTENCY) - covered


def test_criterion_6_l2_products():
    t0 = time.perf_counter()
    results = [r for name in TEST_2D + TEST_3D for k in KS for r in run_consistency(cell(name), k, 0, CFG)
               if "product" in r.name]
    # three identities per 3D cell and two per polygon, each also symmetric and definite
    expected = len(KS) * (3 * 3 * len(TEST_3D) + 3 * 2 * len(TEST_2D))
    bad = failed(results)
    ok = not bad and len(results) == expected
    assert record(6, ok, t0, summary(results, bad)), bad or (len(results), expected)


def test_criterion_7_surjectivity():
    t0 = time.perf_counter()
    results = [r for name in TEST_2D + TEST_3D for k in KS for r in run_surjectivity(cell(name), k, 0, CFG)]
    lifts = [r for r in results if "lift" in r.name]
    negative = [r for r in results if "reject" in r.name]
    bad = failed(results)
    ok = not bad and lifts and negative and all(r.residual <= 1e-10 for r in lifts)
    assert record(7, ok, t0, summary(results, bad) + f"; {len(negative)} incompatible-data rejections"), bad


def test_criterion_8_negative_controls():
    t0 = time.perf_counter()
    corrupted = flip_edge_orientation(cell("cube"), 0, 0)
    results = []
    for k in (0, 1):
        results += run_exactness(corrupted, k, CFG) + run_commutation(corrupted, k, 0, CFG)
    caught = failed(results)
    sanity = tolerance_sanity(VerifyConfig(rank_tol=1e-2))
    reported = [r.name for r in sanity if not r.passed]
    ok = bool(caught) and reported == ["tolerance:rank_tol"]
    detail = f"corrupted cell fails {len(caught)}/{len(results)} checks; loose rank_tol reported as {reported}"
    assert record(8, ok, t0, detail)
