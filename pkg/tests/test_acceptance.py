"""End-to-end acceptance criteria, one test per criterion.

Each test prints a single ``[criterion N] PASS|FAIL`` line with its timing.
"""

import math
import random
import time
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from hypertrees import coupling_lab as lab
from hypertrees.determinantal import kalai_sum_verify, sample, sample_many
from hypertrees.homology import chain_check, hodge_check
from hypertrees.spectral import SweepConfig, default_m, garland_report, sweep
from hypertrees.trees_forests import (phi, phi_inverse, split_candidates, split_set_check, split_torsion_check,
                                      submain_bijection_check, tree_list)

pytestmark = pytest.mark.acceptance

BUDGET = 10 ** 7


@pytest.fixture
def announce(capsys):
    start = time.perf_counter()

    def emit(number, ok, detail=""):
        elapsed = time.perf_counter() - start
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s) {detail}")
        return elapsed

    return emit


def test_criterion_1_kalai_sum(announce):
    expected = {(4, 1): 16, (5, 1): 125, (6, 1): 1296, (5, 2): 125, (6, 2): 46656, (6, 3): 1296}
    values = {}
    ok = True
    for (n, k), v in expected.items():
        rep = kalai_sum_verify(n, k)
        values[(n, k)] = (rep.determinant, rep.cauchy_binet, rep.torsion_sum)
        ok &= rep.equal and rep.determinant == rep.cauchy_binet == rep.torsion_sum == v
    elapsed = announce(1, ok, " ".join(f"{n},{k}:{t[0]}" for (n, k), t in values.items()))
    assert ok
    assert elapsed < 120


def test_criterion_2_hodge(announce):
    bad = [(n, k) for n in range(1, 13) for k in range(n) if not (hodge_check(n, k) and chain_check(n, k))]
    elapsed = announce(2, not bad, f"failures={bad}")
    assert not bad
    assert elapsed < 10


def test_criterion_3_theorem1_laws(announce):
    sizes = [(3, 1), (4, 1), (4, 2), (5, 2)]
    reps = [lab.link_law_check(n, k) for n, k in sizes] + [lab.proj_law_check(n, k) for n, k in sizes]
    ok = all(r.verdict and r.max_discrepancy == 0 for r in reps)
    elapsed = announce(3, ok, f"{len(reps)} tables")
    assert ok
    assert elapsed < 60


def test_criterion_4_simplex_link(announce):
    rep = lab.simplex_link_law_check(5, 2, 2)
    ok = rep.verdict and rep.max_discrepancy == 0
    announce(4, ok, "(5,2,j=2)")
    assert ok


def test_criterion_5_identity_suites(announce):
    sizes = [(n, k) for n in range(3, 7) for k in range(1, min(3, n - 2) + 1)]
    failures = []
    for n, k in sizes:
        reps = [lab.incr_identity_check(n, k, BUDGET), lab.bridge_suite(n, k, budget=BUDGET),
                lab.split_product_check(n, k, BUDGET)]
        failures += [(r.identity, n, k) for r in reps if not r.verdict]
        if split_candidates(n, k) <= BUDGET:
            if not split_set_check(n, k, BUDGET).ok:
                failures.append(("split-set", n, k))
        pairs = len(tree_list(n, k, BUDGET)) * len(tree_list(n, k - 1, BUDGET))
        tors = split_torsion_check(n, k, None if pairs <= 10 ** 5 else 1000, budget=BUDGET)
        if not tors.ok:
            failures.append(("split-torsion", n, k))
    announce(5, not failures, f"sizes={sizes} failures={failures}")
    assert not failures


def test_criterion_6_bijection(announce):
    rep = submain_bijection_check(5, 2)
    trees = tree_list(5, 2)
    images = {phi(T) for T, _ in trees}
    roundtrip = all(phi_inverse(*phi(T)) == T for T, _ in trees)
    ok = rep.ok and rep.trees == rep.rooted == len(trees) == len(images) and roundtrip
    announce(6, ok, f"|T_5,2|={len(trees)} rooted={rep.rooted}")
    assert ok


def _chisquare(n, k, method, draws, seed):
    trees = tree_list(n, k)
    index = {T.kfaces: i for i, (T, _) in enumerate(trees)}
    counts = np.zeros(len(trees))
    for rec in sample_many(n, k, draws, seed, method):
        counts[index[rec.complex.kfaces]] += 1
    weights = np.array([t * t for _, t in trees], dtype=float)
    return chisquare(counts, weights / weights.sum() * draws).pvalue


def test_criterion_7_sampler(announce):
    pvals = {
        "exact(5,1)": _chisquare(5, 1, "exact", 10 ** 5, 101),
        "exact(5,2)": _chisquare(5, 2, "exact", 10 ** 5, 102),
        "ust(6,1)": _chisquare(6, 1, "ust", 10 ** 5, 103),
    }
    ok = all(p > 0.001 for p in pvals.values())
    elapsed = announce(7, ok, " ".join(f"{k}:p={v:.3f}" for k, v in pvals.items()))
    assert ok
    assert elapsed < 300


def test_criterion_8_negative_association(announce):
    reps = [lab.negative_association_check(5, 1), lab.negative_association_check(5, 2)]
    ok = all(r.verdict for r in reps)
    announce(8, ok, " ".join(f"max(joint-product)={r.max_discrepancy}" for r in reps))
    assert ok


def test_criterion_9_spectral(announce):
    k = 2
    details = []
    ok = True
    for n in (200, 500, 1000):
        m = default_m(n)
        rows = sweep(SweepConfig(ns=[n], k=k, runs=20, seed=0))
        lam = np.array([r["lambda2"] for r in rows])
        conn = np.mean([r["connected"] for r in rows])
        res = max(r["residual"] for r in rows)
        avg = np.mean([r["avg_deg"] for r in rows])
        deg_ok = abs(avg - (k + 1) * m) <= 0.1 * (k + 1) * m
        ok &= conn >= 0.95 and lam.mean() >= 0.5 and res <= 1e-9 and deg_ok
        details.append(f"n={n} m={m} conn={conn:.2f} lam2={lam.mean():.3f}(min {lam.min():.3f}) "
                       f"res={res:.1e} deg={avg:.1f}/{(k + 1) * m}")
    trend = [np.mean([r["lambda2"] for r in sweep(SweepConfig(ns=[200], k=k, ms=[m], runs=20, seed=0))])
             for m in (2, 4, 8, 16)]
    ok &= all(a < b for a, b in zip(trend, trend[1:]))
    details.append("trend m=2,4,8,16: " + ",".join(f"{x:.3f}" for x in trend))
    elapsed = announce(9, ok, "; ".join(details))
    assert ok
    assert elapsed < 600


def test_criterion_10_garland(announce):
    rnd = random.Random(2024)
    checked = violations = 0
    for i in range(100):
        n = rnd.randint(8, 25)
        copies = rnd.randint(2, 8)
        tops = set()
        for c in range(copies):
            tops |= sample(n, 2, i, "float", c).complex.kfaces
        rep = garland_report(sorted(tops))
        if rep.epsilon < 1:
            checked += 1
            violations += rep.actual < 1 - 2 * rep.epsilon - 1e-8
    ok = violations == 0
    announce(10, ok, f"instances with eps<1: {checked}/100, violations={violations}")
    assert ok
