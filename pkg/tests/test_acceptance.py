"""Acceptance criteria 1-9, each at its stated tolerance.

Every test prints one ``[criterion N] PASS|FAIL ...`` line before asserting,
so the summary is visible in ``pytest -v`` output whether or not it passes.
"""

import math
import random
import time

import numpy as np
import pytest

from toric_coherent.chain_complex import (
    CLASS_LABELS,
    TRIVIAL,
    Chain,
    LatticeGeometry,
    boundary,
)
from toric_coherent.channel import (
    average_infidelity,
    channel_report,
    delta_lb,
    nbar,
    syndrome_probability,
)
from toric_coherent.cli import main as cli_main
from toric_coherent.decoder import (
    averaged_success_exact,
    averaged_success_sampled,
    success_probability,
    twirl_ratio,
    twirled_success_probability,
)
from toric_coherent.enumerator import (
    all_syndrome_tables,
    class_weight_enumerator,
    poly_D,
    poly_O,
    poly_Z,
    ratio_series,
    signed_enumerator,
    syndrome_table,
)
from toric_coherent.oracle import oracle_compare

NORMALIZATION_GRID = (0.01, 0.05, 0.1, 0.2, 0.4)
SUCCESS_GRID = np.linspace(0.01, 0.3, 30)


@pytest.fixture
def verdict(capsys):
    def report(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, f"criterion {number}: {detail}"

    return report


def _tables(L):
    return [t for _, t in all_syndrome_tables(LatticeGeometry(L))]


def test_criterion_1_oracle_equivalence(verdict):
    problems = []
    thetas = (0.05, 0.1, 0.2, 0.4)
    g2 = LatticeGeometry(2)
    worst2 = 0.0
    for theta in thetas:
        start = time.perf_counter()
        r = oracle_compare(g2, theta, 1e-12)
        elapsed = time.perf_counter() - start
        worst2 = max(worst2, max(q.max_scaled for q in r.quantities.values()))
        if not r.passed:
            problems.append(f"L=2 theta={theta}: {[q.name for q in r.failures()]}")
        if elapsed >= 1.0:
            problems.append(f"L=2 theta={theta} took {elapsed:.2f}s")
    g3 = LatticeGeometry(3)
    worst3 = 0.0
    start = time.perf_counter()
    for theta in thetas:
        r = oracle_compare(g3, theta, 1e-10)
        worst3 = max(worst3, max(q.max_scaled for q in r.quantities.values()))
        if not r.passed:
            problems.append(f"L=3 theta={theta}: {[q.name for q in r.failures()]}")
    elapsed3 = time.perf_counter() - start
    if elapsed3 >= 120:
        problems.append(f"L=3 took {elapsed3:.1f}s")
    verdict(1, not problems,
            f"max deviation L=2 {worst2:.2e} (tol 1e-12), L=3 {worst3:.2e} (tol 1e-10), "
            f"L=3 time {elapsed3:.1f}s {problems}")


def test_criterion_2_normalization(verdict):
    worst = 0.0
    for L in (2, 3):
        tables = _tables(L)
        for theta in NORMALIZATION_GRID:
            pr = [syndrome_probability(t, theta) for t in tables]
            g = [nbar(t, TRIVIAL, TRIVIAL, theta).real if p > 0 else 0.0
                 for t, p in zip(tables, pr)]
            worst = max(worst, abs(math.fsum(pr) - 1),
                        abs(math.fsum(p * x for p, x in zip(pr, g)) - 1))
    verdict(2, worst <= 1e-10, f"max |sum - 1| = {worst:.2e} (tol 1e-10)")


def _identities_hold(e):
    s = signed_enumerator(e)
    r = ratio_series(e, 1)
    return (poly_Z(e) == poly_D(e) + poly_O(e) and poly_Z(e) == s * s
            and r[0] == e.d0 - 1 and r[1] == -2 * e.degeneracy(1))


def test_criterion_3_polynomial_identities(verdict):
    bad = []
    checked = 0
    for L in (2, 3):
        for t in _tables(L):
            for e in t:
                checked += 1
                if not _identities_hold(e):
                    bad.append((L, e.syndrome, str(e.label)))
    for L in (4, 5):
        g = LatticeGeometry(L)
        rng = random.Random(1000 + L)
        for _ in range(200):
            s = boundary(g, Chain(rng.getrandbits(g.num_edges), g.num_edges))
            for e in syndrome_table(g, s):
                checked += 1
                if not _identities_hold(e):
                    bad.append((L, e.syndrome, str(e.label)))
    verdict(3, not bad, f"{checked} enumerators checked, {len(bad)} violations")


def test_criterion_4_trivial_class_values(verdict):
    details = []
    ok = True
    for L in (3, 4, 5):
        g = LatticeGeometry(L)
        e = class_weight_enumerator(g, g.empty_syndrome(), TRIVIAL)
        n_edges = g.num_edges
        r = ratio_series(e, 2)
        good = (e.l_min == 0 and e.degeneracy(0) == 1 and e.degeneracy(1) == 0
                and e.degeneracy(2) == n_edges // 2 and r == [0, 0, n_edges])
        ok &= good
        details.append(f"L={L}: d={list(e.degeneracies[:3])} series={[str(c) for c in r]}")
    verdict(4, ok, "; ".join(details))


def test_criterion_5_l5_defect_pairs(verdict):
    g = LatticeGeometry(5)
    n_edges = g.num_edges
    start = time.perf_counter()
    cases = {
        "diagonal": (g.syndrome_at([(0, 0), (1, 1)]), [2, 4, n_edges - 4], [1, -8, 2 * n_edges - 4]),
        "straight": (g.syndrome_at([(0, 0), (0, 2)]), [1, 6, n_edges // 2 - 2], [0, -12, n_edges + 26]),
    }
    ok = True
    details = []
    for name, (s, d_expected, r_expected) in cases.items():
        t = syndrome_table(g, s)
        e = t[t.minimal_label()]
        d = [e.degeneracy(n) for n in range(3)]
        r = ratio_series(e, 2)
        match = d == d_expected and r == r_expected
        ok &= match
        details.append(f"{name}: l_min={e.l_min} d={d} (expected {d_expected}) "
                       f"series={[str(c) for c in r]} (expected {r_expected})")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    verdict(5, ok, "; ".join(details) + f"; {elapsed:.1f}s")


def test_criterion_6_coherent_not_above_twirled(verdict):
    violations = 0
    ratio_violations = 0
    worst_gap = 0.0
    worst_ratio = math.inf
    example = None
    for L in (2, 3):
        for t in _tables(L):
            for theta in SUCCESS_GRID:
                coh = success_probability(t, theta)
                tw = twirled_success_probability(t, theta)
                if coh > tw:
                    violations += 1
                    if coh - tw > worst_gap:
                        worst_gap = coh - tw
                        example = (L, t.syndrome.hex(), round(float(theta), 3))
                ratio = twirl_ratio(t, theta)
                worst_ratio = min(worst_ratio, ratio)
                if ratio < 1 - 1e-12:
                    ratio_violations += 1
    ok = violations == 0 and ratio_violations == 0
    verdict(6, ok, f"{violations} (S, theta) pairs with coherent > twirled, worst gap {worst_gap:.3g} "
                   f"at (L, S, theta)={example}; min ratio {worst_ratio:.6f}, "
                   f"{ratio_violations} below 1-1e-12")


def test_criterion_7_off_diagonal_scaling(verdict):
    thetas = np.geomspace(0.02, 0.1, 9)
    ok = True
    details = []
    for L in (2, 3):
        tables = _tables(L)
        reports = [channel_report(tables, t) for t in thetas]
        total = [math.fsum(r.averaged_abs_nbar[k] for k in CLASS_LABELS[1:]) for r in reports]
        slope = float(np.polyfit(np.log(thetas), np.log(total), 1)[0])
        per_class = {}
        for k in CLASS_LABELS[1:]:
            ys = [r.averaged_abs_nbar[k] for r in reports]
            per_class[str(k)] = (round(float(np.polyfit(np.log(thetas), np.log(ys), 1)[0]), 3)
                                 if min(ys) > 0 else "identically 0")
        ok &= abs(slope - L) <= 0.3
        details.append(f"L={L}: slope {slope:.3f} (expected {L} +/- 0.3), per class {per_class}")
    verdict(7, ok, "; ".join(details))


def test_criterion_8_infidelity_and_bound(verdict):
    problems = []
    for theta in np.linspace(-1.5, 1.5, 61):
        if abs(average_infidelity(theta) - (1 - math.cos(2 * theta)) / 3) > 1e-15:
            problems.append(f"r({theta})")
    quarter = average_infidelity(math.pi / 4)
    if abs(quarter - 1 / 3) > 1e-15:
        problems.append(f"r(pi/4)={quarter!r}")
    for L in (2, 3):
        tables = _tables(L)
        if delta_lb(tables, 0.0) != 0:
            problems.append(f"delta_lb(L={L}, 0) != 0")
        for theta in list(np.linspace(0, 0.6, 31)) + list(NORMALIZATION_GRID):
            d = delta_lb(tables, theta)
            if not 0 <= d <= 1:
                problems.append(f"delta_lb(L={L}, {theta})={d}")
    verdict(8, not problems, f"r(pi/4)={quarter!r} (|r - 1/3| = {abs(quarter - 1/3):.1e}); "
                             f"problems: {problems}")


def test_criterion_9_sampled_estimator(verdict, tmp_path, capsys):
    g = LatticeGeometry(3)
    tables = _tables(3)
    ok = True
    details = []
    for theta in (0.05, 0.1):
        exact = averaged_success_exact(g, theta, tables=tables).coherent
        s = averaged_success_sampled(g, theta, 1000, seed=0)
        z = (s.estimate - exact) / s.stderr if s.stderr else math.inf
        ok &= abs(z) <= 4
        details.append(f"theta={theta}: estimate {s.estimate:.6f} +/- {s.stderr:.2e}, "
                       f"exact {exact:.6f}, z={z:.2f}")
    outputs = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        code = cli_main(["compare", "-L", "3", "--theta", "0.05,0.1", "--samples", "1000",
                         "--seed", "0", "--out-dir", str(out), "--format", "both",
                         "--no-figures"])
        outputs.append((code, (out / "compare_L3.csv").read_bytes(),
                        (out / "compare_L3.json").read_bytes()))
    capsys.readouterr()
    same = outputs[0] == outputs[1] and outputs[0][0] == 0
    ok &= same
    details.append(f"repeat run byte-identical: {same}")
    verdict(9, ok, "; ".join(details))
