"""Acceptance suite: one reported line per criterion.

Tolerances and runtime limits are the fixed targets; nothing here is tuned to
make a result pass.  Criteria whose stated outcome is mathematically
impossible or conditional are asserted as stated and marked as strict
expected failures, so a change that makes them pass is also flagged.
"""

import itertools
import math
import random
import time
from fractions import Fraction

import pytest
import sympy

from feyninv import ehl, graphpoly, ibp, invariant, seriesengine
from feyninv.polyring import Polynomial

from helpers import D4, report


def graph(nv, pairs):
    return graphpoly.FeynmanGraph(nv, tuple((u, v, "m") for u, v in pairs))


K4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
GRAPHS = [
    graph(2, [(0, 1)] * 2),
    graph(2, [(0, 1)] * 3),
    graph(2, [(0, 1)] * 6),
    graph(3, [(0, 1), (1, 2), (2, 0)]),
    graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
    graph(4, [(0, 1), (0, 1), (1, 2), (2, 3), (2, 3)]),
    graph(4, K4),
    graph(4, K4 + [(0, 1), (2, 3)]),
    graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)]),
    graph(5, list(itertools.combinations(range(5), 2))),
]


def _matrix_tree(g, x):
    L = sympy.zeros(g.vertex_count, g.vertex_count)
    for (u, v, _), xe in zip(g.lines, x):
        w = 1 / sympy.Rational(xe.numerator, xe.denominator)
        L[u, u] += w
        L[v, v] += w
        L[u, v] -= w
        L[v, u] -= w
    prod = sympy.prod([sympy.Rational(xe.numerator, xe.denominator) for xe in x])
    return prod * L[1:, 1:].det()


def _u_minor(g, nv, edges, rest):
    total = Polynomial.zero(g.line_variables)
    for t in graphpoly.spanning_trees_of(nv, edges):
        e = [0] * g.n_lines
        for i in rest:
            if i not in t:
                e[i] = 1
        total = total + Polynomial(g.line_variables, {tuple(e): 1})
    return total


def test_criterion_1_symanzik():
    t0 = time.perf_counter()
    sunset = str(graphpoly.symanzik_u(GRAPHS[1]))
    ok_sunset = sunset == "x1*x2 + x1*x3 + x2*x3"
    rng = random.Random(1)
    mt_ok = dc_ok = True
    for g in GRAPHS:
        U = graphpoly.symanzik_u(g)
        for _ in range(3):
            x = [Fraction(rng.randint(1, 30), rng.randint(1, 7)) for _ in range(g.n_lines)]
            val = U.evaluate(dict(zip(g.line_variables, x)))
            mt_ok &= sympy.Rational(val.numerator, val.denominator) == _matrix_tree(g, x)
        for e, (a, b, _) in enumerate(g.lines):
            rest = [i for i in range(g.n_lines) if i != e]
            deleted = [(g.lines[i][0], g.lines[i][1], i) for i in rest]
            keep = sorted({v for v in range(g.vertex_count) if v != b})
            idx = {v: k for k, v in enumerate(keep)}
            idx[b] = idx[a]
            contracted = [(idx[g.lines[i][0]], idx[g.lines[i][1]], i) for i in rest]
            rhs = _u_minor(g, len(keep), contracted, rest) + Polynomial.var(g.line_variables, g.line_variables[e]) * _u_minor(g, g.vertex_count, deleted, rest)
            dc_ok &= rhs == U
    dt = time.perf_counter() - t0
    ok = ok_sunset and mt_ok and dc_ok and dt < 5
    report(1, "PASS" if ok else "FAIL",
           f"U(sunset)={sunset}; matrix-tree {mt_ok}, deletion-contraction {dc_ok} on {len(GRAPHS)} graphs; {dt:.2f}s < 5s")
    assert ok


def test_criterion_2_banana_symmetry():
    t0 = time.perf_counter()
    orders = [graphpoly.line_symmetry_group(graphpoly.banana(l)).order for l in range(1, 6)]
    dt = time.perf_counter() - t0
    ok = orders == [math.factorial(l + 1) for l in range(1, 6)] and dt < 10
    report(2, "PASS" if ok else "FAIL", f"banana group orders l=1..5: {orders}; {dt:.2f}s < 10s")
    assert ok


def _d4_structure():
    G = invariant.d4_group()
    b = invariant.d4_basis()
    annihilated = all(ibp.dtilde(p).is_zero() for p in (b.a, b.v, b.j, b.h))
    four = ibp.dtilde(b.wtilde) == Polynomial.constant(D4, 4)
    return G.order, annihilated, four


def test_criterion_3_structure():
    order, annihilated, four = _d4_structure()
    assert order == 8 and annihilated and four


@pytest.mark.xfail(strict=True, reason="(a, v, j, h) are algebraically dependent: 16h = a^4 - 2a^2(a^2 - 2v) + j^2")
def test_criterion_3_jacobian():
    t0 = time.perf_counter()
    order, annihilated, four = _d4_structure()
    b = invariant.d4_basis()
    det = invariant.symbolic_determinant(invariant.jacobian_matrix([b.a, b.v, b.j, b.h]))
    relation = b.h.scale(16) == b.a ** 4 - (b.a ** 2 * (b.a ** 2 - b.v.scale(2))).scale(2) + b.j ** 2
    prim, _ = invariant.d4_hironaka_data()
    alt = invariant.jacobian_independent(prim)
    dt = time.perf_counter() - t0
    ok = order == 8 and annihilated and four and not det.is_zero() and dt < 1
    report(3, "PASS" if ok else "FAIL",
           f"closure order {order}, dtilde kills a,v,j,h: {annihilated}, dtilde(wtilde)=4: {four}; "
           f"Jacobian(a,v,j,h) is identically zero (syzygy 16h = a^4 - 2a^2(a^2-2v) + j^2 holds: {relation}); "
           f"(a, v, wtilde^2, h) independent: {alt}; {dt:.2f}s")
    assert ok


def test_criterion_4_theorem_machinery():
    t0 = time.perf_counter()
    G = invariant.d4_group()
    dims_ok = all(
        len(invariant.invariant_space(G, d, ch)) == invariant.molien_dimension(G, d, ch)
        for d in range(7) for ch in (None, "sign")
    )
    rng = random.Random(2024)
    trips = 0
    for i in range(100):
        ch = None if i % 2 == 0 else "sign"
        prim, sec = invariant.d4_hironaka_data("trivial" if ch is None else "sign")
        q = Polynomial.zero(D4)
        while q.is_zero():
            q = invariant.reynolds(G, invariant.random_polynomial(D4, rng.randint(1, 8), 6, rng), ch)
        dec = invariant.hironaka_rewrite(q, prim, sec, character=ch, group=G)
        trips += dec.reconstruct() == q
    dt = time.perf_counter() - t0
    ok = dims_ok and trips == 100 and dt < 60
    report(4, "PASS" if ok else "FAIL",
           f"Molien = invariant_space for d<=6, both characters: {dims_ok}; round-trips {trips}/100; {dt:.1f}s < 60s")
    assert ok


def test_criterion_5_ibp_identity():
    t0 = time.perf_counter()
    rng = random.Random(5)
    general = 0
    for _ in range(50):
        theta = invariant.random_polynomial(D4, 8, 8, rng)
        general += ibp.moment_integral(ibp.dtilde(theta), 4) == ibp.moment_integral(ibp.four_face_sum(theta), 3)
    G = invariant.d4_group()
    shortcut = 0
    for _ in range(50):
        q = invariant.reynolds(G, invariant.random_polynomial(D4, 8, 6, rng))
        exp = invariant.wtilde_expand(q)
        exp.odd.clear()
        beta = exp.reconstruct()
        theta = ibp.antiderivative(beta)
        lhs = ibp.moment_integral(beta, 4)
        shortcut += lhs == ibp.boundary_reduce(theta, True).moment() == ibp.boundary_reduce(theta, False).moment()
    dt = time.perf_counter() - t0
    ok = general == 50 and shortcut == 50 and dt < 30
    report(5, "PASS" if ok else "FAIL",
           f"four-face identity {general}/50, 4x single face for even invariants {shortcut}/50; {dt:.1f}s < 30s")
    assert ok


def test_criterion_6_2d_coefficients():
    t0 = time.perf_counter()
    exact = (ehl.c1_2d(1), ehl.c1_2d(2), ehl.c2_2d(1)) == (Fraction(1, 24), Fraction(1, 720), Fraction(1, 96))
    r200 = abs(ehl.ratio_2loop_1loop(200) / math.pi ** 2 - 1)
    r1000 = abs(ehl.ratio_2loop_1loop(1000) / math.pi ** 2 - 1)
    dt = time.perf_counter() - t0
    ok = exact and r200 < 0.01 and r1000 < 0.002 and dt < 10
    report(6, "PASS" if ok else "FAIL",
           f"exact values {exact}; ratio/pi^2 - 1 = {r200:.2e} (n=200), {r1000:.2e} (n=1000); {dt:.2f}s < 10s")
    assert ok


def _sig_digits(a, b):
    return -math.log10(abs(a - b) / abs(b)) if a != b else 17.0


def test_criterion_7_closed_vs_series():
    t0 = time.perf_counter()
    one = ehl.ehl_2d_1loop(50.0)
    s1, _ = ehl.optimal_truncation(ehl.series_terms_1loop(50, 400))
    two = ehl.ehl_2d_2loop_field(50.0)
    s2, _ = ehl.optimal_truncation(ehl.series_terms_2loop(50, 400))
    d1, d2 = _sig_digits(s1 / math.pi, one), _sig_digits(s2 / math.pi, two)
    dt = time.perf_counter() - t0
    ok = d1 >= 6 and d2 >= 6 and dt < 5
    report(7, "PASS" if ok else "FAIL", f"agreement at kappa=50: {d1:.1f} digits (1-loop), {d2:.1f} digits (2-loop); {dt:.2f}s < 5s")
    assert ok


def test_criterion_8_schwinger():
    t0 = time.perf_counter()
    s = ehl.schwinger_im(0.1, 50)
    tail = math.fsum(s.terms[1:]) + s.tail_bound
    rel = tail / s.terms[0]
    sums = [ehl.schwinger_im(0.1, k).value for k in range(1, 51)]
    monotone = all(b >= a for a, b in zip(sums, sums[1:]))
    dt = time.perf_counter() - t0
    ok = rel < 1e-13 and monotone and dt < 1
    report(8, "PASS" if ok else "FAIL", f"k>=2 tail / k=1 term = {rel:.2e} < 1e-13; monotone partial sums {monotone}; {dt:.3f}s < 1s")
    assert ok


def test_criterion_9_quadrature():
    t0 = time.perf_counter()
    rng = random.Random(9)
    worst = 0.0
    count = 0
    while count < 25:
        dims = 3 if count % 2 else 4
        ring = D4[:dims]
        p = invariant.random_polynomial(ring, 5, 5, rng)
        exact = ibp.moment_integral(p)
        if exact == 0:
            continue
        r = ehl.quad_nd(p.float_evaluator(), dims, tol=1e-10)
        worst = max(worst, abs(r.value - float(exact)) / abs(float(exact)))
        count += 1
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and dt < 120
    report(9, "PASS" if ok else "FAIL", f"25 integrands (dims 3, 4), worst relative error {worst:.1e} < 1e-8; {dt:.1f}s < 120s")
    assert ok


@pytest.fixture(scope="module")
def gamma_b_runs():
    r0 = ehl.gamma_b(0, identify=True)
    r1 = ehl.gamma_b(1, identify=True, raw0=r0.raw)
    return r0, r1


@pytest.mark.xfail(strict=True, reason="conditional on the assumed A block; the n=1 prediction misses")
def test_criterion_10_three_loop(gamma_b_runs):
    r0, r1 = gamma_b_runs
    ref0, ref1 = ehl.gamma_b_reference(0), ehl.gamma_b_reference(1)
    e0 = abs(r0.value - ref0) / ref0
    e1 = abs(r1.value - ref1) / ref1
    frac, k, _ = r0.normalization
    ok = e0 < 0.01 and e1 < 0.02
    ident = []
    for r in (r0, r1):
        ident.append(f"{r.identified[0]} + {r.identified[1]}*zeta3" if r.identified else "none")
    report(10, "PASS" if ok else "CONDITIONAL FAIL",
           f"factor ({frac})*pi^{k}; n=0 {r0.value:.5f} vs {ref0:.5f} ({e0:.1e}); "
           f"n=1 {r1.value:.5f} vs {ref1:.5f} ({e1:.1e}); raw pieces identify as {ident[0]} and {ident[1]}: "
           f"zeta3 parts match, rational parts differ by -1/3 and -1/30, so no single factor fits both; "
           f"A-assumption falsified, build gate unaffected")
    assert ok


def test_gamma_b_regression(gamma_b_runs):
    r0, r1 = gamma_b_runs
    assert r0.raw.value == pytest.approx(0.9369329138626, rel=1e-11)
    assert r1.raw.value == pytest.approx(-0.5711661423283, rel=1e-11)
    assert r0.identified == (Fraction(-7, 6), Fraction(7, 4))
    assert r1.identified == (Fraction(-247, 120), Fraction(35, 16))
    assert r0.raw.error_estimate < 1e-9 and r1.raw.error_estimate < 1e-9


def test_criterion_11_compression():
    coef = dict(seriesengine.build_integrand(2))[2]
    raw, red = coef.raw_term_count(), coef.invariant_term_count()
    ratio = raw / red
    ok = ratio > 1 and (raw, red) == (256, 39)
    report(11, "PASS" if ok else "FAIL", f"beta_2 numerator terms {raw} -> {red} in the invariant basis, ratio {ratio:.3f} (locked)")
    assert ok
