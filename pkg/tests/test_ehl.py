import math
import random
from fractions import Fraction
from math import comb, factorial

import mpmath
import numpy as np
import pytest
import scipy.special
import sympy

from feyninv import ehl
from feyninv.errors import ConvergenceError, PreconditionError
from feyninv.ibp import moment_integral
from feyninv.invariant import random_polynomial


def primes_upto(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, int(p ** 0.5) + 1))]


class TestBernoulli:
    def test_examples(self):
        assert ehl.bernoulli(0) == 1
        assert ehl.bernoulli(1) == Fraction(-1, 2)
        assert ehl.bernoulli(2) == Fraction(1, 6)
        assert ehl.bernoulli(4) == Fraction(-1, 30)
        assert ehl.bernoulli(12) == Fraction(-691, 2730)
        assert all(ehl.bernoulli(n) == 0 for n in range(3, 60, 2))

    def test_recurrence(self):
        B = [ehl.bernoulli(n) for n in range(61)]
        assert B == ehl.bernoulli_recurrence(60)
        for n in range(1, 61):
            assert sum(comb(n + 1, k) * B[k] for k in range(n + 1)) == 0

    def test_von_staudt_clausen(self):
        for k in range(1, 31):
            s = ehl.bernoulli(2 * k) + sum(Fraction(1, p) for p in primes_upto(2 * k + 1) if (2 * k) % (p - 1) == 0)
            assert s.denominator == 1

    def test_large_index_against_mpmath(self):
        for n in (100, 200):
            b = ehl.bernoulli(n)
            assert mpmath.mpf(b.numerator) / b.denominator == pytest.approx(mpmath.bernoulli(n), rel=1e-25)


class TestTwoDimensionalCoefficients:
    def test_examples(self):
        assert ehl.c1_2d(1) == Fraction(1, 24)
        assert ehl.c1_2d(2) == Fraction(1, 720)
        assert ehl.c2_2d(1) == Fraction(1, 96)
        assert ehl.c2_2d(2) == Fraction(1, 320)

    def test_signs(self):
        assert all(ehl.c1_2d(n) > 0 for n in range(1, 51))

    def test_ratio_limit(self):
        assert abs(ehl.ratio_2loop_1loop(200) / math.pi ** 2 - 1) < 0.01
        assert abs(ehl.ratio_2loop_1loop(1000) / math.pi ** 2 - 1) < 0.002

    def test_ratio_monotone_one_sided(self):
        r = [ehl.ratio_2loop_1loop(n) for n in range(5, 501)]
        assert all(b > a for a, b in zip(r, r[1:]))
        assert all(x < math.pi ** 2 for x in r)

    def test_domain(self):
        with pytest.raises(PreconditionError):
            ehl.c1_2d(0)


class TestSpecialFunctions:
    @pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.5, 3.0, 7.25, 19.9, 20.0, 55.0, 1e4])
    def test_against_scipy(self, x):
        assert ehl.log_gamma(x) == pytest.approx(scipy.special.gammaln(x), rel=1e-13, abs=1e-13)
        assert ehl.digamma(x) == pytest.approx(scipy.special.digamma(x), rel=1e-13, abs=1e-13)

    @pytest.mark.parametrize("h", [1e-4, 1e-5])
    def test_psi_tilde_derivative(self, h):
        k = 3.0
        fd = (ehl.psi_tilde(k + h) - ehl.psi_tilde(k - h)) / (2 * h)
        assert abs(fd - ehl.psi_tilde_prime(k)) < 1e-8

    def test_psi_tilde_prime_against_scipy(self):
        for x in (0.7, 3.0, 12.0, 40.0):
            want = scipy.special.polygamma(1, x) - 1 / x - 1 / (2 * x * x)
            assert ehl.psi_tilde_prime(x) == pytest.approx(want, rel=1e-10, abs=1e-15)

    def test_decay(self):
        assert abs(ehl.psi_tilde(1e6)) < 1e-12
        assert abs(ehl.ehl_2d_1loop(1e6)) < 1e-12


class TestClosedForms:
    def test_one_loop_vs_series(self):
        closed = ehl.ehl_2d_1loop(50.0)
        val, idx = ehl.optimal_truncation(ehl.series_terms_1loop(50, 400))
        assert idx > 10
        assert val / math.pi == pytest.approx(closed, rel=1e-8)

    def test_two_loop_vs_series(self):
        closed = ehl.ehl_2d_2loop_field(50.0)
        val, _ = ehl.optimal_truncation(ehl.series_terms_2loop(50, 400))
        assert val / math.pi == pytest.approx(closed, rel=1e-6)

    @pytest.mark.parametrize("kappa", [10, 20, 50])
    def test_remainders_bounded_by_next_term(self, kappa):
        closed = ehl.ehl_2d_1loop(float(kappa))
        terms = [float(t) / math.pi for t in ehl.series_terms_1loop(kappa, 30)]
        partial = 0.0
        for n, t in enumerate(terms[:-1]):
            partial += t
            nxt = terms[n + 1]
            if abs(nxt) < 1e-11 * abs(closed):
                break
            rem = closed - partial
            assert math.copysign(1, rem) == math.copysign(1, nxt)
            assert abs(rem) <= abs(nxt)

    def test_domain_errors(self):
        for f in (ehl.ehl_2d_1loop, ehl.ehl_2d_2loop_field, ehl.ehl_2d_2loop):
            with pytest.raises(PreconditionError):
                f(0.0)

    def test_lambda_block(self):
        k = 7.0
        diff = ehl.ehl_2d_2loop(k) - ehl.ehl_2d_2loop_field(k)
        assert diff == pytest.approx((ehl.EULER_GAMMA + 2) / (16 * math.pi))
        assert ehl.ehl_2d_2loop(k, lambda0_const=0.0) == ehl.ehl_2d_2loop_field(k)


class TestSchwinger:
    def test_k2_negligible(self):
        s = ehl.schwinger_im(0.1, 5)
        assert s.terms[1] / s.terms[0] < 1e-13
        assert s.terms[1] / s.terms[0] == pytest.approx(0.25 * math.exp(-10 * math.pi))

    def test_monotone(self):
        sums = [ehl.schwinger_im(1.0, k).value for k in range(1, 30)]
        assert all(b >= a for a, b in zip(sums, sums[1:]))

    def test_tail(self):
        beta = 1.0
        one = ehl.schwinger_im(beta, 1)
        hundred = ehl.schwinger_im(beta, 100)
        pref = beta ** 2 / (8 * math.pi ** 3)
        direct = math.fsum(pref * math.exp(-math.pi * k / beta) / k ** 2 for k in range(2, 101))
        assert abs(hundred.value - one.value - direct) < 1e-12
        assert hundred.value - one.value <= one.tail_bound

    def test_nonperturbative(self):
        assert ehl.schwinger_im(0.01).value < 1e-130
        with pytest.raises(PreconditionError):
            ehl.schwinger_im(0.0)


class TestFourDimensional:
    def test_classic_quartic(self):
        assert ehl.ehl_4d_1loop_coeffs(2, 0) == Fraction(1, 360)
        assert ehl.ehl_4d_1loop_coeffs(0, 2) == Fraction(1, 360)
        assert ehl.ehl_4d_1loop_coeffs(1, 1) == Fraction(1, 72)
        # 2 alpha^2 / 45 with alpha = 1/(4 pi), in units of 1/pi^2
        assert Fraction(2, 45) / 16 == Fraction(1, 360)

    def test_against_series_oracle(self):
        x, y = sympy.symbols("x y")
        N = 6
        fx = sympy.series(x * sympy.coth(x), x, 0, 2 * N + 1).removeO()
        fy = sympy.series(y * sympy.cot(y), y, 0, 2 * N + 1).removeO()
        for k in range(N + 1):
            for l in range(N + 1 - k):
                if k + l < 2:
                    continue
                d = fx.coeff(x, 2 * k) * fy.coeff(y, 2 * l)
                want = -sympy.Rational(1, 8) * d * sympy.gamma(2 * (k + l) - 2)
                got = ehl.ehl_4d_1loop_coeffs(k, l)
                assert sympy.Rational(got.numerator, got.denominator) == want

    def test_continuation_symmetry(self):
        for s in range(2, 9):
            for k in range(s + 1):
                l = s - k
                assert ehl.ehl_4d_1loop_coeffs(l, k) == (-1) ** s * ehl.ehl_4d_1loop_coeffs(k, l)

    def test_threshold(self):
        for k, l in ((0, 0), (1, 0), (0, 1)):
            with pytest.raises(PreconditionError):
                ehl.ehl_4d_1loop_coeffs(k, l)


class TestQuadrature:
    def test_unit(self):
        r = ehl.quad_nd(lambda x: np.ones(len(x)), 3, tol=1e-10)
        assert abs(r.value - 1) < 1e-10 and r.error_estimate >= 0

    def test_moment(self):
        r = ehl.quad_nd(lambda x: x[:, 0] ** 2 * x[:, 3], 4, tol=1e-9)
        assert r.value == pytest.approx(2.0, rel=1e-8)

    def test_random_polynomials(self):
        rng = random.Random(5)
        for i in range(6):
            dims = 3 if i % 2 else 4
            ring = ("w", "wp", "wh", "wb")[:dims]
            p = random_polynomial(ring, 4, 4, rng)
            exact = moment_integral(p)
            if exact == 0:
                continue
            f = p.float_evaluator()
            r = ehl.quad_nd(f, dims, tol=1e-10)
            assert r.value == pytest.approx(float(exact), rel=1e-8)

    def test_deterministic(self):
        f = lambda x: np.exp(-x[:, 0] * x[:, 1]) * (1 + x[:, 2])
        assert ehl.quad_nd(f, 3, tol=1e-8) == ehl.quad_nd(f, 3, tol=1e-8)

    def test_non_convergence_flagged(self):
        with pytest.raises(ConvergenceError):
            ehl.quad_nd(lambda x: np.cos(40 * x[:, 0]), 2, tol=1e-14, max_levels=2)
        with pytest.raises(PreconditionError):
            ehl.quad_nd(lambda x: x[:, 0], 2, tol=0)

    def test_simplex_dirichlet(self):
        r = ehl.simplex_quad(lambda w, wp, wh, wb: w ** 2 * wp * wb ** 3, tol=1e-12)
        assert r.value == pytest.approx(Fraction(2 * 1 * 6, factorial(2 + 1 + 3 + 3)), rel=1e-11)

    def test_radial_reduction(self):
        # orthant integral of a homogeneous degree-d function = Gamma(4 + d) * simplex integral
        def f(w, wp, wh, wb):
            a = w + wp + wh + wb
            return np.where(a > 0, (w * wh + 2 * wp * wb) ** 2 / np.where(a > 0, a, 1.0) ** 2, 0.0)

        simplex = ehl.simplex_quad(f, tol=1e-12).value
        orth = ehl.quad_nd(lambda x: f(x[:, 0], x[:, 1], x[:, 2], x[:, 3]), 4, tol=1e-9).value
        assert orth == pytest.approx(math.gamma(6) * simplex, rel=1e-8)


class TestGammaB:
    def test_raw_leading_value(self):
        r = ehl.gamma_b_raw(0, max_levels=2, tol=1e-6)
        assert r.value == pytest.approx(0.9369329138626, rel=1e-11)

    def test_identify(self):
        assert ehl.identify_zeta3(-Fraction(7, 6) + 1.75 * ehl.zeta3()) == (Fraction(-7, 6), Fraction(7, 4))
        assert ehl.identify_zeta3(0.9369329138626228) == (Fraction(-7, 6), Fraction(7, 4))

    def test_zeta3(self):
        assert ehl.zeta3() == pytest.approx(float(mpmath.zeta(3)), rel=1e-15)
        assert ehl.gamma_b_reference(0) == pytest.approx(-1.5 + 1.75 * 1.2020569031595942)
        assert ehl.gamma_b_reference(1) == pytest.approx(-251 / 120 + 35 / 16 * 1.2020569031595942)
        assert ehl.gamma_b_reference(2) is None

    def test_fit(self):
        frac, k, err = ehl.fit_rational_pi_factor(3 * math.pi, 2.0)
        assert (frac, k) == (Fraction(3, 2), 1) and err < 1e-15
        with pytest.raises(ConvergenceError):
            ehl.fit_rational_pi_factor(1.0, 0.0)
