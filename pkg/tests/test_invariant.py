import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from feyninv.errors import (
    BoundExceededError,
    NonUniqueError,
    NotInSpanError,
    ParseError,
    PreconditionError,
    SymmetryError,
)
from feyninv.invariant import (
    D4_RING,
    SignedPermutation,
    act,
    d4_basis,
    d4_group,
    d4_hironaka_data,
    group_closure,
    hironaka_rewrite,
    invariant_space,
    is_semi_invariant,
    jacobian_independent,
    jacobian_matrix,
    molien_dimension,
    molien_series,
    parse_group,
    random_polynomial,
    reynolds,
    symbolic_determinant,
    wtilde_expand,
)
from feyninv.polyring import Polynomial, parse_polynomial

from helpers import D4, polynomials

X2 = ("x1", "x2")
X4 = ("x1", "x2", "x3", "x4")


def P(text, ring=D4):
    return parse_polynomial(text, ring)


def swap_group():
    return group_closure(X2, [SignedPermutation.from_images(X2, {"x1": "x2", "x2": "x1"})], {"sign": [-1]})


def s4():
    gens = [SignedPermutation.from_images(X4, {X4[i]: X4[i + 1], X4[i + 1]: X4[i]}) for i in range(3)]
    return group_closure(X4, gens, {"sign": [-1, -1, -1]})


def proportional(p, q):
    (e, c), = list(q.items())[:1]
    return p == q.scale(p.terms.get(e, 0) / c) and not p.is_zero()


def sympy_molien(G, through, character=None):
    """Coefficients of (1/|G|) sum chi(g) / det(1 - t M_g) from explicit matrices."""
    t = sympy.symbols("t")
    n = len(G.ring)
    total = 0
    for g, chi in zip(G.elements, G.character(character)):
        M = sympy.zeros(n, n)
        for i in range(n):
            img = Polynomial.var(G.ring, G.ring[i])
            image = g.act(img)
            for e, c in image.items():
                M[e.index(1), i] = c
        total += chi / (sympy.eye(n) - t * M).det()
    ser = sympy.series(total / len(G.elements), t, 0, through + 1).removeO()
    return [sympy.Rational(ser.coeff(t, d)) for d in range(through + 1)]


class TestGroups:
    def test_act_examples(self):
        g = SignedPermutation.from_images(X2, {"x1": "x2", "x2": "x1"})
        assert act(g, P("x1^2", X2)) == P("x2^2", X2)
        p = P("w^2 - 3*wp*wb")
        assert act(SignedPermutation.identity(4), p) == p
        g3 = SignedPermutation.from_images(D4, {"w": "wp", "wp": "w", "wh": "wb", "wb": "wh"})
        b = d4_basis()
        assert act(g3, b.wtilde) == -b.wtilde

    def test_closure_orders(self):
        assert d4_group().order == 8
        assert swap_group().order == 2
        assert s4().order == 24

    def test_signed_generators(self):
        g = SignedPermutation.from_images(X2, {"x1": "x2", "x2": "-x1"})
        G = group_closure(X2, [g])
        assert G.order == 4
        assert is_semi_invariant(G, P("x1^2 + x2^2", X2))
        assert not is_semi_invariant(G, P("x1*x2", X2))

    def test_closure_guard(self):
        gens = [SignedPermutation.from_images(X4, {X4[i]: X4[i + 1], X4[i + 1]: X4[i]}) for i in range(3)]
        with pytest.raises(BoundExceededError):
            group_closure(X4, gens, limit=10)

    def test_character_must_be_homomorphism(self):
        g = SignedPermutation.from_images(X4, {"x1": "x2", "x2": "x3", "x3": "x1"})
        with pytest.raises(SymmetryError):
            group_closure(X4, [g], {"bad": [-1]})

    def test_parse_group_file(self):
        with open("examples_data/d4.group") as fh:
            G = parse_group(fh.read())
        assert G.order == 8 and G.ring == D4
        assert G.character("sign") == d4_group().character("sign")

    def test_parse_group_errors(self):
        with pytest.raises(ParseError) as exc:
            parse_group("w->wh, wh->w\nw=>wp\n")
        assert exc.value.line == 2
        with pytest.raises(ParseError):
            parse_group("w->wh, wh->w; sign=2\n")


class TestReynolds:
    def test_swap(self):
        assert reynolds(swap_group(), P("x1", X2)) == P("1/2*x1 + 1/2*x2", X2)

    def test_fixes_invariants(self):
        b = d4_basis()
        for p in (b.a, b.v, b.h, b.a * b.v):
            assert reynolds(d4_group(), p) == p

    def test_d4_product(self):
        r = reynolds(d4_group(), P("w*wh"))
        assert not r.is_zero() and is_semi_invariant(d4_group(), r)
        basis2 = invariant_space(d4_group(), 2)
        from feyninv.invariant import _Echelon

        ech = _Echelon()
        for q in basis2:
            ech.insert(q.terms)
        assert ech.solve(r.terms) is not None

    @settings(max_examples=100)
    @given(polynomials(ring=D4, max_degree=5), st.sampled_from([None, "sign"]))
    def test_idempotent(self, p, ch):
        G = d4_group()
        r = reynolds(G, p, ch)
        assert reynolds(G, r, ch) == r
        assert is_semi_invariant(G, r, ch)


class TestSemiInvariance:
    def test_examples(self):
        G = d4_group()
        b = d4_basis()
        assert is_semi_invariant(G, b.a)
        assert not is_semi_invariant(G, b.j)
        assert is_semi_invariant(G, b.j, "sign")
        assert is_semi_invariant(G, b.wtilde, "sign")
        for p in (b.v, b.h):
            assert is_semi_invariant(G, p)


class TestInvariantSpaces:
    def test_low_degrees(self):
        G = d4_group()
        b = d4_basis()
        (lin,) = invariant_space(G, 1)
        assert proportional(lin, b.a)
        (odd,) = invariant_space(G, 1, "sign")
        assert proportional(odd, b.wtilde)
        assert invariant_space(G, 0) == [Polynomial.constant(D4, 1)]
        assert invariant_space(swap_group(), 0) == [Polynomial.constant(X2, 1)]

    def test_degree_bound(self):
        with pytest.raises(BoundExceededError):
            invariant_space(d4_group(), 13)

    def test_molien_small(self):
        G1 = group_closure(("x",), [])
        assert [molien_dimension(G1, k) for k in range(6)] == [1] * 6
        assert molien_dimension(swap_group(), 2) == 2

    @pytest.mark.parametrize("name", ["d4", "s4", "swap"])
    @pytest.mark.parametrize("character", [None, "sign"])
    def test_molien_matches_linear_algebra(self, name, character):
        G = {"d4": d4_group, "s4": s4, "swap": swap_group}[name]()
        for d in range(7):
            assert len(invariant_space(G, d, character)) == molien_dimension(G, d, character)

    @pytest.mark.parametrize("character", [None, "sign"])
    def test_molien_against_matrix_oracle(self, character):
        G = d4_group()
        assert molien_series(G, 8, character) == [Fraction(int(c)) for c in sympy_molien(G, 8, character)]

    def test_d4_series_closed_form(self):
        t = sympy.symbols("t")
        den = (1 - t) * (1 - t ** 2) ** 2 * (1 - t ** 4)
        for character, num in ((None, 1 + t ** 3), ("sign", t + t ** 2)):
            ser = sympy.series(num / den, t, 0, 13).removeO()
            want = [Fraction(int(ser.coeff(t, d))) for d in range(13)]
            assert molien_series(d4_group(), 12, character) == want


class TestJacobian:
    def test_examples(self):
        assert jacobian_independent([P("x1", X2), P("x2", X2)])
        assert not jacobian_independent([P("x1 + x2", X2), P("x1 + x2", X2)])

    def test_d4_quadruple_is_dependent(self):
        # (a, v, j, h) satisfy 16h = a^4 - 2a^2(a^2 - 2v) + j^2, so the Jacobian vanishes
        b = d4_basis()
        assert b.h.scale(16) == b.a ** 4 - (b.a ** 2) * (b.a ** 2 - b.v.scale(2)).scale(2) + b.j ** 2
        assert symbolic_determinant(jacobian_matrix([b.a, b.v, b.j, b.h])).is_zero()
        assert not jacobian_independent([b.a, b.v, b.j, b.h])
        w = sympy.symbols(D4)
        polys = [sympy.sympify(str(q).replace("^", "**"), locals=dict(zip(D4, w))) for q in (b.a, b.v, b.j, b.h)]
        assert sympy.expand(sympy.Matrix(polys).jacobian(w).det()) == 0

    def test_d4_primaries_independent(self):
        prim, _ = d4_hironaka_data()
        assert jacobian_independent(prim)
        assert not symbolic_determinant(jacobian_matrix(prim)).is_zero()

    def test_secondary_count(self):
        prim, sec = d4_hironaka_data()
        degs = [p.total_degree() for p in prim]
        assert len(sec) * d4_group().order == degs[0] * degs[1] * degs[2] * degs[3]


class TestHironaka:
    def test_primary_power(self):
        b = d4_basis()
        dec = hironaka_rewrite(b.a ** 2, [b.a, b.v, b.j, b.h], check_primaries=False)
        assert str(dec.coefficients[0]) == "y1^2"

    def test_sum_of_squares(self):
        prim, sec = d4_hironaka_data()
        p = P("w^2 + wp^2 + wh^2 + wb^2")
        dec = hironaka_rewrite(p, prim, sec, group=d4_group())
        assert dec.reconstruct() == p
        assert str(dec.coefficients[0]) == "3/4*y1^2 - y2 + 1/4*y3"
        assert dec.coefficients[1].is_zero()

    def test_product_of_sign_invariants(self):
        prim, sec = d4_hironaka_data()
        b = d4_basis()
        dec = hironaka_rewrite(b.wtilde * b.j, prim, sec, group=d4_group())
        assert str(dec.coefficients[1]) == "1"

    def test_sign_sector(self):
        prim, sec = d4_hironaka_data("sign")
        b = d4_basis()
        p = b.wtilde * b.a * b.v + b.j * b.h
        dec = hironaka_rewrite(p, prim, sec, character="sign", group=d4_group())
        assert dec.reconstruct() == p

    def test_errors(self):
        prim, sec = d4_hironaka_data()
        with pytest.raises(SymmetryError):
            hironaka_rewrite(P("w"), prim, sec, group=d4_group())
        with pytest.raises(NotInSpanError):
            hironaka_rewrite(P("w"), prim, sec)
        b = d4_basis()
        with pytest.raises(NonUniqueError):
            hironaka_rewrite(b.a ** 2, [b.a, b.v, b.a ** 2, b.h], check_primaries=False)
        with pytest.raises(PreconditionError):
            hironaka_rewrite(b.a ** 2, [b.a, b.v, b.j, b.h])

    @pytest.mark.parametrize("character", ["trivial", "sign"])
    def test_random_round_trips(self, character):
        G = d4_group()
        ch = None if character == "trivial" else "sign"
        prim, sec = d4_hironaka_data(character)
        rng = random.Random(7)
        for _ in range(15):
            q = reynolds(G, random_polynomial(D4, 8, 6, rng), ch)
            if q.is_zero():
                continue
            dec = hironaka_rewrite(q, prim, sec, character=ch, group=G)
            assert dec.reconstruct() == q


class TestD4Basis:
    def test_printed_forms(self):
        b = d4_basis()
        assert b.a == P("w + wp + wh + wb")
        assert b.v == P("2*(w*wh + wp*wb) + (w + wh)*(wp + wb)")
        assert b.h == P("(w + wp + wh + wb)*(w*wp*wh + w*wp*wb + w*wh*wb + wp*wh*wb) + (w*wh - wp*wb)^2")
        assert b.wtilde == P("w - wp + wh - wb")
        assert [q.total_degree() for q in (b.a, b.v, b.j, b.h)] == [1, 2, 2, 4]

    @settings(max_examples=40)
    @given(polynomials(ring=D4, max_degree=7, max_terms=5))
    def test_wtilde_expansion_round_trip(self, p):
        q = reynolds(d4_group(), p)
        exp = wtilde_expand(q)
        assert exp.reconstruct() == q
        assert all(k % 2 == 0 for k in exp.even) and all(k % 2 == 1 for k in exp.odd)

    def test_wtilde_expansion_rejects_non_invariant(self):
        with pytest.raises(SymmetryError):
            wtilde_expand(P("w"))
