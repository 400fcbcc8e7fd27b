"""Integration by parts with the signed derivative on (w, wp, wh, wb).

``dtilde = d/dw - d/dwp + d/dwh - d/dwb`` kills a, v, j, h and sends wtilde
to 4, so a D4-invariant integrand written as a polynomial in wtilde has an
explicit antiderivative.  Integrating ``exp(-a) * dtilde(theta)`` over the
positive orthant leaves boundary terms on the four coordinate faces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from feyninv.errors import PreconditionError, RingMismatchError, SymmetryError
from feyninv.invariant import D4_RING, d4_basis, d4_group, is_semi_invariant, wtilde_expand
from feyninv.polyring import Polynomial, RationalFunction

FACE_RING = ("w", "wp", "wh")
_SIGNS = {"w": 1, "wp": -1, "wh": 1, "wb": -1}


def dtilde(p: Polynomial) -> Polynomial:
    if p.ring != D4_RING:
        raise RingMismatchError(D4_RING, p.ring, "dtilde")
    out = Polynomial.zero(D4_RING)
    for v, s in _SIGNS.items():
        d = p.partial(v)
        out = out + d if s > 0 else out - d
    return out


def antiderivative(beta: Polynomial, check_invariance: bool = True) -> Polynomial:
    """theta with dtilde(theta) = beta and no wtilde-free part.

    ``beta`` is expanded as sum_k wtilde^k c_k with c_k in the kernel of
    dtilde; then theta = sum_k c_k wtilde^(k+1) / (4(k+1)).
    """
    if beta.ring != D4_RING:
        raise RingMismatchError(D4_RING, beta.ring, "antiderivative")
    if check_invariance and not is_semi_invariant(d4_group(), beta):
        raise SymmetryError("integrand is not D4-invariant")
    exp = wtilde_expand(beta)
    b = d4_basis()
    bind = {"a": b.a, "v": b.v, "h": b.h}
    theta = Polynomial.zero(D4_RING)
    wt_pow = {0: Polynomial.constant(D4_RING, 1)}

    def wpow(k):
        if k not in wt_pow:
            wt_pow[k] = wpow(k - 1) * b.wtilde
        return wt_pow[k]

    for jpow, part in ((0, exp.even), (1, exp.odd)):
        for k, c in part.items():
            term = c.substitute(bind) * wpow(k + 1)
            if jpow:
                term = term * b.j
            theta = theta + term.scale(Fraction(1, 4 * (k + 1)))
    if dtilde(theta) != beta:
        raise PreconditionError("antiderivative check failed: dtilde(theta) != beta")
    return theta


@dataclass(frozen=True)
class ReducedIntegrand:
    """Boundary integrand on (w, wp, wh) against exp(-(w+wp+wh)).

    The multiplicity is recorded, never folded into ``theta_restricted``.
    """

    theta_restricted: object
    multiplicity: Fraction

    def moment(self) -> Fraction:
        if not isinstance(self.theta_restricted, Polynomial):
            raise PreconditionError("exact moments need a polynomial integrand")
        return self.multiplicity * moment_integral(self.theta_restricted, 3)


def face(theta: Polynomial, var: str) -> Polynomial:
    """theta restricted to var = 0, relabelled order-preservingly onto (w, wp, wh)."""
    rest = [x for x in D4_RING if x != var]
    restricted = theta.set_variable(var, 0)
    return restricted.embed(FACE_RING, dict(zip(rest, FACE_RING)))


def four_face_sum(theta: Polynomial) -> Polynomial:
    return face(theta, "wp") + face(theta, "wb") - face(theta, "w") - face(theta, "wh")


def is_boundary_symmetric(theta: Polynomial) -> bool:
    """Invariant under w<->wh and wp<->wb and odd under (w,wh)<->(wp,wb)."""
    return is_semi_invariant(d4_group(), theta, "sign")


def boundary_reduce(theta: Polynomial, symmetric: bool = True) -> ReducedIntegrand:
    if theta.ring != D4_RING:
        raise RingMismatchError(D4_RING, theta.ring, "boundary_reduce")
    if symmetric:
        if not is_boundary_symmetric(theta):
            raise SymmetryError("theta lacks the symmetry required for the single-face shortcut")
        return ReducedIntegrand(face(theta, "wb"), Fraction(4))
    return ReducedIntegrand(four_face_sum(theta), Fraction(1))


def moment_integral(p, dims: int | None = None) -> Fraction:
    """Exact integral of p * exp(-sum x) over the positive orthant."""
    if isinstance(p, RationalFunction):
        if not p.is_polynomial():
            raise PreconditionError("exact moments need a polynomial integrand")
        p = p.num
    if dims is not None and p.nvars != dims:
        raise PreconditionError(f"expected a {dims}-variable polynomial, got ring {p.ring}")
    total = Fraction(0)
    for e, c in p.items():
        m = 1
        for k in e:
            m *= factorial(k)
        total += c * m
    return total
