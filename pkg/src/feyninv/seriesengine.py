"""Truncated Laurent series in the field parameter rho and the diagram-B integrand.

:class:`TruncatedSeries` is generic in its coefficient domain.  The exact path
uses :class:`~feyninv.polyring.RationalFunction` coefficients in
(w, wp, wh, wb); the numeric path runs the very same construction with numpy
arrays holding the coefficient values at many sample points.

The integrand is

    rho^3 sech^2(..) B / (A^3 C)  -  rho cosh(rho wtilde) sech(..) [1/A - (C/G^2) log(1 + G^2/(A C))]

with tanh z per variable as building blocks.  The argument u = G^2/(A C) of
the logarithm has a nonzero rho^0 part u0, so the bracket is written as
(1/A)(1 - phi(u)) with phi(u) = log(1+u)/u and expanded around u0:

    phi(u0 + delta) = sum_m Phi_m(u0) delta^m,   Phi_m = phi^(m) / m!.

Every coefficient is then a rational function plus rational multiples of the
transcendental atoms Phi_m(u0); see :class:`WeakFieldCoefficient`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from feyninv.ehl import bernoulli
from feyninv.errors import BoundExceededError, PreconditionError, SeriesError
from feyninv.invariant import D4_RING, SignedPermutation, d4_group, wtilde_expand
from feyninv.polyring import Polynomial, RationalFunction, parse_polynomial_file

MAX_ORDER = 24
TANH_RING = ("t", "tp", "th", "tb")


def _is_zero(c) -> bool:
    if isinstance(c, np.ndarray):
        return not c.any()
    if isinstance(c, (int, float, Fraction)):
        return c == 0
    return c.is_zero()


def _scal(q: Fraction, c):
    """Rational scalar times a coefficient of either domain."""
    if isinstance(c, (RationalFunction, Polynomial)):
        return c.scale(q)
    return float(q) * c


def _inverse(c):
    if isinstance(c, RationalFunction):
        return c.inverse()
    return 1.0 / c


class TruncatedSeries:
    """sum_{k=L}^{N} c_k rho^k with everything above rho^N unknown."""

    __slots__ = ("order", "leading_power", "coeffs", "zero")

    def __init__(self, coeffs: Sequence, leading_power: int = 0, order: int | None = None, zero=0.0):
        coeffs = list(coeffs)
        if order is None:
            order = leading_power + len(coeffs) - 1
        n = order - leading_power + 1
        if len(coeffs) > n:
            coeffs = coeffs[:n]
        coeffs += [zero] * (n - len(coeffs))
        k = 0
        while k < len(coeffs) and _is_zero(coeffs[k]):
            k += 1
        self.coeffs = coeffs[k:]
        self.leading_power = leading_power + k
        self.order = order
        self.zero = zero

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, power: int):
        if power > self.order:
            raise SeriesError(f"coefficient of rho^{power} is beyond the known order {self.order}")
        k = power - self.leading_power
        return self.coeffs[k] if k >= 0 else self.zero

    def powers(self) -> range:
        return range(self.leading_power, self.order + 1)

    def _like(self, coeffs, leading_power, order):
        return TruncatedSeries(coeffs, leading_power, order, self.zero)

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = self._like([other], 0, self.order)
        lo = min(self.leading_power, other.leading_power)
        hi = min(self.order, other.order)
        out = []
        for p in range(lo, hi + 1):
            a, b = self[p], other[p]
            out.append(b if _is_zero(a) else a if _is_zero(b) else a + b)
        return self._like(out, lo, hi)

    __radd__ = __add__

    def __neg__(self):
        return self._like([-c for c in self.coeffs], self.leading_power, self.order)

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = self._like([other], 0, self.order)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        """Multiply every coefficient by a rational scalar."""
        return self._like([_scal(Fraction(c), x) for x in self.coeffs], self.leading_power, self.order)

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by rho^k."""
        return self._like(self.coeffs, self.leading_power + k, self.order + k)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            if _is_zero(other):
                return self._like([], self.order + 1, self.order)
            return self._like([c * other for c in self.coeffs], self.leading_power, self.order)
        if self.is_zero() or other.is_zero():
            lo = self.leading_power + other.leading_power
            hi = min(self.order + other.leading_power, other.order + self.leading_power)
            return self._like([], hi + 1, hi)
        l1, l2 = self.leading_power, other.leading_power
        lo = l1 + l2
        hi = min(self.order + l2, other.order + l1)
        out = []
        for p in range(lo, hi + 1):
            acc = None
            for i in range(p - lo + 1):
                a = self.coeffs[i] if i < len(self.coeffs) else self.zero
                j = p - lo - i
                b = other.coeffs[j] if j < len(other.coeffs) else other.zero
                if _is_zero(a) or _is_zero(b):
                    continue
                t = a * b
                acc = t if acc is None else acc + t
            out.append(self.zero if acc is None else acc)
        return self._like(out, lo, hi)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        base = self
        result = None
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result if result is not None else self._like([self._one()], 0, self.order - self.leading_power)

    def _one(self):
        z = self.zero
        if isinstance(z, RationalFunction):
            return RationalFunction(Polynomial.constant(z.ring, 1))
        return 1.0

    def inverse(self) -> "TruncatedSeries":
        if self.is_zero():
            raise SeriesError("division by an identically zero series")
        L = self.leading_power
        n_rel = self.order - L
        c = self.coeffs
        inv0 = _inverse(c[0])
        b = [inv0]
        for k in range(1, n_rel + 1):
            acc = None
            for i in range(1, k + 1):
                if i >= len(c) or _is_zero(c[i]) or _is_zero(b[k - i]):
                    continue
                t = c[i] * b[k - i]
                acc = t if acc is None else acc + t
            b.append(self.zero if acc is None else -(acc * inv0))
        return self._like(b, -L, -L + n_rel)

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.inverse()
        return self * _inverse(other)

    def compose(self, fcoeffs: Sequence[Fraction]) -> "TruncatedSeries":
        """sum_k fcoeffs[k] * self^k; needs a strictly positive leading power."""
        if not self.is_zero() and self.leading_power < 1:
            raise SeriesError("composition needs an argument without constant term")
        one = self._like([self._one()], 0, self.order)
        total = one.scale(fcoeffs[0]) if fcoeffs[0] else self._like([], self.order + 1, self.order)
        power = one
        for k in range(1, len(fcoeffs)):
            power = power * self
            if power.is_zero() or power.leading_power > self.order:
                break
            if fcoeffs[k]:
                total = total + power.scale(fcoeffs[k])
        return total

    def compose_log1p(self) -> "TruncatedSeries":
        n = self.order + 1
        return self.compose([Fraction(0)] + [Fraction((-1) ** (k + 1), k) for k in range(1, n + 1)])

    def map(self, fn: Callable) -> "TruncatedSeries":
        return self._like([fn(c) for c in self.coeffs], self.leading_power, self.order)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise SeriesError(f"cannot extend a series known to rho^{self.order} up to rho^{order}")
        return self._like(self.coeffs, self.leading_power, order)

    def __repr__(self) -> str:
        return f"TruncatedSeries(leading_power={self.leading_power}, order={self.order}, {len(self.coeffs)} coefficients)"


def series_arith(op: str, s: TruncatedSeries, t: TruncatedSeries | None = None) -> TruncatedSeries:
    if op == "add":
        return s + t
    if op == "sub":
        return s - t
    if op == "mul":
        return s * t
    if op == "div":
        return s / t
    if op == "compose_log1p":
        return s.compose_log1p()
    raise PreconditionError(f"unknown series operation {op!r}")


# ---------------------------------------------------------------------------
# elementary series

@lru_cache(maxsize=None)
def tanh_coefficients(N: int) -> tuple:
    out = [Fraction(0)] * (N + 1)
    for n in range(1, (N + 1) // 2 + 1):
        k = 2 * n - 1
        if k <= N:
            four = 4 ** n
            out[k] = Fraction(four * (four - 1)) * bernoulli(2 * n) / factorial(2 * n)
    return tuple(out)


@lru_cache(maxsize=None)
def cosh_coefficients(N: int) -> tuple:
    return tuple(Fraction(1, factorial(k)) if k % 2 == 0 else Fraction(0) for k in range(N + 1))


@lru_cache(maxsize=None)
def sech_coefficients(N: int) -> tuple:
    c = cosh_coefficients(N)
    b = [Fraction(1)]
    for k in range(1, N + 1):
        b.append(-sum(c[i] * b[k - i] for i in range(1, k + 1)))
    return tuple(b)


@lru_cache(maxsize=None)
def log1p_coefficients(N: int) -> tuple:
    return (Fraction(0),) + tuple(Fraction((-1) ** (k + 1), k) for k in range(1, N + 1))


_KINDS = {
    "tanh": tanh_coefficients,
    "sech": sech_coefficients,
    "cosh": cosh_coefficients,
    "log1p": log1p_coefficients,
}


def _variable(x):
    if isinstance(x, str):
        return RationalFunction(Polynomial.var(D4_RING, x))
    if isinstance(x, Polynomial):
        return RationalFunction(x)
    return x


def elementary_series(kind: str, x, N: int, max_order: int = MAX_ORDER) -> TruncatedSeries:
    """f(rho * x) to order rho^N for f in tanh, sech, cosh, log1p.

    ``x`` may be a variable name of (w, wp, wh, wb), a polynomial, a rational
    function or a numpy array of sample values.
    """
    if kind not in _KINDS:
        raise PreconditionError(f"unknown elementary series {kind!r}")
    if N > max_order:
        raise BoundExceededError(f"order {N} exceeds the configured bound {max_order}")
    if N < 0:
        raise PreconditionError("order must be non-negative")
    x = _variable(x)
    coeffs = _KINDS[kind](N)
    zero = _zero_like(x)
    out = []
    power = None
    for k in range(N + 1):
        power = _one_like(x) if k == 0 else power * x
        out.append(_scal(coeffs[k], power) if coeffs[k] else zero)
    return TruncatedSeries(out, 0, N, zero)


def _zero_like(x):
    if isinstance(x, RationalFunction):
        return RationalFunction(Polynomial.zero(x.ring))
    return 0.0


def _one_like(x):
    if isinstance(x, RationalFunction):
        return RationalFunction(Polynomial.constant(x.ring, 1))
    return np.ones_like(x) if isinstance(x, np.ndarray) else 1.0


# ---------------------------------------------------------------------------
# the integrand

def load_a_definition(A_def) -> Polynomial:
    """Polynomial in the tanh variables (t, tp, th, tb) defining the A block."""
    if isinstance(A_def, Polynomial):
        if A_def.ring != TANH_RING:
            raise PreconditionError(f"A definition must live in ring {TANH_RING}")
        return A_def
    if A_def in (None, "e1-tanh"):
        t = Polynomial.gens(TANH_RING)
        return t[0] + t[1] + t[2] + t[3]
    if isinstance(A_def, str) and A_def.startswith("file:"):
        text = Path(A_def[5:]).read_text(encoding="utf-8")
        p = parse_polynomial_file(text, TANH_RING)
        if p.ring != TANH_RING:
            p = p.embed(TANH_RING)
        return p
    raise PreconditionError(f"unknown A definition {A_def!r}; use 'e1-tanh' or 'file:<path>'")


def _eval_poly_series(p: Polynomial, args: Sequence[TruncatedSeries]) -> TruncatedSeries:
    total = None
    cache: dict = {}
    for e, c in p.items():
        term = None
        for i, k in enumerate(e):
            if not k:
                continue
            key = (i, k)
            if key not in cache:
                cache[key] = args[i] ** k
            term = cache[key] if term is None else term * cache[key]
        if term is None:
            raise SeriesError("A definition must not contain a constant term")
        term = term.scale(c)
        total = term if total is None else total + term
    if total is None:
        raise SeriesError("A definition is the zero polynomial")
    return total


@dataclass
class IntegrandBlocks:
    tanh_z: list
    sech_z: list
    A: TruncatedSeries
    B: TruncatedSeries
    C: TruncatedSeries
    G: TruncatedSeries
    cosh_rho_wtilde: TruncatedSeries
    u: TruncatedSeries = None
    u0: object = None
    delta: TruncatedSeries = None


def build_blocks(N: int, X: Sequence, A_def="e1-tanh", extra: int = 6) -> IntegrandBlocks:
    M = N + extra
    if M > MAX_ORDER + extra:
        raise BoundExceededError(f"order {N} exceeds the configured bound {MAX_ORDER}")
    w, wp, wh, wb = X
    T = [elementary_series("tanh", x, M) for x in X]
    S = [elementary_series("sech", x, M) for x in X]
    wt = w - wp + wh - wb
    cw = elementary_series("cosh", wt, M)
    A = _eval_poly_series(load_a_definition(A_def), T)
    t, tp, th, tb = T
    B = (t * t + th * th) * (tp + tb) + (tp * tp + tb * tb) * (t + th)
    C = t * tp * th + t * tp * tb + t * th * tb + tp * th * tb
    G = t * th - tp * tb
    return IntegrandBlocks(T, S, A, B, C, G, cw)


@dataclass
class IntegrandSeries:
    """The two integrand terms as series; the second split by transcendental atom."""

    first: TruncatedSeries
    second_rational: TruncatedSeries
    second_atoms: dict
    u0: object
    blocks: IntegrandBlocks


def integrand_series(N: int, X: Sequence, A_def="e1-tanh") -> IntegrandSeries:
    bl = build_blocks(N, X, A_def)
    P1 = bl.sech_z[0] * bl.sech_z[1] * bl.sech_z[2] * bl.sech_z[3]
    P2 = P1 * P1
    Ainv = bl.A.inverse()
    Cinv = bl.C.inverse()
    first = (P2 * bl.B * Ainv * Ainv * Ainv * Cinv).shift(3)
    K = (bl.cosh_rho_wtilde * P1 * Ainv).shift(1)
    if first.leading_power < 0 or K.leading_power < 0:
        raise SeriesError(
            f"integrand has a pole of order {-min(first.leading_power, K.leading_power)} in rho; "
            "the A definition does not match the power counting of the other blocks"
        )
    u = bl.G * bl.G * Ainv * Cinv
    if u.leading_power < 0:
        raise SeriesError("log argument G^2/(A C) is singular at rho = 0")
    u0 = u[0]
    delta = u - TruncatedSeries([u0], 0, u.order, u.zero) if not _is_zero(u0) else u
    bl.u, bl.u0, bl.delta = u, u0, delta
    atoms = {}
    power = None
    m = 0
    while True:
        power = TruncatedSeries([_one_like(X[0])], 0, K.order, K.zero) if m == 0 else power * delta
        if power.is_zero() or power.leading_power > N:
            break
        atoms[m] = (K * power).truncate(N)
        m += 1
    if first.order < N or K.order < N:
        raise SeriesError(f"series bookkeeping only reached rho^{min(first.order, K.order)}, need rho^{N}")
    return IntegrandSeries(first.truncate(N), (-K).truncate(N), atoms, u0, bl)


# ---------------------------------------------------------------------------
# Phi_m atoms

def phi_atom(u, m: int):
    """Phi_m(u) = (1/m!) d^m/du^m [log(1+u)/u], vectorised, u >= 0."""
    u = np.asarray(u, dtype=float)
    s = u / (1.0 + u)
    small = s < 0.7
    tot = np.zeros_like(u)
    p = np.ones_like(u)
    for jj in range(120):
        tot += p / (m + 1 + jj)
        p = p * np.where(small, s, 0.0)
    series = (1.0 + u) ** (-(m + 1)) * tot
    with np.errstate(divide="ignore", invalid="ignore"):
        head = sum(s ** k / k for k in range(1, m + 1)) if m else 0.0
        closed = (np.log1p(u) - head) / u ** (m + 1)
    return (-1) ** m * np.where(small, series, closed)


def phi_atom_at_zero(m: int) -> Fraction:
    return Fraction((-1) ** m, m + 1)


# ---------------------------------------------------------------------------
# exact coefficients

def _act_rational(g: SignedPermutation, r: RationalFunction) -> RationalFunction:
    return RationalFunction(g.act(r.num), [(g.act(f), k) for f, k in r.factors])


@dataclass
class WeakFieldCoefficient:
    """Coefficient of rho^order in the integrand.

    ``first`` is the B-block term, homogeneous of degree order - 3.  The second
    term is ``second_rational + sum_m atoms[m] * Phi_m(u0)``, homogeneous of
    degree order - 1, with u0 = G0^2 / (a C0) of degree zero.
    """

    order: int
    first: RationalFunction
    second_rational: RationalFunction
    atoms: dict
    u0: RationalFunction

    def pieces(self) -> list[tuple[str, RationalFunction]]:
        out = [("first", self.first), ("second", self.second_rational)]
        out += [(f"phi{m}", r) for m, r in sorted(self.atoms.items())]
        return [(k, r) for k, r in out if not r.is_zero()]

    def degrees(self) -> tuple[int, int]:
        return self.order - 3, self.order - 1

    def is_d4_invariant(self) -> bool:
        G = d4_group()
        for g in G.elements:
            for _, r in self.pieces() + [("u0", self.u0)]:
                if _act_rational(g, r) != r:
                    return False
        return True

    def raw_term_count(self) -> int:
        return sum(len(r.num) for _, r in self.pieces())

    def invariant_term_count(self) -> int:
        return sum(wtilde_expand(r.num).term_count() for _, r in self.pieces())

    def evaluate(self, point: dict) -> tuple[float, float]:
        """(first, second) at an exact rational point, atoms in floating point."""
        f1 = float(self.first.evaluate(point))
        u0 = float(self.u0.evaluate(point))
        f2 = float(self.second_rational.evaluate(point))
        for m, r in self.atoms.items():
            f2 += float(r.evaluate(point)) * float(phi_atom(np.array([u0]), m)[0])
        return f1, f2

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "degrees": list(self.degrees()),
            "u0": self.u0.to_text(),
            "pieces": {k: r.to_text() for k, r in self.pieces()},
        }


def build_integrand(N: int, A_def="e1-tanh") -> list[tuple[int, WeakFieldCoefficient]]:
    """Exact coefficients of rho^0 .. rho^N; odd orders are checked to vanish."""
    if N < 0:
        raise PreconditionError("order must be non-negative")
    if N > MAX_ORDER:
        raise BoundExceededError(f"order {N} exceeds the configured bound {MAX_ORDER}")
    X = [RationalFunction(Polynomial.var(D4_RING, v)) for v in D4_RING]
    ser = integrand_series(N, X, A_def)
    zero = RationalFunction(Polynomial.zero(D4_RING))
    u0 = ser.u0 if isinstance(ser.u0, RationalFunction) else zero
    out = []
    for p in range(0, N + 1):
        parts = [ser.first[p], ser.second_rational[p]] + [s[p] for s in ser.second_atoms.values()]
        if p % 2:
            if not all(_is_zero(x) for x in parts):
                raise SeriesError(f"odd order rho^{p} does not vanish")
            continue
        atoms = {m: s[p] for m, s in ser.second_atoms.items() if not _is_zero(s[p])}
        if _is_zero(u0):
            # Phi_m(0) is rational: fold the atoms into the rational part
            rat = ser.second_rational[p]
            for m, r in atoms.items():
                rat = rat + r.scale(phi_atom_at_zero(m))
            out.append((p, WeakFieldCoefficient(p, ser.first[p], rat, {}, u0)))
        else:
            out.append((p, WeakFieldCoefficient(p, ser.first[p], ser.second_rational[p], atoms, u0)))
    return out


# ---------------------------------------------------------------------------
# numeric evaluation

def numeric_integrand(order: int, w, wp, wh, wb, A_def="e1-tanh") -> tuple[np.ndarray, np.ndarray]:
    """Float values of the rho^order coefficient's two terms at sample points."""
    X = [np.asarray(x, dtype=float) for x in (w, wp, wh, wb)]
    ser = integrand_series(order, X, A_def)
    f1 = np.broadcast_to(np.asarray(ser.first[order], dtype=float), X[0].shape)
    f2 = np.asarray(ser.second_rational[order], dtype=float)
    u0 = np.asarray(ser.u0, dtype=float)
    for m, s in ser.second_atoms.items():
        c = s[order]
        if _is_zero(c):
            continue
        f2 = f2 + c * phi_atom(u0, m)
    return f1, np.broadcast_to(f2, X[0].shape)
