"""Weak-field coefficients of Euler-Heisenberg Lagrangians and quadrature.

Exact pieces: Bernoulli numbers, the one- and two-loop 2D coefficients and the
one-loop 4D coefficient table.  Float pieces: closed forms of the 2D one- and
two-loop Lagrangians (own Stirling-type evaluation of log-gamma and digamma
remainders), the Schwinger pair-creation sum, tanh-sinh product quadrature
over the positive orthant and the simplex, and the diagram-B coefficient
pipeline :func:`gamma_b`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Callable, Sequence

import numpy as np

from feyninv.errors import ConvergenceError, PreconditionError

# ---------------------------------------------------------------------------
# Bernoulli numbers

_TANGENT: list[int] = [0]  # T_1, T_2, ... stored from index 1
_BERN_EVEN: dict[int, Fraction] = {}


def _extend_tangent(n: int) -> None:
    """Tangent numbers T_1..T_n by the in-place recurrence of Brent and Harvey."""
    have = len(_TANGENT) - 1
    if have >= n:
        return
    T = [0] * (n + 1)
    T[1] = 1
    for k in range(2, n + 1):
        T[k] = (k - 1) * T[k - 1]
    for k in range(2, n + 1):
        for j in range(k, n + 1):
            T[j] = (j - k) * T[j - 1] + (j - k + 2) * T[j]
    _TANGENT[:] = T


def bernoulli(n: int) -> Fraction:
    """Exact B_n with B_1 = -1/2."""
    if n < 0:
        raise PreconditionError("Bernoulli index must be non-negative")
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(-1, 2)
    if n & 1:
        return Fraction(0)
    k = n // 2
    if k not in _BERN_EVEN:
        if len(_TANGENT) - 1 < k:
            _extend_tangent(max(k, 2 * (len(_TANGENT) - 1), 16))
        four = 4 ** k
        _BERN_EVEN[k] = Fraction((-1) ** (k - 1) * 2 * k * _TANGENT[k], four * (four - 1))
    return _BERN_EVEN[k]


def bernoulli_recurrence(n: int) -> list[Fraction]:
    """B_0..B_n from sum_{k<=m} C(m+1, k) B_k = 0; slow reference implementation."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(comb(m + 1, k) * B[k] for k in range(m)) / (m + 1))
    return B


# ---------------------------------------------------------------------------
# 2D weak-field coefficients

def c1_2d(n: int) -> Fraction:
    if n < 1:
        raise PreconditionError("n must be >= 1")
    return (-1) ** (n + 1) * bernoulli(2 * n) / (4 * n * (2 * n - 1))


def c2_2d(n: int) -> Fraction:
    """Two-loop coefficient with the coupling factor stripped."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    return (-1) ** (n + 1) * Fraction(1, 8) * Fraction(2 * n - 1, 2 * n) * bernoulli(2 * n)


def ratio_2loop_1loop(n: int) -> float:
    """c2_2d(n) / c1_2d(n + 1), which tends to pi^2."""
    return float(c2_2d(n) / c1_2d(n + 1))


def series_terms_1loop(kappa, nmax: int) -> list[Fraction]:
    """Terms of the one-loop weak-field series at ``kappa`` (m^2 = 1), exactly.

    Term n is ``(1/(2 pi)) c1(n) (i kappa)^(-2n)`` without the 1/pi factor,
    i.e. multiply the sum by 1/pi.
    """
    kappa = Fraction(kappa)
    return [Fraction(1, 2) * c1_2d(n) * (-1) ** n / kappa ** (2 * n) for n in range(1, nmax + 1)]


def series_terms_2loop(kappa, nmax: int) -> list[Fraction]:
    """Terms of the two-loop series, coupling stripped; multiply the sum by 1/pi."""
    kappa = Fraction(kappa)
    return [Fraction(1, 2) * (-c2_2d(n)) * (-1) ** n / kappa ** (2 * n) for n in range(1, nmax + 1)]


def optimal_truncation(terms: Sequence[Fraction]) -> tuple[float, int]:
    """Partial sum up to (excluding) the smallest-magnitude term, and that index."""
    mags = [abs(t) for t in terms]
    k = min(range(len(mags)), key=mags.__getitem__)
    return float(sum(terms[:k], Fraction(0))), k


# ---------------------------------------------------------------------------
# Stirling-type remainders

_SHIFT_TO = 20.0
_NTERMS = 14


def _stirling_remainder_large(x: float) -> float:
    """sum_k B_2k / (2k (2k-1) x^(2k-1)) for x >= 20."""
    s = 0.0
    for k in range(_NTERMS, 0, -1):
        s += float(bernoulli(2 * k)) / (2 * k * (2 * k - 1)) / x ** (2 * k - 1)
    return s


def stirling_remainder(x: float) -> float:
    """log Gamma(x) - (x - 1/2) log x + x - log(2 pi)/2, stable for large x."""
    if x <= 0:
        raise PreconditionError("argument must be positive")
    acc = 0.0
    while x < _SHIFT_TO:
        acc += (x + 0.5) * math.log1p(1.0 / x) - 1.0
        x += 1.0
    return acc + _stirling_remainder_large(x)


def psi_tilde(x: float) -> float:
    """psi(x) - log x + 1/(2x)."""
    if x <= 0:
        raise PreconditionError("argument must be positive")
    acc = 0.0
    while x < _SHIFT_TO:
        acc += math.log1p(1.0 / x) - 0.5 / x - 0.5 / (x + 1.0)
        x += 1.0
    s = 0.0
    for k in range(_NTERMS, 0, -1):
        s -= float(bernoulli(2 * k)) / (2 * k) / x ** (2 * k)
    return acc + s


def psi_tilde_prime(x: float) -> float:
    if x <= 0:
        raise PreconditionError("argument must be positive")
    acc = 0.0
    while x < _SHIFT_TO:
        acc += -1.0 / (x * (x + 1.0)) + 0.5 / x ** 2 + 0.5 / (x + 1.0) ** 2
        x += 1.0
    s = 0.0
    for k in range(_NTERMS, 0, -1):
        s += float(bernoulli(2 * k)) / x ** (2 * k + 1)
    return acc + s


def log_gamma(x: float) -> float:
    return stirling_remainder(x) + (x - 0.5) * math.log(x) - x + 0.5 * math.log(2 * math.pi)


def digamma(x: float) -> float:
    return psi_tilde(x) + math.log(x) - 0.5 / x


EULER_GAMMA = 0.5772156649015329


def ehl_2d_1loop(kappa: float, m2: float = 1.0) -> float:
    """-(m^2/4pi)(1/kappa)[log Gamma(kappa) - kappa(log kappa - 1) + log(kappa/2pi)/2]."""
    if kappa <= 0:
        raise PreconditionError("kappa must be positive")
    return -m2 / (4 * math.pi) / kappa * stirling_remainder(kappa)


def ehl_2d_2loop_field(kappa: float, m2: float = 1.0) -> float:
    """Field-dependent two-loop part with the coupling stripped."""
    if kappa <= 0:
        raise PreconditionError("kappa must be positive")
    return m2 / (16 * math.pi) * (psi_tilde(kappa) + kappa * psi_tilde_prime(kappa))


def ehl_2d_2loop(kappa: float, lambda0_const: float | None = None, m2: float = 1.0) -> float:
    """Two-loop 2D Lagrangian, coupling stripped.

    ``lambda0_const`` is the whole additive block log(lambda0 m^2) + gamma + 2;
    by default lambda0 = 1.
    """
    if lambda0_const is None:
        lambda0_const = math.log(m2) + EULER_GAMMA + 2.0
    return ehl_2d_2loop_field(kappa, m2) + m2 / (16 * math.pi) * lambda0_const


# ---------------------------------------------------------------------------
# Schwinger pair creation

@dataclass(frozen=True)
class SchwingerSum:
    value: float
    tail_bound: float
    terms: tuple


def schwinger_im(beta: float, kmax: int = 50, m4: float = 1.0) -> SchwingerSum:
    """(m^4/8pi^3) beta^2 sum_{k<=kmax} exp(-pi k/beta)/k^2 with a tail bound."""
    if beta <= 0:
        raise PreconditionError("beta must be positive")
    if kmax < 1:
        raise PreconditionError("kmax must be >= 1")
    pref = m4 / (8 * math.pi ** 3) * beta ** 2
    terms = tuple(pref * math.exp(-math.pi * k / beta) / k ** 2 for k in range(1, kmax + 1))
    q = math.exp(-math.pi / beta)
    lead = math.exp(-math.pi * (kmax + 1) / beta)
    geometric = lead / ((kmax + 1) ** 2 * (1 - q)) if q < 1 else math.inf
    tail = pref * min(lead * math.pi ** 2 / 6, geometric)
    return SchwingerSum(math.fsum(terms), tail, terms)


# ---------------------------------------------------------------------------
# one-loop 4D coefficients

def _coth_coeff(k: int) -> Fraction:
    return Fraction(2 ** (2 * k)) * bernoulli(2 * k) / factorial(2 * k)


def ehl_4d_1loop_coeffs(k: int, l: int) -> Fraction:
    """Rational r with c_kl = r / pi^2 (e = m = 1) in L = sum c_kl a^2k b^2l."""
    if k < 0 or l < 0:
        raise PreconditionError("indices must be non-negative")
    if k + l < 2:
        raise PreconditionError("orders with k + l < 2 are removed by the subtraction terms")
    dk = _coth_coeff(k)
    dl = (-1) ** l * _coth_coeff(l)
    return -Fraction(1, 8) * dk * dl * factorial(2 * (k + l) - 3)


# ---------------------------------------------------------------------------
# quadrature

@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    levels: tuple = ()
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"value": self.value, "error": self.error_estimate, "evaluations": self.evaluations}
        out.update(self.details)
        return out


def tanh_sinh_rule(h: float, tmax: float = 4.0):
    """Nodes u in (0,1), their complements 1-u and weights for step h."""
    t = np.arange(-math.floor(tmax / h), math.floor(tmax / h) + 1) * h
    s = 0.5 * math.pi * np.sinh(t)
    with np.errstate(over="ignore", under="ignore"):
        u = 1.0 / (1.0 + np.exp(-2 * s))
        um = 1.0 / (1.0 + np.exp(2 * s))
        wt = 0.5 * h * 0.5 * math.pi * np.cosh(t) / np.cosh(s) ** 2
    keep = (u > 0) & (um > 0) & (wt > 0) & np.isfinite(wt)
    return u[keep], um[keep], wt[keep]


def _orthant_level(f, dims: int, h: float, tmax: float) -> tuple[float, int]:
    _, um, wt = tanh_sinh_rule(h, tmax)
    x = -np.log(um)
    n = len(x)
    grids = np.meshgrid(*([x] * (dims - 1)), indexing="ij")
    wgrids = np.meshgrid(*([wt] * (dims - 1)), indexing="ij")
    inner_x = np.stack([g.ravel() for g in grids], axis=1) if dims > 1 else np.zeros((1, 0))
    inner_w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1) if dims > 1 else np.ones(1)
    parts = []
    for i in range(n):
        pts = np.empty((inner_x.shape[0], dims))
        pts[:, 0] = x[i]
        pts[:, 1:] = inner_x
        vals = np.asarray(f(pts), dtype=float)
        parts.append(wt[i] * float(np.dot(inner_w, vals)))
    return math.fsum(parts), n ** dims


def quad_nd(
    f: Callable[[np.ndarray], np.ndarray],
    dims: int,
    tol: float = 1e-8,
    max_evals: int | None = None,
    h0: float = 0.5,
    tmax: float = 4.0,
    max_levels: int = 6,
) -> QuadratureResult:
    """Integral of f(x) exp(-sum x) over the positive orthant.

    Each axis is mapped by u = 1 - exp(-x), which cancels the weight, and the
    unit cube is integrated with a tensor tanh-sinh rule whose step is halved
    until successive levels agree to ``tol`` (relative, with ``tol`` as
    absolute floor).  ``f`` receives an (N, dims) array of x values.
    """
    if dims < 1:
        raise PreconditionError("dims must be >= 1")
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    if max_evals is None:
        max_evals = 10 ** 7 if dims <= 3 else 10 ** 8
    evals = 0
    prev = None
    values = []
    h = h0
    for _ in range(max_levels):
        n_nodes = len(tanh_sinh_rule(h, tmax)[0])
        if evals + n_nodes ** dims > max_evals:
            break
        val, used = _orthant_level(f, dims, h, tmax)
        evals += used
        values.append(val)
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * max(1.0, abs(val)):
                return QuadratureResult(val, err, evals, tuple(values))
        prev = val
        h /= 2
    err = abs(values[-1] - values[-2]) if len(values) > 1 else math.inf
    raise ConvergenceError(
        f"quadrature did not reach tol={tol:g} within {evals} evaluations (last estimate {values[-1] if values else float('nan'):.12g}, error {err:.3g})"
    )


def simplex_level(f, h: float, tmax: float = 4.0, threads: int = 1) -> tuple[float, int]:
    """Integral over the 3-simplex {w+wp+wh+wb = 1} in (w, wp, wh) measure.

    Uses w = u1, wp = (1-u1) u2, wh = (1-u1)(1-u2) u3, wb = (1-u1)(1-u2)(1-u3)
    with Jacobian (1-u1)^2 (1-u2) and a tanh-sinh product rule; ``f`` takes
    four arrays and returns an array.  Slices in u1 may run on ``threads``
    worker threads; partial sums are combined in a fixed order.
    """
    u, um, wt = tanh_sinh_rule(h, tmax)
    U2, U3 = np.meshgrid(u, u, indexing="ij")
    V2, V3 = np.meshgrid(um, um, indexing="ij")
    W2, W3 = np.meshgrid(wt, wt, indexing="ij")
    W23 = (W2 * W3).ravel()
    U2, U3, V2, V3 = U2.ravel(), U3.ravel(), V2.ravel(), V3.ravel()

    def slice_sum(i):
        r1 = um[i]
        w = np.full_like(U2, u[i])
        wp = r1 * U2
        wh = r1 * V2 * U3
        wb = r1 * V2 * V3
        jac = r1 * r1 * V2
        vals = f(w, wp, wh, wb)
        return wt[i] * float(np.dot(W23, jac * vals))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(slice_sum, range(len(u))))
    else:
        parts = [slice_sum(i) for i in range(len(u))]
    return math.fsum(parts), len(u) ** 3


def simplex_quad(f, tol: float = 1e-10, h0: float = 0.25, tmax: float = 4.0, max_levels: int = 4,
                 max_evals: int = 10 ** 8, threads: int = 1) -> QuadratureResult:
    prev = None
    values = []
    evals = 0
    h = h0
    for _ in range(max_levels):
        n = len(tanh_sinh_rule(h, tmax)[0])
        if evals + n ** 3 > max_evals:
            break
        val, used = simplex_level(f, h, tmax, threads)
        evals += used
        values.append(val)
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return QuadratureResult(val, abs(val - prev), evals, tuple(values))
        prev = val
        h /= 2
    err = abs(values[-1] - values[-2]) if len(values) > 1 else math.inf
    raise ConvergenceError(f"simplex quadrature did not reach tol={tol:g} (estimate {values[-1]:.12g}, error {err:.3g})")


# ---------------------------------------------------------------------------
# zeta(3) and reference values

def zeta3() -> float:
    """Apery-type series sum (-1)^(k+1) (k!)^2 / ((2k)! k^3) * 5/2."""
    s = Fraction(0)
    for k in range(1, 30):
        s += Fraction((-1) ** (k + 1) * factorial(k) ** 2, factorial(2 * k) * k ** 3)
    return float(s * Fraction(5, 2))


def gamma_b_reference(n: int) -> float | None:
    z = zeta3()
    if n == 0:
        return -1.5 + 1.75 * z
    if n == 1:
        return -251 / 120 + 35 / 16 * z
    return None


# ---------------------------------------------------------------------------
# diagram-B coefficients

def _homogeneous_degrees(order: int) -> tuple[int, int]:
    """Degrees of the rho^order coefficients of the two integrand terms."""
    return order - 3, order - 1


def gamma_b_raw(n: int, A_def: str = "e1-tanh", tol: float = 1e-9, h0: float = 0.125, max_levels: int = 3,
                threads: int = 1) -> QuadratureResult:
    """Integral over the positive orthant of exp(-a) times the rho^(2n) coefficient.

    Both integrand pieces are homogeneous, so the 4-fold integral is
    Gamma(4 + d) times a simplex integral, done by tanh-sinh quadrature.
    """
    from feyninv.seriesengine import numeric_integrand

    if n < 0:
        raise PreconditionError("n must be non-negative")
    order = 2 * n
    d1, d2 = _homogeneous_degrees(order)
    k1 = math.gamma(4 + d1)
    k2 = math.gamma(4 + d2)

    def both(w, wp, wh, wb):
        f1, f2 = numeric_integrand(order, w, wp, wh, wb, A_def=A_def)
        return k1 * f1 + k2 * f2

    return simplex_quad(both, tol=tol, h0=h0, max_levels=max_levels, threads=threads)


PSLQ_BASIS = ("1", "zeta3")


def identify_zeta3(value: float, tol: float = 1e-9, maxcoeff: int = 100000):
    """Integer relation value = p + q zeta(3) via PSLQ, or None (needs mpmath)."""
    try:
        import mpmath as mp
    except ImportError:  # pragma: no cover
        return None
    mp.mp.dps = 30
    rel = mp.pslq([mp.mpf(value), 1, mp.zeta(3)], tol=tol, maxcoeff=maxcoeff, maxsteps=10 ** 6)
    if not rel or rel[0] == 0:
        return None
    d = rel[0]
    return (Fraction(-rel[1], d), Fraction(-rel[2], d))


def fit_rational_pi_factor(target: float, raw: float, max_den: int = 64, powers: Sequence[int] = range(-3, 4),
                           rel_tol: float = 5e-3):
    """Simplest factor c = (p/q) pi^k with |raw * c - target| <= rel_tol |target|.

    Simplicity is |p| + q, then |k|.  Returns (Fraction, k, rel_err).
    """
    if raw == 0 or target == 0:
        raise ConvergenceError("cannot normalise a zero value")
    best = None
    for k in powers:
        x = target / raw / math.pi ** k
        for q in range(1, max_den + 1):
            p = round(x * q)
            if p == 0:
                continue
            frac = Fraction(p, q)
            err = abs(float(frac) * math.pi ** k * raw - target) / abs(target)
            if err > rel_tol:
                continue
            cand = (abs(frac.numerator) + frac.denominator, abs(k), err, frac, k)
            if best is None or cand[:3] < best[:3]:
                best = cand
    if best is None:
        raise ConvergenceError(f"no factor (p/q) pi^k with q <= {max_den} within {rel_tol:g}")
    _, _, err, frac, k = best
    return frac, k, err


@dataclass(frozen=True)
class GammaBResult:
    n: int
    raw: QuadratureResult
    convention_sign: int
    normalization: tuple | None
    value: float | None
    reference: float | None
    identified: tuple | None

    def as_dict(self) -> dict:
        out = {
            "n": self.n,
            "raw": self.raw.value,
            "raw_error": self.raw.error_estimate,
            "evaluations": self.raw.evaluations,
            "sign_convention": self.convention_sign,
        }
        if self.normalization is not None:
            frac, k, err = self.normalization
            out["normalization"] = {"rational": str(frac), "pi_power": k, "fit_rel_error": err}
        if self.value is not None:
            out["value"] = self.value
            if self.normalization is not None:
                out["error"] = self.raw.error_estimate * abs(float(frac)) * math.pi ** k
        else:
            out["error"] = self.raw.error_estimate
        if self.reference is not None:
            out["reference"] = self.reference
        if self.identified is not None:
            out["identified"] = {"rational": str(self.identified[0]), "zeta3": str(self.identified[1])}
        return out


def gamma_b(n: int, A_def: str = "e1-tanh", tol: float = 1e-9, normalize: bool = True,
            identify: bool = False, h0: float = 0.125, max_levels: int = 3,
            raw0: QuadratureResult | None = None, threads: int = 1) -> GammaBResult:
    """Diagram-B weak-field coefficient n.

    The raw orthant integral carries the alternating sign (-1)^n of the
    (i kappa)^(-2n) expansion.  The overall constant is a single rational
    times a power of pi, fitted once at n = 0 against the closed form there;
    for n >= 1 it is a prediction.
    """
    raw = gamma_b_raw(n, A_def, tol, h0, max_levels, threads)
    sign = (-1) ** n
    norm = None
    value = None
    if normalize:
        if n == 0:
            r0 = raw
        else:
            r0 = raw0 or gamma_b_raw(0, A_def, tol, h0, max_levels, threads)
        norm = fit_rational_pi_factor(gamma_b_reference(0), r0.value)
        frac, k, _ = norm
        value = sign * raw.value * float(frac) * math.pi ** k
    ident = identify_zeta3(sign * raw.value) if identify else None
    return GammaBResult(n, raw, sign, norm, value, gamma_b_reference(n), ident)
