"""Finite groups of signed variable permutations acting on polynomials.

A group element ``g`` maps variable ``x_i`` to ``s_i * x_{pi(i)}`` and acts on
polynomials by ``(g.P)(X) = P(g.X)``.  A character (a homomorphism to +-1)
can be attached by name; ``"trivial"`` always exists.  Everything here is
exact: Reynolds projection, Molien series, the graded invariant spaces and the
rewriting of (semi-)invariants over primary/secondary generators.

The dihedral group acting on ``(w, wp, wh, wb)`` gets dedicated helpers:
:func:`d4_group`, :func:`d4_basis` and :func:`wtilde_expand`, which writes a
D4 semi-invariant as a polynomial in ``wtilde`` whose coefficients are
polynomials in ``a, v, h`` plus ``j`` times such polynomials.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence

from feyninv.errors import (
    BoundExceededError,
    NonUniqueError,
    NotInSpanError,
    ParseError,
    PreconditionError,
    RingMismatchError,
    SymmetryError,
)
from feyninv.polyring import Polynomial, _grlex_key

MAX_CLOSURE = factorial(10)
MAX_DEGREE = 12


@dataclass(frozen=True)
class SignedPermutation:
    """``x_i -> signs[i] * x_{perm[i]}``."""

    perm: tuple
    signs: tuple

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls(tuple(range(n)), (1,) * n)

    @classmethod
    def from_images(cls, ring: Sequence[str], images: Mapping[str, str]) -> "SignedPermutation":
        """Build from ``{"w": "wh", "wh": "-w"}``; unmapped variables are fixed."""
        ring = tuple(ring)
        perm, signs = [], []
        for v in ring:
            img = images.get(v, v).strip()
            sign = 1
            if img.startswith("-"):
                sign, img = -1, img[1:].strip()
            if img not in ring:
                raise PreconditionError(f"image {img!r} is not a ring variable")
            perm.append(ring.index(img))
            signs.append(sign)
        if sorted(perm) != list(range(len(ring))):
            raise PreconditionError("images do not form a permutation of the variables")
        return cls(tuple(perm), tuple(signs))

    def __len__(self) -> int:
        return len(self.perm)

    def compose(self, other: "SignedPermutation") -> "SignedPermutation":
        """Matrix product ``self @ other`` of the underlying linear maps."""
        perm = tuple(other.perm[self.perm[i]] for i in range(len(self)))
        signs = tuple(self.signs[i] * other.signs[self.perm[i]] for i in range(len(self)))
        return SignedPermutation(perm, signs)

    def cycles(self) -> list[tuple[tuple, int]]:
        """Cycles of the underlying permutation with the product of their signs."""
        seen = set()
        out = []
        for s in range(len(self)):
            if s in seen:
                continue
            cyc, eps, x = [], 1, s
            while x not in seen:
                seen.add(x)
                cyc.append(x)
                eps *= self.signs[x]
                x = self.perm[x]
            out.append((tuple(cyc), eps))
        return out

    def act(self, p: Polynomial) -> Polynomial:
        n = len(self)
        if p.nvars != n:
            raise PreconditionError(f"group element on {n} variables cannot act on ring {p.ring}")
        out = {}
        for e, c in p.items():
            ne = [0] * n
            sign = 1
            for i, k in enumerate(e):
                if k:
                    ne[self.perm[i]] += k
                    if self.signs[i] < 0 and k & 1:
                        sign = -sign
            out[tuple(ne)] = c if sign > 0 else -c
        return Polynomial._raw(p.ring, out)

    def describe(self, ring: Sequence[str]) -> str:
        return ", ".join(
            f"{ring[i]}->{'-' if s < 0 else ''}{ring[t]}" for i, (t, s) in enumerate(zip(self.perm, self.signs))
        )


@dataclass
class GroupAction:
    ring: tuple
    elements: list
    generators: list
    characters: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.elements)

    def character(self, character=None) -> tuple:
        if character is None:
            return (1,) * self.order
        if isinstance(character, str):
            try:
                return self.characters[character]
            except KeyError:
                raise PreconditionError(f"unknown character {character!r}; known: {sorted(self.characters)}") from None
        chi = tuple(int(c) for c in character)
        if len(chi) != self.order or any(c not in (1, -1) for c in chi):
            raise PreconditionError("character must assign +1 or -1 to every group element")
        return chi

    def _check_ring(self, p: Polynomial):
        if p.ring != self.ring:
            raise RingMismatchError(self.ring, p.ring, "group action")


def act(g: SignedPermutation, p: Polynomial) -> Polynomial:
    return g.act(p)


def group_closure(
    ring: Sequence[str],
    generators: Sequence[SignedPermutation],
    generator_characters: Mapping[str, Sequence[int]] | None = None,
    limit: int = MAX_CLOSURE,
) -> GroupAction:
    """Breadth-first closure; characters are given by their generator values."""
    ring = tuple(ring)
    n = len(ring)
    gens = list(generators)
    for g in gens:
        if len(g) != n:
            raise PreconditionError("generator size does not match the ring")
    chars = {"trivial": [1] * len(gens)}
    for name, vals in (generator_characters or {}).items():
        vals = list(vals)
        if len(vals) != len(gens) or any(v not in (1, -1) for v in vals):
            raise PreconditionError(f"character {name!r} needs one +-1 value per generator")
        chars[name] = vals
    ident = SignedPermutation.identity(n)
    values = {ident: {name: 1 for name in chars}}
    order = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for gi, g in enumerate(gens):
                y = g.compose(x)
                vals = {name: chars[name][gi] * values[x][name] for name in chars}
                if y in values:
                    if values[y] != vals:
                        bad = [nm for nm in chars if values[y][nm] != vals[nm]]
                        raise SymmetryError(f"character {bad[0]!r} is not a homomorphism on this group")
                    continue
                values[y] = vals
                order.append(y)
                nxt.append(y)
                if len(order) > limit:
                    raise BoundExceededError(f"group closure exceeds {limit} elements")
        frontier = nxt
    characters = {name: tuple(values[x][name] for x in order) for name in chars}
    return GroupAction(ring, order, gens, characters)


_GEN_RE = re.compile(r"^\s*(-?)\s*([A-Za-z_][A-Za-z0-9_']*)\s*->\s*(-?)\s*([A-Za-z_][A-Za-z0-9_']*)\s*$")


def parse_group(text: str) -> GroupAction:
    """Parse a generator file.

    Optional header ``vars: ...`` fixes the ring; each further line is one
    generator such as ``w->wh, wh->w`` optionally followed by ``; sign=-1``
    style character values.  ``#`` starts a comment.
    """
    ring = None
    gens_raw = []
    char_vals: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if line.strip().startswith("vars:"):
            ring = tuple(line.split(":", 1)[1].split())
            continue
        body, _, tail = line.partition(";")
        images = {}
        col = 1
        for part in body.split(","):
            m = _GEN_RE.match(part)
            if not m:
                raise ParseError(f"expected 'var->image', got {part.strip()!r}", lineno, col)
            if m.group(1):
                raise ParseError("source variables cannot carry a sign", lineno, col)
            images[m.group(2)] = m.group(3) + m.group(4)
            col += len(part) + 1
        gens_raw.append((lineno, images))
        for item in tail.split(","):
            if not item.strip():
                continue
            name, eq, val = item.partition("=")
            if not eq or val.strip() not in ("1", "+1", "-1"):
                raise ParseError(f"bad character value {item.strip()!r}", lineno, len(body) + 2)
            char_vals.setdefault(name.strip(), {})[len(gens_raw) - 1] = int(val.strip())
    if not gens_raw:
        raise ParseError("no generators found", 1, 1)
    if ring is None:
        seen: list = []
        for _, images in gens_raw:
            for k, v in images.items():
                for name in (k, v.lstrip("-")):
                    if name not in seen:
                        seen.append(name)
        ring = tuple(seen)
    gens = []
    for lineno, images in gens_raw:
        try:
            gens.append(SignedPermutation.from_images(ring, images))
        except PreconditionError as exc:
            raise ParseError(str(exc), lineno, 1) from None
    chars = {name: [vals.get(i, 1) for i in range(len(gens))] for name, vals in char_vals.items()}
    return group_closure(ring, gens, chars)


# ---------------------------------------------------------------------------
# projections and tests

def reynolds(G: GroupAction, p: Polynomial, character=None) -> Polynomial:
    G._check_ring(p)
    chi = G.character(character)
    acc: dict = {}
    for g, c in zip(G.elements, chi):
        for e, v in g.act(p).items():
            acc[e] = acc.get(e, 0) + (v if c > 0 else -v)
    k = Fraction(1, G.order)
    return Polynomial(G.ring, {e: v * k for e, v in acc.items()})


def is_semi_invariant(G: GroupAction, p: Polynomial, character=None) -> bool:
    G._check_ring(p)
    chi = G.character(character)
    return all(g.act(p) == (p if c > 0 else -p) for g, c in zip(G.elements, chi))


def monomials_of_degree(n: int, d: int) -> list[tuple]:
    out = []
    for cut in itertools.combinations(range(d + n - 1), n - 1):
        prev = -1
        e = []
        for c in cut + (d + n - 1,):
            e.append(c - prev - 1)
            prev = c
        out.append(tuple(e))
    return sorted(out, reverse=True)


class _Echelon:
    """Incremental exact row echelon form over sparse vectors.

    Each stored row remembers its expression in terms of the inserted vectors,
    so the structure doubles as a solver for ``sum c_i v_i = target``.
    """

    def __init__(self, key=_grlex_key):
        self.key = key
        self.rows: dict = {}  # pivot monomial -> (vector, combination)
        self.count = 0

    def _reduce(self, vec: dict, comb: dict) -> tuple[dict, dict]:
        vec = dict(vec)
        comb = dict(comb)
        while vec:
            lead = max(vec, key=self.key)
            row = self.rows.get(lead)
            if row is None:
                break
            rv, rc = row
            f = vec[lead] / rv[lead]
            for e, c in rv.items():
                x = vec.get(e, 0) - f * c
                if x:
                    vec[e] = x
                else:
                    vec.pop(e, None)
            for i, c in rc.items():
                x = comb.get(i, 0) - f * c
                if x:
                    comb[i] = x
                else:
                    comb.pop(i, None)
        return vec, comb

    def insert(self, vec: dict) -> bool:
        """Add a vector; returns False if it was linearly dependent."""
        idx = self.count
        self.count += 1
        r, comb = self._reduce(vec, {idx: Fraction(1)})
        if not r:
            return False
        self.rows[max(r, key=self.key)] = (r, comb)
        return True

    def solve(self, target: dict) -> dict | None:
        r, comb = self._reduce(target, {})
        if r:
            return None
        return {i: -c for i, c in comb.items()}


def invariant_space(G: GroupAction, degree: int, character=None, max_degree: int = MAX_DEGREE) -> list[Polynomial]:
    if degree < 0:
        raise PreconditionError("degree must be non-negative")
    if degree > max_degree:
        raise BoundExceededError(f"degree {degree} exceeds the configured bound {max_degree}")
    n = len(G.ring)
    ech = _Echelon()
    seen = set()
    for e in monomials_of_degree(n, degree):
        r = reynolds(G, Polynomial._raw(G.ring, {e: Fraction(1)}), character)
        if r.is_zero() or r in seen:
            continue
        seen.add(r)
        ech.insert(r.terms)
    # back-substitute into reduced row echelon form for a canonical basis
    pivots = sorted(ech.rows, key=_grlex_key, reverse=True)
    rows = {pv: dict(ech.rows[pv][0]) for pv in pivots}
    for pv in pivots:
        lead = rows[pv][pv]
        rows[pv] = {e: c / lead for e, c in rows[pv].items()}
    for pv in pivots:
        for other in pivots:
            if other == pv or pv not in rows[other]:
                continue
            f = rows[other][pv]
            for e, c in rows[pv].items():
                x = rows[other].get(e, 0) - f * c
                if x:
                    rows[other][e] = x
                else:
                    rows[other].pop(e, None)
    return [Polynomial(G.ring, rows[pv]) for pv in pivots]


def molien_series(G: GroupAction, through: int, character=None) -> list[Fraction]:
    """Coefficients of t^0..t^through of (1/|G|) sum chi(g)/det(1 - t M_g)."""
    chi = G.character(character)
    total = [Fraction(0)] * (through + 1)
    for g, c in zip(G.elements, chi):
        series = [Fraction(0)] * (through + 1)
        series[0] = Fraction(1)
        for cyc, eps in g.cycles():
            L = len(cyc)
            # multiply by 1/(1 - eps t^L)
            for d in range(L, through + 1):
                series[d] += eps * series[d - L]
        for d in range(through + 1):
            total[d] += c * series[d]
    return [x / G.order for x in total]


def molien_dimension(G: GroupAction, degree: int, character=None) -> int:
    v = molien_series(G, degree, character)[degree]
    if v.denominator != 1 or v < 0:
        raise SymmetryError(f"Molien coefficient {v} is not a non-negative integer")
    return int(v)


# ---------------------------------------------------------------------------
# algebraic independence

def jacobian_matrix(polys: Sequence[Polynomial]) -> list[list[Polynomial]]:
    ring = polys[0].ring
    for p in polys:
        if p.ring != ring:
            raise RingMismatchError(ring, p.ring, "jacobian")
    return [[p.partial(v) for v in ring] for p in polys]


def _det_fraction(m: list[list[Fraction]]) -> Fraction:
    m = [row[:] for row in m]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if f:
                for k in range(col, n):
                    m[r][k] -= f * m[col][k]
    return det


def symbolic_determinant(m: list[list[Polynomial]]) -> Polynomial:
    n = len(m)
    if n == 1:
        return m[0][0]
    ring = m[0][0].ring
    total = Polynomial.zero(ring)
    for j in range(n):
        if m[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * symbolic_determinant(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def jacobian_independent(polys: Sequence[Polynomial], tries: int = 3, seed: int = 0, symbolic_max: int = 4) -> bool:
    """Decide whether the Jacobian determinant of a square system is nonzero."""
    polys = list(polys)
    if not polys:
        raise PreconditionError("empty polynomial list")
    n = len(polys)
    if polys[0].nvars != n:
        raise PreconditionError(f"need {polys[0].nvars} polynomials for a square Jacobian, got {n}")
    jac = jacobian_matrix(polys)
    rng = random.Random(seed)
    for _ in range(tries):
        point = {v: Fraction(rng.randint(-997, 997)) for v in polys[0].ring}
        vals = [[entry.evaluate(point) for entry in row] for row in jac]
        if _det_fraction(vals) != 0:
            return True
    if n <= symbolic_max:
        return not symbolic_determinant(jac).is_zero()
    return False


# ---------------------------------------------------------------------------
# rewriting over primary and secondary generators

@dataclass
class HironakaDecomposition:
    primaries: list
    secondaries: list
    coefficients: list
    y_ring: tuple

    def reconstruct(self) -> Polynomial:
        ring = self.primaries[0].ring
        bindings = dict(zip(self.y_ring, self.primaries))
        total = Polynomial.zero(ring)
        for f, s in zip(self.coefficients, self.secondaries):
            if not f.is_zero():
                total = total + f.substitute(bindings) * s
        return total

    def term_count(self) -> int:
        return sum(len(f) for f in self.coefficients)

    def to_json(self) -> dict:
        return {
            "secondaries": [str(s) for s in self.secondaries],
            "coefficients": [{"vars": list(self.y_ring), "poly": str(f)} for f in self.coefficients],
        }


def _weighted_exponents(weights: Sequence[int], total: int) -> list[tuple]:
    """All exponent vectors alpha with sum alpha_k * weights[k] == total."""
    out = []

    def rec(k: int, rem: int, acc: list):
        if k == len(weights):
            if rem == 0:
                out.append(tuple(acc))
            return
        w = weights[k]
        if w == 0:
            raise PreconditionError("primary generators must have positive degree")
        for x in range(rem // w + 1):
            acc.append(x)
            rec(k + 1, rem - x * w, acc)
            acc.pop()

    rec(0, total, [])
    return out


def hironaka_rewrite(
    p: Polynomial,
    primaries: Sequence[Polynomial],
    secondaries: Sequence[Polynomial] | None = None,
    character=None,
    group: GroupAction | None = None,
    check_primaries: bool = True,
    verify: bool = True,
    y_names: Sequence[str] | None = None,
) -> HironakaDecomposition:
    """Write ``p = sum_i f_i(P_1..P_n) S_i`` by a graded exact linear solve.

    Raises :class:`NotInSpanError` if no combination exists and
    :class:`NonUniqueError` if the candidate products in some needed degree are
    linearly dependent.
    """
    primaries = list(primaries)
    secondaries = list(secondaries) if secondaries is not None else [Polynomial.constant(p.ring, 1)]
    for q in primaries + secondaries:
        if q.ring != p.ring:
            raise RingMismatchError(p.ring, q.ring, "hironaka_rewrite")
        if not q.is_homogeneous() or q.is_zero():
            raise PreconditionError("generators must be nonzero homogeneous polynomials")
    if group is not None and not is_semi_invariant(group, p, character):
        raise SymmetryError("input is not semi-invariant for the requested character")
    if check_primaries and len(primaries) == p.nvars and not jacobian_independent(primaries):
        raise PreconditionError("primary generators are algebraically dependent (Jacobian vanishes)")
    y_ring = tuple(y_names) if y_names else tuple(f"y{k + 1}" for k in range(len(primaries)))
    pdeg = [q.total_degree() for q in primaries]
    sdeg = [s.total_degree() for s in secondaries]
    power_cache: dict = {}

    def ppow(k: int, e: int) -> Polynomial:
        key = (k, e)
        if key not in power_cache:
            power_cache[key] = Polynomial.constant(p.ring, 1) if e == 0 else ppow(k, e - 1) * primaries[k]
        return power_cache[key]

    coeffs = [dict() for _ in secondaries]
    for d, part in p.homogeneous_components().items():
        cands = []
        for i, sd in enumerate(sdeg):
            if sd > d:
                continue
            for alpha in _weighted_exponents(pdeg, d - sd):
                prod = secondaries[i]
                for k, e in enumerate(alpha):
                    if e:
                        prod = prod * ppow(k, e)
                cands.append((i, alpha, prod))
        ech = _Echelon()
        for _, _, prod in cands:
            if not ech.insert(prod.terms):
                raise NonUniqueError(f"degree {d}: candidate products are linearly dependent (redundant generators)")
        sol = ech.solve(part.terms)
        if sol is None:
            raise NotInSpanError(f"degree {d} component is not in the span of the generator products")
        for idx, c in sol.items():
            i, alpha, _ = cands[idx]
            coeffs[i][alpha] = coeffs[i].get(alpha, 0) + c
    dec = HironakaDecomposition(primaries, secondaries, [Polynomial(y_ring, c) for c in coeffs], y_ring)
    if verify and dec.reconstruct() != p:
        raise NotInSpanError("back-substitution does not reproduce the input")
    return dec


# ---------------------------------------------------------------------------
# the dihedral group on (w, wp, wh, wb)

D4_RING = ("w", "wp", "wh", "wb")


def d4_group() -> GroupAction:
    """Generated by w<->wh, wp<->wb and (w,wh)<->(wp,wb).

    The ``"sign"`` character is -1 on the pair exchange and +1 on the other two
    generators.
    """
    g1 = SignedPermutation.from_images(D4_RING, {"w": "wh", "wh": "w"})
    g2 = SignedPermutation.from_images(D4_RING, {"wp": "wb", "wb": "wp"})
    g3 = SignedPermutation.from_images(D4_RING, {"w": "wp", "wp": "w", "wh": "wb", "wb": "wh"})
    return group_closure(D4_RING, [g1, g2, g3], {"sign": [1, 1, -1]})


@dataclass(frozen=True)
class D4Basis:
    a: Polynomial
    v: Polynomial
    j: Polynomial
    h: Polynomial
    wtilde: Polynomial

    def as_dict(self) -> dict:
        return {"a": self.a, "v": self.v, "j": self.j, "h": self.h, "wtilde": self.wtilde}


def _d4_polys() -> D4Basis:
    w, wp, wh, wb = Polynomial.gens(D4_RING)
    a = w + wp + wh + wb
    wt = w - wp + wh - wb
    v = 2 * (w * wh + wp * wb) + (w + wh) * (wp + wb)
    j = a * wt - 4 * (w * wh - wp * wb)
    e3 = w * wp * wh + w * wp * wb + w * wh * wb + wp * wh * wb
    h = a * e3 + (w * wh - wp * wb) ** 2
    return D4Basis(a, v, j, h, wt)


_D4_CACHE: dict = {}


def d4_basis(verify: bool = True) -> D4Basis:
    """a, v, j, h and wtilde, with their symmetry and kernel properties checked."""
    if "basis" in _D4_CACHE:
        return _D4_CACHE["basis"]
    basis = _d4_polys()
    if verify:
        from feyninv.ibp import dtilde

        G = d4_group()
        for name in ("a", "v", "h"):
            if not is_semi_invariant(G, getattr(basis, name)):
                raise SymmetryError(f"{name} is not D4-invariant")
        for name in ("j", "wtilde"):
            if not is_semi_invariant(G, getattr(basis, name), "sign"):
                raise SymmetryError(f"{name} is not a sign-character semi-invariant")
        for name in ("a", "v", "j", "h"):
            if not dtilde(getattr(basis, name)).is_zero():
                raise SymmetryError(f"{name} is not annihilated by the signed derivative")
        if dtilde(basis.wtilde) != 4:
            raise SymmetryError("signed derivative of wtilde is not 4")
    _D4_CACHE["basis"] = basis
    return basis


def d4_hironaka_data(character: str = "trivial") -> tuple[list, list]:
    """Primaries (a, v, wtilde^2, h) and the matching secondaries.

    Degrees 1, 2, 2, 4 give 16/8 = 2 secondaries per character: ``1, j*wtilde``
    for invariants and ``wtilde, j`` for sign semi-invariants.
    """
    b = d4_basis()
    primaries = [b.a, b.v, b.wtilde ** 2, b.h]
    one = Polynomial.constant(D4_RING, 1)
    if character in (None, "trivial"):
        secondaries = [one, b.j * b.wtilde]
    elif character == "sign":
        secondaries = [b.wtilde, b.j]
    else:
        raise PreconditionError(f"unknown D4 character {character!r}")
    return primaries, secondaries


# -- fast rewriting in adapted coordinates -------------------------------------

_APQT = ("a", "p", "q", "T")
_AVH = ("a", "v", "h")


def _to_apqt(p: Polynomial) -> Polynomial:
    a, pp, q, T = Polynomial.gens(_APQT)
    quarter = Fraction(1, 4)
    bind = {
        "w": (a + T + 2 * pp) * quarter,
        "wh": (a + T - 2 * pp) * quarter,
        "wp": (a - T + 2 * q) * quarter,
        "wb": (a - T - 2 * q) * quarter,
    }
    return p.substitute(bind)


def _symmetric_to_elementary(g: dict) -> dict:
    """Symmetric polynomial in (P, Q) as polynomial in e1 = P+Q, e2 = PQ."""
    g = dict(g)
    out: dict = {}
    while g:
        (i, k) = max(g, key=lambda e: (e[0] + e[1], e))
        c = g[(i, k)]
        if i < k:
            raise SymmetryError("coefficient polynomial is not symmetric in the squared coordinates")
        out[(i - k, k)] = out.get((i - k, k), 0) + c
        # subtract c * e1^(i-k) * e2^k
        m = i - k
        for r in range(m + 1):
            coef = c * _binom(m, r)
            e = (r + k, m - r + k)
            x = g.get(e, 0) - coef
            if x:
                g[e] = x
            else:
                g.pop(e, None)
    return out


def _binom(n: int, k: int) -> int:
    from math import comb

    return comb(n, k)


@dataclass
class WtildeExpansion:
    """``p = sum_k wtilde^k * (even[k] + j * odd[k])`` with coefficients in (a, v, h)."""

    even: dict
    odd: dict

    def as_polynomial(self) -> Polynomial:
        """The expansion in the ring (a, v, j, h, wt)."""
        ring = ("a", "v", "j", "h", "wt")
        out: dict = {}
        for jpow, part in ((0, self.even), (1, self.odd)):
            for k, c in part.items():
                for (ea, ev, eh), x in c.items():
                    key = (ea, ev, jpow, eh, k)
                    out[key] = out.get(key, 0) + x
        return Polynomial(ring, out)

    def term_count(self) -> int:
        return sum(len(c) for c in self.even.values()) + sum(len(c) for c in self.odd.values())

    def reconstruct(self) -> Polynomial:
        b = d4_basis()
        bind = {"a": b.a, "v": b.v, "j": b.j, "h": b.h, "wt": b.wtilde}
        return self.as_polynomial().substitute(bind)


def wtilde_expand(p: Polynomial, verify: bool = False) -> WtildeExpansion:
    """Rewrite a D4 semi-invariant as a polynomial in wtilde over (a, v, j, h).

    Works in coordinates a, p = w - wh, q = wp - wb, T = wtilde, in which the
    group acts by sign flips of p and q and the exchange (p, q, T) -> (q, p, -T).
    With P = p^2, Q = q^2 one has j = P - Q, P + Q = a^2 - 2v and
    16 h = a^4 - 2 a^2 (P + Q) + j^2, so every symmetric polynomial in P, Q is
    a polynomial in a, v, h and every antisymmetric one is j times such.
    """
    if p.ring != D4_RING:
        raise RingMismatchError(D4_RING, p.ring, "wtilde_expand")
    f = _to_apqt(p)
    slices: dict = {}
    for (ea, ep, eq, eT), c in f.items():
        if ep & 1 or eq & 1:
            raise SymmetryError("input is not invariant under w<->wh and wp<->wb")
        slices.setdefault((ea, eT), {})[(ep // 2, eq // 2)] = c
    a, v, h = Polynomial.gens(_AVH)
    s = a ** 2 - 2 * v
    e2 = (s ** 2 - (16 * h - a ** 4 + 2 * a ** 2 * s)) * Fraction(1, 4)
    sp_cache = {0: Polynomial.constant(_AVH, 1)}
    e2_cache = {0: Polynomial.constant(_AVH, 1)}

    def spow(k):
        if k not in sp_cache:
            sp_cache[k] = spow(k - 1) * s
        return sp_cache[k]

    def e2pow(k):
        if k not in e2_cache:
            e2_cache[k] = e2pow(k - 1) * e2
        return e2_cache[k]

    pq_ring = ("P", "Q")
    jpq = Polynomial(pq_ring, {(1, 0): 1, (0, 1): -1})
    even: dict = {}
    odd: dict = {}
    for (ea, eT), g in sorted(slices.items()):
        swapped = {(k, i): c for (i, k), c in g.items()}
        keys = set(g) | set(swapped)
        sym = {e: (g.get(e, 0) + swapped.get(e, 0)) / 2 for e in keys}
        anti = {e: (g.get(e, 0) - swapped.get(e, 0)) / 2 for e in keys}
        sym = {e: c for e, c in sym.items() if c}
        anti = {e: c for e, c in anti.items() if c}
        for target, part in ((even, sym), (odd, anti)):
            if not part:
                continue
            if target is odd:
                q = Polynomial(pq_ring, part).divide_exact(jpq)
                if q is None:
                    raise SymmetryError("antisymmetric part is not divisible by P - Q")
                part = q.terms
            elem = _symmetric_to_elementary(part)
            acc = Polynomial.zero(_AVH)
            for (m, k), c in elem.items():
                acc = acc + (spow(m) * e2pow(k)).scale(c)
            acc = acc * a ** ea
            target[eT] = target.get(eT, Polynomial.zero(_AVH)) + acc
    even = {k: c for k, c in sorted(even.items()) if not c.is_zero()}
    odd = {k: c for k, c in sorted(odd.items()) if not c.is_zero()}
    exp = WtildeExpansion(even, odd)
    if verify and exp.reconstruct() != p:
        raise NotInSpanError("wtilde expansion does not reproduce the input")
    return exp


def random_polynomial(ring: Sequence[str], max_degree: int, n_terms: int, rng: random.Random, coeff_range: int = 9) -> Polynomial:
    terms = {}
    n = len(ring)
    for _ in range(n_terms):
        d = rng.randint(0, max_degree)
        cut = sorted(rng.randint(0, d) for _ in range(n - 1))
        e = [b - a for a, b in zip([0] + cut, cut + [d])]
        terms[tuple(e)] = Fraction(rng.randint(-coeff_range, coeff_range), rng.randint(1, 4))
    return Polynomial(ring, terms)
