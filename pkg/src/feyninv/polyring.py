"""Exact sparse multivariate polynomials and rational functions over Q.

A :class:`Polynomial` lives in an ordered ring of named variables and maps
exponent tuples to :class:`fractions.Fraction` coefficients.  Zero
coefficients are never stored, so two polynomials over the same ring are equal
exactly when their term maps are equal.  Terms iterate in descending
graded-lexicographic order (total degree first, then lex in the declared
variable order).

Products go through :mod:`feyninv.kernels`: both operands are scaled to
integer coefficients over a common denominator and multiplied on packed
monomial keys, which avoids one gcd per coefficient operation.

Text format::

    vars: w wp wh wb
    -3/2*w^2*wb + 7*wp
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import lcm
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

from feyninv import kernels
from feyninv.errors import ParseError, PreconditionError, RingMismatchError, UnknownVariableError

Exponent = tuple

_SHIFT = 20
_MASK = (1 << _SHIFT) - 1


def _pack(e: Exponent) -> int:
    k = 0
    for x in e:
        k = (k << _SHIFT) | x
    return k


def _unpack(k: int, n: int) -> Exponent:
    out = [0] * n
    for i in range(n - 1, -1, -1):
        out[i] = k & _MASK
        k >>= _SHIFT
    return tuple(out)


def _grlex_key(e: Exponent):
    return (sum(e), e)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


class Polynomial:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("ring", "_terms", "_packed", "_hash", "_sorted")

    def __init__(self, ring: Sequence[str], terms: Mapping[Exponent, object] | None = None):
        ring = tuple(ring)
        if len(set(ring)) != len(ring):
            raise PreconditionError(f"duplicate variable names in ring {ring}")
        n = len(ring)
        clean: dict = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != n or any(x < 0 for x in e):
                raise PreconditionError(f"exponent {e} does not fit ring {ring}")
            c = _as_fraction(c)
            if c:
                clean[e] = clean.get(e, 0) + c
        self.ring = ring
        self._terms = {e: c for e, c in clean.items() if c}
        self._packed = None
        self._hash = None
        self._sorted = None

    @classmethod
    def _raw(cls, ring: tuple, terms: dict) -> "Polynomial":
        p = cls.__new__(cls)
        p.ring = ring
        p._terms = terms
        p._packed = None
        p._hash = None
        p._sorted = None
        return p

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, ring: Sequence[str]) -> "Polynomial":
        return cls._raw(tuple(ring), {})

    @classmethod
    def constant(cls, ring: Sequence[str], value) -> "Polynomial":
        ring = tuple(ring)
        value = _as_fraction(value)
        return cls._raw(ring, {(0,) * len(ring): value} if value else {})

    @classmethod
    def var(cls, ring: Sequence[str], name: str) -> "Polynomial":
        ring = tuple(ring)
        if name not in ring:
            raise UnknownVariableError(f"unknown variable {name!r} for ring {ring}")
        e = [0] * len(ring)
        e[ring.index(name)] = 1
        return cls._raw(ring, {tuple(e): Fraction(1)})

    @classmethod
    def gens(cls, ring: Sequence[str]) -> list["Polynomial"]:
        return [cls.var(ring, v) for v in ring]

    @classmethod
    def monomial(cls, ring: Sequence[str], exps: Exponent, coeff=1) -> "Polynomial":
        return cls(ring, {tuple(exps): coeff})

    # inspection ---------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self) -> list:
        """Terms as ``(exponent, coefficient)`` pairs, descending grlex."""
        if self._sorted is None:
            self._sorted = sorted(self._terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)
        return self._sorted

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self.items())

    @property
    def nvars(self) -> int:
        return len(self.ring)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and (0,) * self.nvars in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def leading_term(self) -> tuple:
        if not self._terms:
            raise PreconditionError("zero polynomial has no leading term")
        return self.items()[0]

    def leading_coefficient(self) -> Fraction:
        return self.leading_term()[1]

    def total_degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def min_degree(self) -> int:
        return min((sum(e) for e in self._terms), default=-1)

    def degree_in(self, var: str) -> int:
        i = self._index(var)
        return max((e[i] for e in self._terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def homogeneous_components(self) -> dict[int, "Polynomial"]:
        parts: dict[int, dict] = {}
        for e, c in self._terms.items():
            parts.setdefault(sum(e), {})[e] = c
        return {d: Polynomial._raw(self.ring, t) for d, t in sorted(parts.items())}

    def variables(self) -> list[str]:
        used = [False] * self.nvars
        for e in self._terms:
            for i, x in enumerate(e):
                if x:
                    used[i] = True
        return [v for v, u in zip(self.ring, used) if u]

    def monomial_content(self) -> Exponent:
        if not self._terms:
            return (0,) * self.nvars
        return tuple(min(col) for col in zip(*self._terms))

    def _index(self, var: str) -> int:
        try:
            return self.ring.index(var)
        except ValueError:
            raise UnknownVariableError(f"unknown variable {var!r} for ring ({', '.join(self.ring)})") from None

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other, what: str) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise RingMismatchError(self.ring, other.ring, what)
            return other
        if isinstance(other, (int, Rational)):
            return Polynomial.constant(self.ring, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other, "add")
        if other is NotImplemented:
            return other
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s += c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Polynomial._raw(self.ring, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.ring, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other, "sub")
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Polynomial":
        c = _as_fraction(c)
        if not c:
            return Polynomial.zero(self.ring)
        if c == 1:
            return self
        return Polynomial._raw(self.ring, {e: v * c for e, v in self._terms.items()})

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, Polynomial):
            return self.scale(1 / _as_fraction(other))
        return NotImplemented

    def _packed_form(self) -> tuple[dict, int]:
        if self._packed is None:
            den = reduce(lcm, (c.denominator for c in self._terms.values()), 1)
            self._packed = ({_pack(e): c.numerator * (den // c.denominator) for e, c in self._terms.items()}, den)
        return self._packed

    def __mul__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, Polynomial):
            return self.scale(other)
        other = self._coerce(other, "mul")
        if other is NotImplemented:
            return other
        if not self._terms or not other._terms:
            return Polynomial.zero(self.ring)
        if len(other._terms) == 1 and other.constant_term():
            return self.scale(other.constant_term())
        if len(self._terms) == 1 and self.constant_term():
            return other.scale(self.constant_term())
        pa, da = self._packed_form()
        pb, db = other._packed_form()
        prod = kernels.mul_packed(pa, pb)
        d = da * db
        n = self.nvars
        return Polynomial._raw(self.ring, {_unpack(k, n): Fraction(c, d) for k, c in prod.items()})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise PreconditionError("polynomial powers must be non-negative integers")
        result = Polynomial.constant(self.ring, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.ring == other.ring and self._terms == other._terms
        if isinstance(other, (int, Rational)):
            return self.is_constant() and self.constant_term() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._terms.items())))
        return self._hash

    # calculus and evaluation ---------------------------------------------
    def partial(self, var: str) -> "Polynomial":
        i = self._index(var)
        out = {}
        for e, c in self._terms.items():
            k = e[i]
            if k:
                out[e[:i] + (k - 1,) + e[i + 1:]] = c * k
        return Polynomial._raw(self.ring, out)

    def evaluate(self, point: Mapping[str, object]) -> Fraction:
        missing = [v for v in self.variables() if v not in point]
        if missing:
            raise UnknownVariableError(f"evaluation point is missing variables {missing}")
        vals = [_as_fraction(point[v]) if v in point else Fraction(0) for v in self.ring]
        total = Fraction(0)
        for e, c in self._terms.items():
            t = c
            for x, k in zip(vals, e):
                if k:
                    t *= x ** k
            total += t
        return total

    def float_evaluator(self):
        """Vectorised float evaluation ``f(pts)`` with ``pts`` of shape (N, nvars)."""
        items = self.items()
        exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), self.nvars)
        coeffs = np.array([float(c) for _, c in items], dtype=np.float64)

        def f(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
            return kernels.eval_monomials(exps, coeffs, pts)

        return f

    def substitute(self, bindings: Mapping[str, "Polynomial"], target_ring: Sequence[str] | None = None) -> "Polynomial":
        """Compose: replace each bound variable by a polynomial over a common ring.

        Unbound variables that occur in ``self`` pass through if the target ring
        contains a variable of the same name.
        """
        rings = {b.ring for b in bindings.values()}
        if target_ring is not None:
            rings.add(tuple(target_ring))
        if len(rings) > 1:
            rs = sorted(rings)
            raise RingMismatchError(rs[0], rs[1], "substitute")
        if not rings:
            return self
        target = rings.pop()
        for v in bindings:
            self._index(v)
        images = []
        for v in self.ring:
            if v in bindings:
                images.append(bindings[v])
            elif v in target:
                images.append(Polynomial.var(target, v))
            else:
                images.append(None)
        for v, img in zip(self.ring, images):
            if img is None and self.degree_in(v) > 0:
                raise UnknownVariableError(f"variable {v!r} is unbound and absent from target ring {target}")
        cache: dict = {}

        def power(i: int, k: int) -> Polynomial:
            key = (i, k)
            if key not in cache:
                cache[key] = images[i] if k == 1 else power(i, k - 1) * images[i]
            return cache[key]

        acc: dict = {}
        for e, c in self._terms.items():
            term = Polynomial.constant(target, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            for te, tc in term._terms.items():
                acc[te] = acc.get(te, 0) + tc
        return Polynomial(target, acc)

    def embed(self, ring: Sequence[str], mapping: Mapping[str, str] | None = None) -> "Polynomial":
        """Re-express in another ring by renaming variables (identity by default)."""
        ring = tuple(ring)
        mapping = dict(mapping or {})
        idx = []
        for i, v in enumerate(self.ring):
            name = mapping.get(v, v)
            if name not in ring:
                if self.degree_in(v) > 0:
                    raise UnknownVariableError(f"variable {v!r} has no image in ring {ring}")
                idx.append(None)
            else:
                idx.append(ring.index(name))
        out: dict = {}
        n = len(ring)
        for e, c in self._terms.items():
            ne = [0] * n
            for i, k in enumerate(e):
                if k:
                    ne[idx[i]] += k
            ne = tuple(ne)
            out[ne] = out.get(ne, 0) + c
        return Polynomial(ring, out)

    def set_variable(self, var: str, value) -> "Polynomial":
        """Specialise one variable to a rational constant; the ring is kept."""
        i = self._index(var)
        value = _as_fraction(value)
        out: dict = {}
        for e, c in self._terms.items():
            k = e[i]
            if k and not value:
                continue
            ne = e[:i] + (0,) + e[i + 1:]
            out[ne] = out.get(ne, 0) + c * value ** k
        return Polynomial(self.ring, out)

    def divide_exact(self, f: "Polynomial") -> "Polynomial | None":
        """Quotient ``self / f`` if ``f`` divides ``self`` exactly, else ``None``."""
        f = self._coerce(f, "divide")
        if f.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lf, lc = f.leading_term()
        rem = dict(self._terms)
        quot: dict = {}
        n = self.nvars
        while rem:
            e = max(rem, key=_grlex_key)
            if any(x < y for x, y in zip(e, lf)):
                return None
            qe = tuple(x - y for x, y in zip(e, lf))
            qc = rem[e] / lc
            quot[qe] = qc
            for fe, fc in f._terms.items():
                te = tuple(qe[i] + fe[i] for i in range(n))
                v = rem.get(te, 0) - qc * fc
                if v:
                    rem[te] = v
                else:
                    rem.pop(te, None)
        return Polynomial._raw(self.ring, quot)

    # text ---------------------------------------------------------------
    def to_text(self) -> str:
        return format_polynomial(self)

    def __str__(self) -> str:
        return format_polynomial(self)

    def __repr__(self) -> str:
        return f"Polynomial({format_polynomial(self)!r}, ring={self.ring})"


# ---------------------------------------------------------------------------
# functional surface

def poly_arith(op: str, p: Polynomial, q: Polynomial) -> Polynomial:
    if p.ring != q.ring:
        raise RingMismatchError(p.ring, q.ring, op)
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise PreconditionError(f"unknown polynomial operation {op!r}")


def partial_derivative(p: Polynomial, var: str) -> Polynomial:
    return p.partial(var)


def evaluate(p: Polynomial, point: Mapping[str, object]) -> Fraction:
    return p.evaluate(point)


def substitute(p: Polynomial, bindings: Mapping[str, Polynomial], target_ring=None) -> Polynomial:
    return p.substitute(bindings, target_ring)


# ---------------------------------------------------------------------------
# formatting and parsing

def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for i, (e, c) in enumerate(p.items()):
        factors = [v if k == 1 else f"{v}^{k}" for v, k in zip(p.ring, e) if k]
        mag = abs(c)
        if not factors:
            body = _format_coeff(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = _format_coeff(mag) + "*" + "*".join(factors)
        if i == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


class _Parser:
    """Recursive-descent parser for ``+ - * / ^`` expressions with parentheses."""

    def __init__(self, text: str, ring: tuple, line_offsets: list[int] | None = None):
        self.text = text
        self.ring = ring
        self.pos = 0
        self.tokens = list(self._tokenize())
        self.i = 0

    def _where(self, pos: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def _error(self, msg: str, pos: int):
        line, col = self._where(pos)
        raise ParseError(msg, line, col)

    def _tokenize(self):
        t = self.text
        i = 0
        while i < len(t):
            ch = t[i]
            if ch.isspace():
                i += 1
            elif ch.isdigit():
                j = i
                while j < len(t) and t[j].isdigit():
                    j += 1
                yield ("num", int(t[i:j]), i)
                i = j
            elif ch.isalpha() or ch == "_":
                j = i
                while j < len(t) and (t[j].isalnum() or t[j] in "_'"):
                    j += 1
                yield ("id", t[i:j], i)
                i = j
            elif t.startswith("**", i):
                yield ("op", "^", i)
                i += 2
            elif ch in "+-*/^()":
                yield ("op", ch, i)
                i += 1
            else:
                self._error(f"unexpected character {ch!r}", i)
        yield ("end", None, len(t))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Polynomial:
        p = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            self._error(f"unexpected token {val!r}", pos)
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            _, op, pos = self.take()
            q = self.unary()
            if op == "*":
                p = p * q
            else:
                if not q.is_constant() or q.is_zero():
                    self._error("division is only allowed by a nonzero rational constant", pos)
                p = p.scale(1 / q.constant_term())
        return p

    def unary(self) -> Polynomial:
        if self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            p = self.unary()
            return -p if op == "-" else p
        return self.power()

    def power(self) -> Polynomial:
        p = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "num":
                self._error("exponent must be a non-negative integer", pos)
            p = p ** val
        return p

    def atom(self) -> Polynomial:
        kind, val, pos = self.take()
        if kind == "num":
            return Polynomial.constant(self.ring, val)
        if kind == "id":
            if val not in self.ring:
                self._error(f"unknown variable {val!r} (ring: {' '.join(self.ring)})", pos)
            return Polynomial.var(self.ring, val)
        if kind == "op" and val == "(":
            p = self.expr()
            k2, v2, p2 = self.take()
            if (k2, v2) != ("op", ")"):
                self._error("expected ')'", p2)
            return p
        self._error(f"unexpected token {val!r}" if val is not None else "unexpected end of input", pos)


def parse_polynomial(text: str, ring: Sequence[str]) -> Polynomial:
    return _Parser(text, tuple(ring)).parse()


def parse_polynomial_file(text: str, ring: Sequence[str] | None = None) -> Polynomial:
    """Parse the header-plus-body file format; ``#`` starts a comment line."""
    lines = text.splitlines()
    body_start = 0
    header_ring = None
    for i, raw in enumerate(lines):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        if s.startswith("vars:"):
            header_ring = tuple(s[len("vars:"):].split())
            body_start = i + 1
        else:
            body_start = i
        break
    if header_ring is None and ring is None:
        raise ParseError("missing 'vars:' header line", 1, 1)
    use_ring = header_ring if header_ring is not None else tuple(ring)
    body_lines = [
        ("" if (ln.strip().startswith("#")) else ln) if j >= body_start else ""
        for j, ln in enumerate(lines)
    ]
    body = "\n".join(body_lines)
    if not body.strip():
        raise ParseError("empty polynomial body", body_start + 1, 1)
    return _Parser(body, use_ring).parse()


def format_polynomial_file(p: Polynomial) -> str:
    return f"vars: {' '.join(p.ring)}\n{format_polynomial(p)}\n"


# ---------------------------------------------------------------------------
# rational functions

def _normalize_factor(f: Polynomial) -> tuple[Fraction, Polynomial]:
    lc = f.leading_coefficient()
    return lc, f.scale(1 / lc)


class RationalFunction:
    """Quotient ``num / den`` with the denominator kept as a product of factors.

    Factors are monic in grlex order, so the denominator's leading coefficient
    is positive.  Monomial content is cancelled; no multivariate gcd is taken.
    Equality is decided by cross-multiplication.
    """

    __slots__ = ("num", "factors", "_den")

    def __init__(self, num: Polynomial, den: "Polynomial | Iterable[tuple[Polynomial, int]] | None" = None):
        ring = num.ring
        if den is None:
            pairs: list = []
        elif isinstance(den, Polynomial):
            pairs = [(den, 1)]
        else:
            pairs = list(den)
        scale = Fraction(1)
        acc: dict = {}
        mono_exp = [0] * len(ring)
        for f, k in pairs:
            if f.ring != ring:
                raise RingMismatchError(ring, f.ring, "rational function")
            if k == 0:
                continue
            if k < 0:
                raise PreconditionError("denominator factor exponents must be positive")
            if f.is_zero():
                raise ZeroDivisionError("zero denominator")
            if f.is_constant():
                scale /= f.constant_term() ** k
                continue
            if f.is_monomial():
                (e, c), = f.items()
                scale /= c ** k
                for i, x in enumerate(e):
                    mono_exp[i] += x * k
                continue
            lc, g = _normalize_factor(f)
            scale /= lc ** k
            acc[g] = acc.get(g, 0) + k
        if num.is_zero():
            self.num = num
            self.factors = ()
            self._den = None
            return
        # cancel monomial content against single-variable denominator factors
        content = num.monomial_content()
        cancel = tuple(min(c, m) for c, m in zip(content, mono_exp))
        if any(cancel):
            num = Polynomial._raw(ring, {tuple(x - y for x, y in zip(e, cancel)): c for e, c in num._terms.items()})
            mono_exp = [m - c for m, c in zip(mono_exp, cancel)]
        for i, m in enumerate(mono_exp):
            if m:
                acc[Polynomial.var(ring, ring[i])] = acc.get(Polynomial.var(ring, ring[i]), 0) + m
        self.num = num.scale(scale)
        self.factors = tuple(sorted(acc.items(), key=lambda fk: (fk[0].total_degree(), str(fk[0]))))
        self._den = None

    @property
    def ring(self) -> tuple:
        return self.num.ring

    @property
    def den(self) -> Polynomial:
        if self._den is None:
            d = Polynomial.constant(self.ring, 1)
            for f, k in self.factors:
                d = d * f ** k
            self._den = d
        return self._den

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFunction":
        return cls(p)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return not self.factors

    def _fdict(self) -> dict:
        return dict(self.factors)

    def _check(self, other: "RationalFunction", what: str):
        if other.ring != self.ring:
            raise RingMismatchError(self.ring, other.ring, what)

    def _lift(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other)
        if isinstance(other, (int, Rational)):
            return RationalFunction(Polynomial.constant(self.ring, other))
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        self._check(other, "add")
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        fa, fb = self._fdict(), other._fdict()
        common = dict(fa)
        for f, k in fb.items():
            common[f] = max(common.get(f, 0), k)
        na = self.num
        for f, k in common.items():
            if k - fa.get(f, 0):
                na = na * f ** (k - fa.get(f, 0))
        nb = other.num
        for f, k in common.items():
            if k - fb.get(f, 0):
                nb = nb * f ** (k - fb.get(f, 0))
        return RationalFunction(na + nb, list(common.items()))

    __radd__ = __add__

    def __neg__(self):
        out = RationalFunction.__new__(RationalFunction)
        out.num = -self.num
        out.factors = self.factors
        out._den = self._den
        return out

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, (Polynomial, RationalFunction)):
            return self.scale(other)
        other = self._lift(other)
        if other is NotImplemented:
            return other
        self._check(other, "mul")
        if self.is_zero() or other.is_zero():
            return RationalFunction(Polynomial.zero(self.ring))
        fac = self._fdict()
        for f, k in other.factors:
            fac[f] = fac.get(f, 0) + k
        return RationalFunction(self.num * other.num, list(fac.items()))

    __rmul__ = __mul__

    def scale(self, c) -> "RationalFunction":
        out = RationalFunction.__new__(RationalFunction)
        out.num = self.num.scale(c)
        out.factors = self.factors if not out.num.is_zero() else ()
        out._den = None
        return out

    def inverse(self) -> "RationalFunction":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalFunction(self.den, [(self.num, 1)])

    def __truediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        self._check(other, "div")
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        num = self.num * other.den
        pairs = list(self.factors) + [(other.num, 1)]
        return RationalFunction(num, pairs)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = RationalFunction(Polynomial.constant(self.ring, 1))
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        if other.ring != self.ring:
            return False
        if self.factors == other.factors:
            return self.num == other.num
        return self.num * other.den == other.num * self.den

    __hash__ = None  # equality is semantic, not structural

    def cancel_factors(self) -> "RationalFunction":
        """Divide out denominator factors that divide the numerator exactly."""
        num = self.num
        fac = self._fdict()
        for f in list(fac):
            while fac[f]:
                q = num.divide_exact(f)
                if q is None:
                    break
                num = q
                fac[f] -= 1
        return RationalFunction(num, [(f, k) for f, k in fac.items() if k])

    def evaluate(self, point: Mapping[str, object]) -> Fraction:
        d = Fraction(1)
        for f, k in self.factors:
            d *= f.evaluate(point) ** k
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at evaluation point")
        return self.num.evaluate(point) / d

    def float_evaluator(self):
        fn = self.num.float_evaluator()
        fds = [(f.float_evaluator(), k) for f, k in self.factors]

        def f(pts):
            v = fn(pts)
            for g, k in fds:
                v = v / g(pts) ** k
            return v

        return f

    def homogeneous_degree(self) -> int:
        if not self.num.is_homogeneous() or not all(f.is_homogeneous() for f, _ in self.factors):
            raise PreconditionError("rational function is not homogeneous")
        if self.num.is_zero():
            return 0
        return self.num.total_degree() - sum(f.total_degree() * k for f, k in self.factors)

    def term_count(self) -> int:
        return len(self.num)

    def to_text(self) -> str:
        if not self.factors:
            return format_polynomial(self.num)
        den = "*".join(
            f"({format_polynomial(f)})" + (f"^{k}" if k > 1 else "") if len(f) > 1
            else format_polynomial(f) + (f"^{k}" if k > 1 else "")
            for f, k in self.factors
        )
        num = format_polynomial(self.num)
        if len(self.num) > 1:
            num = f"({num})"
        if len(self.factors) > 1 or self.factors[0][1] > 1:
            den = f"({den})"
        return f"{num}/{den}"

    __str__ = to_text

    def __repr__(self) -> str:
        return f"RationalFunction({self.to_text()!r})"
