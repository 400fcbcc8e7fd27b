"""Feynman graphs, their Symanzik polynomials and line symmetry groups.

Lines are numbered from 1 in the polynomial ring (``x1 .. xn``).  Massive
lines contribute ``x_i * m^2`` to the second polynomial, with one ring variable
per distinct mass label; external momenta enter only through opaque channel
symbols ``s_<labels>`` attached to each spanning 2-forest.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence

from feyninv.errors import BoundExceededError, GraphError, ParseError
from feyninv.polyring import Polynomial

MAX_LINES = 12
MAX_GROUP_ORDER = factorial(10)

Edge = tuple  # (u, v, line_index)


def _is_massless(label) -> bool:
    return label is None or label == 0 or label == "0" or label == ""


@dataclass(frozen=True)
class FeynmanGraph:
    vertex_count: int
    lines: tuple
    legs: tuple = ()

    def __post_init__(self):
        if self.vertex_count < 1:
            raise GraphError("a graph needs at least one vertex")
        lines = []
        for i, line in enumerate(self.lines):
            if len(line) == 2:
                u, v, m = line[0], line[1], None
            elif len(line) == 3:
                u, v, m = line
            else:
                raise GraphError(f"line {i + 1}: expected [a, b] or [a, b, mass]")
            for x in (u, v):
                if not isinstance(x, int) or not 0 <= x < self.vertex_count:
                    raise GraphError(f"line {i + 1}: endpoint {x!r} is not a vertex id")
            lines.append((u, v, None if _is_massless(m) else str(m)))
        legs = []
        for leg in self.legs:
            if len(leg) != 2 or not isinstance(leg[0], int) or not 0 <= leg[0] < self.vertex_count:
                raise GraphError(f"invalid external leg {leg!r}")
            legs.append((leg[0], str(leg[1])))
        object.__setattr__(self, "lines", tuple(lines))
        object.__setattr__(self, "legs", tuple(legs))
        if not _connected(self.vertex_count, [(u, v) for u, v, _ in lines]):
            raise GraphError("graph is not connected")
        names = set(self.line_variables)
        clash = names & set(self.masses)
        if clash:
            raise GraphError(f"symbol names clash with line variables: {sorted(clash)}")

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    @property
    def loops(self) -> int:
        return self.n_lines - self.vertex_count + 1

    @property
    def line_variables(self) -> tuple:
        return tuple(f"x{i + 1}" for i in range(self.n_lines))

    @property
    def masses(self) -> tuple:
        return tuple(sorted({m for _, _, m in self.lines if m is not None}))

    def edges(self) -> list:
        return [(u, v, i) for i, (u, v, _) in enumerate(self.lines)]

    @classmethod
    def from_dict(cls, data: dict) -> "FeynmanGraph":
        if not isinstance(data, dict):
            raise GraphError("graph description must be a JSON object")
        try:
            return cls(int(data["vertices"]), tuple(tuple(x) for x in data["lines"]),
                       tuple(tuple(x) for x in data.get("legs", [])))
        except KeyError as exc:
            raise GraphError(f"missing key {exc.args[0]!r} in graph description") from None
        except TypeError as exc:
            raise GraphError(f"malformed graph description: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "FeynmanGraph":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "vertices": self.vertex_count,
            "lines": [[u, v, m if m is not None else 0] for u, v, m in self.lines],
            "legs": [list(leg) for leg in self.legs],
        }


def load_graph(path) -> FeynmanGraph:
    with open(path, encoding="utf-8") as fh:
        return FeynmanGraph.from_json(fh.read())


def banana(loops: int, masses: Sequence | str | None = "m") -> FeynmanGraph:
    """Two vertices joined by ``loops + 1`` lines."""
    n = loops + 1
    if masses is None or isinstance(masses, str):
        masses = [masses] * n
    return FeynmanGraph(2, tuple((0, 1, m) for m in masses))


# ---------------------------------------------------------------------------
# spanning trees by deletion-contraction

def _connected(nv: int, pairs: Iterable[tuple]) -> bool:
    parent = list(range(nv))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = nv
    for u, v in pairs:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps == 1


def spanning_trees_of(vertex_count: int, edges: Sequence[Edge]) -> list[frozenset]:
    """All spanning trees of a multigraph given as ``(u, v, label)`` edges.

    Returns an empty list when the graph is disconnected.
    """
    memo: dict = {}

    def rec(nv: int, es: tuple) -> tuple:
        key = (nv, es)
        if key in memo:
            return memo[key]
        if nv == 1:
            out = (frozenset(),)
        elif not es:
            out = ()
        else:
            (u, v, lab), rest = es[0], es[1:]
            deleted = rec(nv, rest)
            # contract u-v: relabel v as u, drop loops, keep labels compact
            merged = []
            for a, b, l2 in rest:
                a = u if a == v else a
                b = u if b == v else b
                if a != b:
                    merged.append((min(a, b), max(a, b), l2))
            contracted = rec(nv - 1, _compact(merged))
            out = deleted + tuple(t | {lab} for t in contracted)
        memo[key] = out
        return out

    es = [(min(u, v), max(u, v), lab) for u, v, lab in edges if u != v]
    if not _connected(vertex_count, [(u, v) for u, v, _ in es]):
        return []
    trees = rec(vertex_count, _compact(es))
    return sorted(set(trees), key=lambda t: sorted(t))


def _compact(es: list) -> tuple:
    verts = sorted({x for u, v, _ in es for x in (u, v)})
    idx = {x: i for i, x in enumerate(verts)}
    return tuple(sorted((idx[u], idx[v], lab) for u, v, lab in es))


def spanning_trees(g: FeynmanGraph) -> list[frozenset]:
    trees = spanning_trees_of(g.vertex_count, g.edges())
    if not trees:
        raise GraphError("graph is not connected")
    return trees


def _complement_monomial(ring: tuple, n: int, chosen: Iterable[int]) -> tuple:
    e = [1] * n + [0] * (len(ring) - n)
    for i in chosen:
        e[i] = 0
    return tuple(e)


def symanzik_u(g: FeynmanGraph) -> Polynomial:
    ring = g.line_variables
    n = g.n_lines
    return Polynomial(ring, {_complement_monomial(ring, n, t): 1 for t in spanning_trees(g)})


# ---------------------------------------------------------------------------
# second Symanzik polynomial

def spanning_two_forests(g: FeynmanGraph) -> list[frozenset]:
    """Spanning forests with exactly two components (each a set of line indices)."""
    forests = set()
    for t in spanning_trees(g):
        for e in t:
            forests.add(t - {e})
    return sorted(forests, key=lambda f: sorted(f))


def _components(nv: int, edges: Iterable[tuple]) -> list[int]:
    parent = list(range(nv))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        parent[find(u)] = find(v)
    return [find(x) for x in range(nv)]


def _channel(g: FeynmanGraph, forest: frozenset) -> str | None:
    comp = _components(g.vertex_count, [(g.lines[i][0], g.lines[i][1]) for i in forest])
    roots = sorted(set(comp))
    sides = [sorted(lab for v, lab in g.legs if comp[v] == r) for r in roots]
    if not sides[0] or not sides[1]:
        return None
    side = min(sides, key=lambda s: (len(s), s))
    return "s_" + "_".join(side)


def channel_symbols(g: FeynmanGraph) -> list[str]:
    return sorted({c for f in spanning_two_forests(g) if (c := _channel(g, f)) is not None})


def f_ring(g: FeynmanGraph) -> tuple:
    return g.line_variables + g.masses + tuple(channel_symbols(g))


def symanzik_f(g: FeynmanGraph) -> Polynomial:
    ring = f_ring(g)
    n = g.n_lines
    terms: dict = {}
    for forest in spanning_two_forests(g):
        ch = _channel(g, forest)
        if ch is None:
            continue
        e = list(_complement_monomial(ring, n, forest))
        e[ring.index(ch)] = 1
        terms[tuple(e)] = terms.get(tuple(e), 0) + 1
    f0 = Polynomial(ring, terms)
    u = symanzik_u(g).embed(ring)
    mass_sum = Polynomial.zero(ring)
    for i, (_, _, m) in enumerate(g.lines):
        if m is not None:
            mass_sum = mass_sum + Polynomial.var(ring, f"x{i + 1}") * Polynomial.var(ring, m) ** 2
    return f0 + u * mass_sum


# ---------------------------------------------------------------------------
# parametric integral

@dataclass(frozen=True)
class DimExpr:
    """Affine expression ``const + coeff*D`` in a symbolic dimension."""

    const: Fraction
    coeff: Fraction = Fraction(0)

    def at(self, d) -> Fraction:
        return self.const + self.coeff * Fraction(d)

    def is_constant(self) -> bool:
        return self.coeff == 0

    def __str__(self) -> str:
        if not self.coeff:
            return str(self.const)
        c = self.coeff
        dpart = "D" if c == 1 else "-D" if c == -1 else f"{c}*D"
        if not self.const:
            return dpart
        sign = " - " if c < 0 else " + "
        mag = abs(c)
        return f"{self.const}{sign}{'D' if mag == 1 else f'{mag}*D'}"


@dataclass(frozen=True)
class ParametricIntegral:
    U: Polynomial
    F: Polynomial
    n: int
    loops: int
    D: object
    gamma_argument: object
    U_exponent: object
    F_exponent: object

    def exponents(self) -> dict:
        return {
            "gamma_argument": str(self.gamma_argument),
            "U_exponent": str(self.U_exponent),
            "F_exponent": str(self.F_exponent),
        }


def parametric_integral(g: FeynmanGraph, D="D") -> ParametricIntegral:
    n, l = g.n_lines, g.loops
    if isinstance(D, str):
        if D != "D":
            D = Fraction(D)
    if isinstance(D, str):
        gamma = DimExpr(Fraction(n), Fraction(-l, 2))
        uexp = DimExpr(Fraction(n), Fraction(-(l + 1), 2))
    else:
        D = Fraction(D)
        gamma = n - l * D / 2
        uexp = n - (l + 1) * D / 2
    return ParametricIntegral(symanzik_u(g), symanzik_f(g), n, l, D, gamma, uexp, gamma)


# ---------------------------------------------------------------------------
# line symmetry group

def _perm_compose(p: tuple, q: tuple) -> tuple:
    """(p*q)(i) = p(q(i))."""
    return tuple(p[i] for i in q)


def closure_of_permutations(gens: Iterable[tuple], size: int, limit: int = MAX_GROUP_ORDER) -> list[tuple]:
    ident = tuple(range(size))
    seen = {ident}
    frontier = [ident]
    gens = list(gens)
    while frontier:
        nxt = []
        for x in frontier:
            for gen in gens:
                y = _perm_compose(gen, x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > limit:
                        raise BoundExceededError(f"group closure exceeds {limit} elements")
        frontier = nxt
    return sorted(seen)


def cycle_notation(perm: Sequence[int], labels: Sequence[str] | None = None) -> str:
    """One-line cycle notation with 1-based indices; identity is ``()``."""
    labels = labels or [str(i + 1) for i in range(len(perm))]
    seen = set()
    out = []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc = [start]
        seen.add(start)
        x = perm[start]
        while x != start:
            cyc.append(x)
            seen.add(x)
            x = perm[x]
        out.append("(" + " ".join(labels[i] for i in cyc) + ")")
    return "".join(out) or "()"


@dataclass
class LinePermutationGroup:
    size: int
    elements: list
    generators: list = field(default_factory=list)

    @property
    def order(self) -> int:
        return len(self.elements)

    def generators_cycle_notation(self) -> list[str]:
        return [cycle_notation(g) for g in self.generators]

    def act(self, perm: tuple, p: Polynomial) -> Polynomial:
        """g.P(X) = P(g.X): line variable x_i is replaced by x_{g(i)}."""
        names = [f"x{i + 1}" for i in range(self.size)]
        mapping = {names[i]: names[perm[i]] for i in range(self.size)}
        return p.embed(p.ring, mapping)


def _minimal_generators(elements: list, size: int) -> list:
    gens: list = []
    reached = {tuple(range(size))}
    for x in elements:
        if x not in reached:
            gens.append(x)
            reached = set(closure_of_permutations(gens, size))
            if len(reached) == len(elements):
                break
    return gens


def line_symmetry_group(g: FeynmanGraph, max_lines: int = MAX_LINES, max_order: int = MAX_GROUP_ORDER) -> LinePermutationGroup:
    """Line permutations induced by graph automorphisms.

    Vertices carrying external legs are fixed and mass labels must match.
    Vertex maps are found by backtracking with degree pruning; every vertex map
    then induces all bijections between parallel lines of equal mass.
    """
    n = g.n_lines
    if n > max_lines:
        raise BoundExceededError(
            f"{n} lines exceeds the automorphism search bound {max_lines}; supply generators explicitly"
        )
    nv = g.vertex_count
    classes: dict = {}
    for i, (u, v, m) in enumerate(g.lines):
        classes.setdefault((min(u, v), max(u, v), m), []).append(i)
    mult: dict = {k: len(v) for k, v in classes.items()}
    degree = [0] * nv
    loops_at = [0] * nv
    for u, v, _ in g.lines:
        degree[u] += 1
        degree[v] += 1
        if u == v:
            loops_at[u] += 1
    fixed = {v for v, _ in g.legs}
    masses = sorted({m for _, _, m in g.lines}, key=lambda m: (m is not None, m or ""))

    def pair_count(a: int, b: int, m) -> int:
        return mult.get((min(a, b), max(a, b), m), 0)

    vertex_maps = []
    assign = [-1] * nv
    used = [False] * nv

    def bt(k: int):
        if k == nv:
            vertex_maps.append(tuple(assign))
            return
        cands = [k] if k in fixed else [t for t in range(nv) if t not in fixed]
        for t in cands:
            if used[t] or degree[t] != degree[k] or loops_at[t] != loops_at[k]:
                continue
            ok = True
            for j in range(k + 1):
                tj = t if j == k else assign[j]
                for m in masses:
                    if pair_count(k, j, m) != pair_count(t, tj, m):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            assign[k] = t
            used[t] = True
            bt(k + 1)
            used[t] = False
            assign[k] = -1

    bt(0)

    elements = set()
    for vm in vertex_maps:
        blocks = []
        count = 1
        for (u, v, m), src in sorted(classes.items(), key=lambda kv: kv[1]):
            a, b = vm[u], vm[v]
            dst = classes[(min(a, b), max(a, b), m)]
            blocks.append((src, dst))
            count *= factorial(len(src))
        if count > max_order:
            raise BoundExceededError(f"symmetry group order exceeds {max_order}")
        for choice in itertools.product(*(itertools.permutations(dst) for _, dst in blocks)):
            perm = [0] * n
            for (src, _), img in zip(blocks, choice):
                for s, t in zip(src, img):
                    perm[s] = t
            elements.add(tuple(perm))
            if len(elements) > max_order:
                raise BoundExceededError(f"symmetry group order exceeds {max_order}")
    elems = sorted(elements)
    return LinePermutationGroup(n, elems, _minimal_generators(elems, n))
