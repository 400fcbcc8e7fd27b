from fractions import Fraction

from hypothesis import strategies as st

from feyninv.polyring import Polynomial

RING5 = ("x1", "x2", "x3", "x4", "x5")
D4 = ("w", "wp", "wh", "wb")


@st.composite
def polynomials(draw, ring=RING5, max_degree=8, max_terms=6):
    n = len(ring)
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        e = draw(st.lists(st.integers(0, max_degree), min_size=n, max_size=n))
        while sum(e) > max_degree:
            k = e.index(max(e))
            e[k] -= 1
        c = Fraction(draw(st.integers(-20, 20)), draw(st.integers(1, 6)))
        terms[tuple(e)] = terms.get(tuple(e), 0) + c
    return Polynomial(ring, terms)


@st.composite
def points(draw, ring=RING5):
    return {v: Fraction(draw(st.integers(-9, 9)), draw(st.integers(1, 5))) for v in ring}


ACCEPTANCE: dict = {}


def report(number: int, status: str, detail: str) -> None:
    """Record and print one acceptance line."""
    line = f"criterion {number:>2}: {status:<16} {detail}"
    ACCEPTANCE[number] = line
    print(line)
