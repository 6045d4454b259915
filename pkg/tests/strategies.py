"""Hypothesis strategies and small builders shared by the test modules."""
from fractions import Fraction

from hypothesis import strategies as st


def rationals(lo=-2, hi=2, max_den=12):
    return st.builds(lambda p, q: Fraction(p, q),
                     st.integers(lo * max_den, hi * max_den), st.integers(1, max_den)
                     ).filter(lambda x: lo <= x <= hi)


def vectors(n, lo=-2, hi=2, max_den=12):
    return st.lists(rationals(lo, hi, max_den), min_size=n, max_size=n).map(tuple)


@st.composite
def two_ball_instances(draw, n=None, max_den=10):
    """``(c, r)`` with ``c >= 0`` and ``||c||_1 <= r <= 1``."""
    n = draw(st.integers(1, 3)) if n is None else n
    r = Fraction(draw(st.integers(1, max_den)), max_den)
    w = draw(st.lists(st.integers(0, max_den), min_size=n, max_size=n))
    slack = draw(st.integers(0, max_den))
    total = sum(w) + slack
    c = tuple(r * x / total for x in w) if total else (Fraction(0),) * n
    return c, r


def unit(n, i, s=1):
    return tuple(Fraction(s if j == i else 0) for j in range(n))


def cross_vertices(n, r=1):
    return [tuple(r * x for x in unit(n, i, s)) for i in range(n) for s in (1, -1)]
