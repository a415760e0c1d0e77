"""Hypothesis strategies for small exact objects."""

from fractions import Fraction

from hypothesis import strategies as st

from painleve_lax.pairs import MatrixRat
from painleve_lax.symcore import RatFunc
from painleve_lax.transforms import Substitution, TransformSpec

VARS = ("lam", "t", "y")
small_q = st.fractions(min_value=-3, max_value=3, max_denominator=3)


@st.composite
def monomials(draw, names=VARS):
    out = RatFunc.const(draw(small_q))
    for v in draw(st.lists(st.sampled_from(names), max_size=2)):
        out = out * RatFunc.sym(v)
    return out


@st.composite
def polys(draw, names=VARS, max_terms=2, gaussian=True):
    out = RatFunc.const(0)
    for _ in range(draw(st.integers(0, max_terms))):
        out = out + draw(monomials(names))
    if gaussian and draw(st.integers(0, 3)) == 0:
        out = out + RatFunc.imag_unit() * draw(monomials(names))
    return out


@st.composite
def nonzero_polys(draw, names=VARS):
    p = draw(polys(names))
    return p if not p.is_zero() else RatFunc.const(draw(st.integers(1, 3)))


@st.composite
def ratfuncs(draw, names=VARS):
    return draw(polys(names)) / draw(nonzero_polys(names))


@st.composite
def unit_triangular(draw, n, names, upper=None):
    """Invertible gauges: a diagonal of nonzero constants times a unit triangle."""
    upper = draw(st.booleans()) if upper is None else upper
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                row.append(RatFunc.const(draw(st.sampled_from([1, -1, 2, Fraction(1, 2), 3]))))
            elif (j > i) == upper:
                row.append(draw(polys(names, max_terms=2, gaussian=False)))
            else:
                row.append(RatFunc.const(0))
        rows.append(row)
    return MatrixRat(rows)


@st.composite
def gauge_specs(draw, n, spectral="lam", twist=True, subst=False):
    names = (spectral, "t", "y", "theta")
    G = draw(unit_triangular(n, names))
    f = draw(polys((spectral, "t"), max_terms=2, gaussian=False)) if twist and draw(st.booleans()) else 0
    pw = draw(st.sampled_from([0, 0, 1, Fraction(1, 2), "theta"])) if twist else 0
    sub = None
    if subst and draw(st.booleans()):
        c = draw(st.sampled_from([1, -1, 2, Fraction(-1, 3)]))
        k = draw(st.sampled_from([1, -1]))
        sub = Substitution(spectral, spectral, c, k)
    return TransformSpec(G, f, RatFunc.coerce(pw) if not isinstance(pw, str) else RatFunc.sym(pw), sub)


@st.composite
def constant_gauges(draw, n):
    """lam-independent gauges with parameter and constant entries."""
    return TransformSpec(draw(unit_triangular(n, ("theta",))))
