"""Randomized laws: functoriality, inverses and the Laplace round trip."""

from hypothesis import given, settings, strategies as st

from painleve_lax.pairs import MatrixRat, catalog, same_system
from painleve_lax.transforms import (Substitution, TransformSpec, apply_transform, compose, inverse,
                                     laplace)
from strategies import constant_gauges, gauge_specs

N = 1000
props = settings(max_examples=N, deadline=None)

JM2 = catalog("JM2")
LINEAR = {name: catalog(name) for name in ("JKT1", "JKT2", "dJKT2_1", "dJKT2_3")}


@props
@given(gauge_specs(2, subst=True), gauge_specs(2, subst=True))
def test_apply_respects_composition(a, b):
    assert apply_transform(apply_transform(JM2, a), b) == apply_transform(JM2, compose(a, b))


@props
@given(gauge_specs(2, subst=True))
def test_inverse_undoes_transform(a):
    assert apply_transform(apply_transform(JM2, a), inverse(a)) == JM2
    assert apply_transform(apply_transform(JM2, inverse(a)), a) == JM2


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([-2, 1, 3]), st.sampled_from([2, 3]))
def test_power_substitution_round_trip(c, k):
    s = TransformSpec(MatrixRat.identity(2), substitution=Substitution("lam", "mu", c, k))
    assert apply_transform(apply_transform(JM2, s), inverse(s)) == JM2


@st.composite
def gauged_linear_pairs(draw):
    p = LINEAR[draw(st.sampled_from(sorted(LINEAR)))]
    return apply_transform(p, draw(constant_gauges(p.size)))


def _other(direction):
    return "inverse" if direction == "forward" else "forward"


@props
@given(gauged_linear_pairs())
def test_laplace_round_trip(p):
    d = "forward" if p.spectral == "lam" else "inverse"
    assert same_system(laplace(laplace(p, d), _other(d)), p)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(sorted(LINEAR)), st.data())
def test_laplace_commutes_with_constant_gauges(name, data):
    p = LINEAR[name]
    g = data.draw(constant_gauges(p.size))
    d = "forward" if p.spectral == "lam" else "inverse"
    assert same_system(laplace(apply_transform(p, g), d), apply_transform(laplace(p, d), g))
