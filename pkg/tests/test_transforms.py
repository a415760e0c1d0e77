import pytest

from painleve_lax.pairs import MatrixRat, catalog, compatibility_residual, same_system
from painleve_lax.symcore import parse
from painleve_lax.transforms import (NonInvertibleSubstitution, NotLinearInSpectral, SingularGauge,
                                     Substitution, TransformError, TransformSpec, apply_reduction,
                                     apply_transform, check_symmetry, cm2_to_jm2_variables, diagram_check,
                                     dumps_spec, htw_to_fn_variables, inverse, kernels_equal, laplace, loads_spec,
                                     lower_route, named_spec, run_route, spec_names, upper_route)

JKT = {"kappa2": -1, "kappa1": "theta - 1"}


def _at(name, bind=None):
    p = catalog(name)
    return p.specialize(bind) if bind else p


@pytest.mark.parametrize("src, direction, dst", [
    ("JKT1", "inverse", "dJKT1"),
    ("JKT2", "forward", "dJKT2_3"),
    ("dJKT2_1", "forward", "dJKT2_2"),
])
def test_laplace_images(src, direction, dst):
    assert laplace(catalog(src), direction) == catalog(dst)


@pytest.mark.parametrize("name", ["JKT1", "JKT2", "dJKT2_1", "dJKT2_3", "dJKT1", "dJKT2_2"])
def test_laplace_round_trip_on_catalog(name):
    p = catalog(name)
    d = "forward" if p.spectral == "lam" else "inverse"
    back = laplace(laplace(p, d), "inverse" if d == "forward" else "forward")
    assert same_system(back, p)


def test_laplace_needs_linear_pairs():
    with pytest.raises(NotLinearInSpectral):
        laplace(catalog("JM2"))
    with pytest.raises(TransformError):
        laplace(catalog("HTW"), "forward")


def test_fabri_maps():
    assert apply_transform(catalog("JM1"), named_spec("fabri_p1")) == catalog("JM1F")
    fn = htw_to_fn_variables(apply_transform(catalog("HTW"), named_spec("fabri_htw_fn")))
    assert fn == catalog("FN")


def test_conte_musette_to_jm2():
    assert cm2_to_jm2_variables(apply_transform(catalog("CM2"), named_spec("cm2_to_jm2"))) == catalog("JM2")


@pytest.mark.parametrize("src, red, dst, bind", [
    ("dJKT1", "reduce_djkt1", "JM1", None),
    ("dJKT2_1", "reduce_djkt2_1", "JKT2_red", JKT),
    ("dJKT2_3", "reduce_djkt2_3", "dJKT2_3_red", None),
    ("dJKT2_2_gauged", "reduce_djkt2_2_gauged", "dJKT2_2_red", None),
])
def test_reductions(src, red, dst, bind):
    img, rel = apply_reduction(catalog(src), red)
    assert img == _at(dst, bind)
    assert compatibility_residual(img).is_zero()


def test_dJKT1_relation():
    _, rel = apply_reduction(catalog("dJKT1"), "reduce_djkt1")
    assert rel.component == 1 and str(rel) == "Psi1 = (4*lam)*Psi3"


@pytest.mark.parametrize("src, spec, dst, bind", [
    ("dJKT2_2", "gauge_53", "dJKT2_2_gauged", None),
    ("dJKT2_2_red", "gauge_56", "HTW", None),
    ("JKT2_red", "u_gauge_42", "JKT2_red_u", None),
])
def test_named_gauges(src, spec, dst, bind):
    assert apply_transform(catalog(src), named_spec(spec)) == _at(dst, bind)


def test_power_twist_lands_on_htw():
    p = catalog("dJKT2_3_red").specialize(JKT)
    assert apply_transform(p, named_spec("power_45")) == catalog("HTW")


def test_twist_lands_on_jm2():
    p = catalog("JKT2_red_u").specialize(JKT)
    assert apply_transform(p, named_spec("twist_43")) == catalog("JM2")
    assert apply_transform(catalog("JM2"), inverse(named_spec("twist_43"))) == p


def test_symmetries():
    i_sigma1 = MatrixRat.parse([["0", "i"], ["i", "0"]])
    assert check_symmetry(catalog("FN"), i_sigma1)
    assert not check_symmetry(catalog("FN"), MatrixRat.diag([1, -1]))
    assert check_symmetry(catalog("JM1F"), MatrixRat.parse([["1", "-zeta"], ["0", "1"]]))


def test_diagram_commutes():
    res = diagram_check(upper_route(), lower_route(), catalog("JM2"))
    assert res
    assert res.route_a.pair == res.route_b.pair == catalog("HTW")
    assert kernels_equal(res.route_a.kernel, res.route_b.kernel)


def test_perturbed_lift_breaks_the_diagram():
    assert not diagram_check(upper_route("theta"), lower_route(), catalog("JM2"))


def test_route_reports_every_edge():
    r = run_route(catalog("JM2"), lower_route())
    assert r.error is None
    assert [e.ok for e in r.edges if e.ok is not None] == [True] * 6


def test_singular_and_bad_specs():
    with pytest.raises(SingularGauge):
        inverse(TransformSpec(MatrixRat.parse([["1", "lam"], ["1", "lam"]])))
    with pytest.raises(NonInvertibleSubstitution):
        Substitution("lam", "mu", 0, 1)
    with pytest.raises(NonInvertibleSubstitution):
        Substitution("lam", "mu", 1, 0)
    with pytest.raises(TransformError):
        named_spec("nope")


@pytest.mark.parametrize("name", spec_names())
def test_spec_text_round_trip(name):
    s = named_spec(name)
    assert loads_spec(dumps_spec(s)) == s
