"""One test per acceptance criterion; a PASS/FAIL line per criterion is printed at the end.

Run standalone with ``python tests/test_acceptance.py``.
"""

import cmath
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from painleve_lax import checks
from painleve_lax.numerics import P2State, airy_stokes, integrate_p2, stokes_matrices, verify_theorem31
from painleve_lax.numerics.stokes import formal_monodromy, template
from painleve_lax.pairs import (MatrixRat, catalog, compatibility_residual, eliminate_to_scalar,
                                scalar_reduce)
from painleve_lax.symcore import parse
from painleve_lax.transforms import (apply_reduction, apply_transform, check_symmetry, cm2_to_jm2_variables,
                                     diagram_check, htw_to_fn_variables, inverse, kernels_equal, laplace,
                                     lower_route, named_spec, upper_route)

import conftest

# tolerances
RESIDUAL_TOL = 1e-6
DOUBLING_TOL = 1e-8
NEGATIVE_FLOOR = 1e-2
CASE_SECONDS = 120
TEMPLATE_TOL = 1e-8
PRODUCT_TOL = 1e-4
DRIFT_TOL = 1e-6
AIRY_TOL = 1e-6
PROPERTY_EXAMPLES = 1000
COMPAT_SECONDS = 10

MU = cmath.exp(2j * math.pi / 3)
KAPPA = {"kappa2": -1, "kappa1": "theta - 1"}


def _detail(record_property, text):
    record_property("detail", text)


def test_criterion_1_compatibility(record_property):
    t0 = time.perf_counter()
    bad = [n for n in checks.PRIMARY_PAIRS if not compatibility_residual(catalog(n)).is_zero()]
    el = time.perf_counter() - t0
    _detail(record_property, f"{len(checks.PRIMARY_PAIRS) - len(bad)}/{len(checks.PRIMARY_PAIRS)} exact zero "
                             f"in {el:.2f}s (limit {COMPAT_SECONDS}s)")
    assert not bad
    assert el < COMPAT_SECONDS


def test_criterion_2_eliminations(record_property):
    bad = [lab for lab, (p, tgt, exp) in checks.ELIMINATIONS.items()
           if eliminate_to_scalar(catalog(p).table, tgt) != parse(exp)]
    _detail(record_property, "P1, P2 (alpha = 1/2 - theta), P2 (alpha = 1/2 - kappa1 + kappa2), P34 exact"
            if not bad else f"mismatch: {bad}")
    assert not bad


def _transform_cases():
    jkt = lambda n: catalog(n).specialize(KAPPA)  # noqa: E731
    return {
        "Laplace JKT1 -> dJKT1": (laplace(catalog("JKT1"), "inverse"), catalog("dJKT1")),
        "Laplace JKT2 -> dJKT2_3": (laplace(catalog("JKT2")), catalog("dJKT2_3")),
        "Laplace dJKT2_1 -> dJKT2_2": (laplace(catalog("dJKT2_1")), catalog("dJKT2_2")),
        "Fabri JM1 -> JM1F": (apply_transform(catalog("JM1"), named_spec("fabri_p1")), catalog("JM1F")),
        "Fabri HTW -> FN": (htw_to_fn_variables(apply_transform(catalog("HTW"), named_spec("fabri_htw_fn"))),
                            catalog("FN")),
        "CM2 -> JM2": (cm2_to_jm2_variables(apply_transform(catalog("CM2"), named_spec("cm2_to_jm2"))),
                       catalog("JM2")),
        "reduction dJKT1 -> JM1": (apply_reduction(catalog("dJKT1"), "reduce_djkt1")[0], catalog("JM1")),
        "reduction dJKT2_1 -> JKT2_red": (apply_reduction(catalog("dJKT2_1"), "reduce_djkt2_1")[0],
                                          jkt("JKT2_red")),
        "reduction dJKT2_3 -> dJKT2_3_red": (apply_reduction(catalog("dJKT2_3"), "reduce_djkt2_3")[0],
                                             catalog("dJKT2_3_red")),
        "reduction dJKT2_2 -> dJKT2_2_red": (
            apply_reduction(apply_transform(catalog("dJKT2_2"), named_spec("gauge_53")),
                            "reduce_djkt2_2_gauged")[0], catalog("dJKT2_2_red")),
        "u-gauge and twist JKT2_red -> JM2": (
            apply_transform(apply_transform(jkt("JKT2_red"), named_spec("u_gauge_42")), named_spec("twist_43")),
            catalog("JM2")),
        "gauges dJKT2_2 -> HTW": (
            apply_transform(apply_reduction(apply_transform(catalog("dJKT2_2"), named_spec("gauge_53")),
                                            "reduce_djkt2_2_gauged")[0], named_spec("gauge_56")),
            catalog("HTW")),
        "power twist dJKT2_3_red -> HTW": (apply_transform(jkt("dJKT2_3_red"), named_spec("power_45")),
                                           catalog("HTW")),
    }


def test_criterion_3_transforms(record_property):
    cases = _transform_cases()
    bad = [k for k, (got, ref) in cases.items() if got != ref]
    _detail(record_property, f"{len(cases) - len(bad)}/{len(cases)} images exact" + (f"; failed {bad}" if bad else ""))
    assert not bad


def test_criterion_4_diagram(record_property):
    res = diagram_check(upper_route(), lower_route(), catalog("JM2"))
    same = res.route_a.pair == res.route_b.pair == catalog("HTW")
    kern = kernels_equal(res.route_a.kernel, res.route_b.kernel)
    control = not diagram_check(upper_route("theta"), lower_route(), catalog("JM2"))
    _detail(record_property, f"routes agree: {same}, kernels agree: {kern}, perturbed lift rejected: {control}")
    assert res and same and kern and control


def test_criterion_5_symmetries(record_property):
    fn = check_symmetry(catalog("FN"), MatrixRat.parse([["0", "i"], ["i", "0"]]))
    jm1f = check_symmetry(catalog("JM1F"), MatrixRat.parse([["1", "-zeta"], ["0", "1"]]))
    _detail(record_property, f"FN with i*sigma1: {fn}, JM1F with [[1,-zeta],[0,1]]: {jm1f}")
    assert fn and jm1f


def test_criterion_6_garnier(record_property):
    out = []
    for label, (name, comp, rho, expected) in sorted(checks.GARNIER.items()):
        q0 = scalar_reduce(catalog(name), comp, parse(rho)).potential
        # the two characteristic terms survive on their own
        pole = (q0 * parse("(lam - y)^2")).substitute({"lam": "y"}) == parse("3/4")
        out.append(q0 == parse(expected) and pole)
    g2 = scalar_reduce(catalog("JM2"), 1, parse("u*(lam - y)")).potential
    rest = parse("3/(4*(lam-y)^2) - (y^2+z+t/2)/(lam-y) + (y^2+z+t/2)^2 + lam^4 - y^4 + t*(lam^2-y^2)")
    linear = g2 - rest == parse("2*(1/2 - theta)*(lam - y)")
    _detail(record_property, f"G1 exact: {out[0]}, G2 exact: {out[1]}")
    assert all(out) and linear


def _theorem_case(theta):
    state = integrate_p2(P2State.default(theta), 1.0)
    t0 = time.perf_counter()
    rep = verify_theorem31(state, MU, 2 * MU, doubling=True)
    neg = verify_theorem31(state, MU, 2 * MU, corrupt_kernel=True)
    return rep, neg, time.perf_counter() - t0


def test_criterion_7_theorem(record_property):
    parts, ok = [], True
    for theta in (0.5, 0.25):
        rep, neg, el = _theorem_case(theta)
        good = (rep.residual <= RESIDUAL_TOL and rep.r_doubling <= DOUBLING_TOL
                and neg.residual >= NEGATIVE_FLOOR and el < CASE_SECONDS)
        ok &= good
        parts.append(f"theta={theta}: residual {rep.residual:.1e}, doubling {rep.r_doubling:.1e}, "
                     f"negative {neg.residual:.1e}, {el:.0f}s, |det W| {rep.det_W:.1e}")
    _detail(record_property, "; ".join(parts))
    assert ok


def test_criterion_8_stokes(record_property):
    parts, ok = [], True
    for theta in (0.5, 0.25, 0.0):
        s = integrate_p2(P2State.default(theta), 1.0)
        sd = stokes_matrices(s, template_tol=math.inf)
        tmpl = max(sd.template_residuals)
        s2 = stokes_matrices(integrate_p2(s, 1.5), template_tol=math.inf)
        drift = max(abs(a - b) for a, b in zip(sd.s, s2.s))
        good = tmpl <= TEMPLATE_TOL and sd.product_residual <= PRODUCT_TOL and drift <= DRIFT_TOL
        if (2 * theta).is_integer():
            # both sign conventions for the formal monodromy agree here
            good &= sd.stated_product_residual <= PRODUCT_TOL
        text = (f"theta={theta}: template {tmpl:.1e}, |S1..S6 - exp(-2pi i theta s3)| {sd.product_residual:.1e}, "
                f"|S1..S6 exp(-2pi i theta s3) - I| {sd.stated_product_residual:.1e}, drift {drift:.1e}")
        if theta == 0:
            airy = float(np.max(np.abs(np.array(airy_stokes(s)) - np.array(sd.s))))
            good &= airy <= AIRY_TOL
            text += f", Airy {airy:.1e}"
        ok &= good
        parts.append(text)
    _detail(record_property, "; ".join(parts))
    assert ok


def test_criterion_9_properties(record_property):
    here = Path(__file__).parent
    if conftest.OUTCOMES:
        outcomes = conftest.OUTCOMES
        where = "this session"
    else:
        mods = [str(here / m) for m in conftest.PROPERTY_MODULES]
        res = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *mods],
                             capture_output=True, text=True, cwd=here.parent)
        outcomes = {"subprocess": res.returncode == 0}
        where = "subprocess run"
    failed = [k for k, v in outcomes.items() if not v]
    _detail(record_property, f"{len(outcomes) - len(failed)}/{len(outcomes)} property tests passed ({where}); "
                             f"ring, derivative, functoriality, inverse and Laplace laws at "
                             f"{PROPERTY_EXAMPLES} examples each")
    assert not failed


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
