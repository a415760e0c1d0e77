import cmath
import math

import numpy as np
import pytest

from painleve_lax.numerics import (MuOutsideWedge, P2State, StepFailure, admissible_k, airy_stokes,
                                   build_contour, build_split_contour, canonical_solution, canonical_table,
                                   formal_series, integral_transform, integrate_p2, mu_transfer,
                                   p2_trajectory, ray_angle, read_table, sector, stokes_matrices,
                                   verify_theorem31)
from painleve_lax.numerics.stokes import template
from painleve_lax.numerics.asymptotics import SIGMA3, jm2_coefficients
from painleve_lax.numerics.laurent import LaurentMatrix
from painleve_lax.pairs import catalog

EPS = math.pi / 12
MU = cmath.exp(2j * math.pi / 3)


@pytest.fixture(scope="module")
def generic():
    return integrate_p2(P2State.default(0.25), 1.0)


def test_half_integer_branch_is_explicit():
    s = integrate_p2(P2State.default(0.5), 2.0)
    assert abs(s.y) < 1e-12 and abs(s.z + 1.0) < 1e-10 and abs(s.u - 1) < 1e-12


def test_flow_solves_p2(generic):
    traj = p2_trajectory(P2State.default(0.25), 1.2)
    h = 1e-3
    y = lambda t: traj(t).y  # noqa: E731
    ypp = (y(1 + h) - 2 * y(1) + y(1 - h)) / h ** 2
    assert abs(ypp - (2 * y(1) ** 3 + y(1) + generic.alpha)) < 1e-5
    assert generic.constraint_defect < 1e-10


def test_pole_is_reported():
    with pytest.raises(StepFailure) as info:
        p2_trajectory(P2State(0, 5.0, 0, 1, 0.25), 3)
    assert abs(info.value.pole_estimate - 0.19995) < 1e-3


def test_coefficients_match_the_exact_pair(generic):
    A = jm2_coefficients(generic)
    exact = LaurentMatrix.from_exact(catalog("JM2").R, "lam", generic.values())
    lam = 1.3 - 0.4j
    assert np.allclose(A(lam), exact(lam), atol=1e-13)


def test_formal_series_solves_the_system(generic):
    fs = formal_series(generic)
    A = jm2_coefficients(generic)
    lam = 8 * cmath.exp(0.3j)
    M, dM = fs.prefactor(lam), fs.prefactor_derivative(lam)
    theta_prime = lam ** 2 + generic.t / 2 - generic.theta / lam
    assert np.linalg.norm(dM + theta_prime * M @ SIGMA3 - A(lam) @ M) < 1e-11
    assert fs.consistency == 0


def test_wedges_and_rays():
    assert ray_angle(1, EPS) == pytest.approx(math.pi / 6 - EPS)
    assert ray_angle(2, EPS) == pytest.approx(math.pi / 2 + EPS)
    assert admissible_k(MU, EPS) == [0]
    assert admissible_k(-1, EPS) == []
    with pytest.raises(MuOutsideWedge) as info:
        build_contour(1, EPS, 6, MU)
    assert info.value.admissible == [0]
    c = build_contour(0, EPS, 6, MU)
    assert c.decay_ok(MU) and not c.decay_ok(-MU)


def test_split_contour_geometry():
    c = build_split_contour(6, -1)
    assert c.sectors == (2, 4) and c.columns == (1, 1)
    assert [r[1] for r in c.rays()] == [0.0, 0.0]


def test_canonical_solution_has_unit_determinant(generic):
    Y = canonical_solution(generic, 1)
    assert Y.det_defect < 1e-10
    assert abs(np.linalg.det(Y.Y0) - 1) < 1e-10
    lo, hi = sector(1)
    assert hi - lo == pytest.approx(2 * math.pi / 3)


def test_solution_follows_the_system(generic):
    Y = canonical_solution(generic, 2)
    A = jm2_coefficients(generic)
    lam, h = 0.7 + 0.2j, 1e-5
    dY = (Y.at(lam + h) - Y.at(lam - h)) / (2 * h)
    assert np.linalg.norm(dY - A(lam) @ Y.at(lam)) / np.linalg.norm(dY) < 1e-7


def test_transform_satisfies_mu_equation_on_the_half_branch():
    s = P2State.default(0.5, 1.0)
    rep = verify_theorem31(s, MU, 2 * MU)
    assert rep.residual < 1e-8 and rep.passed


def test_transform_detects_a_corrupted_kernel():
    s = P2State.default(0.5, 1.0)
    assert verify_theorem31(s, MU, 2 * MU, corrupt_kernel=True).residual > 1e-2


def test_split_contour_gives_a_fundamental_solution():
    s = P2State.default(0.5, 1.0)
    c = build_split_contour(6, -1.0)
    W1 = integral_transform(s, c, -1.0).W
    W2 = integral_transform(s, c, -1.5).W
    assert abs(np.linalg.det(W1)) > 0.5
    assert np.linalg.norm(W2 - mu_transfer(s, -1.0, -1.5) @ W1) / np.linalg.norm(W2) < 1e-8


def test_stokes_templates_and_airy():
    s = integrate_p2(P2State.default(0.0), 1.0)
    sd = stokes_matrices(s)
    for n, (S, sv) in enumerate(zip(sd.matrices, sd.s), 1):
        assert np.linalg.norm(S - template(n, sv)) < 1e-8
    assert np.allclose(sd.s, airy_stokes(s), atol=1e-8)


def test_table_round_trip(generic):
    c = build_contour(0, EPS, 6, MU)
    tab = read_table(canonical_table(generic, 1, c, points=5))
    assert tab.shape[1] == 10
    lam = tab[0, 0] + 1j * tab[0, 1]
    Y = canonical_solution(generic, 1).at(lam)
    assert np.allclose(tab[0, 2:4], [Y[0, 0].real, Y[0, 0].imag], rtol=1e-8)
