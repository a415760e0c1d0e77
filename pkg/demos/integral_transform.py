"""Push a JM2 solution through the exp(lam*mu) kernel and check it solves HTW."""

import cmath
import math

import numpy as np

from painleve_lax.numerics import (P2State, build_split_contour, integral_transform, integrate_p2,
                                   mu_transfer, verify_theorem31)

mu1 = cmath.exp(2j * math.pi / 3)
mu2 = 2 * mu1

# y = 0 solves P2 when theta = 1/2; theta = 1/4 needs the ODE
for theta in (0.5, 0.25):
    state = integrate_p2(P2State.default(theta), 1.0)
    rep = verify_theorem31(state, mu1, mu2, doubling=True, t2=1.3)
    print(f"theta={theta}: mu residual {rep.residual:.2e}, t residual {rep.t_residual:.2e}, "
          f"doubling {rep.r_doubling:.2e}, |det W| {rep.det_W:.2e}")

# |det W| is tiny above: both columns come from one loop and are proportional.
# Splitting the contour at a ray where exp(lam*mu) decays gives two independent columns.
state = P2State.default(0.5, 1.0)
for mu in (-1.0, -1.5, 1.5 * cmath.exp(2.9j)):
    c = build_split_contour(6.0, mu)
    W = integral_transform(state, c, mu).W
    print(f"split contour at mu={mu:.3f}: det W = {np.linalg.det(W):.6f}")

c = build_split_contour(6.0, -1.0)
W1 = integral_transform(state, c, -1.0).W
W2 = integral_transform(state, c, -1.5).W
T = mu_transfer(state, -1.0, -1.5)
print("transfer residual:", np.linalg.norm(W2 - T @ W1) / np.linalg.norm(W2))
print("pi/(2*sqrt(2)) =", math.pi / (2 * math.sqrt(2)))
