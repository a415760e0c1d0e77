"""Stokes matrices of the JM2 lambda-equation and an Airy cross-check.

S_n = Y_n^{-1} Y_{n+1}; S_n is upper unipotent for odd n and lower unipotent
for even n.  Y_7 is computed on the branch of log lam shifted by 2pi, which
closes the cycle:

    S_1 S_2 ... S_6 = Y_1^{-1} Y_7 = exp(-2 pi i theta sigma3).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.special import airy

from .canonical import canonical_solution, seed_rays
from .p2flow import NumericsError, P2State, integrate_p2


class TemplateViolation(NumericsError):
    pass


def template(n: int, s: complex) -> np.ndarray:
    S = np.eye(2, dtype=complex)
    if n % 2:
        S[0, 1] = s
    else:
        S[1, 0] = s
    return S


def formal_monodromy(theta: complex) -> np.ndarray:
    return np.diag([cmath.exp(-2j * math.pi * theta), cmath.exp(2j * math.pi * theta)])


@dataclass
class StokesData:
    s: List[complex]
    matrices: List[np.ndarray]
    template_residuals: List[float]
    product_residual: float        # |S1...S6 - exp(-2 pi i theta sigma3)|
    stated_product_residual: float  # |S1...S6 exp(-2 pi i theta sigma3) - I|
    theta: complex
    t: float
    det_defects: List[float] = field(default_factory=list)

    def as_dict(self) -> Dict[str, object]:
        return {"s": [[z.real, z.imag] for z in self.s], "template_residuals": self.template_residuals,
                "product_residual": self.product_residual,
                "stated_product_residual": self.stated_product_residual,
                "theta": [complex(self.theta).real, complex(self.theta).imag], "t": self.t}


def stokes_matrices(state: P2State, tol: float = 1e-10, template_tol: float = 1e-8,
                    seed_radius: float = 8.0) -> StokesData:
    Ys = [canonical_solution(state, n, seed_radius=seed_radius, tol=tol) for n in range(1, 8)]
    mats, svals, resid = [], [], []
    for n in range(1, 7):
        S = np.linalg.solve(Ys[n - 1].Y0, Ys[n].Y0)
        s = S[0, 1] if n % 2 else S[1, 0]
        r = float(np.linalg.norm(S - template(n, s)))
        mats.append(S)
        svals.append(complex(s))
        resid.append(r)
    bad = [n for n, r in enumerate(resid, 1) if r > template_tol]
    if bad:
        raise TemplateViolation(f"S_{bad[0]} is off its unipotent template by {resid[bad[0] - 1]:.3g}")
    P = np.eye(2, dtype=complex)
    for n, s in enumerate(svals, 1):
        P = P @ template(n, s)
    E = formal_monodromy(state.theta)
    return StokesData(svals, mats, resid, float(np.linalg.norm(P - E)),
                      float(np.linalg.norm(P @ E - np.eye(2))), state.theta, state.t,
                      [y.det_defect for y in Ys])


def isomonodromy_drift(state: P2State, t2: float, tol: float = 1e-10) -> List[float]:
    """|s_n(t2) - s_n(t)| for n = 1..6, with the state carried by the P2 flow."""
    a = stokes_matrices(state, tol)
    b = stokes_matrices(integrate_p2(state, t2, tol=min(tol, 1e-12)), tol)
    return [abs(x - y) for x, y in zip(a.s, b.s)]


# -- Airy oracle ------------------------------------------------------------

def _valley(phi: float) -> int:
    """Index m of the valley arg v = pi(2m+1)/3 of exp(v^3/3) nearest to phi."""
    m = round((phi / math.pi * 3 - 1) / 2) % 3
    if abs(((phi - math.pi * (2 * m + 1) / 3) + math.pi) % (2 * math.pi) - math.pi) > 1e-9:
        raise ValueError("direction is not a valley of exp(v^3/3)")
    return m


def _airy_path(p: int, q: int, x: complex):
    """(J, K) = int e^{v^3/3 - x v} (1, v) dv from valley p to valley q."""
    omega = cmath.exp(2j * math.pi / 3)
    if q == (p + 1) % 3:
        sign, m = 1, q
    elif p == (q + 1) % 3:
        sign, m = -1, p
    else:
        raise ValueError("valleys must differ")
    ai, aip, _, _ = airy(omega ** m * x)
    J = sign * 2j * math.pi * omega ** m * ai
    K = -sign * 2j * math.pi * omega ** (2 * m) * aip
    return complex(J), complex(K)


def airy_stokes(state: P2State) -> List[complex]:
    """Stokes multipliers for theta = 0 on the branch z = 0, from Airy functions.

    There A is upper triangular, column 1 of every Y_n is e^{Theta} e_1 and

        s_n = u * int_{inf_{n+1}}^{inf_n} (s - y) exp(-2 s^3/3 - t s) ds   (n odd),

    with inf_n the ray of S_n where exp(-2 s^3/3) decays.  The substitution
    s = c v, c = -2^{-1/3} turns this into Airy integrals.
    """
    if abs(state.theta) > 1e-14 or abs(state.z) > 1e-10:
        raise NumericsError("the Airy oracle needs theta = 0 and z = 0")
    c = -2 ** (-1 / 3)
    x = state.t * c
    out = []
    for n in range(1, 7):
        if n % 2 == 0:
            out.append(0j)
            continue
        a = seed_rays(n + 1)[1]  # start direction in s
        b = seed_rays(n)[1]      # end direction
        J, K = _airy_path(_valley(a + math.pi), _valley(b + math.pi), x)
        out.append(state.u * (c * c * K - state.y * c * J))
    return out
