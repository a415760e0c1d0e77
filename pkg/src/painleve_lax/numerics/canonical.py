"""Canonical solutions Y_n of the JM2 lambda-equation.

Y_n ~ M(lam) exp(Theta(lam) sigma3) in the sector

    S_n = {pi/6 + pi(n-2)/3 < arg lam < pi/6 + pi n/3},

with log lam continued from the seed point.  Each column is seeded far out
on the ray of S_n where it is recessive and carried to lam = 0; there the
pair is regular, so Y_n(0) determines Y_n everywhere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .asymptotics import SIGMA3, FormalSeries, formal_series, jm2_coefficients
from .contour import Contour, Path
from .p2flow import NumericsError, P2State, StepFailure


class SeedAccuracyWarning(UserWarning):
    pass


def sector(n: int) -> Tuple[float, float]:
    lo = math.pi / 6 + math.pi * (n - 2) / 3
    return lo, lo + 2 * math.pi / 3


def seed_rays(n: int) -> Tuple[float, float]:
    """(ray for column 1, ray for column 2) inside S_n, as arguments on the branch of S_n."""
    a, b = math.pi * (n - 1) / 3, math.pi * n / 3
    # column 1 ~ e^{+Theta} is recessive where cos(3 arg) = -1
    return (a, b) if round(math.cos(3 * a)) == -1 else (b, a)


def ode_solve(rhs, span, y0, tol, what="integration"):
    sol = solve_ivp(rhs, span, np.asarray(y0, dtype=complex), method="DOP853", rtol=tol,
                    atol=tol * 1e-2)
    if not sol.success:
        raise StepFailure(f"{what} failed: {sol.message}")
    return sol.y[:, -1]


def transport(coeff, Y0: np.ndarray, lam_of, dlam, span, tol, shift=None) -> np.ndarray:
    """Carry Y' = (coeff(lam) - shift(lam)) Y along lam = lam_of(tau), tau in span."""
    n, m = Y0.shape

    def rhs(tau, v):
        lam = lam_of(tau)
        B = coeff(lam)
        if shift is not None:
            B = B - shift(lam) * np.eye(n)
        return (B @ v.reshape(n, m) * dlam(tau)).ravel()

    return ode_solve(rhs, span, Y0.ravel(), tol).reshape(n, m)


@dataclass
class CanonicalSolution:
    n: int
    state: P2State
    Y0: np.ndarray                # Y_n(0)
    seed_radius: float
    seeds: Tuple[complex, complex]
    branch: Dict[str, float]      # arg of lam used for log lam at each seed
    det_defect: float
    samples: Optional[Tuple[np.ndarray, np.ndarray]] = None  # (lam, Y) along a contour
    series: Optional[FormalSeries] = field(default=None, repr=False)

    def at(self, lam: complex, tol: float = 1e-10) -> np.ndarray:
        """Y_n(lam) by transport from 0 along the straight segment."""
        A = jm2_coefficients(self.state)
        return transport(A, self.Y0, lambda s: s * lam, lambda s: lam, (0.0, 1.0), tol)


def _seed_column(state, series, A, n, col, R, tol):
    phi = seed_rays(n)[col]
    s = 1 if col == 0 else -1
    lam_s = R * np.exp(1j * phi)
    log_lam = math.log(R) + 1j * phi
    w = series.prefactor(lam_s)[:, col] * np.exp(-s * state.theta * log_lam)
    direction = np.exp(1j * phi)
    t = state.t

    def rhs(r, v):
        lam = r * direction
        return (A(lam) - s * (lam * lam + t / 2) * np.eye(2)) @ v * direction

    return ode_solve(rhs, (R, 0.0), w, tol, f"seeding Y_{n} column {col + 1}"), lam_s, phi


def canonical_solution(state: P2State, n: int, contour: Optional[Contour] = None,
                       seed_radius: float = 8.0, tol: float = 1e-10, check_seed: bool = False,
                       samples: int = 0) -> CanonicalSolution:
    if contour is not None and seed_radius < contour.R_trunc:
        raise NumericsError("seed_radius must be at least R_trunc")
    series = formal_series(state)
    A = jm2_coefficients(state)
    cols, seeds, branch = [], [], {}
    for col in range(2):
        v, lam_s, phi = _seed_column(state, series, A, n, col, seed_radius, tol)
        cols.append(v)
        seeds.append(lam_s)
        branch[f"column {col + 1}"] = phi
    Y0 = np.column_stack(cols)
    det_defect = abs(np.linalg.det(Y0) - 1)
    if check_seed:
        Y2 = np.column_stack([_seed_column(state, series, A, n, c, 2 * seed_radius, tol)[0]
                              for c in range(2)])
        diff = np.abs(Y2 - Y0).max()
        if diff > 10 * tol * max(1.0, np.abs(Y0).max()):
            warnings.warn(f"Y_{n}(0) moves by {diff:.3g} when the seed radius is doubled",
                          SeedAccuracyWarning, stacklevel=2)
    out = CanonicalSolution(n, state, Y0, seed_radius, tuple(seeds), branch, det_defect, None, series)
    if contour is not None and samples:
        out.samples = sample_along(out, contour.paths[0], contour.R_trunc, samples, tol)
    return out


def sample_along(Y: CanonicalSolution, path: Path, R: float, npts: int, tol: float = 1e-10):
    """Values of Y_n at npts points per piece of ``path`` (inbound ray, arc, outbound ray)."""
    A = jm2_coefficients(Y.state)
    lams = path.sample(R, npts)
    out = []
    cur, cur_lam = Y.Y0, 0j
    for lam in lams:
        if lam != cur_lam:
            d = lam - cur_lam
            start = cur_lam
            cur = transport(A, cur, lambda s, a=start, d=d: a + s * d, lambda s, d=d: d, (0.0, 1.0), tol)
            cur_lam = lam
        out.append(cur)
    return lams, np.array(out)
