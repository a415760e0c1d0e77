"""Integration contours in the lambda-plane.

A path comes in from infinity along one ray, follows the unit circle the
short way round and leaves along a second ray.  Beyond ``R_trunc`` the
integrals are continued with the formal series (see ``transform``).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .p2flow import NumericsError


class MuOutsideWedge(NumericsError):
    def __init__(self, k: int, mu: complex, admissible: List[int]):
        super().__init__(f"arg mu = {cmath.phase(mu):.6g} is outside the wedge for k = {k}; "
                         f"admissible k: {admissible}")
        self.k = k
        self.admissible = admissible


class BadOpening(NumericsError):
    pass


def ray_angle(n: int, eps: float) -> float:
    """arg of the ray R^eps_n."""
    return -math.pi / 6 + math.pi * n / 3 + (-1) ** n * eps


def wedge(k: int, eps: float) -> Tuple[float, float]:
    """Open interval of arg mu for which the contour L_k works."""
    return (math.pi / 3 - 2 * math.pi * k / 3 + eps, math.pi - 2 * math.pi * k / 3 - eps)


def _in_interval(x: float, lo: float, hi: float) -> bool:
    x = lo + (x - lo) % (2 * math.pi)
    return lo < x < hi


def admissible_k(mu: complex, eps: float) -> List[int]:
    arg = cmath.phase(mu)
    return [k for k in range(3) if _in_interval(arg, *wedge(k, eps))]


@dataclass(frozen=True)
class Path:
    phi_in: float   # the path arrives from infinity along arg = phi_in
    phi_out: float  # and leaves along arg = phi_out

    @property
    def arc(self) -> float:
        """Signed arc from phi_in to phi_out, |arc| < pi."""
        d = (self.phi_out - self.phi_in + math.pi) % (2 * math.pi) - math.pi
        return d

    def sample(self, R: float, n: int = 200) -> np.ndarray:
        r_in = np.linspace(R, 1, n)
        arc = self.phi_in + np.linspace(0, self.arc, n)
        r_out = np.linspace(1, R, n)
        return np.concatenate([r_in * np.exp(1j * self.phi_in), np.exp(1j * arc),
                               r_out * np.exp(1j * self.phi_out)])


@dataclass(frozen=True)
class Contour:
    k: Optional[int]
    eps: float
    R_trunc: float
    paths: Tuple[Path, Path]  # one per column
    variant: str  # "standard" or "split"
    mu_arg: float
    sectors: Tuple[int, int]  # canonical solution used for each column
    columns: Tuple[int, int] = (0, 1)  # which column of that solution (0-based)

    def rays(self) -> List[Tuple[float, float]]:
        return [(p.phi_in, p.phi_out) for p in self.paths]

    def decay_ok(self, mu: complex) -> bool:
        """Re(lam*mu) < 0 on every ray that may carry an e^{lam*mu} tail."""
        return all(math.cos(phi + cmath.phase(mu)) < 0 for p in self.paths
                   for phi in (p.phi_in, p.phi_out)
                   if not (self.variant == "split" and phi != self.paths[0].phi_out))


def build_contour(k: int, eps: float, R_trunc: float, mu: complex) -> Contour:
    """Standard contour L_k asymptotic to R^eps_{2k+1} and R^eps_{2k+2}."""
    if not 0 < eps < math.pi / 3:
        raise BadOpening(f"opening eps = {eps} is not inside (0, pi/3)")
    if R_trunc <= 1:
        raise BadOpening("R_trunc must exceed the radius of the joining arc (1)")
    if mu == 0:
        raise MuOutsideWedge(k, mu, [])
    if not _in_interval(cmath.phase(mu), *wedge(k, eps)):
        raise MuOutsideWedge(k, mu, admissible_k(mu, eps))
    path = Path(ray_angle(2 * k + 1, eps), ray_angle(2 * k + 2, eps))
    # the canonical solution whose first column is not recessive across the
    # whole contour (otherwise that column integrates to zero)
    n = (2 * k + 2) % 6 + 1
    return Contour(k % 3, eps, R_trunc, (path, path), "standard", cmath.phase(mu), (n, n))


def build_split_contour(R_trunc: float, mu: complex, common: Optional[float] = None) -> Contour:
    """Per-column contours built on the anti-Stokes rays arg lam = 2 pi n / 3.

    Both paths leave along a common anti-Stokes ray c with Re(lam*mu) < 0 on
    it.  They arrive along the other two anti-Stokes rays c +- 2pi/3.  The
    second columns of the chosen canonical solutions are recessive on those
    rays, so no condition on mu arises there.  For arg mu = pi this is the
    contour with c = 0 and columns taken from Y_2 and Y_4.
    """
    beta = cmath.phase(mu)
    if mu == 0:
        raise MuOutsideWedge(-1, mu, [])
    if common is None:
        common = min((2 * math.pi * n / 3 for n in range(3)), key=lambda c: math.cos(c + beta))
    if math.cos(common + beta) >= 0:
        raise MuOutsideWedge(-1, mu, admissible_k(mu, 1e-9))
    phis = (common + 2 * math.pi / 3, common - 2 * math.pi / 3)
    sectors = []
    for phi in phis:
        # even n with phi inside S_n = (pi/6 + pi(n-2)/3, pi/6 + pi n/3)
        for n in (2, 4, 6):
            lo = math.pi / 6 + math.pi * (n - 2) / 3
            if _in_interval(phi, lo, lo + 2 * math.pi / 3):
                sectors.append(n)
                break
    return Contour(None, 0.0, R_trunc, (Path(phis[0], common), Path(phis[1], common)), "split", beta,
                   tuple(sectors), (1, 1))
