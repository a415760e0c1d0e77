"""The integral transform from JM2 solutions to HTW solutions and its check.

    W(mu) = mu**(-theta/2) diag(-mu/u, 1/2) int_L exp(-lam**3/3 + lam*(mu - t/2)) Y(lam) dlam

The integrand f = exp(g) Y obeys f' = (A(lam) - lam**2 + mu - t/2) f, so it is
carried along the contour by the ODE solver together with its integral.
Beyond R_trunc each ray is finished with the formal series, because the
e^{lam*mu} part of the integrand decays only exponentially in |lam|.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad_vec

from ..pairs import catalog
from .asymptotics import FormalSeries, formal_series, jm2_coefficients
from .canonical import CanonicalSolution, canonical_solution, ode_solve, seed_rays
from .contour import Contour, Path, build_contour
from .laurent import LaurentMatrix, compile_matrix
from .p2flow import NumericsError, P2State, p2_trajectory


class TailNotDecaying(NumericsError):
    pass


class QuadratureFailure(NumericsError):
    pass


def _carry(A, F0, lam_of, dlam, span, shift, tol, accumulate):
    """Carry F' = (A - shift) F along the path; also return int F dlam if asked."""
    n, m = F0.shape
    size = n * m

    def rhs(tau, v):
        lam = lam_of(tau)
        F = v[:size].reshape(n, m)
        dF = (A(lam) - shift(lam) * np.eye(n)) @ F
        d = dlam(tau)
        if accumulate:
            return np.concatenate([(dF * d).ravel(), (F * d).ravel()])
        return (dF * d).ravel()

    v0 = F0.ravel()
    if accumulate:
        v0 = np.concatenate([v0, np.zeros(size, complex)])
    v = ode_solve(rhs, span, v0, tol, "contour integration")
    F = v[:size].reshape(n, m)
    return F, (v[size:].reshape(n, m) if accumulate else None)


def _tail(series: FormalSeries, state: P2State, mu: complex, phi: float, R: float,
          F_R: np.ndarray, tol: float) -> Tuple[np.ndarray, float]:
    """int_R^inf of the integrand along arg lam = phi, from the formal series."""
    e = np.exp(1j * phi)
    lam_R = R * e
    t, theta = state.t, state.theta
    c = np.linalg.solve(series.prefactor(lam_R), F_R)
    signs = np.array([1.0, -1.0])

    def g(lam):
        return -lam ** 3 / 3 + lam * (mu - t / 2)

    def th(lam):
        return lam ** 3 / 3 + lam * t / 2

    gR, thR = g(lam_R), th(lam_R)

    def integrand(r):
        lam = r * e
        expo = g(lam) - gR + signs * (th(lam) - thR) - signs * theta * math.log(r / R)
        h = np.exp(expo)
        return (series.prefactor(lam) @ (h[:, None] * c) * e).ravel()

    val, err = quad_vec(integrand, R, np.inf, epsabs=tol * 1e-2, epsrel=tol)
    return val.reshape(F_R.shape), float(err)


def _seeded_inbound(series: FormalSeries, state: P2State, A, mu: complex, phi: float, col: int,
                    Rs: float, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    """Integral from infinity to e^{i phi} along a ray where the column is recessive.

    The column is started from the formal series at radius Rs and carried
    inward as w = y * exp(-s*(lam**3/3 + lam*t/2)), which stays bounded.
    Returns (integrand at e^{i phi}, integral along the ray in its direction).
    """
    s = 1 if col == 0 else -1
    e = np.exp(1j * phi)
    t, theta = state.t, state.theta
    lam_s = Rs * e
    w0 = series.prefactor(lam_s)[:, col] * np.exp(-s * theta * (math.log(Rs) + 1j * phi))

    def expo(lam):
        # log of the integrand relative to w
        return -lam ** 3 / 3 + lam * (mu - t / 2) + s * (lam ** 3 / 3 + lam * t / 2)

    def rhs(r, v):
        lam = r * e
        w = v[:2]
        dw = (A(lam) - s * (lam * lam + t / 2) * np.eye(2)) @ w * e
        return np.concatenate([dw, w * np.exp(expo(lam)) * e])

    v = ode_solve(rhs, (Rs, 1.0), np.concatenate([w0, np.zeros(2, complex)]), tol, "inbound ray")
    F1 = (v[:2] * np.exp(expo(e)))[:, None]
    # beyond Rs the column is exp(-2 lam^3/3)-small; its series tail is added for completeness
    def tail_integrand(r):
        lam = r * e
        return series.prefactor(lam)[:, col] * np.exp(expo(lam) - s * theta * (math.log(r) + 1j * phi)) * e

    tail, _ = quad_vec(tail_integrand, Rs, np.inf, epsabs=tol * 1e-2, epsrel=tol)
    return F1, (v[2:] - tail)[:, None]


@dataclass
class TransformResult:
    W: np.ndarray
    integral: np.ndarray
    mu: complex
    contour: Contour
    tail_error: float
    tail_size: float
    branch: Dict[str, float] = field(default_factory=dict)


def integral_transform(state: P2State, contour: Contour, mu: complex, tol: float = 1e-10,
                       corrupt_kernel: bool = False, tail: bool = True,
                       solutions: Optional[Dict[int, CanonicalSolution]] = None,
                       seed_radius: Optional[float] = None) -> TransformResult:
    """W_int(mu) for the given contour.

    ``corrupt_kernel`` flips the sign of the cubic in the kernel (a negative
    control: the result is then not a solution).  It implies ``tail=False``.
    """
    if not contour.decay_ok(mu) or (contour.variant == "standard" and contour.k is not None
                                    and not _wedge_ok(contour, mu)):
        raise TailNotDecaying(f"Re(lam*mu) >= 0 on a ray of the contour (arg mu = {cmath.phase(mu):.6g})")
    if corrupt_kernel:
        tail = False
    A = jm2_coefficients(state)
    t = state.t
    sign3 = 1.0 if corrupt_kernel else -1.0

    def shift(lam):
        return -(sign3 * lam * lam + mu - t / 2)

    R = contour.R_trunc
    seed = seed_radius if seed_radius is not None else max(8.0, R)
    solutions = {} if solutions is None else solutions
    series = formal_series(state) if tail else None
    cols, tail_err, tail_size = [], 0.0, 0.0
    for j, path in enumerate(contour.paths):
        n, col = contour.sectors[j], contour.columns[j]
        if n not in solutions:
            solutions[n] = canonical_solution(state, n, seed_radius=seed, tol=tol)
        a, b = path.phi_in, path.phi_out
        ea, eb = np.exp(1j * a), np.exp(1j * b)
        if (ea * mu).real >= 0 and not corrupt_kernel:
            # e^{lam*mu} grows here: only a column recessive on this ray may
            # arrive along it, and it has to be carried inward from its seed
            seed_phi = seed_rays(n)[col]
            if abs((seed_phi - a + math.pi) % (2 * math.pi) - math.pi) > 1e-12:
                raise TailNotDecaying(f"integrand grows along arg lam = {a:.6g}")
            F1, I_in = _seeded_inbound(series or formal_series(state), state, A, mu, a, col,
                                       max(seed, R), tol)
        else:
            F0 = solutions[n].Y0[:, [col]]
            # 0 -> e^{ia}
            F1, _ = _carry(A, F0, lambda r: r * ea, lambda r: ea, (0.0, 1.0), shift, tol, False)
            # inbound ray, traversed here outward from 1 to R (so it enters with a minus sign)
            FR_in, I_out_dir = _carry(A, F1, lambda r: r * ea, lambda r: ea, (1.0, R), shift, tol, True)
            I_in = -I_out_dir
            if tail:
                T_in, e1 = _tail(series, state, mu, a, R, FR_in, tol)
                I_in = I_in - T_in
                tail_err += e1
                tail_size = max(tail_size, np.abs(T_in).max())
        # unit arc from a to b
        arc = path.arc
        F2, I_arc = _carry(A, F1, lambda s: np.exp(1j * (a + s * arc)),
                           lambda s: 1j * arc * np.exp(1j * (a + s * arc)), (0.0, 1.0), shift, tol, True)
        FR_out, I_out = _carry(A, F2, lambda r: r * eb, lambda r: eb, (1.0, R), shift, tol, True)
        total = I_in + I_arc + I_out
        if tail:
            T_out, e2 = _tail(series, state, mu, b, R, FR_out, tol)
            total = total + T_out
            tail_err += e2
            tail_size = max(tail_size, np.abs(T_out).max())
        cols.append(total[:, 0])
    integral = np.column_stack(cols)
    if tail and tail_err > max(tol, 1e-12) * 10:
        raise QuadratureFailure(f"tail quadrature error {tail_err:.3g} exceeds tolerance")
    power = cmath.exp(-state.theta / 2 * cmath.log(mu))
    left = np.diag([-mu / state.u, 0.5])
    W = power * left @ integral
    branch = {"arg mu": cmath.phase(mu)}
    return TransformResult(W, integral, mu, contour, tail_err, tail_size, branch)


def _wedge_ok(contour: Contour, mu: complex) -> bool:
    from .contour import _in_interval, wedge

    return _in_interval(cmath.phase(mu), *wedge(contour.k, contour.eps))


def htw_coefficients(state: P2State) -> LaurentMatrix:
    return LaurentMatrix.from_exact(catalog("HTW").R, "mu", state.values())


def mu_transfer(state: P2State, mu1: complex, mu2: complex, tol: float = 1e-10) -> np.ndarray:
    """Transfer matrix of the HTW mu-equation along the segment mu1 -> mu2."""
    if mu1 == mu2:
        return np.eye(2, dtype=complex)
    A = htw_coefficients(state)
    d = mu2 - mu1
    # the segment must avoid the singular point mu = 0
    s0 = -(mu1 * np.conj(d)).real / abs(d) ** 2
    if 0 <= s0 <= 1 and abs(mu1 + s0 * d) < 1e-9:
        raise NumericsError("segment mu1 -> mu2 passes through mu = 0")
    F, _ = _carry(A, np.eye(2, dtype=complex), lambda s: mu1 + s * d, lambda s: d, (0.0, 1.0),
                  lambda mu: 0.0, tol, False)
    return F


def t_transfer(trajectory, mu: complex, t1: float, t2: float, tol: float = 1e-10) -> np.ndarray:
    """Transfer matrix of the HTW t-equation at fixed mu, coefficients along ``trajectory``."""
    U = compile_matrix(catalog("HTW").T0, ["mu", "t", "y", "z", "theta"])

    def rhs(t, v):
        s = trajectory(t)
        return (U(mu, t, s.y, s.z, s.theta) @ v.reshape(2, 2)).ravel()

    return ode_solve(rhs, (t1, t2), np.eye(2, dtype=complex).ravel(), tol, "t-transfer").reshape(2, 2)


def _rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(a))


@dataclass
class TheoremReport:
    residual: float
    passed: bool
    t_residual: Optional[float]
    W1: np.ndarray
    W2: np.ndarray
    det_W: float
    r_doubling: Optional[float]
    tail_error: float
    details: Dict[str, object] = field(default_factory=dict)


def verify_theorem31(state: P2State, mu1: complex, mu2: complex, k: Optional[int] = None,
                     eps: float = math.pi / 12, R_trunc: float = 6.0, tol: float = 1e-10,
                     accept: float = 1e-6, t2: Optional[float] = None, corrupt_kernel: bool = False,
                     doubling: bool = False, variant: str = "standard") -> TheoremReport:
    """Check that W_int solves the HTW pair through transfer matrices.

    The mu-residual is |W(mu2) - T W(mu1)| / |W(mu2)| with T the transfer
    matrix of the mu-equation; with ``t2`` the same is done in t at mu1.
    """
    from .contour import admissible_k, build_split_contour

    def make(R):
        if variant == "split":
            c = build_split_contour(R, mu1)
            build_split_contour(R, mu2, common=c.paths[0].phi_out)
            return c
        c = build_contour(k, eps, R, mu1)
        build_contour(k, eps, R, mu2)
        return c

    if variant not in ("standard", "split"):
        raise ValueError("variant is 'standard' or 'split'")
    if k is None and variant == "standard":
        ks = [kk for kk in admissible_k(mu1, eps) if kk in admissible_k(mu2, eps)]
        k = ks[0] if ks else 0
    contour = make(R_trunc)
    sols: Dict[int, CanonicalSolution] = {}
    r1 = integral_transform(state, contour, mu1, tol, corrupt_kernel, solutions=sols)
    r2 = integral_transform(state, contour, mu2, tol, corrupt_kernel, solutions=sols)
    T = mu_transfer(state, mu1, mu2, tol)
    residual = _rel(r2.W, T @ r1.W) if mu1 != mu2 else 0.0
    t_res = None
    details: Dict[str, object] = {"variant": variant, "k": contour.k, "eps": contour.eps,
                                  "R_trunc": R_trunc, "sectors": list(contour.sectors),
                                  "rays": [list(r) for r in contour.rays()]}
    if t2 is not None:
        traj = p2_trajectory(state, t2, tol=min(tol, 1e-12))
        s2 = traj.end
        r3 = integral_transform(s2, contour, mu1, tol, corrupt_kernel)
        Tt = t_transfer(traj, mu1, state.t, t2, tol)
        t_res = _rel(r3.W, Tt @ r1.W)
        details["t2"] = t2
    r_doub = None
    if doubling:
        c2 = make(2 * R_trunc)
        w2 = integral_transform(state, c2, mu1, tol, corrupt_kernel,
                                seed_radius=max(8.0, 2 * R_trunc)).W
        r_doub = float(np.linalg.norm(w2 - r1.W))
    worst = max(residual, t_res or 0.0)
    return TheoremReport(residual, worst <= accept, t_res, r1.W, r2.W, float(abs(np.linalg.det(r1.W))),
                         r_doub, r1.tail_error + r2.tail_error, details)
