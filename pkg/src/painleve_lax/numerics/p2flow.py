"""The P2 flow in the variables (y, z, u) together with y' as a witness.

The flow is

    y' = y**2 + z + t/2,   z' = -2*y*z - theta,   u' = -y*u,

and y' is carried separately through y'' = 2*y**3 + t*y + 1/2 - theta so that
the constraint z = y' - y**2 - t/2 can be monitored along the run.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp


class NumericsError(Exception):
    pass


class StepFailure(NumericsError):
    def __init__(self, message: str, pole_estimate: Optional[complex] = None):
        super().__init__(message)
        self.pole_estimate = pole_estimate


@dataclass(frozen=True)
class P2State:
    t: float
    y: complex
    z: complex
    u: complex
    theta: complex
    yp: Optional[complex] = None

    def __post_init__(self):
        if self.u == 0:
            raise NumericsError("u must be nonzero")
        if self.yp is None:
            object.__setattr__(self, "yp", complex(self.z) + complex(self.y) ** 2 + self.t / 2)

    @property
    def alpha(self) -> complex:
        return 0.5 - self.theta

    @property
    def constraint_defect(self) -> float:
        """|z - (y' - y**2 - t/2)|."""
        return abs(self.z - (self.yp - self.y ** 2 - self.t / 2))

    def values(self) -> dict:
        return {"t": self.t, "y": self.y, "z": self.z, "u": self.u, "theta": self.theta,
                "yp": self.yp, "alpha": self.alpha}

    @classmethod
    def default(cls, theta: complex, t0: float = 0.0) -> "P2State":
        """y = y' = 0 and u = 1 at t0.

        For theta = 1/2 this is the branch y = 0, for theta = 0 and t0 = 0 it
        lies on z = 0 (the Airy branch); other theta give generic data.
        """
        return cls(t0, 0j, -t0 / 2 + 0j, 1 + 0j, complex(theta), 0j)


def _rhs(theta):
    a = 0.5 - theta

    def f(t, v):
        y, z, u, yp = v
        return [y * y + z + t / 2, -2 * y * z - theta, -y * u, 2 * y ** 3 + t * y + a]

    return f


def p2_trajectory(state0: P2State, t_end: float, tol: float = 1e-12,
                  pole_bound: float = 1e4) -> "P2Trajectory":
    if tol <= 0:
        raise ValueError("tol must be positive")
    v0 = np.array([state0.y, state0.z, state0.u, state0.yp], dtype=complex)
    if t_end == state0.t:
        return P2Trajectory(state0, None, state0.t, t_end)

    def blowup(t, v):
        return pole_bound - abs(v[0])

    blowup.terminal = True
    sol = solve_ivp(_rhs(state0.theta), (state0.t, t_end), v0, method="DOP853", rtol=tol,
                    atol=tol * 1e-2, dense_output=True, events=blowup)
    if sol.status == 1 or not sol.success:
        t_last, y_last = sol.t[-1], sol.y[0, -1]
        # near a pole |y| ~ 1/|t - t_pole|
        step = 1 / abs(y_last) if y_last != 0 else 0.0
        est = t_last + np.sign(t_end - state0.t) * step
        raise StepFailure(f"integration stopped at t = {t_last:.6g} (|y| = {abs(y_last):.3g}); "
                          f"pole of y near t = {est:.6g}", complex(est))
    return P2Trajectory(state0, sol.sol, state0.t, t_end)


@dataclass(frozen=True)
class P2Trajectory:
    start: P2State
    dense: Optional[Callable]
    t0: float
    t1: float

    def __call__(self, t: float) -> P2State:
        if self.dense is None:
            return self.start
        lo, hi = min(self.t0, self.t1), max(self.t0, self.t1)
        if not lo - 1e-12 <= t <= hi + 1e-12:
            raise ValueError(f"t = {t} outside the integrated window [{lo}, {hi}]")
        y, z, u, yp = self.dense(t)
        return replace(self.start, t=float(t), y=complex(y), z=complex(z), u=complex(u), yp=complex(yp))

    @property
    def end(self) -> P2State:
        return self(self.t1)


def integrate_p2(state0: P2State, t_end: float, tol: float = 1e-12) -> P2State:
    """Advance ``state0`` to ``t_end`` with an adaptive 8th order Runge-Kutta method."""
    return p2_trajectory(state0, t_end, tol).end
