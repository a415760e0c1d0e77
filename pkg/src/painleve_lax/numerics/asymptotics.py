"""Formal solution of the JM2 lambda-equation at infinity.

With A(lam) = sigma3*lam**2 + A1*lam + A0 the equation dY/dlam = A Y has the
formal solution

    Y = M(lam) exp(Theta(lam) sigma3),   Theta = lam**3/3 + lam*t/2 - theta*log(lam),
    M = I + m1/lam + m2/lam**2 + ...

The off-diagonal part of m_k comes from [sigma3, m_k] = rhs_k and the diagonal
part of m_k from the vanishing of diag(rhs_{k+3}).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from ..pairs import catalog
from .laurent import LaurentMatrix
from .p2flow import NumericsError, P2State

SIGMA3 = np.diag([1.0 + 0j, -1.0 + 0j])


def jm2_coefficients(state: P2State) -> LaurentMatrix:
    return LaurentMatrix.from_exact(catalog("JM2").R, "lam", state.values())


def _offdiag(x):
    return x - np.diag(np.diag(x))


@dataclass
class FormalSeries:
    terms: List[np.ndarray]
    t: float
    theta: complex
    consistency: float  # size of the diagonal defect that fixes the exponent

    def exponent(self, lam: complex, log_lam: complex) -> complex:
        return lam ** 3 / 3 + lam * self.t / 2 - self.theta * log_lam

    def prefactor(self, lam: complex) -> np.ndarray:
        """M(lam), summed up to the smallest term."""
        out = np.zeros((2, 2), complex)
        x = 1 / lam
        power = 1 + 0j
        prev = np.inf
        for k, m in enumerate(self.terms):
            term = m * power
            size = np.abs(term).max()
            if k > 2 and size > prev:
                break
            out += term
            if size < 1e-18 * np.abs(out).max():
                break
            prev = size
            power *= x
        return out

    def prefactor_derivative(self, lam: complex) -> np.ndarray:
        out = np.zeros((2, 2), complex)
        for k, m in enumerate(self.terms[1:], start=1):
            term = -k * m * lam ** (-k - 1)
            out += term
            if np.abs(term).max() < 1e-18:
                break
        return out


def formal_series(state: P2State, order: int = 40) -> FormalSeries:
    A = jm2_coefficients(state)
    if not np.allclose(A[2], SIGMA3) or set(A.coeffs) - {0, 1, 2}:
        raise NumericsError("lambda-equation does not have the sigma3*lam**2 + ... form")
    A1, A0 = A[1], A[0]
    t, theta = state.t, state.theta
    K = order
    diags = [np.ones(2, complex)] + [np.zeros(2, complex) for _ in range(K + 3)]

    def run(upto, diags):
        m = [np.eye(2, dtype=complex)]
        rhs_diag = [np.zeros(2, complex)]
        for k in range(1, upto + 1):
            def get(j):
                return m[j] if j >= 0 else np.zeros((2, 2), complex)
            r = -A1 @ get(k - 1) - A0 @ get(k - 2) + (t / 2) * get(k - 2) @ SIGMA3
            if k >= 3:
                r = r - theta * get(k - 3) @ SIGMA3 - (k - 3) * get(k - 3)
            rhs_diag.append(np.diag(r).copy())
            mk = 0.5 * SIGMA3 @ _offdiag(r) + np.diag(diags[k])
            m.append(mk)
        return m, rhs_diag

    _, rd = run(3, diags)
    consistency = float(np.abs(rd[1]).max() + np.abs(rd[2]).max() + np.abs(rd[3]).max())
    for j in range(1, K + 1):
        trial = [d.copy() for d in diags]
        trial[j] = np.zeros(2, complex)
        base = run(j + 3, trial)[1][j + 3]
        J = np.zeros((2, 2), complex)
        for c in range(2):
            trial[j] = np.eye(2, dtype=complex)[c]
            J[:, c] = run(j + 3, trial)[1][j + 3] - base
        diags[j] = np.linalg.solve(J, -base)
    m, _ = run(K, diags)
    return FormalSeries(m, t, theta, consistency)
