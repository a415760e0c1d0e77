"""Numeric Laurent-polynomial matrices built from exact catalog matrices."""

from __future__ import annotations

from typing import Dict, Mapping

import numpy as np

from ..pairs import MatrixRat
from .p2flow import NumericsError


class LaurentMatrix:
    """sum_k coeffs[k] * s**k with constant complex matrices."""

    def __init__(self, coeffs: Mapping[int, np.ndarray]):
        self.coeffs: Dict[int, np.ndarray] = {k: np.asarray(v, dtype=complex) for k, v in coeffs.items()
                                              if np.any(v != 0)}
        shape = next(iter(coeffs.values())).shape
        self.shape = shape
        self._lo = min(self.coeffs, default=0)
        hi = max(self.coeffs, default=0)
        self._stack = np.array([self.coeffs.get(k, np.zeros(shape, complex))
                                for k in range(hi, self._lo - 1, -1)])

    @classmethod
    def from_exact(cls, M: MatrixRat, s: str, values: Mapping[str, complex]) -> "LaurentMatrix":
        n, m = M.shape
        coeffs: Dict[int, np.ndarray] = {}
        for i in range(n):
            for j in range(m):
                e = M[i, j]
                if e.is_zero():
                    continue
                num, den = e.univariate(s, values)
                nz = np.flatnonzero(den)
                if len(nz) != 1:
                    raise NumericsError(f"entry ({i + 1},{j + 1}) is not a Laurent polynomial in {s}")
                c, shift = den[nz[0]], len(den) - 1 - nz[0]
                deg = len(num) - 1
                for p, a in enumerate(num):
                    if a != 0:
                        k = int(deg - p - shift)
                        coeffs.setdefault(k, np.zeros((n, m), complex))[i, j] += a / c
        if not coeffs:
            coeffs[0] = np.zeros((n, m), complex)
        return cls(coeffs)

    def __call__(self, x: complex) -> np.ndarray:
        out = self._stack[0].copy()
        for c in self._stack[1:]:
            out = out * x + c
        return out * x ** self._lo if self._lo else out

    def __getitem__(self, k: int) -> np.ndarray:
        return self.coeffs.get(k, np.zeros(self.shape, complex))


def compile_matrix(M: MatrixRat, names):
    """Vectorized evaluator ``f(*values) -> complex matrix`` for the given symbol order."""
    import sympy

    from ..symcore import symbol

    syms = [sympy.Symbol(symbol(n).name) for n in names]
    entries = []
    for row in M.rows:
        for e in row:
            re_, im_ = e.parts[0], e.parts[1]
            expr = re_.as_expr() + sympy.I * im_.as_expr()
            entries.append(sympy.lambdify(syms, expr, "numpy"))
    n, m = M.shape

    def evaluate(*values):
        return np.array([complex(f(*values)) for f in entries]).reshape(n, m)

    return evaluate
