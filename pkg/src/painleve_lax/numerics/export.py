"""Plain numeric tables for plotting.

Every table is whitespace separated with a ``#`` header naming the columns.
Complex numbers take two columns (re, im); matrices are stored row-major.
"""

from __future__ import annotations

import io
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from .canonical import canonical_solution, sample_along
from .contour import Contour
from .p2flow import P2State
from .transform import integral_transform

MATRIX_COLUMNS = ["11", "12", "21", "22"]


def _header(var: str, name: str) -> str:
    cols = [f"{var}_re", f"{var}_im"]
    for ij in MATRIX_COLUMNS:
        cols += [f"{name}{ij}_re", f"{name}{ij}_im"]
    return " ".join(cols)


def _rows(xs: Sequence[complex], mats: Iterable[np.ndarray]) -> np.ndarray:
    out = []
    for x, M in zip(xs, mats):
        row = [x.real, x.imag]
        for v in np.asarray(M).ravel():
            row += [v.real, v.imag]
        out.append(row)
    return np.array(out)


def _write(table: np.ndarray, header: str, out: Union[str, TextIO, None]) -> str:
    buf = io.StringIO()
    np.savetxt(buf, table, header=header, fmt="%.16e")
    text = buf.getvalue()
    if isinstance(out, str):
        with open(out, "w") as fh:
            fh.write(text)
    elif out is not None:
        out.write(text)
    return text


def canonical_table(state: P2State, n: int, contour: Contour, points: int = 100,
                    out: Union[str, TextIO, None] = None, tol: float = 1e-10) -> str:
    """Y_n sampled along the first path of ``contour``: lam, then Y entries."""
    Y = canonical_solution(state, n, tol=tol)
    lams, vals = sample_along(Y, contour.paths[0], contour.R_trunc, points, tol)
    return _write(_rows(lams, vals), _header("lam", "Y"), out)


def transform_table(state: P2State, contour: Contour, mus: Sequence[complex],
                    out: Union[str, TextIO, None] = None, tol: float = 1e-10) -> str:
    """W_int at the given mu values: mu, then W entries."""
    sols: dict = {}
    Ws = [integral_transform(state, contour, mu, tol, solutions=sols).W for mu in mus]
    return _write(_rows(list(mus), Ws), _header("mu", "W"), out)


def read_table(path_or_text: str) -> np.ndarray:
    if "\n" in path_or_text:
        return np.loadtxt(io.StringIO(path_or_text), ndmin=2)
    return np.loadtxt(path_or_text, ndmin=2)
