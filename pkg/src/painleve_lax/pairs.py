"""Fuchs-Garnier pairs as exact data.

A pair is ``L dPsi/ds = R Psi`` together with ``dPsi/dt = T1 s dPsi/ds + T0 Psi``
where ``s`` is the spectral variable.  Plain pairs have ``L = I`` and
``T1 = 0``.  Degenerate pairs have ``det L == 0`` identically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .symcore import (EXT, SYMBOLS, DerivationTable, DivisionByZero, RatFunc, SymcoreError,
                      UncoveredSymbol, parse, symbol)


class PairError(Exception):
    pass


class UnknownPair(PairError, KeyError):
    pass


class DegeneratePair(PairError):
    pass


class NotEliminable(PairError):
    pass


class TwistMismatch(PairError):
    pass


class CatalogFormatError(PairError, ValueError):
    pass


# --------------------------------------------------------------------------
# matrices


class MatrixRat:
    """Small dense matrix of RatFunc entries (rectangular allowed)."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = tuple(tuple(RatFunc.coerce(e) for e in r) for r in rows)
        if len({len(r) for r in self.rows}) > 1:
            raise ValueError("ragged matrix")

    @classmethod
    def identity(cls, n: int) -> "MatrixRat":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, n: int, m: Optional[int] = None) -> "MatrixRat":
        return cls([[0] * (n if m is None else m) for _ in range(n)])

    @classmethod
    def diag(cls, entries) -> "MatrixRat":
        entries = list(entries)
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def parse(cls, rows, ext=None) -> "MatrixRat":
        return cls([[parse(e, ext) if isinstance(e, str) else e for e in r] for r in rows])

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def map(self, fn: Callable[[RatFunc], RatFunc]) -> "MatrixRat":
        return MatrixRat([[fn(e) for e in r] for r in self.rows])

    def __add__(self, other):
        return MatrixRat([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return MatrixRat([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return self.map(lambda e: -e)

    def __mul__(self, c):
        c = RatFunc.coerce(c)
        return self.map(lambda e: e * c)

    __rmul__ = __mul__

    def __matmul__(self, other: "MatrixRat") -> "MatrixRat":
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = RatFunc.const(0)
                for l in range(k):
                    a = self.rows[i][l]
                    if a:
                        b = other.rows[l][j]
                        if b:
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return MatrixRat(out)

    def commutator(self, other) -> "MatrixRat":
        return self @ other - other @ self

    @property
    def T(self) -> "MatrixRat":
        return MatrixRat(list(zip(*self.rows)))

    def take_rows(self, idx: Sequence[int]) -> "MatrixRat":
        return MatrixRat([self.rows[i] for i in idx])

    def take_cols(self, idx: Sequence[int]) -> "MatrixRat":
        return MatrixRat([[r[j] for j in idx] for r in self.rows])

    def hstack(self, other) -> "MatrixRat":
        return MatrixRat([r + s for r, s in zip(self.rows, other.rows)])

    def vstack(self, other) -> "MatrixRat":
        return MatrixRat(self.rows + other.rows)

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.rows for e in r)

    def is_identity(self) -> bool:
        n, m = self.shape
        return n == m and self == MatrixRat.identity(n)

    def __eq__(self, other):
        if not isinstance(other, MatrixRat):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    # exact linear algebra ---------------------------------------------------
    def det(self) -> RatFunc:
        n, m = self.shape
        if n != m:
            raise ValueError("det of a non-square matrix")
        if n == 1:
            return self.rows[0][0]
        if n == 2:
            (a, b), (c, d) = self.rows
            return a * d - b * c
        acc = RatFunc.const(0)
        for j in range(n):
            e = self.rows[0][j]
            if e:
                minor = MatrixRat([r[:j] + r[j + 1:] for r in self.rows[1:]])
                term = e * minor.det()
                acc = acc + term if j % 2 == 0 else acc - term
        return acc

    def adjugate(self) -> "MatrixRat":
        n = self.shape[0]
        if n == 1:
            return MatrixRat([[1]])
        cof = []
        for i in range(n):
            row = []
            for j in range(n):
                minor = MatrixRat([r[:j] + r[j + 1:] for k, r in enumerate(self.rows) if k != i])
                c = minor.det()
                row.append(c if (i + j) % 2 == 0 else -c)
            cof.append(row)
        return MatrixRat(cof).T

    def inverse(self) -> "MatrixRat":
        d = self.det()
        if d.is_zero():
            raise DivisionByZero("matrix is singular")
        return self.adjugate() * d.inverse()

    def rref(self) -> Tuple["MatrixRat", List[int]]:
        rows = [list(r) for r in self.rows]
        n, m = self.shape
        pivots = []
        r = 0
        for c in range(m):
            piv = next((k for k in range(r, n) if rows[k][c]), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            inv = rows[r][c].inverse()
            rows[r] = [e * inv for e in rows[r]]
            for k in range(n):
                if k != r and rows[k][c]:
                    f = rows[k][c]
                    rows[k] = [a - f * b for a, b in zip(rows[k], rows[r])]
            pivots.append(c)
            r += 1
            if r == n:
                break
        return MatrixRat(rows), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def solve_left(self, rhs: "MatrixRat") -> "MatrixRat":
        """Some X with ``X @ self == rhs`` (free unknowns set to zero)."""
        # X B = K  <=>  B^T X^T = K^T
        sol = self.T._solve_right(rhs.T)
        return sol.T

    def _solve_right(self, rhs: "MatrixRat") -> "MatrixRat":
        n, m = self.shape
        aug = self.hstack(rhs)
        red, pivots = aug.rref()
        if any(p >= m for p in pivots):
            raise PairError("inconsistent linear system")
        k = rhs.shape[1]
        out = [[RatFunc.const(0)] * k for _ in range(m)]
        for r, c in enumerate(pivots):
            out[c] = list(red.rows[r][m:])
        return MatrixRat(out)

    # calculus ------------------------------------------------------------
    def diff_spectral(self, s) -> "MatrixRat":
        return self.map(lambda e: e.diff_spectral(s))

    def diff_t(self, table) -> "MatrixRat":
        return self.map(lambda e: e.diff_t(table))

    def substitute(self, bindings) -> "MatrixRat":
        if not bindings:
            return self
        return self.map(lambda e: e.substitute(bindings))

    def coeff_in(self, s, d) -> "MatrixRat":
        return self.map(lambda e: e.coeff_in(s, d))

    def degree_in(self, s) -> int:
        return max((e.degree_in(s) for r in self.rows for e in r), default=-1)

    def free_symbols(self) -> frozenset:
        out = frozenset()
        for r in self.rows:
            for e in r:
                out |= e.free_symbols()
        return out

    def numeric(self, s: str, values: Mapping[str, complex]) -> Callable[[complex], np.ndarray]:
        """Fast evaluator ``x -> complex array`` with all other symbols fixed."""
        n, m = self.shape
        polys = [[e.univariate(s, values) if e else None for e in r] for r in self.rows]

        def evaluate(x):
            out = np.zeros((n, m), dtype=complex)
            for i in range(n):
                for j in range(m):
                    nd = polys[i][j]
                    if nd is not None:
                        out[i, j] = np.polyval(nd[0], x) / np.polyval(nd[1], x)
            return out

        return evaluate

    def to_lines(self) -> List[str]:
        return ["[" + ", ".join(str(e) for e in r) + "]" for r in self.rows]

    def __str__(self):
        return "\n".join(self.to_lines())

    def __repr__(self):
        return f"MatrixRat({self.to_lines()!r})"


def sigma(k: int) -> MatrixRat:
    """Pauli matrices sigma_1, sigma_2, sigma_3."""
    return {1: MatrixRat([[0, 1], [1, 0]]),
            2: MatrixRat.parse([["0", "-i"], ["i", "0"]]),
            3: MatrixRat([[1, 0], [0, -1]])}[k]


# --------------------------------------------------------------------------
# pairs


@dataclass(frozen=True, eq=False)
class FGPair:
    name: str
    spectral: str
    L: MatrixRat
    R: MatrixRat
    T1: MatrixRat
    T0: MatrixRat
    table: DerivationTable
    alpha_formula: Optional[RatFunc] = None
    constraints: Mapping[str, RatFunc] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.L.shape[0]

    @property
    def s(self) -> RatFunc:
        return RatFunc.sym(self.spectral)

    def is_degenerate(self) -> bool:
        return self.L.det().is_zero()

    def is_plain(self) -> bool:
        return self.L.is_identity() and self.T1.is_zero()

    def is_secondary_linearized(self) -> bool:
        try:
            return (self.L.degree_in(self.spectral) <= 1 and self.R.degree_in(self.spectral) <= 1
                    and self.T0.degree_in(self.spectral) <= 1 and self.T1.degree_in(self.spectral) <= 0)
        except SymcoreError:
            return False

    def A(self) -> MatrixRat:
        """Coefficient of the spectral equation solved for dPsi/ds."""
        if self.L.is_identity():
            return self.R
        try:
            return self.L.inverse() @ self.R
        except DivisionByZero:
            raise DegeneratePair(f"{self.name}: det L vanishes identically") from None

    def U(self) -> MatrixRat:
        A = self.A()
        if self.T1.is_zero():
            return self.T0
        return self.T0 + (self.T1 * self.s) @ A

    def to_plain(self, name: Optional[str] = None) -> "FGPair":
        n = self.size
        return replace(self, name=name or self.name, L=MatrixRat.identity(n), R=self.A(),
                       T1=MatrixRat.zero(n), T0=self.U())

    def specialize(self, bindings: Mapping[str, object], name: Optional[str] = None) -> "FGPair":
        """Substitute parameters (e.g. kappa2 -> -1) everywhere, table included."""
        b = {symbol(k).name: RatFunc.coerce(v) for k, v in bindings.items()}
        for k in b:
            if SYMBOLS[k].kind == "dependent":
                raise PairError("use change_variables to rewrite dependent symbols")
        cons = {k: v.substitute(b) for k, v in self.constraints.items() if k not in b}
        return FGPair(name or self.name, self.spectral, self.L.substitute(b), self.R.substitute(b),
                      self.T1.substitute(b), self.T0.substitute(b), self.table.substitute(b),
                      self.alpha_formula.substitute(b) if self.alpha_formula is not None else None,
                      cons)

    def change_variables(self, old_in_new: Mapping[str, object], new_defs: Mapping[str, object],
                         params: Optional[Mapping[str, object]] = None,
                         name: Optional[str] = None) -> "FGPair":
        """Rewrite the pair in new dependent variables.

        ``old_in_new`` expresses each retired symbol through the new ones,
        ``new_defs`` defines each new symbol through the old ones (needed for
        its t-derivative).  ``params`` rebinds parameters at the same time.
        """
        params = {symbol(k).name: RatFunc.coerce(v) for k, v in (params or {}).items()}
        sub = {symbol(k).name: RatFunc.coerce(v) for k, v in old_in_new.items()}
        sub.update(params)
        rules = {}
        for k, v in self.table.rules.items():
            if k not in sub:
                rules[k] = v.substitute(sub)
        for k, v in new_defs.items():
            rules[symbol(k).name] = RatFunc.coerce(v).diff_t(self.table).substitute(sub)
        table = DerivationTable(rules, {k: v.substitute(params) for k, v in self.table.constraints.items()},
                                self.table.inert)
        return FGPair(name or self.name, self.spectral, self.L.substitute(sub), self.R.substitute(sub),
                      self.T1.substitute(sub), self.T0.substitute(sub), table,
                      self.alpha_formula.substitute(params) if self.alpha_formula is not None else None,
                      dict(self.constraints))

    def rename(self, name: str) -> "FGPair":
        return replace(self, name=name)

    def __eq__(self, other):
        if not isinstance(other, FGPair):
            return NotImplemented
        return (self.spectral == other.spectral and self.L == other.L and self.R == other.R
                and self.T1 == other.T1 and self.T0 == other.T0 and self.table == other.table)

    def __hash__(self):
        return hash((self.spectral, self.L, self.R, self.T1, self.T0))

    def diff_report(self, other: "FGPair") -> List[str]:
        """Human-readable list of differing entries (empty when equal)."""
        out = []
        if self.spectral != other.spectral:
            out.append(f"spectral {self.spectral} != {other.spectral}")
            return out
        for label in ("L", "R", "T1", "T0"):
            a, b = getattr(self, label), getattr(other, label)
            if a.shape != b.shape:
                out.append(f"{label} shape {a.shape} != {b.shape}")
                continue
            for i, j in itertools.product(range(a.shape[0]), range(a.shape[1])):
                if a[i, j] != b[i, j]:
                    out.append(f"{label}[{i + 1},{j + 1}]: {a[i, j]}  !=  {b[i, j]}")
        if self.table != other.table:
            out.append(f"table {self.table} != {other.table}")
        return out

    def __repr__(self):
        return f"FGPair({self.name!r}, {self.spectral}, size={self.size})"


@dataclass(frozen=True)
class ScalarPair:
    """``V'' = q1 V' + q0 V`` in the spectral variable and ``V_t = r1 V' + r0 V``.

    ``q2`` is always 1; ``q1`` vanishes after a successful twist.
    """

    spectral: str
    q2: RatFunc
    q1: RatFunc
    q0: RatFunc
    r1: RatFunc
    r0: RatFunc

    @property
    def potential(self) -> RatFunc:
        return self.q0


# --------------------------------------------------------------------------
# the checks


def compatibility_residual(p: FGPair) -> MatrixRat:
    """``A_t - U_s + [A, U]``; the zero matrix certifies compatibility."""
    if p.is_degenerate():
        raise DegeneratePair(f"{p.name}: det L vanishes identically")
    A = p.A()
    U = p.U()
    return A.diff_t(p.table) - U.diff_spectral(p.spectral) + A.commutator(U)


def same_system(p: FGPair, q: FGPair) -> bool:
    """True if both pairs encode the same linear equations.

    The spectral equations must have the same row space over the field of
    rational functions, and the difference of the t-equations must be a
    consequence of the spectral equation.  Tables must agree.
    """
    if p.spectral != q.spectral or p.size != q.size or p.table != q.table:
        return False
    Mp = p.L.hstack(-p.R)
    Mq = q.L.hstack(-q.R)
    if Mp.rref() != Mq.rref():
        return False
    s = p.s
    delta = ((p.T1 - q.T1) * s).hstack(p.T0 - q.T0)
    if delta.is_zero():
        return True
    return Mp.vstack(delta).rank() == Mp.rank()


def _prime(name: str) -> str:
    pname = name + "p"
    if pname not in SYMBOLS:
        raise NotEliminable(f"no symbol available for the derivative of {name}")
    return pname


def eliminate_to_scalar(table: DerivationTable, target: str) -> RatFunc:
    """Right side E of ``target'' = E(target, target', t, params)``.

    target' is the symbol ``target + 'p'`` (yp, zp).
    """
    target = symbol(target).name
    tp = _prime(target)
    if target not in table.rules:
        raise NotEliminable(f"{target} has no rule in the table")
    first = table.rules[target]
    second = first.diff_t(table)
    keep = {target, tp}

    def others(f):
        return {s for s in f.free_symbols() if SYMBOLS[s].kind == "dependent" and s not in keep}

    # Solve first == tp for one linearly appearing dependent symbol at a time.
    relation = first - RatFunc.sym(tp)
    result = second
    seen = set()
    while others(result):
        candidates = sorted(others(relation) - seen)
        chosen = None
        for c in candidates:
            try:
                num = relation.numerator
                if num.degree_in(c) != 1:
                    continue
            except SymcoreError:
                continue
            a = num.coeff_in(c, 1)
            b = num.coeff_in(c, 0)
            if a.is_zero():
                continue
            chosen = (c, -b / a)
            break
        if chosen is None:
            raise NotEliminable(f"cannot solve for {sorted(others(result))} from the table")
        name, value = chosen
        seen.add(name)
        result = result.substitute({name: value})
        relation = relation.substitute({name: value})
        if not relation.is_zero() and not others(relation) and others(result):
            raise NotEliminable(f"cannot eliminate {sorted(others(result))}")
    return result


def scalar_reduce(p: FGPair, component: int, relation) -> ScalarPair:
    """Scalar second-order pair for ``V = Psi_component / w`` with ``w**2 = relation``.

    ``component`` is 1-based.  The relation must make the first-derivative
    term vanish; otherwise TwistMismatch is raised.
    """
    if p.size != 2:
        raise PairError("scalar_reduce needs a 2x2 pair")
    k = component - 1
    o = 1 - k
    s = p.spectral
    A, U = p.A(), p.U()
    rho = RatFunc.coerce(relation)
    if rho.has_w():
        raise TwistMismatch("the relation must not involve w")
    akk, ako, aok, aoo = A[k, k], A[k, o], A[o, k], A[o, o]

    def ds(f):
        return f.diff_spectral(s)

    if ako.is_zero():
        c1 = RatFunc.const(0)
        c0 = ds(akk) + akk * akk
        r1 = RatFunc.const(0)
        r0_base = U[k, k]
        if not U[k, o].is_zero():
            raise PairError("component is decoupled in s but not in t")
    else:
        # Y'' = c1 Y' + c0 Y after eliminating the other component
        ratio = ds(ako) / ako
        c1 = akk + aoo + ratio
        c0 = ds(akk) + aok * ako - akk * aoo - akk * ratio
        r1 = U[k, o] / ako
        r0_base = U[k, k] - r1 * akk
    # V = Y / w, w'/w = rho'/(2 rho)
    lw = ds(rho) / (2 * rho)
    lw2 = ds(lw) + lw * lw  # w''/w
    q1 = c1 - 2 * lw
    if not q1.is_zero():
        raise TwistMismatch(f"first-derivative term survives: {q1}")
    q0 = c0 + c1 * lw - lw2
    wt = rho.diff_t(p.table) / (2 * rho)
    r0 = r0_base + r1 * lw - wt
    return ScalarPair(s, RatFunc.const(1), q1, q0, r1, r0)


def symmetric_variables_check(table: DerivationTable, alpha0=None, alpha1=None) -> bool:
    """Check the symmetric-form equations for f0 = z+2y^2+t, f1 = -z, q = -y."""
    a0 = RatFunc.coerce(alpha0) if alpha0 is not None else parse("1 - theta")
    a1 = RatFunc.coerce(alpha1) if alpha1 is not None else parse("theta")
    f0 = parse("z + 2*y^2 + t")
    f1 = parse("-z")
    q = parse("-y")
    d = lambda f: f.diff_t(table)  # noqa: E731
    return (d(f0) == -2 * q * f0 + a0 and d(f1) == 2 * q * f1 + a1
            and d(q) == (f1 - f0) / 2)


# --------------------------------------------------------------------------
# catalog text format

_MATRIX_KEYS = ("L", "R", "T1", "T0")


def dumps(p: FGPair) -> str:
    lines = [f"name: {p.name}", f"spectral: {p.spectral}", f"size: {p.size}"]
    if p.alpha_formula is not None:
        lines.append(f"alpha: {p.alpha_formula}")
    if p.constraints:
        lines.append("constraints: " + "; ".join(f"{k} = {v}" for k, v in p.constraints.items()))
    for key in _MATRIX_KEYS:
        m = getattr(p, key)
        if m.is_identity():
            lines.append(f"{key}: identity")
        elif m.is_zero():
            lines.append(f"{key}: zero")
        else:
            lines.append(f"{key}:")
            lines.extend("  " + row for row in m.to_lines())
    lines.append("table:")
    order = list(SYMBOLS)
    for k in sorted(p.table.rules, key=order.index):
        lines.append(f"  {k}' = {p.table.rules[k]}")
    if p.table.inert:
        lines.append("inert: " + ", ".join(sorted(p.table.inert)))
    return "\n".join(lines) + "\n"


def _split_row(text: str) -> List[str]:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise CatalogFormatError(f"matrix row must be bracketed: {text!r}")
    return [e.strip() for e in text[1:-1].split(",")]


def loads(text: str) -> FGPair:
    header: Dict[str, str] = {}
    blocks: Dict[str, List[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line.startswith((" ", "\t")):
            if current is None:
                raise CatalogFormatError(f"indented line outside a block: {raw!r}")
            blocks[current].append(line.strip())
            continue
        key, _, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if key in _MATRIX_KEYS or key == "table":
            current = key
            blocks[key] = []
            if value:
                header[key] = value
        else:
            current = None
            header[key] = value
    try:
        name = header["name"]
        spectral = symbol(header["spectral"]).name
        n = int(header["size"])
    except KeyError as exc:
        raise CatalogFormatError(f"missing header field {exc}") from None
    mats = {}
    for key in _MATRIX_KEYS:
        short = header.get(key)
        if short == "identity":
            mats[key] = MatrixRat.identity(n)
        elif short == "zero":
            mats[key] = MatrixRat.zero(n)
        elif key in blocks and blocks[key]:
            rows = [_split_row(r) for r in blocks[key]]
            if len(rows) != n or any(len(r) != n for r in rows):
                raise CatalogFormatError(f"{name}: {key} is not {n}x{n}")
            mats[key] = MatrixRat.parse(rows)
        else:
            raise CatalogFormatError(f"{name}: matrix {key} missing")
    rules = {}
    for line in blocks.get("table", []):
        lhs, _, rhs = line.partition("=")
        lhs = lhs.strip()
        if not lhs.endswith("'"):
            raise CatalogFormatError(f"table line must read  sym' = expr: {line!r}")
        rules[lhs[:-1].strip()] = parse(rhs)
    constraints = {}
    if header.get("constraints"):
        for item in header["constraints"].split(";"):
            k, _, v = item.partition("=")
            constraints[symbol(k.strip()).name] = parse(v)
    inert = [s.strip() for s in header.get("inert", "").split(",") if s.strip()]
    table = DerivationTable(rules, constraints, inert)
    alpha = parse(header["alpha"]) if "alpha" in header else None
    return FGPair(name, spectral, mats["L"], mats["R"], mats["T1"], mats["T0"], table, alpha, constraints)


def _catalog_dir():
    return resources.files(__package__).joinpath("catalog")


def _normalize_key(name: str) -> str:
    return name.replace("/", "").replace("_", "").replace(" ", "").lower()


def catalog_names() -> List[str]:
    return sorted(f.name[:-5] for f in _catalog_dir().iterdir() if f.name.endswith(".pair"))


_CACHE: Dict[str, FGPair] = {}


def catalog(name: str) -> FGPair:
    """Load a pair by name (``JM2``, ``JM1/F``, ``dJKT2_1`` ...)."""
    keys = {_normalize_key(n): n for n in catalog_names()}
    key = keys.get(_normalize_key(name))
    if key is None:
        raise UnknownPair(name)
    if key not in _CACHE:
        _CACHE[key] = loads(_catalog_dir().joinpath(key + ".pair").read_text())
    return _CACHE[key]


def load_catalog() -> Dict[str, FGPair]:
    return {n: catalog(n) for n in catalog_names()}
