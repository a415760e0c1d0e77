"""Maps between pairs: gauges with scalar twists, spectral substitutions, the
formal Laplace transform, constraint-row reductions and route bookkeeping.

Convention: a TransformSpec acts on solutions as

    Psi_old(s) = G(zeta) * exp(f(zeta)) * zeta**p * Psi_new(zeta),   s = c * zeta**k

The substitution (if any) is applied first, so G, f and p are written in the
new spectral variable.  ``row_scale`` is the matrix the spectral equation is
multiplied by afterwards; by default it is G^-1, which keeps L = I pairs plain.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .pairs import (FGPair, MatrixRat, PairError, catalog, same_system)
from .symcore import (EXT, DerivationTable, DivisionByZero, RatFunc, SymcoreError, parse, symbol)


class TransformError(PairError):
    pass


class SingularGauge(TransformError):
    pass


class NonInvertibleSubstitution(TransformError):
    pass


class NotLinearInSpectral(TransformError):
    pass


class RowNotAlgebraic(TransformError):
    pass


class NotDecoupled(TransformError):
    pass


@dataclass(frozen=True)
class Substitution:
    """Change of spectral variable.

    For an integer k this is ``old = c * new**k``.  For k = 1/m it reads
    ``old**m = c * new`` so that no roots of c are needed.
    """

    old: str
    new: str
    c: RatFunc
    k: Fraction

    def __post_init__(self):
        k = Fraction(self.k)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "c", RatFunc.coerce(self.c))
        if k == 0 or (k.numerator != 1 and k.denominator != 1) or (k.denominator != 1 and k < 0):
            raise NonInvertibleSubstitution(f"unsupported exponent {k}")
        if not self.c.is_constant() or self.c.is_zero():
            raise NonInvertibleSubstitution("substitution constant must be a nonzero number")

    def inverse(self) -> "Substitution":
        k = self.k
        if k == 1:
            return Substitution(self.new, self.old, 1 / self.c, 1)
        if k == -1:
            return Substitution(self.new, self.old, self.c, -1)
        if k.denominator != 1:
            # old**m = c*new  ->  new = old**m / c
            return Substitution(self.new, self.old, 1 / self.c, k.denominator)
        if k < 0:
            raise NonInvertibleSubstitution(f"cannot invert {self} rationally")
        # old = c*new**m  ->  new**m = old / c
        return Substitution(self.new, self.old, 1 / self.c, Fraction(1, int(k)))

    def __str__(self):
        k = self.k
        coef = "" if self.c == 1 else f"({self.c})*"
        if k.denominator != 1:
            return f"{self.old}^{k.denominator} = {coef}{self.new}"
        power = self.new if k == 1 else f"{self.new}^{k}"
        return f"{self.old} = {coef}{power}"


@dataclass(frozen=True)
class TransformSpec:
    gauge: MatrixRat
    exp_twist: RatFunc = field(default_factory=lambda: RatFunc.const(0))
    power_twist: RatFunc = field(default_factory=lambda: RatFunc.const(0))
    substitution: Optional[Substitution] = None
    row_scale: Optional[MatrixRat] = None
    rules: Mapping[str, RatFunc] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "exp_twist", RatFunc.coerce(self.exp_twist))
        object.__setattr__(self, "power_twist", RatFunc.coerce(self.power_twist))
        object.__setattr__(self, "rules", {symbol(k).name: RatFunc.coerce(v) for k, v in self.rules.items()})

    @property
    def size(self) -> int:
        return self.gauge.shape[0]

    @classmethod
    def identity(cls, n: int) -> "TransformSpec":
        return cls(MatrixRat.identity(n), name="identity")


@dataclass(frozen=True)
class TransformChain:
    """Specs applied left to right (used where one spec cannot express the map)."""

    steps: Tuple[TransformSpec, ...]
    name: str = ""


SpecLike = Union[TransformSpec, TransformChain]


# --------------------------------------------------------------------------
# applying specs


def _subst_pair(p: FGPair, sub: Substitution) -> FGPair:
    if sub.old != p.spectral:
        raise TransformError(f"substitution is for {sub.old}, pair is in {p.spectral}")
    if symbol(sub.new).kind != "spectral":
        raise TransformError(f"{sub.new} is not a spectral variable")
    if sub.new != sub.old and any(sub.new in M.free_symbols() for M in (p.L, p.R, p.T1, p.T0)):
        raise TransformError(f"{sub.new} already occurs in the pair")
    k = sub.k
    if k.denominator == 1:
        k = int(k)
        zeta = RatFunc.sym(sub.new)
        b = {sub.old: sub.c * zeta ** k}
        dphi = sub.c * k * zeta ** (k - 1)
        L, R, T1, T0 = (M.substitute(b) for M in (p.L, p.R, p.T1, p.T0))
        return replace(p, spectral=sub.new, L=L, R=R * dphi, T1=T1 * Fraction(1, k), T0=T0)
    # old**m = c*new: entries must be functions of old**m
    m = k.denominator
    s = RatFunc.sym(sub.old)
    ds_dnew = sub.c * s ** (1 - m) * Fraction(1, m)

    def deflate(M):
        try:
            return M.map(lambda e: e.deflate(sub.old, m, sub.new, sub.c))
        except SymcoreError as exc:
            raise NonInvertibleSubstitution(str(exc)) from None

    return replace(p, spectral=sub.new, L=deflate(p.L), R=deflate(p.R * ds_dnew),
                   T1=deflate(p.T1 * m), T0=deflate(p.T0))


def _gauge_pair(p: FGPair, spec: TransformSpec, table: DerivationTable) -> FGPair:
    G = spec.gauge
    if G.shape != (p.size, p.size):
        raise TransformError(f"gauge is {G.shape}, pair is {p.size}x{p.size}")
    try:
        Ginv = G.inverse()
    except DivisionByZero:
        raise SingularGauge("det G vanishes identically") from None
    s = p.spectral
    S = RatFunc.sym(s)
    f, pw = spec.exp_twist, spec.power_twist
    bad = {x for x in pw.free_symbols() if symbol(x).kind in ("spectral", "dependent", "time")}
    if bad:
        raise TransformError(f"power twist must be a parameter expression, got {pw}")
    N = Ginv if spec.row_scale is None else spec.row_scale
    Gs = G.diff_spectral(s)
    Gt = G.diff_t(table)
    scal = f.diff_spectral(s) + pw / S if not pw.is_zero() else f.diff_spectral(s)
    LG = p.L @ G
    L = N @ LG
    R = N @ (p.R @ G - p.L @ Gs - LG * scal)
    T1 = Ginv @ p.T1 @ G
    inner = p.T0 @ G - Gt - G * f.diff_t(table)
    if not p.T1.is_zero():
        inner = inner + (p.T1 * S) @ (Gs + G * scal)
    T0 = Ginv @ inner
    for M in (L, R, T1, T0):
        if EXT in M.free_symbols():
            raise TransformError("the square root w survives in the transformed pair")
    out = _strip_ext(replace(p, L=L, R=R, T1=T1, T0=T0))
    return replace(out, table=_prune_table(table, spec.rules, out))


def _prune_table(table: DerivationTable, aux: Mapping[str, RatFunc], p: FGPair) -> DerivationTable:
    """Keep a spec's auxiliary rules exactly while their symbols are still in use."""
    if not aux:
        return table
    used = set()
    for M in (p.L, p.R, p.T1, p.T0):
        used |= M.free_symbols()
    rules = dict(table.rules)
    for k in aux:
        rules.pop(k, None)
    for v in rules.values():
        used |= v.free_symbols()
    for k in aux:
        if k in used:
            rules[k] = table.rules[k]
    return DerivationTable(rules, table.constraints, table.inert)


def _strip_ext(p: FGPair) -> FGPair:
    def clean(M):
        return M.map(lambda e: RatFunc(e.parts) if e.ext is not None and not e.has_w() else e)
    return replace(p, L=clean(p.L), R=clean(p.R), T1=clean(p.T1), T0=clean(p.T0))


def apply_transform(p: FGPair, spec: SpecLike, name: Optional[str] = None) -> FGPair:
    """Pair satisfied by Psi_new."""
    if isinstance(spec, TransformChain):
        for step in spec.steps:
            p = apply_transform(p, step)
        return p.rename(name) if name else p
    table = p.table.merged(spec.rules) if spec.rules else p.table
    if spec.substitution is not None:
        p = _subst_pair(p, spec.substitution)
    p = _gauge_pair(p, spec, table)
    return p.rename(name) if name else p


def _compose_sub(sa: Substitution, sb: Substitution) -> Substitution:
    # old = ca * mid**ka, mid = cb * new**kb
    if sa.k.denominator != 1 and sb.k.denominator != 1:
        raise NonInvertibleSubstitution("cannot compose two root substitutions")
    ka, kb = sa.k, sb.k
    if ka.denominator == 1:
        c = sa.c * sb.c ** int(ka)
    elif sb.c == 1:
        c = sa.c
    else:
        raise NonInvertibleSubstitution("constant would need a root")
    return Substitution(sa.old, sb.new, c, ka * kb)


def compose(a: SpecLike, b: SpecLike) -> SpecLike:
    """Spec equivalent to applying ``a`` and then ``b``."""
    if isinstance(a, TransformChain) or isinstance(b, TransformChain):
        sa = a.steps if isinstance(a, TransformChain) else (a,)
        sb = b.steps if isinstance(b, TransformChain) else (b,)
        return TransformChain(tuple(sa) + tuple(sb))
    sub = None
    Ga, fa, pa, Na = a.gauge, a.exp_twist, a.power_twist, a.row_scale
    if b.substitution is not None:
        sb = b.substitution
        if sb.k.denominator != 1:
            return TransformChain((a, b))
        mid = sb.new
        image = sb.c * RatFunc.sym(mid) ** int(sb.k)
        bind = {sb.old: image}
        Ga, fa = Ga.substitute(bind), fa.substitute(bind)
        Na = Na.substitute(bind) if Na is not None else None
        pa = pa * int(sb.k)
        sub = sb if a.substitution is None else _compose_sub(a.substitution, sb)
    else:
        sub = a.substitution
    G = Ga @ b.gauge
    if Na is None and b.row_scale is None:
        N = None
    else:
        Na_ = Na if Na is not None else Ga.inverse()
        Nb_ = b.row_scale if b.row_scale is not None else b.gauge.inverse()
        N = Nb_ @ Na_
    rules = dict(a.rules)
    rules.update(b.rules)
    return TransformSpec(G, fa + b.exp_twist, pa + b.power_twist, sub, N, rules,
                         f"{a.name}*{b.name}" if a.name or b.name else "")


def inverse(spec: SpecLike) -> SpecLike:
    """Spec undoing ``spec`` (exact: gauge inverted, twists negated)."""
    if isinstance(spec, TransformChain):
        return TransformChain(tuple(inverse(s) for s in reversed(spec.steps)), f"inv({spec.name})")
    G = spec.gauge
    try:
        Ginv = G.inverse()
    except DivisionByZero:
        raise SingularGauge("det G vanishes identically") from None
    N = None
    if spec.row_scale is not None:
        # original: L1 = N L G. Undo: L = N^-1 L1 G^-1, so the new row scale is N^-1.
        N = spec.row_scale.inverse()
    base = TransformSpec(Ginv, -spec.exp_twist, -spec.power_twist, None, N, spec.rules,
                         f"inv({spec.name})")
    if spec.substitution is None:
        return base
    # undo the gauge in the new variable, then go back to the old variable
    undo_sub = TransformSpec(MatrixRat.identity(G.shape[0]), substitution=spec.substitution.inverse())
    return TransformChain((base, undo_sub), f"inv({spec.name})")


def check_symmetry(p: FGPair, gauge: MatrixRat, reflect: bool = True) -> bool:
    """True iff Psi(-s) = gauge(s) Psi(s) C maps solutions of ``p`` to solutions."""
    s = p.spectral
    sub = Substitution(s, s, -1, 1) if reflect else None
    spec = TransformSpec(gauge, substitution=sub)
    return apply_transform(p, spec) == p


# --------------------------------------------------------------------------
# Laplace transform


def _normalize_sign(L: MatrixRat, R: MatrixRat, s: str) -> Tuple[MatrixRat, MatrixRat]:
    """Fix the overall sign of the spectral equation.

    The first entry (row-major) of L of top degree in s must have a positive
    leading coefficient.
    """
    top = L.degree_in(s)
    for row in L.rows:
        for e in row:
            if e.degree_in(s) == top:
                if e.coeff_in(s, top).leading_sign() < 0:
                    return -L, -R
                return L, R
    return L, R


def laplace(p: FGPair, direction: str = "forward", name: Optional[str] = None) -> FGPair:
    """Formal Laplace transform with kernel exp(lam*mu).

    ``forward`` maps a pair in lam (for Phi) to the pair in mu satisfied by
    Psi = int exp(lam*mu) Phi dlam; ``inverse`` goes from mu back to lam.
    Multiplication by lam becomes d/dmu and d/dlam becomes -mu.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError("direction is 'forward' or 'inverse'")
    src, dst = ("lam", "mu") if direction == "forward" else ("mu", "lam")
    if p.spectral != src:
        raise TransformError(f"{direction} Laplace needs a pair in {src}, got {p.spectral}")
    try:
        ok = (p.L.degree_in(src) <= 1 and p.R.degree_in(src) <= 1 and p.T0.degree_in(src) <= 1
              and p.T1.degree_in(src) <= 0)
    except SymcoreError:
        ok = False
    if not ok:
        raise NotLinearInSpectral(f"{p.name} is not linear in {src}")
    c = lambda M, d: M.coeff_in(src, d)  # noqa: E731
    L1, L0, R1, R0 = c(p.L, 1), c(p.L, 0), c(p.R, 1), c(p.R, 0)
    T01, T00 = c(p.T0, 1), c(p.T0, 0)
    S = RatFunc.sym(dst)
    if direction == "forward":
        Ln = L1 * S + R1
        Rn = -(R0 + L1 + L0 * S)
        k0 = T01
    else:
        Ln = L1 * S - R1
        Rn = L0 * S - L1 - R0
        k0 = -T01
    Ln, Rn = _normalize_sign(Ln, Rn, dst)
    k1 = -p.T1
    a, b = Ln.coeff_in(dst, 1), Ln.coeff_in(dst, 0)
    if k0.is_zero():
        X = MatrixRat.zero(p.size)
    else:
        try:
            X = b.solve_left(k0)
        except PairError:
            raise NotLinearInSpectral("t-equation cannot be brought to s*d/ds form") from None
    T1n = k1 - X @ a
    T0n = T00 - p.T1 + X @ Rn
    return replace(p, name=name or f"laplace_{direction}({p.name})", spectral=dst,
                   L=Ln, R=Rn, T1=T1n, T0=T0n)


# --------------------------------------------------------------------------
# reductions


@dataclass(frozen=True)
class Relation:
    """``Psi_component = sum coeffs[k] * Psi_k`` (1-based indices)."""

    component: int
    coeffs: Mapping[int, RatFunc]
    symbol: str = "Psi"

    def __str__(self):
        terms = []
        for k, v in sorted(self.coeffs.items()):
            if v.is_zero():
                continue
            terms.append(f"({v})*{self.symbol}{k}")
        rhs = " + ".join(terms) if terms else "0"
        return f"{self.symbol}{self.component} = {rhs}"

    def embedding(self, n: int) -> Tuple[MatrixRat, List[int]]:
        """E with Psi = E psi, psi the surviving components in order."""
        surv = [k for k in range(1, n + 1) if k != self.component]
        rows = []
        for k in range(1, n + 1):
            if k == self.component:
                rows.append([self.coeffs.get(j, RatFunc.const(0)) for j in surv])
            else:
                rows.append([1 if j == k else 0 for j in surv])
        return MatrixRat(rows), surv


def _pick_component(coeffs: Sequence[RatFunc], s: str) -> int:
    nonzero = [k for k, c in enumerate(coeffs) if not c.is_zero()]
    if len(nonzero) < 2:
        raise RowNotAlgebraic("the row does not relate two components")
    for k in nonzero:
        if coeffs[k].is_constant():
            return k
    return min(nonzero, key=lambda k: (len(str(coeffs[k])), k))


def reduce_constraint_row(p: FGPair, row: int, solve_for: Optional[int] = None,
                          post: Optional[SpecLike] = None,
                          name: Optional[str] = None) -> Tuple[FGPair, Relation]:
    """Use an algebraic row of the spectral equation to drop one component.

    ``row`` and ``solve_for`` are 1-based.  The reduced pair is brought to
    plain form when its L is invertible, then ``post`` (a gauge) is applied.
    """
    n = p.size
    j = row - 1
    if any(not e.is_zero() for e in p.L.rows[j]):
        raise RowNotAlgebraic(f"row {row} of L is not zero")
    coeffs = list(p.R.rows[j])
    q = (solve_for - 1) if solve_for is not None else _pick_component(coeffs, p.spectral)
    if coeffs[q].is_zero():
        raise RowNotAlgebraic(f"component {q + 1} does not occur in row {row}")
    rel = Relation(q + 1, {k + 1: -coeffs[k] / coeffs[q] for k in range(n) if k != q})
    E, surv = rel.embedding(n)
    s = p.spectral
    S = RatFunc.sym(s)
    Es = E.diff_spectral(s)
    Et = E.diff_t(p.table)
    keep_rows = [k for k in range(n) if k != j]
    surv0 = [k - 1 for k in surv]
    Lr = (p.L @ E).take_rows(keep_rows)
    Rr = (p.R @ E - p.L @ Es).take_rows(keep_rows)
    T1r = (p.T1 @ E).take_rows(surv0)
    T0r = (p.T1 * S @ Es + p.T0 @ E - Et).take_rows(surv0)
    m = n - 1
    try:
        Linv = Lr.inverse()
    except DivisionByZero:
        Linv = None
    if Linv is not None:
        A = Linv @ Rr
        U = T0r + (T1r * S) @ A if not T1r.is_zero() else T0r
        out = replace(p, name=name or f"reduced({p.name})", L=MatrixRat.identity(m), R=A,
                      T1=MatrixRat.zero(m), T0=U)
    else:
        if T1r.degree_in(s) > 0:
            raise TransformError("reduced t-equation is not of s*d/ds form")
        out = replace(p, name=name or f"reduced({p.name})", L=Lr, R=Rr, T1=T1r, T0=T0r)
    if post is not None:
        out = apply_transform(out, post, name=out.name)
    return out, rel


def restrict_components(p: FGPair, keep: Sequence[int], name: Optional[str] = None) -> FGPair:
    """Plain pair for the components ``keep`` (1-based) when they decouple."""
    A, U = p.A(), p.U()
    k0 = [k - 1 for k in keep]
    drop = [k for k in range(p.size) if k not in k0]
    for M, label in ((A, "spectral"), (U, "t")):
        for i in k0:
            for j in drop:
                if not M[i, j].is_zero():
                    raise NotDecoupled(f"{label} equation couples component {i + 1} to {j + 1}")
    m = len(k0)
    return replace(p, name=name or f"restricted({p.name})", L=MatrixRat.identity(m),
                   R=A.take_rows(k0).take_cols(k0), T1=MatrixRat.zero(m),
                   T0=U.take_rows(k0).take_cols(k0))


# --------------------------------------------------------------------------
# named specs


def _m(rows, ext=None):
    return MatrixRat.parse(rows, ext)


def _specs() -> Dict[str, TransformSpec]:
    u_rule = {"u": parse("-y*u")}
    w_rel = parse("u")
    return {
        # JM1 -> JM1F
        "fabri_p1": TransformSpec(_m([["1", "-zeta/2"], ["0", "1"]]),
                                  substitution=Substitution("lam", "zeta", 1, 2), name="fabri_p1"),
        # HTW -> FN (before renaming z and theta); the sigma3/2 power splits into
        # zeta**(-1/2) times a rational diagonal matrix
        "fabri_htw_fn": TransformSpec(_m([["-2*i*zeta", "0"], ["0", "1"]]) @ _m([["1", "1"], ["-1", "1"]]),
                                      power_twist=Fraction(-1, 2),
                                      substitution=Substitution("mu", "zeta", -2, 2), name="fabri_htw_fn"),
        # CM2 -> JM2 (before renaming yp and alpha); w**2 = u
        "cm2_to_jm2": TransformSpec(_m([["lam + y", "1"], ["1", "0"]]) @ _m([["1/w", "0"], ["0", "w"]], w_rel),
                                    rules=u_rule, name="cm2_to_jm2"),
        # JKT2_red -> JKT2_red_u
        "u_gauge_42": TransformSpec(_m([["0", "1/2"], ["-1/u", "0"]]), rules=u_rule, name="u_gauge_42"),
        # JKT2_red_u -> JM2
        "twist_43": TransformSpec(MatrixRat.identity(2), exp_twist=parse("-(lam^3/3 + lam*t/2)"),
                                  name="twist_43"),
        # dJKT2_2 -> dJKT2_2_gauged
        "gauge_53": TransformSpec(_m([["0", "0", "1"], ["1/z", "1/z", "0"], ["0", "-1/2", "0"]]),
                                  row_scale=MatrixRat.diag([1, parse("z"), 1]), name="gauge_53"),
        # dJKT2_2_red -> HTW
        "gauge_56": TransformSpec(_m([["-1", "-2*y"], ["0", "1"]]), power_twist=parse("theta/2"),
                                  name="gauge_56"),
        # dJKT2_3_red (kappa2 = -1, kappa1 = theta - 1) -> HTW
        "power_45": TransformSpec(MatrixRat.identity(2), power_twist=parse("-1 + theta/2"), name="power_45"),
        # post-gauge of the dJKT1 reduction: Y = (-Phi2/4, Phi3)
        "post_djkt1": TransformSpec(MatrixRat.diag([-4, 1]), name="post_djkt1"),
    }


@dataclass(frozen=True)
class ReductionSpec:
    row: int
    solve_for: Optional[int] = None
    post: Optional[str] = None
    name: str = ""


REDUCTIONS = {
    "reduce_djkt1": ReductionSpec(3, 1, "post_djkt1", "reduce_djkt1"),
    "reduce_djkt2_1": ReductionSpec(3, 3, None, "reduce_djkt2_1"),
    "reduce_djkt2_3": ReductionSpec(3, 1, None, "reduce_djkt2_3"),
    "reduce_djkt2_2_gauged": ReductionSpec(2, 2, None, "reduce_djkt2_2_gauged"),
}


def named_spec(name: str) -> TransformSpec:
    specs = _specs()
    try:
        return specs[name]
    except KeyError:
        raise TransformError(f"unknown transform {name!r}; known: {sorted(specs)}") from None


def spec_names() -> List[str]:
    return sorted(_specs())


def apply_reduction(p: FGPair, red: Union[str, ReductionSpec], name=None):
    if isinstance(red, str):
        red = REDUCTIONS[red]
    post = named_spec(red.post) if red.post else None
    return reduce_constraint_row(p, red.row, red.solve_for, post, name=name)


# renamings that finish the Fabri and CM2 maps
def htw_to_fn_variables(p: FGPair) -> FGPair:
    return p.change_variables({"z": "yp - y^2 - t/2"}, {"yp": "z + y^2 + t/2"},
                              {"theta": "1/2 - alpha"}, name=p.name)


def cm2_to_jm2_variables(p: FGPair) -> FGPair:
    return p.change_variables({"yp": "z + y^2 + t/2"}, {"z": "yp - y^2 - t/2"},
                              {"alpha": "1/2 - theta"}, name=p.name)


# --------------------------------------------------------------------------
# text form of specs

def dumps_spec(spec: TransformSpec) -> str:
    lines = [f"name: {spec.name}"] if spec.name else []
    ext = None
    for r in spec.gauge.rows:
        for e in r:
            if e.has_w():
                ext = e.ext
    if ext is not None:
        lines.append(f"relation: w^2 = {ext}")
    lines.append("gauge:")
    lines.extend("  " + r for r in spec.gauge.to_lines())
    if not spec.exp_twist.is_zero():
        lines.append(f"exp_twist: {spec.exp_twist}")
    if not spec.power_twist.is_zero():
        lines.append(f"power_twist: {spec.power_twist}")
    if spec.substitution is not None:
        sub = spec.substitution
        lines.append(f"substitution: {sub.old} = ({sub.c}) * {sub.new} ^ ({sub.k})")
    if spec.row_scale is not None:
        lines.append("row_scale:")
        lines.extend("  " + r for r in spec.row_scale.to_lines())
    for k, v in spec.rules.items():
        lines.append(f"rule: {k}' = {v}")
    return "\n".join(lines) + "\n"


def loads_spec(text: str) -> TransformSpec:
    from .pairs import _split_row

    fields: Dict[str, object] = {}
    blocks: Dict[str, List[str]] = {}
    rules = {}
    current = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line.startswith((" ", "\t")):
            blocks[current].append(line.strip())
            continue
        key, _, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if key in ("gauge", "row_scale"):
            current = key
            blocks[key] = []
        elif key == "rule":
            lhs, _, rhs = value.partition("=")
            rules[lhs.strip().rstrip("'")] = rhs
        else:
            fields[key] = value
    ext = None
    if "relation" in fields:
        ext = parse(str(fields["relation"]).split("=", 1)[1])
    gauge = MatrixRat.parse([_split_row(r) for r in blocks["gauge"]], ext)
    row_scale = MatrixRat.parse([_split_row(r) for r in blocks["row_scale"]], ext) if "row_scale" in blocks else None
    sub = None
    if "substitution" in fields:
        lhs, _, rhs = str(fields["substitution"]).partition("=")
        cpart, _, rest = rhs.partition(")")
        c = parse(cpart.strip().lstrip("("))
        newpart, _, kpart = rest.strip().lstrip("*").partition("^")
        sub = Substitution(lhs.strip(), newpart.strip(), c, Fraction(kpart.strip().strip("()")))
    return TransformSpec(gauge, fields.get("exp_twist", 0), fields.get("power_twist", 0), sub,
                         row_scale, rules, str(fields.get("name", "")))


# --------------------------------------------------------------------------
# routes and the integral-transform bookkeeping


@dataclass(frozen=True)
class Step:
    kind: str  # transform | laplace | reduce | lift_restrict | lift_reduce | specialize
    arg: object = None
    extra: object = None
    expect: Optional[str] = None  # catalog name the result should equal
    expect_bindings: Optional[Mapping[str, str]] = None
    label: str = ""


@dataclass
class Kernel:
    """Solution-level record of a route.

    Before a Laplace step:  X = exp(f) lam**p S Y.
    After it:               D X = mu**q int exp(lam mu) exp(f) lam**p S Y dlam.
    Rows of S may be unknown (None), e.g. components recovered by quadrature.
    """

    S: List[Optional[Tuple[RatFunc, ...]]]
    f: RatFunc
    p: RatFunc
    D: Optional[MatrixRat] = None
    q: RatFunc = field(default_factory=lambda: RatFunc.const(0))

    @classmethod
    def start(cls, n: int) -> "Kernel":
        I = MatrixRat.identity(n)
        return cls([I.rows[i] for i in range(n)], RatFunc.const(0), RatFunc.const(0))

    def _mix(self, M: MatrixRat) -> List[Optional[Tuple[RatFunc, ...]]]:
        out = []
        m = len(next(r for r in self.S if r is not None))
        for i in range(M.shape[0]):
            row = [RatFunc.const(0)] * m
            known = True
            for k in range(M.shape[1]):
                c = M[i, k]
                if c.is_zero():
                    continue
                if self.S[k] is None:
                    known = False
                    break
                row = [a + c * b for a, b in zip(row, self.S[k])]
            out.append(tuple(row) if known else None)
        return out

    def transform(self, spec: TransformSpec):
        if spec.substitution is not None:
            raise TransformError("route bookkeeping does not support substitutions")
        if self.D is None:
            self.S = self._mix(spec.gauge.inverse())
            self.f = self.f - spec.exp_twist
            self.p = self.p - spec.power_twist
        else:
            if not spec.exp_twist.is_zero():
                raise TransformError("exponential twists after the Laplace step are not tracked")
            self.D = self.D @ spec.gauge
            self.q = self.q - spec.power_twist

    def laplace(self):
        if self.D is not None:
            raise TransformError("only one Laplace step is tracked")
        self.D = MatrixRat.identity(len(self.S))

    def reduce(self, E: MatrixRat, surv: Sequence[int]):
        if self.D is None:
            self.S = [self.S[k - 1] for k in surv]
        else:
            self.D = self.D @ E

    def lift_rows(self, rows: List[Optional[Tuple[RatFunc, ...]]]):
        if self.D is not None:
            raise TransformError("lifts are only tracked before the Laplace step")
        self.S = rows

    def specialize(self, b):
        self.S = [tuple(e.substitute(b) for e in r) if r is not None else None for r in self.S]
        self.f, self.p, self.q = self.f.substitute(b), self.p.substitute(b), self.q.substitute(b)
        if self.D is not None:
            self.D = self.D.substitute(b)

    def normal_form(self) -> Tuple[RatFunc, MatrixRat]:
        """(q, M) with X = mu**q M-kernel; M = D_K^-1 S_K for the first usable rows K."""
        if self.D is None:
            S = MatrixRat([r for r in self.S])
            return RatFunc.const(0), S
        known = [i for i, r in enumerate(self.S) if r is not None]
        m = self.D.shape[1]
        from itertools import combinations
        for K in combinations(known, m):
            DK = self.D.take_rows(K)
            if not DK.det().is_zero():
                SK = MatrixRat([self.S[i] for i in K])
                return self.q, DK.inverse() @ SK
        raise TransformError("not enough known rows to express the transform")


def kernels_equal(a: Kernel, b: Kernel) -> bool:
    if a.f != b.f or a.p != b.p:
        return False
    qa, Ma = a.normal_form()
    qb, Mb = b.normal_form()
    d = qa - qb
    if not (d.is_constant() and d.is_real() and d.to_fraction().denominator == 1):
        return False
    shift = RatFunc.sym("mu") ** int(d.to_fraction()) if (a.D is not None) else RatFunc.const(1)
    return Ma * shift == Mb


@dataclass
class EdgeResult:
    label: str
    name: str
    ok: Optional[bool]
    detail: str = ""


@dataclass
class RouteResult:
    pair: Optional[FGPair]
    kernel: Optional[Kernel]
    edges: List[EdgeResult]
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and all(e.ok is not False for e in self.edges)


def run_route(start: FGPair, steps: Sequence[Step]) -> RouteResult:
    p = start
    ker = Kernel.start(start.size)
    edges: List[EdgeResult] = []
    for st in steps:
        label = st.label or st.kind
        try:
            if st.kind == "transform":
                spec = named_spec(st.arg) if isinstance(st.arg, str) else st.arg
                specs = spec.steps if isinstance(spec, TransformChain) else (spec,)
                for sp in specs:
                    p = apply_transform(p, sp)
                    ker.transform(sp)
            elif st.kind == "laplace":
                p = laplace(p, st.arg or "forward")
                if (st.arg or "forward") != "forward":
                    raise TransformError("only forward Laplace steps are tracked")
                ker.laplace()
            elif st.kind == "reduce":
                red = REDUCTIONS[st.arg] if isinstance(st.arg, str) else st.arg
                post = named_spec(red.post) if red.post else None
                p, rel = reduce_constraint_row(p, red.row, red.solve_for, None)
                E, surv = rel.embedding(p.size + 1)
                ker.reduce(E, surv)
                if post is not None:
                    p = apply_transform(p, post)
                    ker.transform(post)
            elif st.kind == "lift_restrict":
                target, keep = st.arg, st.extra
                got = restrict_components(target, keep)
                if got != p:
                    edges.append(EdgeResult(label, target.name, False,
                                            "; ".join(got.diff_report(p)[:4])))
                    return RouteResult(None, None, edges, f"lift to {target.name} does not match")
                rows = [None] * target.size
                for pos, k in enumerate(keep):
                    rows[k - 1] = ker.S[pos]
                ker.lift_rows(rows)
                p = target
            elif st.kind == "lift_reduce":
                target, row = st.arg, st.extra
                red = REDUCTIONS[row] if isinstance(row, str) else ReductionSpec(row)
                got, rel = reduce_constraint_row(target, red.row, red.solve_for)
                if got != p:
                    edges.append(EdgeResult(label, target.name, False,
                                            "; ".join(got.diff_report(p)[:4])))
                    return RouteResult(None, None, edges, f"lift to {target.name} does not match")
                E, surv = rel.embedding(target.size)
                ker.lift_rows(ker._mix(E))
                p = target
            elif st.kind == "specialize":
                p = p.specialize(st.arg)
                ker.specialize({symbol(k).name: RatFunc.coerce(v) for k, v in st.arg.items()})
            else:
                raise TransformError(f"unknown step kind {st.kind}")
        except (PairError, SymcoreError) as exc:
            edges.append(EdgeResult(label, "", False, f"{type(exc).__name__}: {exc}"))
            return RouteResult(None, None, edges, str(exc))
        ok, detail = None, ""
        if st.expect:
            ref = catalog(st.expect)
            if st.expect_bindings:
                ref = ref.specialize(st.expect_bindings)
            ok = p == ref
            if not ok:
                detail = "; ".join(p.diff_report(ref)[:4])
        edges.append(EdgeResult(label, st.expect or "", ok, detail))
    return RouteResult(p, ker, edges)


@dataclass
class DiagramResult:
    ok: bool
    pairs_equal: bool
    kernels_equal: bool
    route_a: RouteResult
    route_b: RouteResult
    reason: str = ""

    def __bool__(self):
        return self.ok


def diagram_check(route_a: Sequence[Step], route_b: Sequence[Step], start: FGPair) -> DiagramResult:
    """Run both routes from ``start`` and compare the end pairs and kernels."""
    ra = run_route(start, route_a)
    rb = run_route(start, route_b)
    if ra.error or rb.error:
        return DiagramResult(False, False, False, ra, rb, ra.error or rb.error)
    pe = ra.pair == rb.pair
    ke = kernels_equal(ra.kernel, rb.kernel)
    reason = "" if pe and ke else ("end pairs differ" if not pe else "integral kernels differ")
    return DiagramResult(pe and ke and ra.ok and rb.ok, pe, ke, ra, rb, reason)


def _jkt2_at(kappa1: str) -> FGPair:
    return catalog("JKT2").specialize({"kappa2": -1, "kappa1": kappa1}, name="JKT2")


def upper_route(kappa1: str = "theta - 1") -> List[Step]:
    """JM2 -> JKT2 -> (Laplace) dJKT2_3 -> HTW."""
    b = {"kappa2": "-1", "kappa1": kappa1}
    return [
        Step("transform", inverse(named_spec("twist_43")), expect="JKT2_red_u", expect_bindings=b,
             label="undo exponential twist"),
        Step("transform", inverse(named_spec("u_gauge_42")), expect="JKT2_red", expect_bindings=b,
             label="undo u-gauge"),
        Step("lift_restrict", _jkt2_at(kappa1), (1, 2), label="lift to JKT2 (third component by quadrature)"),
        Step("laplace", "forward", expect="dJKT2_3", expect_bindings=b, label="Laplace"),
        Step("reduce", "reduce_djkt2_3", expect="dJKT2_3_red", expect_bindings=b, label="reduce row 3"),
        Step("transform", "power_45", expect="HTW", label="power twist"),
    ]


def lower_route() -> List[Step]:
    """JM2 -> dJKT2_1 -> (Laplace) dJKT2_2 -> HTW."""
    b = {"kappa2": "-1", "kappa1": "theta - 1"}
    return [
        Step("transform", inverse(named_spec("twist_43")), expect="JKT2_red_u", expect_bindings=b,
             label="undo exponential twist"),
        Step("transform", inverse(named_spec("u_gauge_42")), expect="JKT2_red", expect_bindings=b,
             label="undo u-gauge"),
        Step("lift_reduce", catalog("dJKT2_1"), "reduce_djkt2_1", label="lift to dJKT2_1"),
        Step("laplace", "forward", expect="dJKT2_2", label="Laplace"),
        Step("transform", "gauge_53", expect="dJKT2_2_gauged", label="constant gauge"),
        Step("reduce", "reduce_djkt2_2_gauged", expect="dJKT2_2_red", label="reduce row 2"),
        Step("transform", "gauge_56", expect="HTW", label="gauge with power twist"),
    ]
