"""Exact rational functions over the Gaussian rationals.

A value is stored as ``a + b*i + (c + d*i)*w`` where ``a, b, c, d`` live in the
rational function field QQ(lam, mu, ..., kappa2) and ``w`` is an optional
square root carried by the value (``w**2 == rho``).  Keeping the real and
imaginary parts apart lets us use sympy's fast sparse fraction field over QQ;
the field over QQ<I> is both slower and buggy under differentiation.

Symbols come from a fixed registry.  The registry order fixes the monomial
order used for printing (graded lex, spectral > dependent > t > parameters).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple

from sympy.polys.domains import QQ
from sympy.polys.domains.gaussiandomains import GaussianRational  # noqa: F401  re-exported
from sympy.polys.fields import field
from sympy.polys.orderings import grlex


class SymcoreError(Exception):
    """Base class for errors raised by the exact arithmetic layer."""


class DivisionByZero(SymcoreError, ZeroDivisionError):
    pass


class UncoveredSymbol(SymcoreError):
    pass


class NotPolynomialIn(SymcoreError):
    pass


class ParseError(SymcoreError, ValueError):
    pass


class ExtensionMismatch(SymcoreError):
    """Two values carry different square-root relations for ``w``."""


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str  # spectral | dependent | time | parameter


SPECTRAL = ("lam", "mu", "zeta")
DEPENDENT = ("y", "z", "u", "yp", "zp", "f0", "f1", "q")
TIME = ("t",)
PARAMETERS = ("theta", "alpha", "alpha0", "alpha1", "kappa1", "kappa2")

# w is registered as a dependent symbol but never becomes a field generator;
# it is the extension element.
EXT = "w"

SYMBOLS: Dict[str, Symbol] = {}
for _kind, _names in (("spectral", SPECTRAL), ("dependent", DEPENDENT + (EXT,)),
                      ("time", TIME), ("parameter", PARAMETERS)):
    for _n in _names:
        SYMBOLS[_n] = Symbol(_n, _kind)

_GEN_NAMES = SPECTRAL + DEPENDENT + TIME + PARAMETERS
_FIELD, *_GENS = field(",".join(_GEN_NAMES), QQ, grlex)
_RING = _FIELD.ring
_GEN = dict(zip(_GEN_NAMES, _GENS))
_INDEX = {n: k for k, n in enumerate(_GEN_NAMES)}
_ZERO = _FIELD.zero
_ONE = _FIELD.one

ALIASES = {"λ": "lam", "μ": "mu", "ζ": "zeta", "θ": "theta", "α": "alpha",
           "κ1": "kappa1", "κ2": "kappa2", "κ₁": "kappa1", "κ₂": "kappa2",
           "α0": "alpha0", "α1": "alpha1", "α₀": "alpha0", "α₁": "alpha1",
           }


def symbol(name: str) -> Symbol:
    name = ALIASES.get(name, name)
    try:
        return SYMBOLS[name]
    except KeyError:
        raise ParseError(f"unknown symbol {name!r}") from None


def _cmul(a, b, c, d):
    return a * c - b * d, a * d + b * c


class RatFunc:
    """Element of QQ(i)(vars) or of its quadratic extension by ``w``.

    Values are immutable.  ``ext`` is the w-free RatFunc ``rho`` with
    ``w**2 == rho`` (or None when no extension is in play).
    """

    __slots__ = ("_p", "ext", "_hash")

    def __init__(self, parts, ext: Optional["RatFunc"] = None):
        self._p = tuple(parts)
        if ext is not None and ext.has_w():
            raise ExtensionMismatch("the relation for w must be w-free")
        if ext is None and (self._p[2] or self._p[3]):
            raise ExtensionMismatch("w used without a relation w**2 = rho")
        self.ext = ext
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def const(cls, value=0, imag=0) -> "RatFunc":
        if isinstance(value, complex):
            value, imag = value.real, value.imag
        re_, im_ = _to_q(value), _to_q(imag)
        return cls((_FIELD(re_), _FIELD(im_), _ZERO, _ZERO))

    @classmethod
    def sym(cls, name: str, ext: Optional["RatFunc"] = None) -> "RatFunc":
        name = symbol(name).name
        if name == EXT:
            if ext is None:
                raise ExtensionMismatch("w needs a relation w**2 = rho")
            return cls((_ZERO, _ZERO, _ONE, _ZERO), ext)
        return cls((_GEN[name], _ZERO, _ZERO, _ZERO))

    @classmethod
    def imag_unit(cls) -> "RatFunc":
        return cls((_ZERO, _ONE, _ZERO, _ZERO))

    @staticmethod
    def coerce(x) -> "RatFunc":
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, str):
            return parse(x)
        if isinstance(x, (int, Fraction, complex, float)):
            return RatFunc.const(x)
        if isinstance(x, GaussianRational):
            return RatFunc.const(Fraction(int(x.x.numerator), int(x.x.denominator)),
                                 Fraction(int(x.y.numerator), int(x.y.denominator)))
        raise TypeError(f"cannot coerce {type(x).__name__} to RatFunc")

    # basic predicates ---------------------------------------------------
    @property
    def parts(self):
        return self._p

    def has_w(self) -> bool:
        return bool(self._p[2] or self._p[3])

    def is_zero(self) -> bool:
        return not any(self._p)

    def is_real(self) -> bool:
        return not (self._p[1] or self._p[3])

    def is_constant(self) -> bool:
        return not self.has_w() and all(_is_const(p) for p in self._p[:2])

    def to_fraction(self) -> Fraction:
        """Value of a real constant as a Fraction."""
        if not (self.is_constant() and self.is_real()):
            raise SymcoreError(f"{self} is not a real constant")
        a = self._p[0]
        if not a:
            return Fraction(0)
        q = a.numer.LC / a.denom.LC
        return Fraction(int(q.numerator), int(q.denominator))

    def to_complex(self) -> complex:
        if not self.is_constant():
            raise SymcoreError(f"{self} is not constant")
        re_ = RatFunc((self._p[0], _ZERO, _ZERO, _ZERO)).to_fraction()
        im_ = RatFunc((self._p[1], _ZERO, _ZERO, _ZERO)).to_fraction()
        return complex(float(re_), float(im_))

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            other = RatFunc.coerce(other)
        except TypeError:
            return NotImplemented
        if self._p != other._p:
            return False
        if self.has_w():
            return self.ext._p == other.ext._p
        return True

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._p, self.ext._p if self.has_w() else None))
        return self._hash

    # arithmetic ---------------------------------------------------------
    def _ext_with(self, other: "RatFunc") -> Optional["RatFunc"]:
        a, b = self.ext, other.ext
        if a is None:
            return b
        if b is None or a._p == b._p:
            return a
        if not self.has_w():
            return b
        if not other.has_w():
            return a
        raise ExtensionMismatch("operands carry different w relations")

    def __add__(self, other):
        other = RatFunc.coerce(other)
        return RatFunc(tuple(x + y for x, y in zip(self._p, other._p)),
                       self._ext_with(other))

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(tuple(-x for x in self._p), self.ext)

    def __sub__(self, other):
        return self + (-RatFunc.coerce(other))

    def __rsub__(self, other):
        return RatFunc.coerce(other) - self

    def __mul__(self, other):
        other = RatFunc.coerce(other)
        ext = self._ext_with(other)
        a, b, c, d = self._p
        e, f, g, h = other._p
        if not (c or d or g or h):
            re_, im_ = _cmul(a, b, e, f)
            return RatFunc((re_, im_, _ZERO, _ZERO), ext)
        # (A + Cw)(E + Gw) = AE + CG rho + (AG + CE) w with complex A, C, E, G
        r0, r1 = ext._p[0], ext._p[1]
        ae = _cmul(a, b, e, f)
        cg = _cmul(c, d, g, h)
        cgr = _cmul(cg[0], cg[1], r0, r1)
        ag = _cmul(a, b, g, h)
        ce = _cmul(c, d, e, f)
        return RatFunc((ae[0] + cgr[0], ae[1] + cgr[1], ag[0] + ce[0], ag[1] + ce[1]), ext)

    __rmul__ = __mul__

    def conjugate_w(self) -> "RatFunc":
        a, b, c, d = self._p
        return RatFunc((a, b, -c, -d), self.ext)

    def conjugate_i(self) -> "RatFunc":
        a, b, c, d = self._p
        return RatFunc((a, -b, c, -d), self.ext)

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise DivisionByZero("division by the zero rational function")
        if self.has_w():
            conj = self.conjugate_w()
            norm = self * conj  # w-free
            return conj * norm.inverse()
        a, b = self._p[0], self._p[1]
        if not b:
            return RatFunc((1 / a, _ZERO, _ZERO, _ZERO), self.ext)
        n = a * a + b * b
        return RatFunc((a / n, -b / n, _ZERO, _ZERO), self.ext)

    def __truediv__(self, other):
        other = RatFunc.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RatFunc.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers are exact")
        if k < 0:
            return self.inverse() ** (-k)
        out = RatFunc.const(1) if self.ext is None else RatFunc((_ONE, _ZERO, _ZERO, _ZERO), self.ext)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # structure ----------------------------------------------------------
    def free_symbols(self) -> frozenset:
        names = set()
        for p in self._p:
            if p:
                names |= _vars_of(p)
        if self.has_w():
            names.add(EXT)
            names |= self.ext.free_symbols()
        return frozenset(names)

    def degree_in(self, s: str) -> int:
        """Degree in ``s`` of a value polynomial in ``s`` (-1 for zero)."""
        s = symbol(s).name
        k = _INDEX[s]
        deg = -1
        for p in self._p:
            if not p:
                continue
            if p.denom.degrees()[k] > 0:
                raise NotPolynomialIn(f"{self} has {s} in a denominator")
            deg = max(deg, p.numer.degrees()[k])
        if self.has_w() and s in self.ext.free_symbols():
            raise NotPolynomialIn(f"w depends on {s}")
        return deg

    def coeff_in(self, s: str, d: int) -> "RatFunc":
        """Coefficient of ``s**d``; the value must be polynomial in ``s``."""
        s = symbol(s).name
        self.degree_in(s)
        g = _RING.gens[_INDEX[s]]
        out = []
        for p in self._p:
            if not p:
                out.append(_ZERO)
                continue
            c = p.numer.coeff_wrt(g, d)
            out.append(_FIELD(c) / _FIELD(p.denom))
        return RatFunc(out, self.ext)

    def numer_denom(self) -> Tuple["RatFunc", "RatFunc"]:
        """Canonical split: monic polynomial denominator, numerator over it."""
        den, nums = _common(self._p)
        return (RatFunc([_FIELD(n) for n in nums], self.ext),
                RatFunc((_FIELD(den), _ZERO, _ZERO, _ZERO)))

    @property
    def numerator(self):
        return self.numer_denom()[0]

    @property
    def denominator(self):
        return self.numer_denom()[1]

    def leading_sign(self) -> int:
        """Sign (+1/-1) of the first printed term; 0 for zero.

        For a complex leading coefficient the real part decides, or the
        imaginary part when the real part vanishes.
        """
        if self.is_zero():
            return 0
        _, nums = _common(self._p)
        best = None
        for idx, n in enumerate(nums):
            wpow, imag = divmod(idx, 2)
            for monom, coef in n.terms():
                key = (wpow, sum(monom), monom)
                if best is None or key > best[0]:
                    best = (key, {})
                if key == best[0]:
                    best[1][imag] = best[1].get(imag, 0) + coef
        re_ = best[1].get(0, 0)
        val = re_ if re_ != 0 else best[1].get(1, 0)
        return 1 if val > 0 else -1

    def deflate(self, s: str, m: int, new: str, scale=1) -> "RatFunc":
        """Return g(scale*new) where self == g(s**m); raises if no such g."""
        s, new = symbol(s).name, symbol(new).name
        ks, kn = _INDEX[s], _INDEX[new]
        scale = RatFunc.coerce(scale)

        def poly(P):
            out = RatFunc.const(0)
            for monom, coef in P.terms():
                e = monom[ks]
                if e % m:
                    raise NotPolynomialIn(f"{self} is not a function of {s}^{m}")
                if monom[kn]:
                    raise SymcoreError(f"{new} already occurs in {self}")
                rest = list(monom)
                rest[ks] = 0
                term = RatFunc((_FIELD(_RING({tuple(rest): coef})), _ZERO, _ZERO, _ZERO))
                out = out + term * (scale * RatFunc.sym(new)) ** (e // m)
            return out

        def part(p):
            return poly(p.numer) / poly(p.denom) if p else RatFunc.const(0)

        if self.has_w() and s in self.ext.free_symbols():
            raise SymcoreError("cannot deflate through the w relation")
        a, b, c, d = self._p
        out = part(a) + part(b) * RatFunc.imag_unit()
        if c or d:
            out = out + (part(c) + part(d) * RatFunc.imag_unit()) * RatFunc.sym(EXT, self.ext)
        return out

    # calculus -----------------------------------------------------------
    def diff_spectral(self, s: str) -> "RatFunc":
        sym_ = symbol(s)
        if sym_.kind != "spectral":
            raise SymcoreError(f"{s} is not a spectral variable")
        g = _GEN[sym_.name]
        return self._derive(lambda p: RatFunc((p.diff(g), _ZERO, _ZERO, _ZERO)))

    def diff_t(self, table: "DerivationTable") -> "RatFunc":
        return self._derive(lambda p: table.derive_part(p))

    def _derive(self, dpart) -> "RatFunc":
        a, b, c, d = self._p
        ext = self.ext

        def dcomplex(x, y):
            out = RatFunc.const(0)
            if x:
                out = out + dpart(x)
            if y:
                out = out + dpart(y) * RatFunc.imag_unit()
            return out

        out = dcomplex(a, b)
        if c or d:
            w = RatFunc.sym(EXT, ext)
            gamma = RatFunc((c, d, _ZERO, _ZERO))
            drho = ext._derive(dpart)
            out = out + (dcomplex(c, d) + gamma * drho / (2 * ext)) * w
        if ext is not None and out.ext is None:
            out = RatFunc(out._p, ext)
        return out

    # substitution & evaluation -------------------------------------------
    def substitute(self, bindings: Mapping[str, object]) -> "RatFunc":
        if not bindings:
            return self
        binds = {}
        for k, v in bindings.items():
            name = symbol(k).name
            if name == EXT:
                raise SymcoreError("substitute for w through the relation instead")
            binds[_INDEX[name]] = RatFunc.coerce(v)
        cache: Dict[Tuple[int, int], RatFunc] = {}

        def power(k, e):
            key = (k, e)
            if key not in cache:
                base = binds[k] if k in binds else RatFunc((_GEN[_GEN_NAMES[k]], _ZERO, _ZERO, _ZERO))
                cache[key] = base ** e
            return cache[key]

        def poly(P):
            out = RatFunc.const(0)
            for monom, coef in P.terms():
                term = RatFunc.const(Fraction(int(coef.numerator), int(coef.denominator)))
                for k, e in enumerate(monom):
                    if e:
                        term = term * power(k, e)
                out = out + term
            return out

        def part(p):
            if not p:
                return RatFunc.const(0)
            if not (_vars_idx(p) & binds.keys()):
                return RatFunc((p, _ZERO, _ZERO, _ZERO))
            return poly(p.numer) / poly(p.denom)

        a, b, c, d = self._p
        out = part(a) + part(b) * RatFunc.imag_unit()
        if c or d:
            new_ext = self.ext.substitute(bindings)
            w = RatFunc.sym(EXT, new_ext)
            out = out + (part(c) + part(d) * RatFunc.imag_unit()) * w
        return out

    def evaluate(self, values: Mapping[str, complex], w: Optional[complex] = None) -> complex:
        """Numeric value; ``w`` must be supplied when the value involves it."""
        vals = {_INDEX[symbol(k).name]: complex(v) for k, v in values.items() if symbol(k).name != EXT}

        def num(P):
            tot = 0j
            for monom, coef in P.terms():
                term = complex(float(coef))
                for k, e in enumerate(monom):
                    if e:
                        try:
                            term *= vals[k] ** e
                        except KeyError:
                            raise UncoveredSymbol(f"no value for {_GEN_NAMES[k]}") from None
                tot += term
            return tot

        def part(p):
            return num(p.numer) / num(p.denom) if p else 0j

        a, b, c, d = self._p
        out = part(a) + 1j * part(b)
        if c or d:
            if w is None:
                raise UncoveredSymbol("no numeric branch given for w")
            out += (part(c) + 1j * part(d)) * w
        return out

    def univariate(self, s: str, values: Mapping[str, complex]):
        """Numerator and denominator coefficient arrays (highest first) in ``s``."""
        import numpy as np

        s = symbol(s).name
        if self.has_w():
            raise SymcoreError("univariate evaluation of w-dependent values is not supported")
        k = _INDEX[s]
        vals = {_INDEX[symbol(n).name]: complex(v) for n, v in values.items()}

        def coeffs(P):
            deg = max((m[k] for m, _ in P.terms()), default=0)
            out = np.zeros(deg + 1, dtype=complex)
            for monom, coef in P.terms():
                term = complex(float(coef))
                for j, e in enumerate(monom):
                    if e and j != k:
                        try:
                            term *= vals[j] ** e
                        except KeyError:
                            raise UncoveredSymbol(f"no value for {_GEN_NAMES[j]}") from None
                out[deg - monom[k]] += term
            return out

        den, nums = _common(self._p[:2])
        N = coeffs(nums[0]) if nums[0] else np.zeros(1, complex)
        if nums[1]:
            Ni = coeffs(nums[1])
            n = max(len(N), len(Ni))
            N = np.pad(N, (n - len(N), 0)) + 1j * np.pad(Ni, (n - len(Ni), 0))
        return N, coeffs(den)

    # text -----------------------------------------------------------------
    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"RatFunc({to_text(self)!r})"


def _to_q(x):
    if isinstance(x, float):
        if not x.is_integer():
            x = Fraction(x).limit_denominator(10**12)
            if float(x) != x:
                raise SymcoreError("refusing inexact float in exact arithmetic")
        x = Fraction(x)
    x = Fraction(x)
    return QQ(x.numerator, x.denominator)


def _is_const(p) -> bool:
    return p.numer.is_ground and p.denom.is_ground


def _vars_idx(p) -> set:
    out = set()
    for P in (p.numer, p.denom):
        for k, e in enumerate(P.degrees()):
            if e > 0:
                out.add(k)
    return out


def _vars_of(p) -> set:
    return {_GEN_NAMES[k] for k in _vars_idx(p)}


def _common(parts):
    """Monic common denominator and the matching numerators (as polys)."""
    den = _RING.one
    for p in parts:
        if p:
            den = den.lcm(p.denom)
    den = den.quo_ground(den.LC)
    nums = [p.numer * den.exquo(p.denom) if p else _RING.zero for p in parts]
    return den, nums


# --------------------------------------------------------------------------
# derivation tables


class DerivationTable:
    """Rules ``d(sym)/dt = rhs`` for dependent symbols.

    Symbols listed in ``inert`` are treated as t-independent.  ``constraints``
    records parameter substitutions the table assumes (e.g. kappa2 -> -1); they
    are applied by callers that specialise a pair, not silently here.
    """

    def __init__(self, rules: Mapping[str, object], constraints: Optional[Mapping[str, object]] = None,
                 inert: Iterable[str] = ()):
        self.rules: Dict[str, RatFunc] = {}
        for k, v in rules.items():
            sym_ = symbol(k)
            if sym_.kind != "dependent" or sym_.name == EXT:
                raise SymcoreError(f"rules are only allowed for dependent symbols, got {k}")
            self.rules[sym_.name] = RatFunc.coerce(v)
        self.constraints = {symbol(k).name: RatFunc.coerce(v) for k, v in (constraints or {}).items()}
        self.inert = frozenset(symbol(s).name for s in inert)
        self._rule_idx = {_INDEX[k]: v for k, v in self.rules.items()}
        self._t = _INDEX["t"]

    def check_closed(self):
        for name, rhs in self.rules.items():
            for s in rhs.free_symbols():
                if SYMBOLS[s].kind == "dependent" and s not in self.rules and s not in self.inert and s != EXT:
                    raise UncoveredSymbol(f"rule for {name} mentions {s}, which has no rule")

    def derive_part(self, p) -> RatFunc:
        out = RatFunc.const(0)
        for k in sorted(_vars_idx(p)):
            name = _GEN_NAMES[k]
            kind = SYMBOLS[name].kind
            if k == self._t:
                out = out + RatFunc((p.diff(_GENS[k]), _ZERO, _ZERO, _ZERO))
            elif kind == "dependent":
                if name in self.inert:
                    continue
                try:
                    rule = self._rule_idx[k]
                except KeyError:
                    raise UncoveredSymbol(f"no t-derivative rule for {name}") from None
                out = out + RatFunc((p.diff(_GENS[k]), _ZERO, _ZERO, _ZERO)) * rule
        return out

    def merged(self, extra: Mapping[str, object]) -> "DerivationTable":
        rules = dict(self.rules)
        for k, v in extra.items():
            rules[symbol(k).name] = RatFunc.coerce(v)
        return DerivationTable(rules, self.constraints, self.inert)

    def substitute(self, bindings) -> "DerivationTable":
        return DerivationTable({k: v.substitute(bindings) for k, v in self.rules.items()},
                               {k: v.substitute(bindings) for k, v in self.constraints.items()},
                               self.inert)

    def __eq__(self, other):
        if not isinstance(other, DerivationTable):
            return NotImplemented
        return self.rules == other.rules and self.inert == other.inert

    def __repr__(self):
        body = ", ".join(f"{k}' = {v}" for k, v in sorted(self.rules.items(), key=lambda kv: _INDEX[kv[0]]))
        return f"DerivationTable({body})"


def normalize(f) -> RatFunc:
    """Canonical form; RatFunc values are always canonical, so this coerces."""
    return RatFunc.coerce(f)


def diff_spectral(f, s: str) -> RatFunc:
    return RatFunc.coerce(f).diff_spectral(s)


def diff_t(f, table: DerivationTable) -> RatFunc:
    return RatFunc.coerce(f).diff_t(table)


def substitute(f, bindings) -> RatFunc:
    return RatFunc.coerce(f).substitute(bindings)


def coeff_in(f, s: str, d: int) -> RatFunc:
    return RatFunc.coerce(f).coeff_in(s, d)


# --------------------------------------------------------------------------
# printing


def _fmt_q(q) -> str:
    q = Fraction(int(q.numerator), int(q.denominator))
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_monomial(monom, wpow) -> str:
    factors = []
    for k, e in enumerate(monom):
        if e:
            factors.append(_GEN_NAMES[k] if e == 1 else f"{_GEN_NAMES[k]}^{e}")
    if wpow:
        factors.append(EXT)
    return "*".join(factors)


def _fmt_poly_terms(terms) -> str:
    """terms: list of (monom, wpow, re, im) in print order."""
    if not terms:
        return "0"
    out = []
    for monom, wpow, re_, im_ in terms:
        mono = _fmt_monomial(monom, wpow)
        if im_ == 0 or re_ == 0:
            val, unit = (re_, "") if im_ == 0 else (im_, "i")
            neg = val < 0
            mag = -val if neg else val
            if unit:
                coef = "i" if mag == 1 else f"{_fmt_q(mag)}*i"
                body = f"{coef}*{mono}" if mono else coef
            else:
                if mono:
                    body = mono if mag == 1 else f"{_fmt_q(mag)}*{mono}"
                else:
                    body = _fmt_q(mag)
        else:
            neg = False
            sign = "-" if im_ < 0 else "+"
            imag = "i" if abs(im_) == 1 else f"{_fmt_q(abs(im_))}*i"
            coef = f"({_fmt_q(re_)} {sign} {imag})"
            body = f"{coef}*{mono}" if mono else coef
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def to_text(f: RatFunc) -> str:
    if f.is_zero():
        return "0"
    den, nums = _common(f.parts)
    coll: Dict[Tuple[tuple, int], list] = {}
    for idx, n in enumerate(nums):
        wpow, imag = divmod(idx, 2)
        for monom, coef in n.terms():
            slot = coll.setdefault((monom, wpow), [QQ(0), QQ(0)])
            slot[imag] += coef
    keys = sorted(coll, key=lambda k: (k[1], sum(k[0]), k[0]), reverse=True)
    terms = [(m, w, coll[(m, w)][0], coll[(m, w)][1]) for m, w in keys if any(coll[(m, w)])]
    num_txt = _fmt_poly_terms(terms)
    if den == _RING.one:
        return num_txt
    den_terms = sorted(den.terms(), key=lambda mc: (sum(mc[0]), mc[0]), reverse=True)
    den_txt = _fmt_poly_terms([(m, 0, c, QQ(0)) for m, c in den_terms])
    return f"({num_txt})/({den_txt})"


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_λμζθαεκ][A-Za-z_0-9₀₁]*)('*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos} in {text!r}")
        num, ident, primes, op = m.groups()
        if num is not None:
            toks.append(("num", int(num)))
        elif ident is not None:
            toks.append(("id", ALIASES.get(ident, ident) + "p" * len(primes)))
        else:
            toks.append(("op", "^" if op == "**" else op))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return toks


class _Parser:
    def __init__(self, text, ext):
        self.toks = _tokenize(text)
        self.k = 0
        self.ext = ext
        self.text = text

    def peek(self):
        return self.toks[self.k] if self.k < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.k += 1
        return tok

    def expect(self, op):
        tok = self.take()
        if tok != ("op", op):
            raise ParseError(f"expected {op!r} in {self.text!r}")

    def parse(self):
        out = self.expr()
        if self.k != len(self.toks):
            raise ParseError(f"trailing input in {self.text!r}")
        return out

    def expr(self):
        out = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self):
        out = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            out = out * rhs if op == "*" else out / rhs
        return out

    def unary(self):
        tok = self.peek()
        if tok == ("op", "-"):
            self.take()
            return -self.unary()
        if tok == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            tok = self.take()
            if tok[0] == "num":
                e = tok[1]
            elif tok == ("op", "("):
                inner = self.expr()
                self.expect(")")
                if not inner.is_constant() or not inner.is_real():
                    raise ParseError("exponents must be integer constants")
                q = inner.to_fraction()
                if q.denominator != 1:
                    raise ParseError("exponents must be integers")
                e = int(q)
            else:
                raise ParseError("exponents must be integer constants")
            return base ** (sign * e)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return RatFunc.const(val)
        if kind == "id":
            if val == "i":
                return RatFunc.imag_unit()
            return RatFunc.sym(val, self.ext if val == EXT else None)
        if (kind, val) == ("op", "("):
            out = self.expr()
            self.expect(")")
            return out
        raise ParseError(f"unexpected token {val!r} in {self.text!r}")


def parse(text: str, ext: Optional[RatFunc] = None) -> RatFunc:
    """Parse ``2*lam^2 - y/(lam - y) + i*t``; ``w`` requires ``ext``."""
    if isinstance(ext, str):
        ext = parse(ext)
    try:
        return _Parser(str(text), ext).parse()
    except DivisionByZero:
        raise
    except ExtensionMismatch as exc:
        raise ParseError(str(exc)) from None
