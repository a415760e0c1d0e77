"""``fgpair``: certify pairs, run the diagrams and validate the numerics from the shell."""

from __future__ import annotations

import argparse
import ast
import cmath
import math
import operator
import re
import sys
import time
from typing import List, Optional, Sequence

from . import checks
from .pairs import PairError, UnknownPair, catalog, catalog_names, compatibility_residual, dumps
from .report import Record, Report, error, numeric, symbolic
from .transforms import apply_reduction, apply_transform, laplace, loads_spec, named_spec, REDUCTIONS

DEFAULT_TOL = 1e-6
EXIT_USAGE = 2


class UsageError(Exception):
    pass


# -- complex literals ----------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "e": math.e, "i": 1j, "j": 1j}
_FUNCS = {"exp": cmath.exp, "sqrt": cmath.sqrt, "cos": cmath.cos, "sin": cmath.sin}


def parse_complex(text: str) -> complex:
    """Parse ``a+bi``, ``2i``, ``r*exp(i*phi)``, ``exp(2i*pi/3)`` and friends."""
    src = re.sub(r"(\d(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*i\b", r"\1j", text.strip())
    src = src.replace("^", "**")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise UsageError(f"cannot parse complex number {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
                and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise UsageError(f"unsupported syntax in complex number {text!r}")

    return complex(ev(tree))


def _fmt(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}i"


# -- state ---------------------------------------------------------------------

def resolve_theta(theta: Optional[str], alpha: Optional[str]) -> complex:
    """theta from --theta and/or --alpha with alpha = 1/2 - theta."""
    th = parse_complex(theta) if theta is not None else None
    al = parse_complex(alpha) if alpha is not None else None
    if th is None and al is None:
        raise UsageError("give --theta or --alpha")
    if th is not None and al is not None and abs(al - (0.5 - th)) > 1e-12:
        raise UsageError(f"--alpha {alpha} is inconsistent with --theta {theta} (need alpha = 1/2 - theta)")
    return th if th is not None else 0.5 - al


def p2_state(theta: complex, t: float, tol: float):
    """The branch with y = y' = 0, u = 1 at t = 0, carried to t by the P2 flow."""
    from .numerics import P2State, integrate_p2
    s0 = P2State.default(theta, 0.0)
    return s0 if t == 0 else integrate_p2(s0, t, tol=min(tol, 1e-12))


# -- commands ------------------------------------------------------------------

def _check_names(names: Sequence[str]) -> None:
    for n in names:
        catalog(n)  # raises UnknownPair


def cmd_verify(args) -> Report:
    names = args.pair or catalog_names()
    _check_names(names)
    rep = Report({"command": "verify", "pairs": list(names)})
    for n in names:
        rep.add(checks.verify_pair(n))
    return rep


def cmd_diagram(args) -> Report:
    rep = Report({"command": "diagram", "figure": args.figure})
    recs = checks.figure1() if args.figure == 1 else checks.figure2()
    if args.figure == 2 and args.negative_control:
        recs.append(checks.perturbed_diagram_rejected())
    for r in recs:
        rep.add(r)
    return rep


def _image_record(label: str, img, expect: Optional[str], t0: float) -> Record:
    if expect:
        ref = catalog(expect)
        ok = img == ref
        return symbolic(f"{label} = {ref.name}", ok, f"{ref.name} pair",
                        [] if ok else img.diff_report(ref)[:6], {"image": dumps(img)},
                        time.perf_counter() - t0)
    if img.is_degenerate():
        return symbolic(f"{label} computed", True, "", ["image is degenerate; compatibility not checked"],
                        {"image": dumps(img)}, time.perf_counter() - t0)
    ok = compatibility_residual(img).is_zero()
    return symbolic(f"{label} is compatible", ok, "", [], {"image": dumps(img)}, time.perf_counter() - t0)


def cmd_laplace(args) -> Report:
    rep = Report({"command": "laplace", "pair": args.pair, "direction": args.direction,
                  "expect": args.expect})
    t0 = time.perf_counter()
    p = catalog(args.pair)
    rep.add(_image_record(f"{args.direction} Laplace of {p.name}", laplace(p, args.direction), args.expect, t0))
    return rep


def cmd_transform(args) -> Report:
    rep = Report({"command": "transform", "pair": args.pair, "spec": args.spec, "expect": args.expect})
    t0 = time.perf_counter()
    p = catalog(args.pair)
    if args.spec_file:
        with open(args.spec_file) as fh:
            spec = loads_spec(fh.read())
    else:
        spec = named_spec(args.spec)
    rep.add(_image_record(f"{spec.name or args.spec} applied to {p.name}", apply_transform(p, spec),
                          args.expect, t0))
    return rep


def cmd_reduce(args) -> Report:
    rep = Report({"command": "reduce", "pair": args.pair, "reduction": args.reduction, "expect": args.expect})
    t0 = time.perf_counter()
    p = catalog(args.pair)
    img, rel = apply_reduction(p, args.reduction)
    rec = _image_record(f"{args.reduction} applied to {p.name}", img, args.expect, t0)
    rec.notes.append(f"relation {rel}")
    rep.add(rec)
    return rep


def cmd_scalar(args) -> Report:
    rep = Report({"command": "scalar", "garnier": args.garnier, "eliminate": args.eliminate})
    garnier = args.garnier if args.garnier or args.eliminate else sorted(checks.GARNIER)
    elim = args.eliminate if args.garnier or args.eliminate else list(checks.ELIMINATIONS)
    for g in garnier or []:
        rep.add(checks.garnier_record(g))
    for e in elim or []:
        rep.add(checks.elimination_record(e))
    return rep


def _theorem_records(args, state, mu1, mu2) -> List[Record]:
    from .numerics import verify_theorem31
    tol, ode = args.tol, args.ode_tol
    base = dict(eps=args.eps, tol=ode, accept=tol, corrupt_kernel=args.corrupt_kernel)
    pair = f"mu = {_fmt(mu1)} -> {_fmt(mu2)}"
    out = []
    t0 = time.perf_counter()
    rep = verify_theorem31(state, mu1, mu2, k=args.k, R_trunc=args.R_trunc, t2=args.t2,
                           doubling=not args.corrupt_kernel, variant=args.contour, **base)
    data = {"W_mu1": rep.W1, "W_mu2": rep.W2, "det_W": rep.det_W, "tail_error": rep.tail_error}
    data.update(rep.details)
    notes = []
    if args.corrupt_kernel:
        notes.append("self-test: kernel sign flipped, this record is expected to FAIL")
    out.append(numeric(f"transfer residual in mu, {pair}", rep.residual, tol, "HTW mu-equation", notes,
                       data, time.perf_counter() - t0))
    if rep.t_residual is not None:
        out.append(numeric(f"transfer residual in t, t = {state.t:g} -> {args.t2:g}", rep.t_residual, tol,
                           "HTW t-equation"))
    if rep.r_doubling is not None:
        out.append(numeric(f"R_trunc doubling {args.R_trunc:g} -> {2 * args.R_trunc:g}", rep.r_doubling,
                           args.doubling_tol, "quadrature convergence"))
    return out


def _ladder(args, state, mu) -> List[Record]:
    from .numerics import build_contour, build_split_contour, integral_transform
    import numpy as np
    Ws = []
    t0 = time.perf_counter()
    for R in (4.0, 6.0, 8.0):
        if args.contour == "split":
            c = build_split_contour(R, mu)
        else:
            k = args.k
            if k is None:
                from .numerics import admissible_k
                k = admissible_k(mu, args.eps)[0]
            c = build_contour(k, args.eps, R, mu)
        Ws.append(integral_transform(state, c, mu, args.ode_tol).W)
    steps = [float(np.linalg.norm(Ws[i + 1] - Ws[i])) for i in range(2)]
    # the tail series is only trusted from the default radius outward, so the last step decides
    return [numeric(f"convergence ladder R_trunc = 4, 6, 8 at mu = {_fmt(mu)}", steps[-1], args.doubling_tol,
                    "quadrature convergence", [f"|W(6) - W(4)| = {steps[0]:.3e}", f"|W(8) - W(6)| = {steps[1]:.3e}"],
                    {"R": [4, 6, 8], "W": Ws}, time.perf_counter() - t0)]


def _nondegeneracy(args, state, mu1, mu2) -> Record:
    from .numerics import MuOutsideWedge, verify_theorem31
    t0 = time.perf_counter()
    try:
        rep = verify_theorem31(state, mu1, mu2, R_trunc=args.R_trunc, tol=args.ode_tol, accept=args.tol,
                               variant="split")
    except MuOutsideWedge as exc:
        return error("fundamental solution from the split contour", "numeric", exc, "")
    return numeric("fundamental solution from the split contour: |det W|", rep.det_W, args.det_floor,
                   "split contour", [f"mu transfer residual {rep.residual:.3e}",
                                     "the standard contour gives a rank-one solution"],
                   {"W_mu1": rep.W1}, time.perf_counter() - t0, larger_is_pass=True)


def cmd_theorem31(args) -> Report:
    from .numerics import MuOutsideWedge
    if args.self_test == "corrupt-kernel":
        args.corrupt_kernel = True
    theta = resolve_theta(args.theta, args.alpha)
    mus = [parse_complex(m) for m in (args.mu or ["exp(2i*pi/3)", "2*exp(2i*pi/3)"])]
    if len(mus) < 2:
        raise UsageError("give at least two --mu values")
    rep = Report({"command": "theorem31", "theta": _fmt(theta), "t": args.t, "mu": [_fmt(m) for m in mus],
                  "k": args.k, "eps": args.eps, "R_trunc": args.R_trunc, "contour": args.contour,
                  "t2": args.t2, "tol": args.tol, "corrupt_kernel": args.corrupt_kernel})
    state = p2_state(theta, args.t, args.ode_tol)
    try:
        for m1, m2 in zip(mus, mus[1:]):
            for r in _theorem_records(args, state, m1, m2):
                rep.add(r)
        if not args.corrupt_kernel and not args.quick:
            for r in _ladder(args, state, mus[0]):
                rep.add(r)
            rep.add(_nondegeneracy(args, state, mus[0], mus[1]))
    except MuOutsideWedge as exc:
        raise UsageError(str(exc)) from exc
    if theta == 0 and rep.records:
        rep.records[0].notes.append("theta=0 power twist trivial")
    return rep


def cmd_stokes(args) -> Report:
    from .numerics import NumericsError, airy_stokes, stokes_matrices
    import numpy as np
    theta = resolve_theta(args.theta, args.alpha)
    rep = Report({"command": "stokes", "theta": _fmt(theta), "t": args.t, "t2": args.t2, "tol": args.tol})
    state = p2_state(theta, args.t, args.ode_tol)
    t0 = time.perf_counter()
    try:
        sd = stokes_matrices(state, args.ode_tol, template_tol=math.inf)
    except NumericsError as exc:
        rep.add(error("Stokes matrices", "numeric", exc))
        return rep
    el = time.perf_counter() - t0
    rep.add(numeric("unipotent templates of S_1..S_6", max(sd.template_residuals), args.template_tol,
                    "canonical solutions", [f"s_{n} = {_fmt(s)}" for n, s in enumerate(sd.s, 1)],
                    sd.as_dict(), el))
    rep.add(numeric("product S_1...S_6 = exp(-2 pi i theta sigma3)", sd.product_residual, args.product_tol,
                    "cyclic relation",
                    [f"|S_1...S_6 exp(-2 pi i theta sigma3) - I| = {sd.stated_product_residual:.3e}"]))
    if args.t2 is not None:
        t0 = time.perf_counter()
        from .numerics import integrate_p2
        sd2 = stokes_matrices(integrate_p2(state, args.t2, tol=min(args.ode_tol, 1e-12)), args.ode_tol,
                              template_tol=math.inf)
        drift = [abs(a - b) for a, b in zip(sd.s, sd2.s)]
        rep.add(numeric(f"isomonodromy drift t = {args.t:g} -> {args.t2:g}", max(drift), args.tol,
                        "P2 flow", [f"s_{n}: {d:.3e}" for n, d in enumerate(drift, 1)],
                        {"s_t2": [[z.real, z.imag] for z in sd2.s]}, time.perf_counter() - t0))
    if theta == 0 and abs(state.z) < 1e-10:
        ref = airy_stokes(state)
        diff = float(np.max(np.abs(np.array(ref) - np.array(sd.s))))
        rep.add(numeric("Airy branch multipliers", diff, args.tol, "Airy functions",
                        [f"Airy s_{n} = {_fmt(s)}" for n, s in enumerate(ref, 1) if n % 2]))
    return rep


def cmd_plot_export(args):
    from .numerics import admissible_k, build_contour, build_split_contour
    from .numerics.export import canonical_table, transform_table
    theta = resolve_theta(args.theta, args.alpha)
    state = p2_state(theta, args.t, args.ode_tol)
    mus = [parse_complex(m) for m in (args.mu or ["exp(2i*pi/3)"])]
    if args.contour == "split":
        contour = build_split_contour(args.R_trunc, mus[0])
    else:
        k = args.k if args.k is not None else admissible_k(mus[0], args.eps)[0]
        contour = build_contour(k, args.eps, args.R_trunc, mus[0])
    if args.what == "canonical":
        return canonical_table(state, args.n, contour, args.points, tol=args.ode_tol)
    return transform_table(state, contour, mus, tol=args.ode_tol)


# -- parser --------------------------------------------------------------------

def _numeric_options(p: argparse.ArgumentParser, mu: bool = True) -> None:
    p.add_argument("--theta", help="monodromy exponent theta (complex literal)")
    p.add_argument("--alpha", help="P2 parameter; alpha = 1/2 - theta")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--ode-tol", type=float, default=1e-10, help="integrator tolerance")
    if mu:
        p.add_argument("--mu", action="append", help="spectral value, e.g. '2*exp(2i*pi/3)' (repeatable)")
        p.add_argument("--k", type=int, choices=range(6), default=None, help="wedge index (default: automatic)")
        p.add_argument("--eps", type=float, default=math.pi / 12)
        p.add_argument("--R-trunc", dest="R_trunc", type=float, default=6.0)
        p.add_argument("--contour", choices=("standard", "split"), default="standard")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                        help=f"acceptance tolerance for numeric residuals (default {DEFAULT_TOL:g})")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)

    ap = argparse.ArgumentParser(prog="fgpair", parents=[common],
                                 description="Exact and numerical checks of Lax pairs for P1 and P2.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="compatibility of catalog pairs")
    p.add_argument("--pair", action="append", help="catalog name (repeatable; default all)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("diagram", parents=[common], help="run every edge of a diagram")
    p.add_argument("--figure", type=int, choices=(1, 2), required=True)
    p.add_argument("--negative-control", action="store_true",
                   help="also check that a perturbed lift breaks commutativity")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("laplace", parents=[common], help="Laplace image of a pair")
    p.add_argument("--pair", required=True)
    p.add_argument("--direction", choices=("forward", "inverse"), default="forward")
    p.add_argument("--expect", help="catalog pair the image must equal")
    p.set_defaults(func=cmd_laplace)

    p = sub.add_parser("transform", parents=[common], help="apply a named or stored transform")
    p.add_argument("--pair", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--spec", help="one of: " + ", ".join(sorted(_spec_names())))
    g.add_argument("--spec-file", help="transform stored as text")
    p.add_argument("--expect")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("reduce", parents=[common], help="eliminate a constraint row")
    p.add_argument("--pair", required=True)
    p.add_argument("--reduction", required=True, choices=sorted(REDUCTIONS))
    p.add_argument("--expect")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("scalar", parents=[common], help="scalar Garnier pairs and Painleve eliminations")
    p.add_argument("--garnier", action="append", choices=sorted(checks.GARNIER))
    p.add_argument("--eliminate", action="append", choices=list(checks.ELIMINATIONS))
    p.set_defaults(func=cmd_scalar)

    p = sub.add_parser("theorem31", parents=[common], help="validate the integral transform JM2 -> HTW")
    _numeric_options(p)
    p.add_argument("--t2", type=float, default=None, help="also check the t-equation up to this time")
    p.add_argument("--doubling-tol", type=float, default=1e-8)
    p.add_argument("--det-floor", type=float, default=1e-2)
    p.add_argument("--quick", action="store_true", help="skip the convergence ladder and split contour")
    p.add_argument("--corrupt-kernel", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--self-test", choices=("corrupt-kernel",), help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_theorem31)

    p = sub.add_parser("stokes", parents=[common], help="Stokes multipliers of the JM2 system")
    _numeric_options(p, mu=False)
    p.add_argument("--t2", type=float, default=1.5, help="second time for the drift check")
    p.add_argument("--template-tol", type=float, default=1e-8)
    p.add_argument("--product-tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_stokes)

    p = sub.add_parser("plot-export", parents=[common], help="plain numeric tables for plotting")
    _numeric_options(p)
    p.add_argument("--what", choices=("canonical", "transform"), default="canonical")
    p.add_argument("--n", type=int, default=1, help="canonical solution index")
    p.add_argument("--points", type=int, default=100)
    p.set_defaults(func=cmd_plot_export)
    return ap


def _spec_names():
    from .transforms import spec_names
    return spec_names()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    args.tol = getattr(args, "tol", DEFAULT_TOL)
    args.out = getattr(args, "out", None)
    args.format = getattr(args, "format", "text")
    if args.tol <= 0:
        ap.error("--tol must be positive")
    try:
        if args.command == "plot-export":
            _emit(cmd_plot_export(args), args.out)
            return 0
        rep = args.func(args)
    except UnknownPair as exc:
        print(f"fgpair: error: UnknownPair: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"fgpair: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PairError as exc:
        rep = Report({"command": args.command})
        rep.add(error(args.command, "symbolic", exc))
    _emit(rep.to_json() + "\n" if args.format == "json" else rep.to_text(), args.out)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
