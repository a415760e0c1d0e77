"""Named certification runs shared by the command line and the acceptance tests."""

from __future__ import annotations

import time
from typing import Dict, List, Optional, Sequence, Tuple

from .pairs import (DegeneratePair, FGPair, PairError, catalog, compatibility_residual,
                    eliminate_to_scalar, scalar_reduce, symmetric_variables_check)
from .report import Record, error, symbolic
from .symcore import DerivationTable, RatFunc, parse
from .transforms import (Kernel, apply_reduction, apply_transform, diagram_check, htw_to_fn_variables,
                         inverse, laplace, lower_route, named_spec, upper_route)

# nondegenerate pairs whose compatibility is checked directly
PRIMARY_PAIRS = ("JKT1", "JM1", "JM1F", "JM2", "FN", "HTW", "JKT2", "CM2")

# degenerate pairs are certified by reducing them to a known nondegenerate pair
DEGENERATE_ROUTES: Dict[str, Tuple[Tuple[Tuple[str, str], ...], str, Dict[str, str]]] = {
    "dJKT1": ((("reduce", "reduce_djkt1"),), "JM1", {}),
    "dJKT2_1": ((("reduce", "reduce_djkt2_1"),), "JKT2_red", {"kappa1": "theta - 1"}),
    "dJKT2_3": ((("reduce", "reduce_djkt2_3"),), "dJKT2_3_red", {}),
    "dJKT2_2": ((("transform", "gauge_53"), ("reduce", "reduce_djkt2_2_gauged")), "dJKT2_2_red", {}),
    "dJKT2_2_gauged": ((("reduce", "reduce_djkt2_2_gauged"),), "dJKT2_2_red", {}),
}

# scalar Garnier pairs: (pair, component, w**2, expected potential)
GARNIER = {
    "G1": ("JM1", 2, "lam - y",
           "3/(4*(lam-y)^2) - z/(lam-y) + 4*lam^3 + 2*t*lam + z^2 - 4*y^3 - 2*t*y"),
    "G2": ("JM2", 1, "u*(lam - y)",
           "3/(4*(lam-y)^2) - (y^2+z+t/2)/(lam-y) + (y^2+z+t/2)^2 + lam^4 - y^4 + t*(lam^2-y^2)"
           " + 2*(1/2-theta)*(lam-y)"),
}

# (pair, eliminated-to symbol, expected second derivative)
ELIMINATIONS = {
    "P1 from JM1": ("JM1", "y", "6*y^2 + t"),
    "P2 from JM2": ("JM2", "y", "2*y^3 + t*y + 1/2 - theta"),
    "P2 from JKT2": ("JKT2", "y", "2*y^3 + t*y + 1/2 - (kappa1 - kappa2)"),
    "P34 from JM2": ("JM2", "z", "zp^2/(2*z) - 2*z^2 - t*z - theta^2/(2*z)"),
}


def _reduce_route(p: FGPair, steps) -> FGPair:
    for kind, name in steps:
        if kind == "transform":
            p = apply_transform(p, named_spec(name))
        else:
            p, _ = apply_reduction(p, name)
    return p


def verify_pair(name: str) -> Record:
    """Compatibility of one catalog pair (degenerate pairs go through their reduction)."""
    t0 = time.perf_counter()
    p = catalog(name)
    src = f"{p.name} pair"
    try:
        if p.is_degenerate():
            key = next((k for k in DEGENERATE_ROUTES if k.lower() == p.name.lower()), None)
            if key is None:
                raise DegeneratePair(f"{p.name} is degenerate and has no registered reduction")
            steps, target, bind = DEGENERATE_ROUTES[key]
            q = _reduce_route(p, steps)
            ref = catalog(target).specialize(bind) if bind else catalog(target)
            same = q == ref
            zero = compatibility_residual(q).is_zero()
            notes = [f"degenerate: certified via {target} reduction"]
            if bind:
                notes.append("with " + ", ".join(f"{k} = {v}" for k, v in bind.items()))
            if not same:
                notes += q.diff_report(ref)[:4]
            return symbolic(f"compatibility {p.name}", same and zero, src, notes,
                            {"route": [list(s) for s in steps], "target": target},
                            time.perf_counter() - t0)
        res = compatibility_residual(p)
        nonzero = [f"({i + 1},{j + 1}): {res[i, j]}" for i in range(p.size) for j in range(p.size)
                   if not res[i, j].is_zero()]
        return symbolic(f"compatibility {p.name}", not nonzero, src, nonzero[:4], {},
                        time.perf_counter() - t0)
    except (PairError, ArithmeticError) as exc:
        return error(f"compatibility {p.name}", "symbolic", exc, src)


def elimination_record(label: str) -> Record:
    t0 = time.perf_counter()
    name, target, expected = ELIMINATIONS[label]
    p = catalog(name)
    got = eliminate_to_scalar(p.table, target)
    ok = got == parse(expected)
    notes = [] if ok else [f"got {got}"]
    return symbolic(f"elimination {label}", ok, f"{name} table", notes, {"result": str(got)},
                    time.perf_counter() - t0)


def garnier_record(label: str) -> Record:
    t0 = time.perf_counter()
    name, comp, rho, expected = GARNIER[label]
    sp = scalar_reduce(catalog(name), comp, parse(rho))
    ok = sp.q1.is_zero() and sp.potential == parse(expected)
    return symbolic(f"scalar pair {label} from {name}", ok, f"{name} component {comp}",
                    [] if ok else [f"potential {sp.potential}"],
                    {"potential": str(sp.potential), "r1": str(sp.r1), "r0": str(sp.r0)},
                    time.perf_counter() - t0)


def _edge(label: str, got: FGPair, ref: FGPair, source: str, t0: float) -> Record:
    ok = got == ref
    return symbolic(label, ok, source, [] if ok else got.diff_report(ref)[:4], {},
                    time.perf_counter() - t0)


def figure1() -> List[Record]:
    """P1 diagram: JKT1 -> dJKT1 (Laplace) -> JM1 (reduction) -> G1 (scalar)."""
    out = []
    t0 = time.perf_counter()
    d = laplace(catalog("JKT1"), "inverse")
    out.append(_edge("Laplace JKT1 -> dJKT1", d, catalog("dJKT1"), "JKT1, dJKT1 pairs", t0))
    t0 = time.perf_counter()
    red, rel = apply_reduction(catalog("dJKT1"), "reduce_djkt1")
    rec = _edge("reduction dJKT1 -> JM1", red, catalog("JM1"), "dJKT1, JM1 pairs", t0)
    rec.notes.append(f"relation {rel}")
    out.append(rec)
    out.append(garnier_record("G1"))
    return out


def _kernel_text(k: Kernel) -> Dict[str, str]:
    q, M = k.normal_form()
    return {"f": str(k.f), "p": str(k.p), "q": str(q), "M": " ; ".join(M.to_lines())}


def figure2(kappa1_lift: Optional[str] = None) -> List[Record]:
    """P2 diagram: both routes JM2 -> HTW, the Fabri edge and the Garnier edge."""
    out = [garnier_record("G2")]
    t0 = time.perf_counter()
    res = diagram_check(upper_route(kappa1_lift or "theta - 1"), lower_route(), catalog("JM2"))
    for route, label in ((res.route_a, "upper"), (res.route_b, "lower")):
        for e in route.edges:
            if e.ok is None:
                out.append(symbolic(f"{label}: {e.label}", True, "route step",
                                    ["lift step; checked by the next edge"]))
            else:
                out.append(symbolic(f"{label}: {e.label} -> {e.name}", bool(e.ok), "route step",
                                    [e.detail] if e.detail else []))
        if route.error:
            out.append(symbolic(f"{label}: route", False, "route step", [route.error]))
    notes = []
    data = {}
    if res.route_a.kernel is not None and res.route_b.kernel is not None:
        data = {"upper": _kernel_text(res.route_a.kernel), "lower": _kernel_text(res.route_b.kernel)}
    if not res.ok:
        notes.append(res.reason)
    out.append(symbolic("commutativity JM2 -> HTW (pairs and integral kernels)", bool(res), "both routes",
                        notes, data, time.perf_counter() - t0))
    t0 = time.perf_counter()
    fn = htw_to_fn_variables(apply_transform(catalog("HTW"), named_spec("fabri_htw_fn")))
    out.append(_edge("Fabri HTW -> FN", fn, catalog("FN"), "HTW, FN pairs", t0))
    return out


def perturbed_diagram_rejected() -> Record:
    """Negative control: lifting with kappa1 = theta must break the upper route."""
    t0 = time.perf_counter()
    res = diagram_check(upper_route("theta"), lower_route(), catalog("JM2"))
    return symbolic("negative control: perturbed lift is rejected", not bool(res), "both routes",
                    [res.reason], {}, time.perf_counter() - t0)
