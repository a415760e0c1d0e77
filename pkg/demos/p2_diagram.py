"""Both routes from JM2 to HTW, and what each route does to the solution."""

from painleve_lax.pairs import catalog
from painleve_lax.transforms import diagram_check, lower_route, upper_route

res = diagram_check(upper_route(), lower_route(), catalog("JM2"))

for label, route in (("upper", res.route_a), ("lower", res.route_b)):
    print(f"-- {label} route")
    for e in route.edges:
        print(f"   {e.label:45s} {'ok' if e.ok else ('lift' if e.ok is None else 'MISMATCH')}")

print("same end pair:", res.route_a.pair == res.route_b.pair == catalog("HTW"))

# each route also builds the integral kernel taking a JM2 solution to an HTW solution
for label, route in (("upper", res.route_a), ("lower", res.route_b)):
    q, M = route.kernel.normal_form()
    print(label, "kernel: exp(", route.kernel.f, ") * mu^(", q, ") *", M.to_lines())
print("commutes:", bool(res))

# lifting with the wrong kappa1 breaks the square
bad = diagram_check(upper_route("theta"), lower_route(), catalog("JM2"))
print("perturbed lift:", bad.reason)
