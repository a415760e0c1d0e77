"""Walk the P1 diagram: JKT1 -> dJKT1 -> JM1 -> scalar G1."""

from painleve_lax.pairs import catalog, compatibility_residual, scalar_reduce
from painleve_lax.symcore import parse
from painleve_lax.transforms import apply_reduction, laplace

# the 3x3 pair in lam, linear in lam, so the Laplace transform applies
jkt1 = catalog("JKT1")
print(jkt1.R)
print("compatible:", compatibility_residual(jkt1).is_zero())

# its image in mu has a singular L (det L = 0)
d = laplace(jkt1, "inverse")
print(d.L)
print("det L =", d.L.det(), "| equals dJKT1:", d == catalog("dJKT1"))

# the constraint row lets us drop a component and land on the 2x2 JM1 pair
jm1, relation = apply_reduction(d, "reduce_djkt1")
print("relation:", relation)
print("equals JM1:", jm1 == catalog("JM1"))

# one more step: a scalar equation in lam for the second component
g1 = scalar_reduce(jm1, 2, parse("lam - y"))
print("potential:", g1.potential)
