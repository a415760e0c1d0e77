"""Stokes multipliers of the JM2 system, their t-independence and the Airy case."""

import numpy as np

from painleve_lax.numerics import P2State, airy_stokes, integrate_p2, stokes_matrices
from painleve_lax.numerics.stokes import formal_monodromy

for theta in (0.5, 0.25):
    s1 = integrate_p2(P2State.default(theta), 1.0)
    sd = stokes_matrices(s1)
    print(f"theta={theta}")
    for n, s in enumerate(sd.s, 1):
        print(f"   s_{n} = {s:.10f}")
    P = np.linalg.multi_dot(sd.matrices)
    print("   S1...S6 =\n", np.round(P, 10))
    print("   exp(-2 pi i theta sigma3) =\n", np.round(formal_monodromy(theta), 10))

    # t-independence along the P2 flow
    sd2 = stokes_matrices(integrate_p2(s1, 1.5))
    print("   drift to t=1.5:", max(abs(a - b) for a, b in zip(sd.s, sd2.s)))

# theta = 0 with z = 0: A is triangular and the multipliers are Airy integrals
s0 = integrate_p2(P2State.default(0.0), 1.0)
num = stokes_matrices(s0).s
ref = airy_stokes(s0)
for n, (a, b) in enumerate(zip(num, ref), 1):
    print(f"s_{n}: ode {a:.12f}  airy {b:.12f}")
