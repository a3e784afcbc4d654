"""Equivariant maps and their directional derivatives.

The max of two means is not differentiable where the means tie.  Its
one-sided directional derivative still exists, and it is again a map of the
same kind.  This script shows the derivative changing with the point of
evaluation, and the data-driven approximation converging to it.
"""

import numpy as np

from lamx import dderiv, gn_hat, max_map, parse_gmap

g = max_map(2)
z = np.array([1.0, -0.5])

# At a tie both coordinates are active, so the derivative is max(z1, z2).
# Away from the tie only the larger coordinate counts.
for point in ([0.0, 0.0], [0.0, 0.2], [0.2, 0.0]):
    print(f"g'({point}; {z}) = {float(dderiv(g, point, z)):+.2f}")

# Derivatives of nested maps are maps too: prune the inactive branches.
h = parse_gmap("max(min(x1, x2), affine(0.5*x3, 0.5*x1))")
x = np.array([1.0, 1.0, 3.0])
print("\nh =", h)
print("derivative map of h at", x, "=", h.derivative_map(x))

# The true parameter is unknown.  gn_hat replaces the derivative at the truth
# with a finite difference at the estimate, with step eps.  At a separated
# estimate it matches the derivative once eps is small.
beta_hat = np.array([0.0, 0.03])
zs = np.outer(np.linspace(-1, 1, 5), [-2.0, 2.0])
for eps in (1e-1, 1e-2, 1e-3):
    err = np.max(np.abs(gn_hat(g, beta_hat, eps, zs) - dderiv(g, beta_hat, zs)))
    print(f"eps={eps:g}: max |gn_hat - derivative| = {err:.3g}")
