"""The population lower bound and two cases with known answers.

With g = max over two independent unit-variance means that tie at the truth,
no estimator does better than the variance itself: the bound is 1 with c* = 0.
For an affine g the bound is the variance of the linear combination.
"""

import numpy as np

from lamx import BoundSpec, KinkMap, Loss, linear_map, max_map, minimax_bound

ident = KinkMap.make_identity()
res = minimax_bound(BoundSpec(max_map(2), ident, (0.0, 0.0), np.eye(2), Loss.power(2.0)))
print(f"max, Sigma = I : bound {res.value:.3f} (se {res.se:.3f}), c* = {res.c_star:+.3f}")

s = np.array([0.3, 0.7])
sigma = np.array([[2.0, 0.5], [0.5, 4.0]])
res = minimax_bound(BoundSpec(linear_map(s), ident, (0.0, 0.0), sigma, Loss.power(2.0)))
print(f"affine         : bound {res.value:.3f}, exact {s @ sigma @ s:.3f}, c* = {res.c_star:+.3f}")

# A kink in f at the truth multiplies the squared-error bound by the larger slope squared.
f = KinkMap(2.0, 0.5, 0.0, 0.0)
res = minimax_bound(BoundSpec(linear_map([1.0]), f, (0.0,), [[1.0]], Loss.power(2.0)))
print(f"kinked f       : slope scale {res.s}, bound {res.value:.3f}")
