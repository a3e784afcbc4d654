"""The simulated worst-case risk surface and the bias constant.

For each candidate bias constant c the surface records the worst risk over
local shifts r.  The adjustment c_hat is the midpoint of the set of c
values whose risk is within eta of the minimum.
"""

import numpy as np

from lamx import BiasConfig, Loss, c_hat, max_map

sigma_hat = np.array([[2.0, 0.5], [0.5, 4.0]])
beta_hat = np.array([0.0, 0.05])
n = 300

res = c_hat(1.0, max_map(2), Loss.power(2.0), beta_hat, sigma_hat, n, BiasConfig(L=1000))

print(f"eps_n = {res.eps_n:.3f}, eta = {res.eta:.3f}")
print(f"near-minimisers: [{res.E_hat_lo:.2f}, {res.E_hat_hi:.2f}] -> c_hat = {res.c_hat:.3f}")
print(f"minimal worst-case risk {res.B_min:.3f}; worst shift at the minimum {res.argsup_r}")

# A coarse text plot of the surface near its minimum.
keep = np.abs(res.c_values) <= 3
for c, b, inside in zip(res.c_values[keep][::10], res.b_values[keep][::10],
                        res.in_E_hat[keep][::10]):
    print(f"c={c:+5.2f} {'*' if inside else ' '} {'#' * int(6 * b)}")
