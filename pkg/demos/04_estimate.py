"""Estimating max(beta1, beta2) from one sample, against the bias-reduced rivals."""

import numpy as np

from lamx import (
    BiasConfig,
    KinkMap,
    Loss,
    Sample,
    estimate_fixed_bias,
    estimate_minimax,
    estimate_selective_bias,
    max_map,
)
from lamx.sampling import make_rng, mvn_sample

n = 300
truth = np.array([0.0, 0.0])
x = mvn_sample(truth, [[2.0, 0.5], [0.5, 4.0]], n, make_rng(1))
sample = Sample(x)

rep = estimate_minimax(sample, max_map(2), KinkMap.make_identity(), Loss.power(2.0),
                       BiasConfig(L=1000))
print(f"plug-in        {rep.plug_in:+.4f}")
print(f"minimax        {rep.theta_hat:+.4f}  (c_hat = {rep.c_hat:+.3f})")
print(f"fixed bias     {estimate_fixed_bias(sample, L=1000, seed=0):+.4f}")
print(f"selective bias {estimate_selective_bias(sample, L=1000, seed=0):+.4f}")
print(f"truth          {truth.max():+.4f}")
