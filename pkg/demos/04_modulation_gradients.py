"""Spatially-adaptive modulation and a finite-difference check of its gradients."""
import numpy as np

from patchwarp.fixtures import random_conv_params
from patchwarp.modulation import AffineParams, affine_from_features, channel_stats, spade_backward, spade_modulate
from patchwarp.oracles import central_difference
from patchwarp.selfcheck import relative_error

rng = np.random.default_rng(0)
h = rng.normal(3.0, 2.0, size=(8, 16, 16)).astype(np.float32)
mu, sigma = channel_stats(h)
print("per-channel mean ", np.round(mu, 3))
print("per-channel sigma", np.round(sigma, 3))

# gamma = 1, beta = 0 leaves a standardised map
out = spade_modulate(h, AffineParams(np.ones_like(h), np.zeros_like(h)), eps=0.0)
m2, s2 = channel_stats(out)
print("after: |mu| max", float(np.abs(m2).max()), " |sigma-1| max", float(np.abs(s2 - 1).max()))

# gamma and beta from 3x3 convolutions of a garment feature
f_g = rng.normal(size=(4, 16, 16)).astype(np.float32)
params = affine_from_features(f_g, random_conv_params(4, 8, 3, seed=1), random_conv_params(4, 8, 3, seed=2))
y = spade_modulate(h, params)
print("modulated", y.shape, y.dtype)

# analytic vs numerical gradient on a small float64 case
h, g, b, up = (rng.normal(size=(2, 4, 4)) for _ in range(4))
gh, gg, gb = spade_backward(h, AffineParams(g, b), 1e-5, up)
num = central_difference(lambda x: float((up * spade_modulate(x, AffineParams(g, b), 1e-5)).sum()), h)
print("grad_h relative error:", relative_error(gh, num))
print("grad_beta == upstream:", np.array_equal(gb, up))
