"""
Sampling von Mises-Fisher directions
====================================

Draw from vMF distributions of increasing concentration and compare the
average cosine to the mean direction against the Bessel-ratio prediction.
"""

import numpy as np

from sphere_sne import log_norm_const, mean_resultant_length, sample_uniform_sphere, sample_vmf

d = 50
mu = sample_uniform_sphere(d, 1, seed=0)[0]

# larger kappa pulls samples toward mu; A_d(kappa) is the expected cosine
print(f"{'kappa':>8} {'mean cos':>10} {'A_d(kappa)':>11} {'ln C_d':>10}")
for kappa in (1.0, 10.0, 40.0, 200.0):
    x = sample_vmf(mu, kappa, 5000, seed=1)
    cos = x @ mu
    print(f"{kappa:8g} {cos.mean():10.4f} {mean_resultant_length(d, kappa):11.4f} "
          f"{log_norm_const(d, kappa):10.3f}")

# the normalizer stays finite far past where I_nu itself overflows
print("ln C_50(1e5) =", log_norm_const(d, 1e5))
