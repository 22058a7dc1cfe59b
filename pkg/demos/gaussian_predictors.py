"""How the three Gaussian predictors relate on hand-built statistics.

Run: python demos/gaussian_predictors.py
"""

import numpy as np
from scipy.stats import norm

from perceptor.stats import MomentStats
from perceptor.theory import (SharedDistractorStats, predict_eq1, predict_eq2,
                              predict_eq3_mc)

# Two classes: the shared-distractor integral has a closed form.
s = SharedDistractorStats(mu_h=1.0, sigma_h=1.0, mu_r=0.0, sigma_r=1.0, n_classes=2)
print("two classes, gap 1:", round(predict_eq1(s), 6), "closed form", round(norm.cdf(2 ** -0.5), 6))

# More distractors make the same gap harder to win.
for d in (2, 5, 20, 100, 1000):
    s = SharedDistractorStats(2.0, 1.0, 0.0, 1.0, d)
    print(f"  D={d:5d}  accuracy {predict_eq1(s):.4f}")

# Per-neuron moments: one strong competitor dominates the error.
mu = np.array([[2.0, 1.8, 0.0, 0.0]])
sigma = np.array([[1.0, 1.0, 1.0, 1.0]])
cov = np.diag(sigma[0] ** 2)[None]
ms = MomentStats(mu, sigma, cov, [1.0], [1000])
print("independent neurons:", round(predict_eq2(ms, 0), 4))

# Correlated sums: the independent model misses what the covariance knows.
for rho in (-0.3, 0.0, 0.5, 0.9):
    c = np.full((4, 4), rho) + np.eye(4) * (1 - rho)
    ms_c = MomentStats(mu, sigma, c[None], [1.0], [1000])
    a, se = predict_eq3_mc(ms_c, 0, 400_000, seed=1)
    print(f"  rho={rho:+.1f}  full covariance {a:.4f} +- {se:.4f}"
          f"  independent {predict_eq2(ms_c, 0):.4f}")
