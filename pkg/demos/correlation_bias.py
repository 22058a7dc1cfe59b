"""Where the independence assumption goes wrong, and two ways to patch it.

1. Two correlated neurons: negative correlation makes the independent
   prediction optimistic, positive correlation pessimistic.
2. A fitted line over random sub-problems corrects a network's bias.
3. Without any activations, noisy copies of the readout filters still
   rank networks.

Run: python demos/correlation_bias.py
"""

import numpy as np

from perceptor.analysis import (compensate, empirical_accuracy, fit_bias_line, kendall_tau,
                                noise_sweep, subproblem_scatter)
from perceptor.stats import ActivationSet, ReadoutPerceptron, compute_sums, estimate_moments
from perceptor.synth import sweep_surface
from perceptor.theory import predict

print("mu=1, sigma=1")
for _, _, rho, eq2, closed, emp, se in sweep_surface([1.0], [1.0], [-0.9, -0.3, 0.0, 0.3, 0.9],
                                                     samples=200_000):
    print(f"  rho={rho:+.1f}  empirical {emp:.4f}  independent {eq2:.4f}  exact {closed:.4f}")

# a 12-class toy network with positively correlated sums
rng = np.random.default_rng(0)
d = 12
cov = np.full((d, d), 0.5) + 0.5 * np.eye(d)
means = rng.uniform(0.8, 2.0, d)
acts = ActivationSet.from_groups(
    [rng.multivariate_normal(means[i] * np.eye(d)[i], cov, 300) for i in range(d)])
w = ReadoutPerceptron(np.eye(d))
rows = subproblem_scatter(acts, w, [2, 4, 8], count=20, seed=1, network="toy")
line = fit_bias_line([r[0] for r in rows], [r[1] for r in rows])
full = predict(estimate_moments(compute_sums(acts, w)), "eq2").aggregate
print(f"full problem: predicted {full:.3f}, compensated {compensate(full, line):.3f}, "
      f"actual {empirical_accuracy(acts, w)[1]:.3f}")

# readout-only ranking of networks with increasingly distinct filters
readouts, truth = [], []
for spread in (0.2, 0.4, 0.7, 1.0, 1.5):
    base = rng.normal(size=50)
    f = base + spread * rng.normal(size=(8, 50))
    f /= np.linalg.norm(f, axis=1, keepdims=True)
    readouts.append(ReadoutPerceptron(f))
    truth.append(spread)
sweep = noise_sweep(readouts, np.arange(-10, 31, 5), reps=20, experiments=3)
k = int(np.flatnonzero(sweep.db == sweep.selected_db)[0])
ranked = sweep.predictions.mean(axis=0)[k]
print("selected noise level", sweep.selected_db, "dB; rank agreement tau =",
      round(kendall_tau(ranked, truth), 3))
