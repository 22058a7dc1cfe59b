"""Synthetic binary problem with correlated postsynaptic sums.

The correct neuron's sum has mean ``mu``, the other neuron's mean is 0;
both share the standard deviation ``sigma`` and correlate with coefficient
``rho``.  Comparing the empirical accuracy with the independence-assuming
prediction maps how correlation biases that prediction.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import InputError
from .theory import independent_accuracy

DEFAULT_MU = tuple(0.25 * k for k in range(1, 9))
DEFAULT_SIGMA = (0.5, 1.0, 2.0)
DEFAULT_RHO = (-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9)


@dataclass(frozen=True)
class BinaryGaussianSpec:
    mu_correct: float
    sigma: float
    rho: float
    samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise InputError("sigma must be positive")
        if not -1 < self.rho < 1:
            raise InputError("rho must lie strictly inside (-1, 1)")
        if self.samples < 1:
            raise InputError("samples must be positive")


@dataclass(frozen=True)
class BinaryResult:
    empirical: float
    eq2: float
    closed_form: float
    stderr: float


def closed_form_accuracy(mu: float, sigma: float, rho: float) -> float:
    return float(ndtr(mu / np.sqrt(2.0 * sigma ** 2 * (1.0 - rho))))


def simulate_binary(spec: BinaryGaussianSpec, chunk: int = 1 << 20) -> BinaryResult:
    """Sample correlated pairs and count strict wins of the correct neuron."""
    rng = np.random.default_rng(spec.seed)
    # 2x2 Cholesky factor of sigma^2 [[1, rho], [rho, 1]]
    c = np.sqrt(1.0 - spec.rho ** 2)
    wins = 0
    done = 0
    while done < spec.samples:
        m = min(chunk, spec.samples - done)
        z = rng.standard_normal((m, 2))
        correct = spec.mu_correct + spec.sigma * z[:, 0]
        other = spec.sigma * (spec.rho * z[:, 0] + c * z[:, 1])
        wins += int(np.count_nonzero(correct > other))
        done += m
    a = wins / spec.samples
    eq2 = independent_accuracy([spec.mu_correct, 0.0], [spec.sigma, spec.sigma], 0)
    return BinaryResult(a, eq2, closed_form_accuracy(spec.mu_correct, spec.sigma, spec.rho),
                        float(np.sqrt(a * (1.0 - a) / spec.samples)))


def sweep_surface(mu_grid=DEFAULT_MU, sigma_grid=DEFAULT_SIGMA, rho_grid=DEFAULT_RHO,
                  samples: int = 1_000_000, seed: int = 0, threads: int = 1) -> list[tuple]:
    """Full factorial sweep; rows are ``(mu, sigma, rho, eq2, closed_form, empirical, stderr)``."""
    cells = list(itertools.product(mu_grid, sigma_grid, rho_grid))

    def run(k_cell):
        k, (mu, sigma, rho) = k_cell
        cell_seed = int(np.random.SeedSequence([seed, k]).generate_state(1)[0])
        r = simulate_binary(BinaryGaussianSpec(mu, sigma, rho, samples, cell_seed))
        return (float(mu), float(sigma), float(rho), r.eq2, r.closed_form, r.empirical, r.stderr)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(run, enumerate(cells)))
    return [run(c) for c in enumerate(cells)]
