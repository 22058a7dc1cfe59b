"""Accuracy predictors built on Gaussian models of the postsynaptic sums.

Three levels of approximation are provided:

* :func:`predict_eq1` -- one correct neuron against ``D - 1`` identically
  distributed, independent distractors;
* :func:`predict_eq2` -- every neuron has its own mean and variance, still
  independent;
* :func:`predict_eq3_mc` -- full covariance, evaluated by Monte Carlo.

:func:`predict_eq2_kde` swaps the Gaussian marginals of the independent
model for kernel density estimates.  Per-class values are combined with
:func:`aggregate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import InputError, NumericalError
from .quadrature import integrate
from .stats import MomentStats, SumSamples

Method = Literal["eq1", "eq2", "eq3_mc", "eq2_kde"]

_SQRT2PI = np.sqrt(2.0 * np.pi)
# standardised half-width of the integration window; the Gaussian mass
# outside +-10 sigma is ~1.5e-23
_WINDOW = 10.0
_QUAD_TOL = 1e-10


def _phi(t):
    return np.exp(-0.5 * t * t) / _SQRT2PI


@dataclass(frozen=True)
class SharedDistractorStats:
    """Correct-neuron moments plus one pair of moments shared by all distractors."""

    mu_h: float
    sigma_h: float
    mu_r: float
    sigma_r: float
    n_classes: int

    def __post_init__(self):
        vals = (self.mu_h, self.sigma_h, self.mu_r, self.sigma_r)
        if not all(np.isfinite(v) for v in vals):
            raise InputError("distractor statistics must be finite")
        if self.sigma_h <= 0 or self.sigma_r <= 0:
            raise InputError("sigma_h and sigma_r must be positive")
        if self.n_classes < 2:
            raise InputError("need at least two classes")


@dataclass
class PredictionReport:
    per_class: np.ndarray
    aggregate: float
    method: str
    priors: np.ndarray
    mc_samples: int | None = None
    mc_stderr: np.ndarray | None = None
    seed: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "aggregate": float(self.aggregate),
            "per_class": [float(a) for a in self.per_class],
            "priors": [float(f) for f in self.priors],
        }
        if self.mc_samples is not None:
            out["mc_samples"] = int(self.mc_samples)
            out["mc_stderr"] = [float(s) for s in self.mc_stderr]
            out["seed"] = self.seed
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


def predict_eq1(s: SharedDistractorStats) -> float:
    """Probability that the correct neuron beats ``D - 1`` i.i.d. distractors.

    Integrates over the standardised correct-neuron sum ``t``; each
    distractor falls below ``mu_h + sigma_h t`` with probability
    ``Phi((sigma_h t + mu_h - mu_r) / sigma_r)``.
    """
    slope = s.sigma_h / s.sigma_r
    offset = (s.mu_h - s.mu_r) / s.sigma_r
    power = s.n_classes - 1

    def integrand(t):
        return _phi(t) * np.exp(power * log_ndtr(slope * t + offset))

    value, _ = integrate(integrand, -_WINDOW, _WINDOW, tol=_QUAD_TOL)
    return float(np.clip(value, 0.0, 1.0))


def _step_cdf(x, mu_j):
    # point-mass distractor: strictly below x wins
    return (x[:, None] > mu_j[None, :]).astype(float)


def independent_accuracy(mu, sigma, i: int) -> float:
    """Probability that component ``i`` is the strict maximum of independent
    Gaussians ``N(mu_j, sigma_j^2)``; zero ``sigma`` entries are point masses."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if mu.shape != sigma.shape or mu.ndim != 1 or len(mu) < 2:
        raise InputError("mu and sigma must be equal-length vectors with D >= 2")
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
        raise InputError("moments must be finite")
    if np.any(sigma < 0):
        raise InputError("standard deviations must be non-negative")
    others = np.arange(len(mu)) != i
    mu_o, sd_o = mu[others], sigma[others]
    smooth = sd_o > 0
    mu_s, sd_s = mu_o[smooth], sd_o[smooth]
    mu_p = mu_o[~smooth]

    def cdf_product(x):
        log_p = log_ndtr((x[:, None] - mu_s[None, :]) / sd_s[None, :]).sum(axis=1)
        p = np.exp(log_p)
        if mu_p.size:
            p = p * _step_cdf(x, mu_p).prod(axis=1)
        return p

    if sigma[i] == 0:
        return float(cdf_product(np.array([mu[i]]))[0])

    m, s = mu[i], sigma[i]
    # sharp distractor CDFs get explicit panel edges
    sharp = sd_o < 1e-3 * s
    breaks = (mu_o[sharp] - m) / s

    def integrand(t):
        return _phi(t) * cdf_product(m + s * t)

    value, _ = integrate(integrand, -_WINDOW, _WINDOW, tol=_QUAD_TOL,
                         breakpoints=breaks)
    return float(np.clip(value, 0.0, 1.0))


def predict_eq2(stats: MomentStats, i: int) -> float:
    """Independent-Gaussian accuracy of class ``i`` from its per-neuron moments."""
    if np.any(np.isnan(stats.sigma[i])):
        raise InputError(f"class {i} has fewer than two samples; no std available")
    return independent_accuracy(stats.mu[i], stats.sigma[i], i)


def cholesky_factor(cov: np.ndarray) -> np.ndarray:
    if np.trace(cov) == 0:
        return np.zeros_like(cov)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Cholesky factorisation failed after regularisation") from exc


def mc_argmax_frequency(mu, chol, i: int, samples: int, rng, chunk_elems: int = 1 << 22):
    """Fraction of draws ``mu + chol @ z`` whose component ``i`` is the strict max."""
    d = len(mu)
    rows = max(1, chunk_elems // d)
    hits = 0
    done = 0
    while done < samples:
        m = min(rows, samples - done)
        z = rng.standard_normal((m, d)) @ chol.T
        z += mu
        zi = z[:, i].copy()
        z[:, i] = -np.inf
        hits += int(np.count_nonzero(zi > z.max(axis=1)))
        done += m
    return hits / samples


def predict_eq3_mc(stats: MomentStats, i: int, samples: int = 100_000,
                   seed: int | None = 0) -> tuple[float, float]:
    """Monte Carlo accuracy of class ``i`` under ``N(mu_i, Sigma_i)``.

    Returns ``(accuracy, binomial standard error)``.  Ties count as errors.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    if not stats.has_cov(i):
        raise InputError(f"covariance of class {i} unavailable")
    chol = cholesky_factor(stats.cov[i])
    rng = np.random.default_rng(seed)
    a = mc_argmax_frequency(stats.mu[i], chol, i, samples, rng)
    return a, float(np.sqrt(a * (1.0 - a) / samples))


def silverman_bandwidth(x: np.ndarray) -> float:
    return float(1.06 * np.std(x, ddof=1) * len(x) ** -0.2)


def predict_eq2_kde(sums: SumSamples, i: int, bandwidth="auto") -> float:
    """Independent model of class ``i`` with Gaussian-KDE marginals."""
    s = sums.per_class[i]
    if len(s) < 5:
        raise InputError("KDE prediction needs at least 5 samples")
    d = s.shape[1]
    if bandwidth == "auto":
        h = np.array([silverman_bandwidth(s[:, j]) for j in range(d)])
    else:
        h = np.full(d, float(bandwidth))
    if np.any(~(h > 0)):
        raise InputError("KDE bandwidth must be positive")

    centers_i = s[:, i]
    others = np.arange(d) != i
    centers_o = s[:, others]
    h_o = h[others]

    block = max(1, (1 << 21) // (len(s) * d))

    def integrand(x):
        out = np.empty_like(x)
        for k in range(0, len(x), block):
            xb = x[k:k + block]
            dens = _phi((xb[:, None] - centers_i[None, :]) / h[i]).mean(axis=1) / h[i]
            cdf = ndtr((xb[:, None, None] - centers_o[None, :, :]) / h_o).mean(axis=1)
            out[k:k + block] = dens * cdf.prod(axis=1)
        return out

    lo = centers_i.min() - 5 * h[i]
    hi = centers_i.max() + 5 * h[i]
    value, _ = integrate(integrand, lo, hi, tol=1e-9)
    return float(np.clip(value, 0.0, 1.0))


def aggregate(per_class, priors) -> float:
    """Prior-weighted mean of per-class accuracies."""
    a = np.asarray(per_class, dtype=float)
    f = np.asarray(priors, dtype=float)
    if a.shape != f.shape:
        raise InputError("per-class accuracies and priors differ in length")
    if np.any(f < 0) or abs(f.sum() - 1.0) > 1e-12:
        raise InputError("priors must be non-negative and sum to one")
    return float(f @ a)


def shared_stats(stats: MomentStats, i: int) -> SharedDistractorStats:
    """Collapse class ``i``'s distractors into one pooled mean/std pair."""
    others = np.arange(stats.mu.shape[1]) != i
    mu_o = stats.mu[i, others]
    var_o = stats.sigma[i, others] ** 2
    mu_r = mu_o.mean()
    sigma_r = np.sqrt(max(np.mean(var_o + mu_o ** 2) - mu_r ** 2, 0.0))
    return SharedDistractorStats(stats.mu[i, i], stats.sigma[i, i], mu_r, sigma_r,
                                 stats.mu.shape[1])


def predict(stats: MomentStats, method: Method = "eq2", *, sums: SumSamples | None = None,
            samples: int = 100_000, seed: int = 0, bandwidth="auto") -> PredictionReport:
    """Evaluate one predictor for every class and aggregate with the priors.

    Monte Carlo classes use independent streams seeded with ``seed ^ i``.
    """
    n = stats.n_classes
    per_class = np.empty(n)
    stderr = None
    if method == "eq1":
        for i in range(n):
            per_class[i] = predict_eq1(shared_stats(stats, i))
    elif method == "eq2":
        for i in range(n):
            per_class[i] = predict_eq2(stats, i)
    elif method == "eq3_mc":
        stderr = np.empty(n)
        for i in range(n):
            per_class[i], stderr[i] = predict_eq3_mc(stats, i, samples, seed ^ i)
    elif method == "eq2_kde":
        if sums is None:
            raise InputError("KDE prediction needs the raw sum samples")
        for i in range(n):
            per_class[i] = predict_eq2_kde(sums, i, bandwidth)
    else:
        raise InputError(f"unknown method {method!r}")
    return PredictionReport(
        per_class=per_class,
        aggregate=aggregate(per_class, stats.priors),
        method=method,
        priors=np.asarray(stats.priors),
        mc_samples=samples if method == "eq3_mc" else None,
        mc_stderr=stderr,
        seed=seed if method == "eq3_mc" else None,
    )
