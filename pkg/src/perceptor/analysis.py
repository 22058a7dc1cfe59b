"""Diagnostics around the independent-Gaussian predictor.

Covers sub-problem sampling with linear bias compensation, ranking metrics,
the average-correlation diagnostic and prediction from the readout weights
alone (white-noise surrogates of the hidden activations).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, NumericalError
from .stats import (ActivationSet, ReadoutPerceptron, avg_correlation, compute_sums,
                    estimate_moments)
from .theory import PredictionReport, predict


@dataclass(frozen=True)
class SubProblem:
    class_indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.class_indices)
        if len(idx) < 2:
            raise InputError("a sub-problem needs at least two classes")
        if len(set(idx)) != len(idx):
            raise InputError("sub-problem classes must be distinct")
        object.__setattr__(self, "class_indices", tuple(sorted(idx)))

    @property
    def size(self) -> int:
        return len(self.class_indices)


def random_subproblem(n_classes: int, size: int, rng: np.random.Generator) -> SubProblem:
    if not 2 <= size <= n_classes:
        raise InputError(f"sub-problem size must lie in [2, {n_classes}]")
    return SubProblem(tuple(rng.choice(n_classes, size=size, replace=False)))


def restrict(acts: ActivationSet, readout: ReadoutPerceptron,
             sub: SubProblem) -> tuple[ActivationSet, ReadoutPerceptron]:
    """Keep only the classes in ``sub`` (samples and filters), relabelled densely."""
    idx = np.array(sub.class_indices)
    if idx.max() >= readout.n_classes:
        raise InputError(f"class index {idx.max()} out of range")
    remap = np.full(readout.n_classes, -1)
    remap[idx] = np.arange(len(idx))
    keep = remap[acts.labels] >= 0
    sub_acts = ActivationSet(acts.vectors[keep], remap[acts.labels[keep]], len(idx))
    bias = None if readout.bias is None else readout.bias[idx]
    return sub_acts, ReadoutPerceptron(readout.weights[idx], bias, readout.similarity)


def empirical_accuracy(acts: ActivationSet, readout: ReadoutPerceptron):
    """Winner-take-all accuracy; a tie for the maximum counts as an error.

    Returns ``(per_class, overall)``; classes without samples get NaN.
    """
    s = readout.sums(acts.vectors)
    rows = np.arange(len(s))
    correct = s[rows, acts.labels].copy()
    s[rows, acts.labels] = -np.inf
    hit = correct > s.max(axis=1)
    counts = np.bincount(acts.labels, minlength=acts.n_classes)
    wins = np.bincount(acts.labels, weights=hit, minlength=acts.n_classes)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = np.where(counts > 0, wins / np.maximum(counts, 1), np.nan)
    return per_class, float(hit.mean())


@dataclass(frozen=True)
class BiasLine:
    slope: float
    intercept: float

    def __post_init__(self):
        if not (np.isfinite(self.slope) and np.isfinite(self.intercept)):
            raise InputError("bias line coefficients must be finite")


def fit_bias_line(predicted, actual) -> BiasLine:
    """Ordinary least squares ``actual ~ slope * predicted + intercept``."""
    x = np.asarray(predicted, dtype=float)
    y = np.asarray(actual, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise InputError("need at least two (predicted, actual) pairs")
    xc = x - x.mean()
    sxx = xc @ xc
    if sxx <= 1e-15 * max(1.0, x @ x):
        raise NumericalError("predicted values have no spread; line undefined")
    slope = (xc @ (y - y.mean())) / sxx
    return BiasLine(float(slope), float(y.mean() - slope * x.mean()))


def compensate(pred, line: BiasLine):
    out = np.clip(line.slope * np.asarray(pred, dtype=float) + line.intercept, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def pearson(xs, ys) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise InputError("need two equal-length sequences of length >= 2")
    xc, yc = x - x.mean(), y - y.mean()
    denom = np.sqrt((xc @ xc) * (yc @ yc))
    if denom == 0:
        raise NumericalError("zero variance; correlation undefined")
    return float(np.clip((xc @ yc) / denom, -1.0, 1.0))


def _pair_counts(x, y, block: int = 512):
    """Concordant, discordant, x-only-tied and y-only-tied pair counts."""
    n = len(x)
    conc = disc = tie_x = tie_y = 0
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        dx = np.sign(x[lo:hi, None] - x[None, :])
        dy = np.sign(y[lo:hi, None] - y[None, :])
        upper = np.arange(n)[None, :] > np.arange(lo, hi)[:, None]
        prod = dx * dy
        conc += int(np.count_nonzero((prod > 0) & upper))
        disc += int(np.count_nonzero((prod < 0) & upper))
        tie_x += int(np.count_nonzero((dx == 0) & (dy != 0) & upper))
        tie_y += int(np.count_nonzero((dy == 0) & (dx != 0) & upper))
    return conc, disc, tie_x, tie_y


def kendall_tau(xs, ys) -> float:
    """Tie-corrected Kendall tau-b from exact integer pair counts."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise InputError("need two equal-length sequences of length >= 2")
    conc, disc, tie_x, tie_y = _pair_counts(x, y)
    denom = np.sqrt((conc + disc + tie_x) * (conc + disc + tie_y))
    if denom == 0:
        raise NumericalError("a constant sequence has no ranking; tau undefined")
    return float((conc - disc) / denom)


def subproblem_scatter(acts: ActivationSet, readout: ReadoutPerceptron, sizes: Sequence[int],
                       count: int = 40, seed: int = 0, network: str = "net",
                       method: str = "eq2") -> list[tuple]:
    """``(predicted, actual, size, network)`` for random class subsets.

    Both accuracies weight the included classes uniformly.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for size in sizes:
        for _ in range(count):
            sub = random_subproblem(readout.n_classes, size, rng)
            a, w = restrict(acts, readout, sub)
            stats = estimate_moments(compute_sums(a, w), priors="uniform")
            pred = predict(stats, method, samples=20_000, seed=seed).aggregate
            actual = float(np.nanmean(empirical_accuracy(a, w)[0]))
            rows.append((pred, actual, size, network))
    return rows


def bias_vs_correlation(networks: Sequence[tuple]) -> np.ndarray:
    """Rows ``(accuracy - eq2 prediction, average correlation)`` per network.

    ``networks`` holds ``(ActivationSet, ReadoutPerceptron)`` pairs.
    """
    out = []
    for acts, readout in networks:
        stats = estimate_moments(compute_sums(acts, readout))
        pred = predict(stats, "eq2").aggregate
        actual = empirical_accuracy(acts, readout)[1]
        out.append((actual - pred, avg_correlation(stats)))
    return np.array(out)


def noise_scale(filters: np.ndarray, noise_db: float) -> np.ndarray:
    """Per-filter white-noise std giving ``10 log10(|w|^2 / E|n|^2) = noise_db``."""
    power = np.sum(filters ** 2, axis=1)
    return np.sqrt(power / (filters.shape[1] * 10.0 ** (noise_db / 10.0)))


def readout_only_predict(readout: ReadoutPerceptron, noise_db: float, reps: int = 50,
                         seed: int = 0, method: str = "eq2",
                         noise: np.ndarray | None = None) -> PredictionReport:
    """Predict accuracy from the readout alone using noisy copies of its filters.

    Each filter is disturbed ``reps`` times; the disturbed copies stand in for
    the hidden activations of that filter's class.  ``noise`` may supply the
    unit-variance perturbations (shape ``(D, reps, N)``) directly.
    """
    if reps < 2:
        raise InputError("need at least 2 repetitions")
    w = readout.weights
    if np.any(np.linalg.norm(w, axis=1) == 0):
        raise InputError("zero-norm filter")
    d, n = w.shape
    if noise is None:
        noise = np.random.default_rng(seed).standard_normal((d, reps, n))
    scale = noise_scale(w, noise_db)
    surrogates = w[:, None, :] + scale[:, None, None] * noise
    acts = ActivationSet(surrogates.reshape(d * reps, n), np.repeat(np.arange(d), reps), d)
    stats = estimate_moments(compute_sums(acts, readout), priors="uniform")
    report = predict(stats, method, seed=seed)
    report.diagnostics["noise_db"] = float(noise_db)
    report.diagnostics["reps"] = int(reps)
    return report


@dataclass
class NoiseSweep:
    db: np.ndarray
    predictions: np.ndarray  # (experiments, levels, networks)
    mean_std: np.ndarray
    selected_db: float | None


def noise_sweep(readouts: Sequence[ReadoutPerceptron], db_grid, reps: int = 50,
                experiments: int = 10, seed: int = 0) -> NoiseSweep:
    """Mean (over experiments) spread of readout-only predictions per noise level.

    The selected level maximises that spread; ties go to the lower level and
    a single readout leaves the selection undefined.  Within one experiment
    the same perturbations are reused across levels.
    """
    db = np.asarray(db_grid, dtype=float)
    preds = np.empty((experiments, len(db), len(readouts)))
    for e in range(experiments):
        for r, w in enumerate(readouts):
            rng = np.random.default_rng(np.random.SeedSequence([seed, e, r]))
            z = rng.standard_normal((w.n_classes, reps, w.dim))
            for k, level in enumerate(db):
                preds[e, k, r] = readout_only_predict(w, level, reps, noise=z).aggregate
    mean_std = preds.std(axis=2).mean(axis=0)
    selected = None
    if len(readouts) > 1 and np.max(mean_std) > 0:
        selected = float(db[np.flatnonzero(mean_std == mean_std.max())].min())
    return NoiseSweep(db, preds, mean_std, selected)
