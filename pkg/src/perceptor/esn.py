"""Integer echo state network on the trajectory-association task.

The reservoir state is updated as ``x(m) = clip(roll(x(m-1), 1) + phi[s(m)])``
where ``phi`` is a random bipolar codebook and ``clip`` saturates at
``+-kappa``.  A delay-``d`` readout recalls ``s(m - d)`` from ``x(m)``.  Two
readouts are supported: the codebook itself, re-aligned to the delay, and a
ridge regression trained on a separate sequence.  Running the task gives
ground-truth accuracy curves together with the sum statistics that the
predictors in :mod:`perceptor.theory` consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import InputError
from .stats import (ActivationSet, MomentStats, ReadoutPerceptron, Similarity,
                    compute_sums, estimate_moments, fit_ridge, one_hot)
from .theory import SharedDistractorStats, predict


@dataclass(frozen=True)
class EsnConfig:
    n: int = 100
    d: int = 2
    kappa: float = 4
    delays: tuple = tuple(range(11))
    train_len: int = 10_000
    test_len: int = 10_000
    seed: int = 0
    readout: Literal["codebook", "regression"] = "codebook"
    ridge_lambda: float = 0.01
    similarity: Similarity = "cosine"
    amplitudes: tuple | None = None
    mc_samples: int = 20_000

    def __post_init__(self):
        if self.n < 1 or self.d < 2 or self.kappa < 1:
            raise InputError("need n >= 1, d >= 2, kappa >= 1")
        if not self.delays or min(self.delays) < 0:
            raise InputError("delays must be a non-empty list of non-negative ints")
        longest = max(self.delays)
        if self.test_len <= longest or (self.readout == "regression"
                                        and self.train_len <= longest):
            raise InputError("sequence lengths must exceed the largest delay")
        if self.readout not in ("codebook", "regression"):
            raise InputError(f"unknown readout {self.readout!r}")
        if self.ridge_lambda < 0:
            raise InputError("ridge_lambda must be non-negative")
        if self.amplitudes is not None and len(self.amplitudes) != self.d:
            raise InputError("need one amplitude per symbol")


def make_codebook(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``n x d`` matrix of i.i.d. uniform bipolar entries."""
    return (2 * rng.integers(0, 2, size=(n, d)) - 1).astype(float)


def clip(x, kappa):
    return np.clip(x, -kappa, kappa)


def run_memorization(codebook: np.ndarray, sequence, kappa, amplitudes=None) -> np.ndarray:
    """Reservoir states ``x(1..M)`` (one row per step), starting from ``x(0) = 0``."""
    seq = np.asarray(sequence, dtype=np.int64)
    n, d = codebook.shape
    if seq.size and (seq.min() < 0 or seq.max() >= d):
        raise InputError(f"symbols must lie in [0, {d})")
    inputs = codebook.T.copy()
    if amplitudes is not None:
        inputs *= np.asarray(amplitudes, dtype=float)[:, None]
    trace = np.empty((len(seq), n))
    x = np.zeros(n)
    for m, s in enumerate(seq):
        x = np.roll(x, 1)
        x += inputs[s]
        np.clip(x, -kappa, kappa, out=x)
        trace[m] = x
    return trace


def codebook_readout(codebook: np.ndarray, delay: int,
                     similarity: Similarity = "cosine") -> ReadoutPerceptron:
    """Codebook filters rolled ``delay`` steps so that they line up with the
    contribution that symbol made to the state ``delay`` steps ago."""
    if delay < 0:
        raise InputError("delay must be non-negative")
    return ReadoutPerceptron(np.roll(codebook, delay, axis=0).T, similarity=similarity)


def delay_pairs(trace: np.ndarray, sequence, delay: int):
    """States ``x(m)`` paired with the symbols ``s(m - delay)`` they should recall."""
    seq = np.asarray(sequence)
    return trace[delay:], seq[:len(seq) - delay]


def regression_readout(states: np.ndarray, sequence, delay: int, lam: float,
                       n_classes: int, similarity: Similarity = "cosine") -> ReadoutPerceptron:
    """Ridge regression from states onto one-hot delayed symbols."""
    x, y = delay_pairs(states, sequence, delay)
    w = fit_ridge(x, one_hot(y, n_classes), lam)
    return ReadoutPerceptron(w, similarity=similarity)


def recall_accuracy(readouts: Sequence[ReadoutPerceptron], delays, trace, sequence) -> np.ndarray:
    """Fraction of strictly-correct recalls per delay (ties are errors)."""
    out = np.empty(len(delays))
    for k, (w, d) in enumerate(zip(readouts, delays)):
        x, y = delay_pairs(trace, sequence, d)
        sums = w.sums(x)
        correct = sums[np.arange(len(y)), y]
        sums[np.arange(len(y)), y] = -np.inf
        out[k] = np.mean(correct > sums.max(axis=1))
    return out


def extract_esn_stats(trace, sequence, readout: ReadoutPerceptron, delay: int,
                      n_classes: int | None = None) -> tuple[MomentStats, SharedDistractorStats]:
    """Per-class moments and pooled hit/reject moments of the delay readout."""
    d = readout.n_classes if n_classes is None else n_classes
    x, y = delay_pairs(trace, sequence, delay)
    acts = ActivationSet(x, y, d)
    sums = readout.sums(x)
    mask = one_hot(y, d).astype(bool)
    hits, rejects = sums[mask], sums[~mask]
    shared = SharedDistractorStats(hits.mean(), hits.std(ddof=1), rejects.mean(),
                                   rejects.std(ddof=1), d)
    return estimate_moments(compute_sums(acts, readout)), shared


@dataclass
class EsnCurves:
    """Per-delay curves averaged over seeds."""

    delays: np.ndarray
    empirical: np.ndarray
    eq1: np.ndarray
    eq2: np.ndarray
    eq3_mc: np.ndarray
    stderr: np.ndarray
    per_seed: dict = field(default_factory=dict)

    def rows(self):
        for k, d in enumerate(self.delays):
            yield (int(d), self.empirical[k], self.eq1[k], self.eq2[k],
                   self.eq3_mc[k], self.stderr[k])


def run_trial(cfg: EsnConfig, seed: int, methods=("eq1", "eq2", "eq3_mc")) -> dict:
    """One simulation: fresh codebook and sequences, every delay evaluated."""
    code_rng, seq_rng, mc_seq = np.random.SeedSequence(seed).spawn(3)
    rng = np.random.default_rng(code_rng)
    codebook = make_codebook(cfg.n, cfg.d, rng)
    srng = np.random.default_rng(seq_rng)
    test_seq = srng.integers(0, cfg.d, cfg.test_len)
    test_trace = run_memorization(codebook, test_seq, cfg.kappa, cfg.amplitudes)
    delays = list(cfg.delays)
    if cfg.readout == "codebook":
        readouts = [codebook_readout(codebook, d, cfg.similarity) for d in delays]
    else:
        train_seq = srng.integers(0, cfg.d, cfg.train_len)
        train_trace = run_memorization(codebook, train_seq, cfg.kappa, cfg.amplitudes)
        readouts = [regression_readout(train_trace, train_seq, d, cfg.ridge_lambda,
                                       cfg.d, cfg.similarity) for d in delays]
    nd = len(delays)
    res = {"empirical": recall_accuracy(readouts, delays, test_trace, test_seq),
           "eq1": np.full(nd, np.nan), "eq2": np.full(nd, np.nan),
           "eq3_mc": np.full(nd, np.nan), "stderr": np.full(nd, np.nan)}
    mc_seed = int(mc_seq.generate_state(1)[0])
    for k, d in enumerate(delays):
        stats, _ = extract_esn_stats(test_trace, test_seq, readouts[k], d, cfg.d)
        if "eq1" in methods:
            # per true class: its hit moments against its pooled distractors
            res["eq1"][k] = predict(stats, "eq1").aggregate
        if "eq2" in methods:
            res["eq2"][k] = predict(stats, "eq2").aggregate
        if "eq3_mc" in methods:
            rep = predict(stats, "eq3_mc", samples=cfg.mc_samples, seed=mc_seed + k)
            res["eq3_mc"][k] = rep.aggregate
            res["stderr"][k] = np.sqrt(np.sum((rep.priors * rep.mc_stderr) ** 2))
    return res


def run_esn(cfg: EsnConfig, seeds: int | Sequence[int],
            methods=("eq1", "eq2", "eq3_mc"), threads: int = 1) -> EsnCurves:
    """Average :func:`run_trial` over several seeds derived from ``cfg.seed``."""
    if isinstance(seeds, int):
        seeds = [cfg.seed + k for k in range(seeds)]
    seeds = list(seeds)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as pool:
            trials = list(pool.map(lambda s: run_trial(cfg, s, methods), seeds))
    else:
        trials = [run_trial(cfg, s, methods) for s in seeds]
    stacked = {key: np.array([t[key] for t in trials]) for key in trials[0]}
    n = len(trials)
    return EsnCurves(
        delays=np.array(cfg.delays),
        empirical=stacked["empirical"].mean(axis=0),
        eq1=stacked["eq1"].mean(axis=0),
        eq2=stacked["eq2"].mean(axis=0),
        eq3_mc=stacked["eq3_mc"].mean(axis=0),
        stderr=np.sqrt((stacked["stderr"] ** 2).sum(axis=0)) / n,
        per_seed=stacked,
    )
