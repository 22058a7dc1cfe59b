"""Shallow randomly connected classifiers (RVFL style) with two readouts.

The encoder is a fixed random projection followed by the clipping
nonlinearity; only the readout is trained, either as class centroids
(superposition of the encoded training samples) or by ridge regression on
one-hot targets.  The encoder is a generic stand-in: all downstream theory
is encoder-agnostic.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from sklearn.model_selection import StratifiedKFold

from .analysis import empirical_accuracy
from .errors import InputError
from .io import bundled_path, read_labeled
from .stats import (ActivationSet, MomentStats, ReadoutPerceptron, SumSamples,
                    compute_sums, estimate_moments, fit_ridge, one_hot)
from .theory import predict

Readout = Literal["centroid", "ridge"]

BUNDLED = ("iris", "wine", "breast_cancer", "digits")

#: hyperparameter grid used for the full search
GRID_N = tuple(range(50, 1501, 50))
GRID_LAMBDA = tuple(2.0 ** k for k in range(-10, 6))
GRID_KAPPA = (1, 3, 5, 7)


def minmax_normalize(x: np.ndarray) -> np.ndarray:
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (x - lo) / span


@dataclass(frozen=True)
class Dataset:
    name: str
    features: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2 or len(x) != len(y):
            raise InputError("features must be M x F with one label per row")
        if x.min() < 0 or x.max() > 1:
            raise InputError("features must be normalised to [0, 1]")
        if y.min() < 0 or y.max() >= self.n_classes:
            raise InputError("labels out of range")
        if np.any(np.bincount(y, minlength=self.n_classes) == 0):
            raise InputError("every class must be present")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @classmethod
    def from_raw(cls, name: str, features, labels) -> "Dataset":
        labels = np.asarray(labels, dtype=np.int64)
        # relabel densely so absent label values do not create empty classes
        uniq, dense = np.unique(labels, return_inverse=True)
        return cls(name, minmax_normalize(np.asarray(features, dtype=float)),
                   dense, len(uniq))


def load_dataset(name_or_path: str) -> Dataset:
    """Load a bundled dataset by name or any ``label,f1,...,fF`` file."""
    if name_or_path in BUNDLED:
        path = bundled_path(name_or_path)
    else:
        path = Path(name_or_path)
    x, y = read_labeled(path)
    return Dataset.from_raw(Path(path).stem, x, y)


def make_blobs(n_per_class: int = 100, n_classes: int = 2, n_features: int = 2,
               separation: float = 5.0, spread: float = 1.0, seed: int = 0) -> Dataset:
    """Isotropic Gaussian blobs with centres ``separation`` apart on average."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(n_classes, n_features))
    centers *= separation / max(np.linalg.norm(centers[0] - centers[-1]), 1e-12)
    x = np.vstack([c + spread * rng.normal(size=(n_per_class, n_features)) for c in centers])
    y = np.repeat(np.arange(n_classes), n_per_class)
    return Dataset.from_raw(f"blobs{n_classes}x{n_features}", x, y)


@dataclass(frozen=True)
class EncoderConfig:
    n: int = 200
    kappa: float = 3
    seed: int = 0

    def __post_init__(self):
        if not 50 <= self.n <= 1500:
            raise InputError("N must lie in [50, 1500]")
        if self.kappa <= 0:
            raise InputError("kappa must be positive")


class RandomEncoder:
    """``h = clip(W_in x + b, -kappa, kappa)`` with uniform random ``W_in`` and ``b``."""

    def __init__(self, cfg: EncoderConfig, n_features: int):
        rng = np.random.default_rng(cfg.seed)
        self.kappa = cfg.kappa
        self.w_in = rng.uniform(-1.0, 1.0, size=(cfg.n, n_features))
        self.bias = rng.uniform(-cfg.kappa, cfg.kappa, size=cfg.n)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.clip(x @ self.w_in.T + self.bias, -self.kappa, self.kappa)


def encode(cfg: EncoderConfig, x) -> np.ndarray:
    """Encode one feature row (or a batch) with the encoder defined by ``cfg``."""
    x = np.asarray(x, dtype=float)
    h = RandomEncoder(cfg, x.shape[-1])(x)
    return h[0] if x.ndim == 1 else h


def centroid_readout(h: np.ndarray, labels, n_classes: int) -> ReadoutPerceptron:
    """Row ``i`` is the superposition of all encoded samples of class ``i``."""
    labels = np.asarray(labels)
    counts = np.bincount(labels, minlength=n_classes)
    if np.any(counts == 0):
        raise InputError(f"classes {np.flatnonzero(counts == 0).tolist()} have no samples")
    w = one_hot(labels, n_classes).T @ h
    return ReadoutPerceptron(w, similarity="cosine")


def ridge_readout(h: np.ndarray, labels, n_classes: int, lam: float) -> ReadoutPerceptron:
    return ReadoutPerceptron(fit_ridge(h, one_hot(labels, n_classes), lam), similarity="dot")


def _eq2(sums: SumSamples) -> float:
    if np.any(sums.counts < 2):
        return float("nan")
    return predict(estimate_moments(sums), "eq2").aggregate


@dataclass
class CVResult:
    n: int
    lam: float
    kappa: float
    readout: str
    fold_accuracy: np.ndarray
    fold_pred_train: np.ndarray
    fold_pred_test: np.ndarray
    stats_train: MomentStats
    stats_test: MomentStats
    pred_train: float
    pred_test: float

    @property
    def accuracy(self) -> float:
        return float(np.mean(self.fold_accuracy))


def cross_validate(dataset: Dataset, cfg: EncoderConfig, readout: Readout = "ridge",
                   lam: float = 1.0, folds: int = 5) -> CVResult:
    """Stratified k-fold accuracy plus sum statistics from train and test folds.

    Train-fold and test-fold sums are pooled over folds before estimating
    the moments used for the two aggregate predictions.
    """
    if folds < 2:
        raise InputError("need at least 2 folds")
    counts = np.bincount(dataset.labels, minlength=dataset.n_classes)
    if counts.min() < folds:
        raise InputError(f"smallest class has {counts.min()} samples, fewer than {folds} folds")
    if readout not in ("centroid", "ridge"):
        raise InputError(f"unknown readout {readout!r}")
    d = dataset.n_classes
    x, y = dataset.features, dataset.labels
    split_seed = int(np.random.SeedSequence([cfg.seed, 0]).generate_state(1)[0] >> 1)
    skf = StratifiedKFold(n_splits=folds, shuffle=True, random_state=split_seed)
    acc, p_tr, p_te, s_tr, s_te = [], [], [], [], []
    for fold, (tr, te) in enumerate(skf.split(x, y)):
        enc_seed = int(np.random.SeedSequence([cfg.seed, fold + 1]).generate_state(1)[0])
        enc = RandomEncoder(EncoderConfig(cfg.n, cfg.kappa, enc_seed), x.shape[1])
        h_tr, h_te = enc(x[tr]), enc(x[te])
        if readout == "centroid":
            w = centroid_readout(h_tr, y[tr], d)
        else:
            w = ridge_readout(h_tr, y[tr], d, lam)
        test_acts = ActivationSet(h_te, y[te], d)
        acc.append(empirical_accuracy(test_acts, w)[1])
        sums_tr = compute_sums(ActivationSet(h_tr, y[tr], d), w)
        sums_te = compute_sums(test_acts, w)
        s_tr.append(sums_tr)
        s_te.append(sums_te)
        p_tr.append(_eq2(sums_tr))
        p_te.append(_eq2(sums_te))
    stats_tr = estimate_moments(SumSamples.concat(s_tr))
    stats_te = estimate_moments(SumSamples.concat(s_te))
    return CVResult(cfg.n, lam, cfg.kappa, readout, np.array(acc), np.array(p_tr),
                    np.array(p_te), stats_tr, stats_te,
                    predict(stats_tr, "eq2").aggregate, predict(stats_te, "eq2").aggregate)


@dataclass
class GridResult:
    best: tuple
    accuracy: float
    cells: list = field(default_factory=list)


def cell_seed(base: int, n: int, lam_index: int, kappa) -> int:
    ss = np.random.SeedSequence([base, n, lam_index, int(round(float(kappa) * 1000))])
    return int(ss.generate_state(1)[0])


def grid_search(dataset: Dataset, ns: Sequence[int] = GRID_N,
                lambdas: Sequence[float] = GRID_LAMBDA, kappas: Sequence[float] = GRID_KAPPA,
                readout: Readout = "ridge", folds: int = 5, seed: int = 0,
                threads: int = 1) -> GridResult:
    """Exhaustive search; ties go to smaller N, then smaller lambda, then smaller kappa."""
    cells = list(itertools.product(ns, enumerate(lambdas), kappas))
    if not cells:
        raise InputError("empty grid")

    def run(cell):
        n, (li, lam), kappa = cell
        cfg = EncoderConfig(n, kappa, cell_seed(seed, n, li, kappa))
        return cross_validate(dataset, cfg, readout, lam, folds)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]
    best = min(results, key=lambda r: (-r.accuracy, r.n, r.lam, r.kappa))
    return GridResult((best.n, best.lam, best.kappa), best.accuracy, results)
