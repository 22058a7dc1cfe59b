"""Postsynaptic-sum statistics of a dense readout layer.

A classifier ending in a dense layer is split into an encoder, which
produces an N-dimensional activation vector per input, and a readout
perceptron holding one linear filter per class.  Everything the accuracy
predictors need is summarised by the distribution of the readout's
postsynaptic sums, grouped by the true class of the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.linalg

from .errors import InputError, NumericalError

Similarity = Literal["dot", "cosine"]

#: relative eigenvalue floor used when regularising class covariances
PSD_JITTER = 1e-10


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ActivationSet:
    """Last-hidden-layer activations with their true class labels.

    ``vectors`` is an ``(M, N)`` array, ``labels`` holds the class index of
    every row and ``n_classes`` is the number of output neurons ``D``.
    """

    vectors: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        vectors = _frozen(self.vectors)
        labels = _frozen(self.labels, dtype=np.int64)
        if vectors.ndim != 2:
            raise InputError(f"activations must be 2-D, got shape {vectors.shape}")
        if labels.shape != (vectors.shape[0],):
            raise InputError("need exactly one label per activation vector")
        if self.n_classes < 1:
            raise InputError("n_classes must be positive")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise InputError(f"labels must lie in [0, {self.n_classes})")
        if not np.all(np.isfinite(vectors)):
            raise InputError("activations contain non-finite values")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_groups(cls, groups: Sequence[np.ndarray]) -> "ActivationSet":
        """Build from one ``(M_i, N)`` array per class."""
        groups = [np.atleast_2d(np.asarray(g, dtype=float)) for g in groups]
        labels = np.concatenate([np.full(len(g), i) for i, g in enumerate(groups)])
        return cls(np.vstack(groups), labels, len(groups))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def of_class(self, i: int) -> np.ndarray:
        return self.vectors[self.labels == i]


@dataclass(frozen=True)
class ReadoutPerceptron:
    """Dense output layer viewed as ``D`` linear filters (rows of ``weights``)."""

    weights: np.ndarray
    bias: np.ndarray | None = None
    similarity: Similarity = "dot"

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 2 or w.shape[0] < 2 or w.shape[1] < 1:
            raise InputError(f"weights must be D x N with D >= 2, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InputError("weights contain non-finite values")
        if self.similarity not in ("dot", "cosine"):
            raise InputError(f"unknown similarity {self.similarity!r}")
        if self.similarity == "cosine" and np.any(np.linalg.norm(w, axis=1) == 0):
            raise InputError("cosine similarity needs nonzero filters")
        object.__setattr__(self, "weights", w)
        if self.bias is not None:
            b = _frozen(self.bias).ravel()
            if b.shape != (w.shape[0],) or not np.all(np.isfinite(b)):
                raise InputError("bias must be a finite length-D vector")
            b.setflags(write=False)
            object.__setattr__(self, "bias", b)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def sums(self, x: np.ndarray) -> np.ndarray:
        """Postsynaptic sums for a batch of activation rows."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise InputError(f"activation dim {x.shape[1]} != readout dim {self.dim}")
        if self.similarity == "cosine":
            norms = np.linalg.norm(x, axis=1, keepdims=True)
            if np.any(norms == 0):
                raise InputError("cosine similarity undefined for zero activation vector")
            w = self.weights / np.linalg.norm(self.weights, axis=1, keepdims=True)
            return (x / norms) @ w.T
        s = x @ self.weights.T
        if self.bias is not None:
            s = s + self.bias
        return s

    def with_similarity(self, similarity: Similarity) -> "ReadoutPerceptron":
        return ReadoutPerceptron(self.weights, self.bias, similarity)


@dataclass(frozen=True)
class SumSamples:
    """Postsynaptic-sum vectors grouped by true class.

    ``per_class[i]`` is an ``(M_i, D)`` array; row ``k`` holds the sums of
    all ``D`` output neurons for the k-th input of class ``i``.
    """

    per_class: tuple

    def __post_init__(self):
        arrays = tuple(_frozen(np.atleast_2d(a)) if len(a) else _frozen(np.empty((0, 0)))
                       for a in self.per_class)
        widths = {a.shape[1] for a in arrays if a.size}
        if len(widths) > 1:
            raise InputError("all classes must share the same number of output neurons")
        object.__setattr__(self, "per_class", arrays)

    @property
    def n_classes(self) -> int:
        return len(self.per_class)

    @property
    def counts(self) -> np.ndarray:
        return np.array([len(a) for a in self.per_class])

    @classmethod
    def concat(cls, parts: Sequence["SumSamples"]) -> "SumSamples":
        """Pool several sample sets class by class (e.g. across CV folds)."""
        n = parts[0].n_classes
        pooled = []
        for i in range(n):
            chunks = [p.per_class[i] for p in parts if p.per_class[i].size]
            pooled.append(np.vstack(chunks) if chunks else np.empty((0, 0)))
        return cls(tuple(pooled))


@dataclass(frozen=True)
class MomentStats:
    """First two moments of the postsynaptic sums, per true class.

    ``mu[i]`` and ``sigma[i]`` are length-D vectors describing the sums of
    every output neuron when the input belongs to class ``i``; ``cov[i]``
    is the matching ``D x D`` covariance (NaN when fewer than two samples
    were available).  ``jitter[i]`` records the diagonal load added to make
    ``cov[i]`` positive definite.
    """

    mu: np.ndarray
    sigma: np.ndarray
    cov: np.ndarray
    priors: np.ndarray
    counts: np.ndarray
    jitter: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("mu", "sigma", "cov", "priors", "counts"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        jitter = np.zeros(len(self.mu)) if self.jitter is None else self.jitter
        object.__setattr__(self, "jitter", _frozen(jitter))
        if abs(self.priors.sum() - 1.0) > 1e-12 or np.any(self.priors < 0):
            raise InputError("priors must be non-negative and sum to one")

    @property
    def n_classes(self) -> int:
        return self.mu.shape[0]

    def has_cov(self, i: int) -> bool:
        return bool(np.all(np.isfinite(self.cov[i])))


def compute_sums(acts: ActivationSet, readout: ReadoutPerceptron) -> SumSamples:
    """Postsynaptic sums of every activation, grouped by true class."""
    if acts.dim != readout.dim:
        raise InputError(f"activation dim {acts.dim} != readout dim {readout.dim}")
    if acts.n_classes != readout.n_classes:
        raise InputError("activation set and readout disagree on the number of classes")
    sums = readout.sums(acts.vectors)
    return SumSamples(tuple(sums[acts.labels == i] for i in range(acts.n_classes)))


def regularize_psd(cov: np.ndarray) -> tuple[np.ndarray, float]:
    """Diagonal-load ``cov`` when its smallest eigenvalue is below the floor.

    Returns the (possibly) loaded matrix and the jitter that was added.
    """
    d = cov.shape[0]
    eps = PSD_JITTER * np.trace(cov) / d
    if eps <= 0:
        return cov, 0.0
    if np.linalg.eigvalsh(cov)[0] < eps:
        return cov + eps * np.eye(d), float(eps)
    return cov, 0.0


def estimate_moments(sums: SumSamples, priors="empirical") -> MomentStats:
    """Per-class sample mean, std and covariance (divisor ``M - 1``).

    ``priors`` is either ``"empirical"`` (class frequencies), ``"uniform"``
    or an explicit length-D vector.
    """
    n = sums.n_classes
    counts = sums.counts
    if np.any(counts < 1):
        missing = np.flatnonzero(counts < 1).tolist()
        raise InputError(f"classes {missing} have no samples")
    d = sums.per_class[0].shape[1]
    mu = np.empty((n, d))
    sigma = np.full((n, d), np.nan)
    cov = np.full((n, d, d), np.nan)
    jitter = np.zeros(n)
    for i, s in enumerate(sums.per_class):
        mu[i] = s.mean(axis=0)
        if len(s) < 2:
            continue
        centered = s - mu[i]
        c = centered.T @ centered / (len(s) - 1)
        c = 0.5 * (c + c.T)
        sigma[i] = np.sqrt(np.diag(c))
        cov[i], jitter[i] = regularize_psd(c)

    if isinstance(priors, str):
        if priors == "empirical":
            f = counts / counts.sum()
        elif priors == "uniform":
            f = np.full(n, 1.0 / n)
        else:
            raise InputError(f"unknown priors {priors!r}")
    else:
        f = np.asarray(priors, dtype=float)
        if f.shape != (n,):
            raise InputError("priors length must equal the number of classes")
    return MomentStats(mu, sigma, cov, f, counts, jitter)


def avg_correlation(stats: MomentStats) -> float:
    """Mean off-diagonal Pearson correlation of the class covariances."""
    d = stats.mu.shape[1]
    if d < 2:
        raise InputError("need at least two output neurons")
    off = ~np.eye(d, dtype=bool)
    per_class = []
    for i in range(stats.n_classes):
        if not stats.has_cov(i):
            raise InputError(f"covariance of class {i} unavailable")
        c = stats.cov[i] - stats.jitter[i] * np.eye(d)
        var = np.diag(c)
        if np.any(var <= 0):
            raise NumericalError(f"zero variance in class {i}; correlation undefined")
        r = c / np.sqrt(np.outer(var, var))
        per_class.append(r[off].mean())
    return float(np.mean(per_class))


def fit_ridge(x: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Ridge weights ``W = Y^T X (X^T X + lam I)^-1`` as a ``D x N`` matrix."""
    if lam < 0:
        raise InputError("ridge lambda must be non-negative")
    x = np.asarray(x, dtype=float)
    gram = x.T @ x + lam * np.eye(x.shape[1])
    try:
        w_t = scipy.linalg.solve(gram, x.T @ np.asarray(y, dtype=float), assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalError("normal matrix is singular; use lambda > 0") from exc
    return w_t.T


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    return np.eye(n_classes)[np.asarray(labels, dtype=np.int64)]
