"""Evaluation statistics: Frechet distance, AUROC, mean +/- SD, paired t-test.

The Frechet distance between Gaussian fits (m_a, C_a) and (m_b, C_b) is

    d^2 = |m_a - m_b|^2 + Tr(C_a + C_b - 2 (C_a^1/2 C_b C_a^1/2)^1/2)

computed here through symmetric eigendecompositions rather than a general
matrix square root, with a small clamping floor for eigenvalues that are
negative only through round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

_EIG_FLOOR = -1e-8


@dataclass
class GaussianMoments:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.cov = np.asarray(self.cov, dtype=np.float64)
        if self.mean.ndim != 1:
            raise ValueError("mean must be a vector")
        d = self.mean.size
        if self.cov.shape != (d, d):
            raise ValueError(f"cov must be {d}x{d}, got {self.cov.shape}")
        if not (np.all(np.isfinite(self.mean)) and np.all(np.isfinite(self.cov))):
            raise ValueError("moments must be finite")
        if np.max(np.abs(self.cov - self.cov.T)) > 1e-9:
            raise ValueError("cov must be symmetric within 1e-9")


def gaussian_moments(features: np.ndarray) -> GaussianMoments:
    """Sample mean and unbiased (N-1) covariance of an N x D feature matrix."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("features must be an N x D matrix")
    if x.shape[0] < 2:
        raise ValueError(f"need at least 2 rows to estimate moments, got {x.shape[0]}")
    mean = x.mean(axis=0)
    cov = np.atleast_2d(np.cov(x, rowvar=False))
    return GaussianMoments(mean=mean, cov=(cov + cov.T) / 2.0)


def _psd_sqrt(matrix: np.ndarray, what: str) -> np.ndarray:
    vals, vecs = np.linalg.eigh((matrix + matrix.T) / 2.0)
    if np.min(vals) < _EIG_FLOOR:
        raise ValueError(f"{what} is not positive semi-definite (eigenvalue {np.min(vals):g})")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(a: GaussianMoments, b: GaussianMoments) -> float:
    if a.mean.size != b.mean.size:
        raise ValueError(f"dimension mismatch: {a.mean.size} vs {b.mean.size}")
    if np.array_equal(a.mean, b.mean) and np.array_equal(a.cov, b.cov):
        return 0.0
    sqrt_a = _psd_sqrt(a.cov, "first covariance")
    inner = sqrt_a @ b.cov @ sqrt_a
    vals = np.linalg.eigvalsh((inner + inner.T) / 2.0)
    if np.min(vals) < _EIG_FLOOR:
        raise ValueError("covariance product is not positive semi-definite")
    vals = np.clip(vals, 0.0, None)
    mean_term = float(np.sum((a.mean - b.mean) ** 2))
    trace_term = float(np.trace(a.cov) + np.trace(b.cov) - 2.0 * np.sum(np.sqrt(vals)))
    return mean_term + trace_term


def pixel_feature_map(images: np.ndarray, dim: int = 64, seed: int = 7) -> np.ndarray:
    """Fixed seeded random linear projection of flattened pixels.

    Desk-scale stand-in for a learned feature extractor: deterministic, so
    Frechet comparisons are reproducible from config alone.
    """
    x = np.asarray(images, dtype=np.float64)
    if x.ndim < 2:
        raise ValueError("expected a batch of images or feature rows")
    flat = x.reshape(x.shape[0], -1) / 255.0
    rng = np.random.default_rng(seed)
    proj = rng.standard_normal((flat.shape[1], dim)) / math.sqrt(flat.shape[1])
    return flat @ proj


def auroc(scores, labels) -> float:
    """Probability a random positive outscores a random negative, ties at half.

    Mann-Whitney U over midranks; labels are 0/1 and both must be present.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be equal-length vectors")
    if not set(np.unique(y)) <= {0, 1}:
        raise ValueError("labels must be 0/1")
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUROC is undefined with a single class")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(len(s), dtype=np.float64)
    sorted_scores = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # midrank of the tied run
        i = j + 1
    u = float(np.sum(ranks[y == 1])) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p: float

    def to_json(self) -> dict:
        return {"t": self.t, "df": self.df, "p": self.p}


def paired_t_one_sided(pre, post) -> TTestResult:
    """One-sided paired t-test of H1: mean(post - pre) > 0.

    The upper-tail p comes from the regularized incomplete beta function:
    for t >= 0, P(T_df >= t) = I_x(df/2, 1/2) / 2 with x = df / (df + t^2).
    """
    a = np.asarray(pre, dtype=np.float64)
    b = np.asarray(post, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("pre and post must be equal-length vectors")
    n = a.size
    if n < 2:
        raise ValueError("need at least 2 paired samples")
    d = b - a
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        raise ValueError("degenerate test: differences have zero variance")
    t = float(np.mean(d) / (sd / math.sqrt(n)))
    df = n - 1
    x = df / (df + t * t)
    tail = 0.5 * float(special.betainc(df / 2.0, 0.5, x))
    p = tail if t >= 0 else 1.0 - tail
    return TTestResult(t=t, df=df, p=p)


@dataclass(frozen=True)
class MeanSD:
    mean: float
    sd: float

    def __str__(self) -> str:
        return f"{self.mean:.2f} ± {self.sd:.2f}"


def mean_sd(values) -> MeanSD:
    """Arithmetic mean and sample (N-1) standard deviation."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need at least 2 values")
    return MeanSD(mean=float(np.mean(x)), sd=float(np.std(x, ddof=1)))


def fmt_percent(fraction: float) -> str:
    """One-decimal percent string, e.g. 0.727 -> '72.7%'."""
    return f"{100.0 * fraction:.1f}%"
