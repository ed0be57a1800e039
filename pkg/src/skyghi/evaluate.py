"""Evaluation metrics and the randomized train/test split protocol.

Metric sums go through math.fsum so results are correctly rounded and
independent of summation order; reference implementations built on exact
rational arithmetic reproduce them bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConstantSeries, EmptyInput, InsufficientData, LengthMismatch
from .ingest import PairedSample
from .regress import fit_polynomial, predict


@dataclass(frozen=True)
class DifferenceHistogram:
    """Histogram of (estimated - actual) differences, bins centred on zero."""

    bins: list[tuple[float, float, int]]  # (lo, hi, count), hi exclusive
    within_100_fraction: float
    bin_width: float


@dataclass(frozen=True)
class EvalReport:
    rmse: float
    spearman: float
    histogram: list[tuple[float, float, int]]
    n: int
    within_100_fraction: float


@dataclass(frozen=True)
class SplitStudy:
    """RMSE distribution over repeated random train/test splits."""

    train_fraction: float
    repeats: int
    train_rmse: tuple[float, ...]
    test_rmse: tuple[float, ...] | None
    train_quartiles: tuple[float, float, float]  # 25th, median, 75th
    test_quartiles: tuple[float, float, float] | None


def _check_paired(actual, estimated):
    a = np.asarray(actual, dtype=float)
    b = np.asarray(estimated, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"series shapes differ: {a.shape} vs {b.shape}")
    if len(a) == 0:
        raise EmptyInput("metrics need at least one sample")
    return a, b


def rmse(actual: Sequence[float], estimated: Sequence[float]) -> float:
    """Root mean square difference between two equal-length series."""
    a, b = _check_paired(actual, estimated)
    d = a - b
    return math.sqrt(math.fsum((d * d).tolist()) / len(a))


def fractional_ranks(values: Sequence[float]) -> np.ndarray:
    """Ranks starting at 1; tied values share the average of their ranks."""
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x), dtype=float)
    i = 0
    sorted_x = x[order]
    while i < len(x):
        j = i
        while j + 1 < len(x) and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation with fractional (average) ranks for ties."""
    a, b = _check_paired(x, y)
    if len(a) < 2:
        raise EmptyInput("spearman needs at least two samples")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise ConstantSeries("rank correlation undefined for a constant series")
    rx = fractional_ranks(a)
    ry = fractional_ranks(b)
    mean_rank = (len(a) + 1) / 2.0  # ranks always average to (n+1)/2
    dx = rx - mean_rank
    dy = ry - mean_rank
    num = math.fsum((dx * dy).tolist())
    den = math.sqrt(
        math.fsum((dx * dx).tolist()) * math.fsum((dy * dy).tolist())
    )
    return num / den


def difference_histogram(
    actual: Sequence[float], estimated: Sequence[float], bin_width: float = 50.0
) -> DifferenceHistogram:
    """Histogram of estimated - actual with a bin centred on zero.

    Bin k covers [(k - 0.5) * w, (k + 0.5) * w); emitted bins run
    contiguously from the lowest to the highest populated bin, so counts
    always total the number of samples. Also reports the fraction of
    differences inside [-100, +100] W/m2.
    """
    if bin_width <= 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    a, b = _check_paired(actual, estimated)
    diffs = b - a
    idx = np.floor(diffs / bin_width + 0.5).astype(int)
    lo, hi = int(idx.min()), int(idx.max())
    counts = np.bincount(idx - lo, minlength=hi - lo + 1)
    bins = [
        ((k - 0.5) * bin_width, (k + 0.5) * bin_width, int(c))
        for k, c in zip(range(lo, hi + 1), counts)
    ]
    within = float(np.mean(np.abs(diffs) <= 100.0))
    return DifferenceHistogram(bins=bins, within_100_fraction=within, bin_width=bin_width)


def make_report(
    actual: Sequence[float], estimated: Sequence[float], bin_width: float = 50.0
) -> EvalReport:
    """Bundle RMSE, Spearman and the difference histogram for one run."""
    hist = difference_histogram(actual, estimated, bin_width)
    return EvalReport(
        rmse=rmse(actual, estimated),
        spearman=spearman(actual, estimated),
        histogram=hist.bins,
        n=len(np.asarray(actual)),
        within_100_fraction=hist.within_100_fraction,
    )


def split_study(
    pairs: Sequence[PairedSample],
    train_fractions: Sequence[float],
    degree: int,
    seed: int,
    repeats: int = 100,
) -> list[SplitStudy]:
    """Repeated random-split fitting study.

    For every fraction, ``repeats`` random train subsets are drawn without
    replacement; the model is refit per draw and RMSE recorded on the
    train subset and on its complement. Each repeat derives its RNG stream
    from (seed, fraction_index, repeat_index), so parallel execution or
    reordering cannot change the results.
    """
    n = len(pairs)
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    if not train_fractions:
        raise ValueError("no train fractions given")
    for frac in train_fractions:
        if not 0.0 < frac <= 1.0:
            raise ValueError(f"train fraction out of (0, 1]: {frac}")
    smallest = min(int(round(min(train_fractions) * n)), n)
    if smallest < degree + 1:
        raise InsufficientData(
            f"fraction {min(train_fractions)} of {n} pairs cannot fit degree {degree}"
        )
    pairs = list(pairs)
    results = []
    for f_idx, frac in enumerate(train_fractions):
        k = min(int(round(frac * n)), n)
        train_scores = []
        test_scores = []
        for r_idx in range(repeats):
            rng = np.random.default_rng([seed, f_idx, r_idx])
            perm = rng.permutation(n)
            train = [pairs[i] for i in perm[:k]]
            test = [pairs[i] for i in perm[k:]]
            model = fit_polynomial(train, degree)
            train_scores.append(model.fit_rmse)
            if test:
                estimated = predict(model, np.array([p.luminance for p in test]))
                test_scores.append(rmse([p.irradiance for p in test], estimated))
        train_q = tuple(float(q) for q in np.percentile(train_scores, [25, 50, 75]))
        if test_scores:
            test_q = tuple(float(q) for q in np.percentile(test_scores, [25, 50, 75]))
            test_tuple = tuple(test_scores)
        else:
            test_q = None
            test_tuple = None
        results.append(
            SplitStudy(
                train_fraction=frac,
                repeats=repeats,
                train_rmse=tuple(train_scores),
                test_rmse=test_tuple,
                train_quartiles=train_q,
                test_quartiles=test_q,
            )
        )
    return results
