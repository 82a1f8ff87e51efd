"""The four goodness-of-fit statistics compared in the power experiments.

All take observed integer counts plus a model distribution; the observed
fractions Y_k = counts_k / m are formed internally in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch
from .model import ModelDistribution

STATISTIC_IDS = ("rms", "chi2", "g2", "ft")


@dataclass(frozen=True, eq=False)
class DrawCounts:
    """Observed bin counts from m i.i.d. draws."""

    counts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if not np.issubdtype(arr.dtype, np.integer):
            rounded = np.rint(arr)
            if not np.array_equal(rounded, arr):
                raise ValueError("counts must be integers")
            arr = rounded.astype(np.int64)
        else:
            arr = arr.astype(np.int64)
        if arr.ndim != 1:
            raise ValueError("counts must be one-dimensional")
        if np.any(arr < 0):
            raise ValueError("counts must be nonnegative")
        if arr.sum() < 1:
            raise ValueError("need at least one draw")
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @property
    def m(self) -> int:
        return int(self.counts.sum())

    @property
    def fractions(self) -> np.ndarray:
        return self.counts / self.m


def _check_pair(counts: DrawCounts, model: ModelDistribution) -> None:
    if counts.counts.shape[0] != model.n:
        raise LengthMismatch(
            f"counts have {counts.counts.shape[0]} bins, model has {model.n}"
        )


def rms_statistic(counts: DrawCounts, model: ModelDistribution) -> float:
    """X = m * sum (Y_k - p_k)^2, the squared root-mean-square statistic."""
    _check_pair(counts, model)
    d = counts.fractions - model.probs
    return counts.m * float(np.dot(d, d))


def chi2_statistic(counts: DrawCounts, model: ModelDistribution) -> float:
    """The classic Pearson statistic m * sum (Y_k - p_k)^2 / p_k."""
    _check_pair(counts, model)
    d = counts.fractions - model.probs
    return counts.m * float(np.sum(d * d / model.probs))


def g2_statistic(counts: DrawCounts, model: ModelDistribution) -> float:
    """The likelihood-ratio statistic 2m * sum Y_k ln(Y_k / p_k).

    Terms with Y_k = 0 contribute zero.
    """
    _check_pair(counts, model)
    y = counts.fractions
    ratio = np.where(y > 0.0, y / model.probs, 1.0)
    return 2.0 * counts.m * float(np.sum(y * np.log(ratio)))


def freeman_tukey_statistic(counts: DrawCounts, model: ModelDistribution) -> float:
    """The Freeman-Tukey (Hellinger-distance) statistic 4m * sum (sqrt Y - sqrt p)^2."""
    _check_pair(counts, model)
    d = np.sqrt(counts.fractions) - np.sqrt(model.probs)
    return 4.0 * counts.m * float(np.dot(d, d))


_SCALAR = {
    "rms": rms_statistic,
    "chi2": chi2_statistic,
    "g2": g2_statistic,
    "ft": freeman_tukey_statistic,
}


def statistic(statistic_id: str, counts: DrawCounts, model: ModelDistribution) -> float:
    """Dispatch by id: one of "rms", "chi2", "g2", "ft"."""
    try:
        fn = _SCALAR[statistic_id]
    except KeyError:
        raise ValueError(f"unknown statistic {statistic_id!r}; choose from {STATISTIC_IDS}")
    return fn(counts, model)


def batch_statistic(counts_matrix: np.ndarray, probs: np.ndarray, statistic_id: str) -> np.ndarray:
    """Vectorized statistics over a (n_sims, n_bins) matrix of counts."""
    counts_matrix = np.asarray(counts_matrix)
    m = counts_matrix.sum(axis=1, keepdims=True)
    y = counts_matrix / m
    m = m[:, 0]
    if statistic_id == "rms":
        d = y - probs
        return m * np.sum(d * d, axis=1)
    if statistic_id == "chi2":
        d = y - probs
        return m * np.sum(d * d / probs, axis=1)
    if statistic_id == "g2":
        ratio = np.where(y > 0.0, y / probs, 1.0)
        return 2.0 * m * np.sum(y * np.log(ratio), axis=1)
    if statistic_id == "ft":
        d = np.sqrt(y) - np.sqrt(probs)
        return 4.0 * m * np.sum(d * d, axis=1)
    raise ValueError(f"unknown statistic {statistic_id!r}; choose from {STATISTIC_IDS}")
