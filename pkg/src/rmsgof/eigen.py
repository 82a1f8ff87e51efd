"""Limiting variance spectrum of the squared root-mean-square statistic.

The statistic converges in law to a weighted sum of squared independent
standard Gaussians.  The weights (variances) are the inverses of the
positive eigenvalues of B = PDP, where D is the diagonal matrix of inverse
bin probabilities and P projects onto the zero-sum hyperplane.  B has
exactly one structural zero eigenvalue.  Eigenvalues are extracted with a
cyclic-by-row Jacobi diagonalization.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DegenerateSpectrum
from .model import ModelDistribution

PRECISION_RATIO_LIMIT = 1e7  # forming B loses ~eps * max(p)/min(p) accuracy

JACOBI_MAX_SWEEPS = 30
JACOBI_REL_TOL = 1e-14  # off-diagonal Frobenius target, relative to ||B||_F


@dataclass(frozen=True, eq=False)
class ProjectedInverseMatrix:
    """The n-by-n symmetric matrix B = PDP."""

    entries: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.entries, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("B must be square")
        if not np.array_equal(b, b.T):
            raise ValueError("B must be exactly symmetric")
        scale = np.abs(b).max()
        rowsums = np.abs(b.sum(axis=1)).max()
        if rowsums > 1e-9 * scale:
            raise ValueError(
                f"row sums {rowsums:.3e} exceed 1e-9 * max|B| = {1e-9 * scale:.3e}"
            )
        b.setflags(write=False)
        object.__setattr__(self, "entries", b)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))


@dataclass(frozen=True, eq=False)
class VarianceSpectrum:
    """The n-1 positive variances, sorted descending, plus the magnitude of
    the discarded (structurally zero) eigenvalue as a diagnostic."""

    variances: np.ndarray
    zero_eigenvalue_residual: float

    def __post_init__(self):
        v = np.asarray(self.variances, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("need at least one variance")
        if np.any(v <= 0.0):
            raise ValueError("variances must be positive")
        if np.any(np.diff(v) > 0.0):
            raise ValueError("variances must be sorted descending")
        v.setflags(write=False)
        object.__setattr__(self, "variances", v)

    def __len__(self) -> int:
        return self.variances.shape[0]


def build_b(model: ModelDistribution) -> ProjectedInverseMatrix:
    """Form B = PDP componentwise from the model's inverse probabilities."""
    p = model.probs
    ratio = float(p.max() / p.min())
    if ratio > PRECISION_RATIO_LIMIT:
        warnings.warn(
            f"max p / min p = {ratio:.2e} exceeds {PRECISION_RATIO_LIMIT:.0e}; "
            "eigenvalues may carry fewer than 9 accurate digits",
            stacklevel=2,
        )
    n = model.n
    d = 1.0 / p
    s = d.sum()
    b = s / n**2 - (d[:, None] + d[None, :]) / n
    b[np.diag_indices(n)] += d
    # exact symmetry: the outer sum commutes, the diagonal add preserves it
    matrix = ProjectedInverseMatrix(b)
    expected_trace = (1.0 - 1.0 / n) * s
    if abs(matrix.trace - expected_trace) > 1e-9 * expected_trace:
        raise ValueError("trace of B deviates from (1 - 1/n) * sum(1/p)")
    return matrix


@njit(cache=True)
def _jacobi_kernel(a, v, accumulate, rel_tol, max_sweeps):  # pragma: no cover
    n = a.shape[0]
    fro0 = 0.0
    for i in range(n):
        for j in range(n):
            fro0 += a[i, j] * a[i, j]
    fro0 = np.sqrt(fro0)
    tol = rel_tol * fro0
    skip = tol / (2.0 * n)
    sweeps = 0
    off = 0.0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = 1.0 / (abs(theta) + np.sqrt(1.0 + theta * theta))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                app = a[p, p]
                aqq = a[q, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[p, k] = a[k, p]
                    a[k, q] = s * akp + c * akq
                    a[q, k] = a[k, q]
                if accumulate:
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = c * vkp - s * vkq
                        v[k, q] = s * vkp + c * vkq
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += 2.0 * a[i, j] * a[i, j]
        off = np.sqrt(off)
        if off <= tol:
            break
    return sweeps, off


def jacobi_eigenvalues(matrix: np.ndarray, want_vectors: bool = False):
    """Eigenvalues of a symmetric matrix by cyclic-by-row Jacobi rotations.

    Returns (eigenvalues, vectors_or_None, sweeps, off_norm); eigenvalues are
    in diagonal order (unsorted), vectors as columns.
    """
    a = np.array(matrix, dtype=float, order="C")
    n = a.shape[0]
    v = np.eye(n) if want_vectors else np.empty((0, 0))
    sweeps, off = _jacobi_kernel(a, v, want_vectors, JACOBI_REL_TOL, JACOBI_MAX_SWEEPS)
    return np.diag(a).copy(), (v if want_vectors else None), sweeps, off


def variance_spectrum(b: ProjectedInverseMatrix) -> VarianceSpectrum:
    """Diagonalize B, discard the structural zero, invert the rest.

    The single smallest-magnitude eigenvalue is taken to be the structural
    zero; its magnitude is reported as the residual.  Raises
    DegenerateSpectrum if a second eigenvalue is equally close to zero.
    """
    eigs, _, _, _ = jacobi_eigenvalues(b.entries)
    order = np.argsort(np.abs(eigs))
    residual = float(abs(eigs[order[0]]))
    rest = eigs[order[1:]]
    zero_scale = 1e-9 * b.trace
    if rest.size and np.abs(rest).min() <= zero_scale:
        raise DegenerateSpectrum(
            "a second eigenvalue lies within 1e-9 * trace(B) of zero; "
            "the model is numerically degenerate at this precision"
        )
    if np.any(rest <= 0.0):
        raise DegenerateSpectrum("B has a negative eigenvalue beyond the structural zero")
    variances = np.sort(1.0 / rest)[::-1]
    return VarianceSpectrum(variances=variances, zero_eigenvalue_residual=residual)
