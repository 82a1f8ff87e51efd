"""Independent reference implementations used by the tests.

Everything here deliberately avoids the code paths under test: chi-square
CDFs come from the regularized incomplete gamma, single-variance CDFs from
erf, integrand references from extended-precision complex arithmetic, and
small-matrix eigenvalues from characteristic-polynomial root-finding.
"""

import math

import numpy as np
from scipy.special import gammainc


def chi2_cdf(x, dof):
    """Regularized incomplete gamma form of the chi-square CDF."""
    x = np.asarray(x, dtype=float)
    return gammainc(dof / 2.0, np.where(x > 0.0, x, 0.0) / 2.0)


def single_variance_cdf(x, sigma2):
    """P(sigma^2 Z^2 <= x) = erf(sqrt(x / (2 sigma^2)))."""
    if x <= 0.0:
        return 0.0
    return math.erf(math.sqrt(x / (2.0 * sigma2)))


def exponential_cdf(x, scale):
    """CDF of (Z1^2 + Z2^2) * scale / 2, an exponential with the given mean."""
    if x <= 0.0:
        return 0.0
    return -math.expm1(-x / scale)


def mpmath_contour_integrand(t, x, sigmas, dps=50):
    """Direct extended-precision evaluation of the shifted-contour integrand."""
    import mpmath as mp

    with mp.workdps(dps):
        t = mp.mpf(t)
        x = mp.mpf(x)
        n = len(sigmas)
        rn = mp.sqrt(n)
        prod = mp.mpc(1)
        for s in sigmas:
            s = mp.mpf(s)
            rad = 1 - 2 * (t - 1) * s / x + 2j * t * s * rn / x
            prod *= mp.sqrt(rad)
        num = mp.e ** (1 - t) * mp.expjpi(t * rn / mp.pi)
        den = mp.pi * (t - 1 / (1 - 1j * rn)) * prod
        return float(mp.im(num / den))


def charpoly_eigenvalues(matrix):
    """Eigenvalues via Faddeev-LeVerrier coefficients and polynomial roots."""
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(a @ m) / k)
    roots = np.roots(coeffs)
    return np.sort(roots.real)
