"""Matrix construction and Jacobi spectrum extraction."""

import numpy as np
import pytest

from oracles import charpoly_eigenvalues
from rmsgof import (
    BuiltinFamily,
    DegenerateSpectrum,
    build_b,
    generate_builtin,
    jacobi_eigenvalues,
    make_distribution,
    variance_spectrum,
)
from rmsgof.model import TABLE3_BIN_COUNTS


def table3(letter):
    return generate_builtin(BuiltinFamily("table3", TABLE3_BIN_COUNTS[letter], letter=letter))


class TestBuildB:
    def test_uniform_two_bins(self):
        b = build_b(make_distribution([0.5, 0.5]))
        np.testing.assert_allclose(b.entries, [[1.0, -1.0], [-1.0, 1.0]], atol=1e-15)

    def test_quarter_three_quarter(self):
        b = build_b(make_distribution([0.25, 0.75]))
        expected = (4.0 / 3.0) * np.array([[1.0, -1.0], [-1.0, 1.0]])
        np.testing.assert_allclose(b.entries, expected, rtol=1e-15)

    def test_componentwise_formula(self):
        rng = np.random.default_rng(2)
        p = rng.uniform(0.05, 1.0, size=7)
        p /= p.sum()
        model = make_distribution(p)
        b = build_b(model).entries
        d = 1.0 / model.probs
        s = d.sum()
        n = 7
        for j in range(n):
            for k in range(n):
                expected = -(d[j] + d[k]) / n + s / n**2
                if j == k:
                    expected += d[k]
                assert b[j, k] == pytest.approx(expected, rel=1e-13)

    def test_row_sums_vanish(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            p = rng.uniform(0.01, 1.0, size=rng.integers(2, 40))
            b = build_b(make_distribution(p))
            assert np.abs(b.entries.sum(axis=1)).max() <= 1e-9 * np.abs(b.entries).max()

    def test_trace_identity(self):
        model = table3("d")
        b = build_b(model)
        expected = (1.0 - 1.0 / model.n) * np.sum(1.0 / model.probs)
        assert b.trace == pytest.approx(expected, rel=1e-12)

    def test_extreme_ratio_warns(self):
        weights = np.ones(5)
        weights[-1] = 1e-8
        with pytest.warns(UserWarning, match="max p / min p"):
            build_b(make_distribution(weights))


class TestVarianceSpectrum:
    def test_uniform_four_bins(self):
        # D = 4I so B = 4P with eigenvalues {4, 4, 4, 0}
        spectrum = variance_spectrum(build_b(make_distribution([1, 1, 1, 1])))
        np.testing.assert_allclose(spectrum.variances, [0.25, 0.25, 0.25], rtol=1e-14)
        assert spectrum.zero_eigenvalue_residual <= 1e-12

    def test_two_bins_closed_form(self):
        # single nonzero eigenvalue (1/p1 + 1/p2)/2, variance 2 p1 p2
        spectrum = variance_spectrum(build_b(make_distribution([0.25, 0.75])))
        assert len(spectrum) == 1
        assert spectrum.variances[0] == pytest.approx(0.375, rel=1e-13)

    def test_uniform_any_n(self):
        for n in (2, 3, 10, 37):
            spectrum = variance_spectrum(build_b(make_distribution(np.ones(n))))
            np.testing.assert_allclose(spectrum.variances, np.full(n - 1, 1.0 / n), rtol=1e-12)

    def test_inverse_sum_matches_trace(self):
        rng = np.random.default_rng(4)
        p = rng.uniform(0.02, 1.0, size=23)
        b = build_b(make_distribution(p))
        spectrum = variance_spectrum(b)
        assert np.sum(1.0 / spectrum.variances) == pytest.approx(b.trace, rel=1e-8)

    @pytest.mark.parametrize("letter", sorted(TABLE3_BIN_COUNTS))
    def test_table3_residuals(self, letter):
        b = build_b(table3(letter))
        spectrum = variance_spectrum(b)
        assert len(spectrum) == b.n - 1
        assert spectrum.zero_eigenvalue_residual <= 1e-9 * b.trace
        assert np.sum(1.0 / spectrum.variances) == pytest.approx(b.trace, rel=1e-8)

    def test_degenerate_model_raises(self):
        weights = np.array([1.0, 1.0, 1e-12])
        with pytest.warns(UserWarning):
            b = build_b(make_distribution(weights))
        with pytest.raises(DegenerateSpectrum):
            variance_spectrum(b)


class TestJacobi:
    def test_rotations_stay_orthogonal(self):
        rng = np.random.default_rng(5)
        for n in (5, 20, 50):
            p = rng.uniform(0.05, 1.0, size=n)
            b = build_b(make_distribution(p))
            _, vectors, _, _ = jacobi_eigenvalues(b.entries, want_vectors=True)
            gram = vectors.T @ vectors
            assert np.abs(gram - np.eye(n)).max() <= 1e-12

    def test_diagonalization_reconstructs(self):
        rng = np.random.default_rng(6)
        p = rng.uniform(0.1, 1.0, size=12)
        b = build_b(make_distribution(p))
        eigs, vectors, _, off = jacobi_eigenvalues(b.entries, want_vectors=True)
        recon = vectors @ np.diag(eigs) @ vectors.T
        assert np.abs(recon - b.entries).max() <= 1e-11 * np.abs(b.entries).max()
        assert off <= 1e-13 * np.linalg.norm(b.entries)

    def test_against_characteristic_polynomial(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n = int(rng.integers(2, 7))
            p = rng.uniform(0.05, 1.0, size=n)
            b = build_b(make_distribution(p))
            jac = np.sort(jacobi_eigenvalues(b.entries)[0])
            ref = charpoly_eigenvalues(b.entries)
            scale = np.abs(ref).max()
            np.testing.assert_allclose(jac, ref, atol=1e-8 * scale)
