"""Model distribution construction, builtin families, and text/CSV I/O."""

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmsgof import (
    BuiltinFamily,
    NonPositiveProbability,
    NotFinite,
    ParseError,
    TooFewBins,
    UnsupportedBinCount,
    dump_distribution,
    generate_builtin,
    load_distribution,
    make_distribution,
    parse_family,
)
from rmsgof.model import TABLE3_BIN_COUNTS


class TestMakeDistribution:
    def test_already_normalized(self):
        d = make_distribution([0.5, 0.5])
        np.testing.assert_array_equal(d.probs, [0.5, 0.5])

    def test_normalizes_by_sum(self):
        d = make_distribution([1, 1, 2])
        np.testing.assert_allclose(d.probs, [0.25, 0.25, 0.5], rtol=0, atol=0)

    def test_first_example_model_n4_is_uniform(self):
        # with four bins the two 1/4 head bins and the 1/(2n-4) tail coincide
        d = make_distribution([0.25, 0.25, 1.0 / 4.0, 1.0 / 4.0])
        np.testing.assert_array_equal(d.probs, [0.25, 0.25, 0.25, 0.25])

    def test_rejects_zero(self):
        with pytest.raises(NonPositiveProbability):
            make_distribution([0.0, 1.0])

    def test_rejects_negative(self):
        with pytest.raises(NonPositiveProbability):
            make_distribution([0.5, -0.1, 0.6])

    def test_rejects_single_bin(self):
        with pytest.raises(TooFewBins):
            make_distribution([1.0])

    def test_rejects_nan_and_inf(self):
        with pytest.raises(NotFinite):
            make_distribution([1.0, float("nan")])
        with pytest.raises(NotFinite):
            make_distribution([1.0, float("inf")])

    @given(
        st.lists(
            st.floats(min_value=1e-6, max_value=1e6, allow_nan=False),
            min_size=2,
            max_size=60,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_normalization_property(self, weights):
        d = make_distribution(weights)
        assert abs(d.probs.sum() - 1.0) <= 1e-12
        assert np.all(d.probs > 0.0)


class TestBuiltinFamilies:
    def test_family_e_shape(self):
        d = generate_builtin(BuiltinFamily("table3", 25, letter="e"))
        k = np.arange(1, 26)
        expected = np.exp(-5.0 * k / 8.0)
        expected /= expected.sum()
        np.testing.assert_allclose(d.probs, expected, rtol=1e-15)

    def test_zipf_one_n3(self):
        # harmonic sum 1 + 1/2 + 1/3 = 11/6
        d = generate_builtin(BuiltinFamily("zipf", 3, exponent=1.0))
        np.testing.assert_allclose(d.probs, [6 / 11, 3 / 11, 2 / 11], rtol=1e-15)

    def test_first_example_actual_n4(self):
        d = generate_builtin(BuiltinFamily("ex1-actual", 4))
        np.testing.assert_allclose(d.probs, [3 / 8, 1 / 8, 1 / 4, 1 / 4], rtol=1e-15)

    @pytest.mark.parametrize("letter,n", sorted(TABLE3_BIN_COUNTS.items()))
    def test_table3_invariants(self, letter, n):
        d = generate_builtin(BuiltinFamily("table3", n, letter=letter))
        assert d.n == n
        assert abs(d.probs.sum() - 1.0) <= 1e-12
        assert np.all(d.probs > 0.0)

    def test_table3_rejects_other_bin_counts(self):
        with pytest.raises(UnsupportedBinCount):
            generate_builtin(BuiltinFamily("table3", 99, letter="c"))

    def test_family_d_literal_floor_formula(self):
        # last bin: floor((61-50)/10) = 1, so the weight is exactly 1/2 + ln 1
        d = generate_builtin(BuiltinFamily("table3", 50, letter="d"))
        ratio = d.probs[49] / d.probs[0]
        assert ratio == pytest.approx(0.5 / (0.5 + math.log(6.0)), rel=1e-14)

    def test_deterministic(self):
        fam = BuiltinFamily("table3", 500, letter="a")
        a = generate_builtin(fam)
        b = generate_builtin(fam)
        np.testing.assert_array_equal(a.probs, b.probs)

    def test_ex1_needs_three_bins(self):
        with pytest.raises(UnsupportedBinCount):
            generate_builtin(BuiltinFamily("ex1-model", 2))

    def test_parse_family_strings(self):
        assert parse_family("table3:e") == BuiltinFamily("table3", 25, letter="e")
        assert parse_family("ex1-model:n=16") == BuiltinFamily("ex1-model", 16)
        assert parse_family("zipf:s=1,n=100") == BuiltinFamily("zipf", 100, exponent=1.0)
        assert parse_family("uniform:n=5") == BuiltinFamily("uniform", 5)
        with pytest.raises(UnsupportedBinCount):
            parse_family("nope:n=4")


class TestLoadDistribution:
    def test_plain_weights(self):
        d = load_distribution(io.StringIO("0.25\n0.75\n"))
        np.testing.assert_array_equal(d.probs, [0.25, 0.75])

    def test_comments_and_uniform(self):
        d = load_distribution(io.StringIO("# model\n1\n1\n1\n1\n"))
        np.testing.assert_array_equal(d.probs, [0.25, 0.25, 0.25, 0.25])

    def test_zero_weight_rejected(self):
        with pytest.raises(NonPositiveProbability) as excinfo:
            load_distribution(io.StringIO("0\n1\n"))
        assert "line 1" in str(excinfo.value)

    def test_crlf(self):
        d = load_distribution(io.StringIO("1\r\n3\r\n"))
        np.testing.assert_array_equal(d.probs, [0.25, 0.75])

    def test_csv_column(self):
        d = load_distribution(io.StringIO("p\n0.25\n0.75\n"), format="csv")
        np.testing.assert_array_equal(d.probs, [0.25, 0.75])

    def test_csv_autodetected(self):
        d = load_distribution(io.StringIO("p\n1\n1\n"))
        np.testing.assert_array_equal(d.probs, [0.5, 0.5])

    def test_parse_error_carries_line(self):
        with pytest.raises(ParseError) as excinfo:
            load_distribution(io.StringIO("0.5\npotato\n"))
        assert excinfo.value.line_number == 2

    def test_multi_column_rejected(self):
        with pytest.raises(ParseError):
            load_distribution(io.StringIO("0.5,0.5\n0.2,0.8\n"))

    def test_round_trip_full_precision(self):
        rng = np.random.default_rng(1)
        d = make_distribution(rng.uniform(0.1, 10.0, size=37))
        buf = io.StringIO()
        dump_distribution(d, buf)
        buf.seek(0)
        d2 = load_distribution(buf)
        np.testing.assert_array_equal(d.probs, d2.probs)

    @given(st.integers(2, 40), st.randoms(use_true_random=False))
    @settings(max_examples=30, deadline=None)
    def test_round_trip_property(self, n, rnd):
        weights = [rnd.uniform(1e-3, 1e3) for _ in range(n)]
        d = make_distribution(weights)
        buf = io.StringIO()
        dump_distribution(d, buf)
        buf.seek(0)
        np.testing.assert_array_equal(load_distribution(buf).probs, d.probs)
