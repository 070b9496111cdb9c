import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimoloc.numerics import dft_row, hermitian_product, idft_row, make_rng, percentile


def rand_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestIdft:
    def test_flat_spectrum_is_delta_at_zero(self):
        out = idft_row(np.ones(4))
        np.testing.assert_allclose(out, [1, 0, 0, 0], atol=1e-14)

    def test_inverts_forward_dft(self):
        x = rand_complex(make_rng(1), 8)
        np.testing.assert_allclose(idft_row(dft_row(x)), x, atol=1e-12)

    def test_single_tone_lands_on_its_bin(self):
        k = np.arange(8)
        row = np.exp(-2j * np.pi * k * 3 / 8)
        # direct evaluation of the transform sum as an oracle
        oracle = np.array([np.mean(row * np.exp(2j * np.pi * k * l / 8))
                           for l in range(8)])
        out = idft_row(row)
        np.testing.assert_allclose(out, oracle, atol=1e-12)
        expect = np.zeros(8, dtype=complex)
        expect[3] = 1.0
        np.testing.assert_allclose(out, expect, atol=1e-12)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="empty vector"):
            idft_row(np.array([]))
        with pytest.raises(ValueError, match="empty vector"):
            dft_row(np.array([]))

    @pytest.mark.parametrize("n", [1, 2, 7, 64])
    def test_round_trip_many_lengths(self, n):
        rng = make_rng(100 + n)
        for _ in range(5):
            x = rand_complex(rng, n)
            err = np.abs(dft_row(idft_row(x)) - x).max()
            assert err < 1e-10


class TestHermitianProduct:
    def test_zero_matrix(self):
        out = hermitian_product(np.zeros((3, 4), dtype=complex))
        assert out.shape == (3, 3)
        assert np.all(out == 0)

    def test_identity(self):
        out = hermitian_product(np.eye(2, dtype=complex))
        np.testing.assert_array_equal(out, np.eye(2))

    def test_matches_entrywise_sum(self):
        y = rand_complex(make_rng(7), 2, 3)
        out = hermitian_product(y)
        for i in range(2):
            for j in range(2):
                s = sum(y[i, k] * np.conj(y[j, k]) for k in range(3))
                assert abs(out[i, j] - s) < 1e-12

    def test_exactly_hermitian_with_real_diagonal(self):
        y = rand_complex(make_rng(8), 5, 9)
        out = hermitian_product(y)
        assert np.abs(out - out.conj().T).max() <= 1e-12
        assert np.all(out.diagonal().imag == 0)
        assert np.all(out.diagonal().real >= 0)

    def test_positive_semidefinite(self):
        rng = make_rng(9)
        h = hermitian_product(rand_complex(rng, 6, 4))
        for _ in range(20):
            x = rand_complex(rng, 6)
            quad = (x.conj() @ h @ x).real
            assert quad >= -1e-10

    def test_empty_dimension_rejected(self):
        with pytest.raises(ValueError):
            hermitian_product(np.zeros((0, 3), dtype=complex))


class TestPercentile:
    def test_endpoints_are_min_and_max(self):
        vals = [1.0, 2.0, 3.0, 4.0]
        assert percentile(vals, 0.0) == 1.0
        assert percentile(vals, 1.0) == 4.0

    def test_median_interpolates(self):
        assert percentile([1.0, 2.0, 3.0, 4.0], 0.5) == 2.5

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty set"):
            percentile([], 0.5)

    def test_fraction_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            percentile([1.0], 1.5)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50),
           st.floats(0.0, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_stays_within_range(self, vals, q):
        p = percentile(vals, q)
        assert min(vals) <= p <= max(vals)


class TestRng:
    def test_equal_seeds_equal_streams(self):
        a = make_rng(42).uniform(size=10_000)
        b = make_rng(42).uniform(size=10_000)
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        a = make_rng(1).uniform(size=100)
        b = make_rng(2).uniform(size=100)
        assert not np.array_equal(a, b)
