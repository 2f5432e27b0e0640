import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdlp_dereverb.exceptions import InvalidArgumentError
from fdlp_dereverb.sigproc import (AudioSignal, SegmentGrid, analytic_signal, convolve, dct_ii,
                                   desegment, hilbert_envelope, idct_ii, segment, snr_db)


def direct_dct(x):
    n = len(x)
    k = np.arange(n)[:, None]
    basis = np.cos(np.pi * k * (2 * np.arange(n)[None, :] + 1) / (2 * n))
    scale = np.full(n, np.sqrt(2.0 / n))
    scale[0] = np.sqrt(1.0 / n)
    return scale * (basis @ x)


def direct_convolve(a, b):
    out = np.zeros(len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


class TestDct:
    def test_constant_vector_concentrates_in_dc(self):
        c = dct_ii(np.ones(8))
        assert c[0] == pytest.approx(np.sqrt(8))
        assert np.max(np.abs(c[1:])) < 1e-12

    def test_matches_direct_cosine_sum(self, rng):
        x = rng.standard_normal(64)
        np.testing.assert_allclose(dct_ii(x), direct_dct(x), atol=1e-9)

    def test_inverse_of_impulse_is_constant_half(self):
        np.testing.assert_allclose(idct_ii([1.0, 0, 0, 0]), np.full(4, 0.5), atol=1e-15)
        # orthonormal, so the inverse is the transposed direct basis
        basis = np.column_stack([direct_dct(e) for e in np.eye(4)])
        np.testing.assert_allclose(basis.T @ [1, 0, 0, 0],
                                   np.full(4, 0.5), atol=1e-12)

    def test_inverse_of_zeros(self):
        assert np.all(idct_ii(np.zeros(16)) == 0)

    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=300))
    def test_round_trip_and_parseval(self, values):
        x = np.array(values)
        np.testing.assert_allclose(idct_ii(dct_ii(x)), x, atol=1e-10 * max(1, np.abs(x).max()))
        assert np.linalg.norm(dct_ii(x)) == pytest.approx(np.linalg.norm(x), rel=1e-10, abs=1e-12)

    def test_rejects_empty(self):
        with pytest.raises(InvalidArgumentError):
            dct_ii([])


class TestConvolve:
    def test_impulse_identity(self, rng):
        a = rng.standard_normal(100)
        np.testing.assert_array_equal(convolve(a, [1.0]), a)

    def test_small_case(self):
        np.testing.assert_allclose(convolve([1, 1], [1, 1]), [1, 2, 1])

    def test_matches_direct_sum(self, rng):
        a, b = rng.standard_normal(500), rng.standard_normal(300)
        ref = direct_convolve(a, b)
        assert np.max(np.abs(convolve(a, b) - ref)) <= 1e-9 * np.max(np.abs(ref))

    def test_bilinear(self, rng):
        a, b, c = rng.standard_normal((3, 400))
        lhs = convolve(2.5 * a - 0.7 * b, c)
        rhs = 2.5 * convolve(a, c) - 0.7 * convolve(b, c)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_empty_operand(self):
        with pytest.raises(InvalidArgumentError):
            convolve([], [1.0])


class TestHilbertEnvelope:
    def test_zero_signal(self):
        assert np.all(hilbert_envelope(np.zeros(128)) == 0)

    def test_cosine_interior_level(self):
        n = np.arange(1000)
        env = hilbert_envelope(0.5 * np.cos(2 * np.pi * 0.1234 * n))
        np.testing.assert_allclose(env[100:-100], 0.25, rtol=0.05)

    def test_am_tone_tracks_squared_modulator(self):
        t = np.arange(16000) / 16000
        mod = 1 + 0.5 * np.cos(2 * np.pi * 4 * t)
        env = hilbert_envelope(mod * np.cos(2 * np.pi * 1000 * t))
        assert np.corrcoef(env[800:-800], mod[800:-800] ** 2)[0, 1] >= 0.99

    def test_analytic_signal_matches_one_sided_spectrum(self, rng):
        x = rng.standard_normal(257)
        z = analytic_signal(x)
        np.testing.assert_allclose(z.real, x, atol=1e-12)
        spectrum = np.fft.fft(z)
        freqs = np.fft.fftfreq(len(x))
        assert np.max(np.abs(spectrum[freqs < 0])) < 1e-9

    def test_quadratic_in_gain(self, rng):
        x = rng.standard_normal(300)
        np.testing.assert_allclose(hilbert_envelope(3.0 * x), 9.0 * hilbert_envelope(x), rtol=1e-9)


class TestSegmentation:
    def test_exact_length_gives_one_segment(self):
        segs = segment(AudioSignal(np.ones(16000)))
        assert segs.shape == (1, 16000)

    def test_one_extra_sample_pads(self):
        segs = segment(AudioSignal(np.ones(16001)))
        assert segs.shape == (2, 16000)
        assert np.count_nonzero(segs[1] == 0) == 15999

    @given(st.integers(1, 3 * 160))
    def test_round_trip_is_exact(self, length):
        x = np.random.default_rng(length).standard_normal(length)
        grid = SegmentGrid(160)
        np.testing.assert_array_equal(desegment(segment(AudioSignal(x), grid), length), x)

    def test_full_size_round_trip(self, rng):
        x = rng.standard_normal(40000)
        np.testing.assert_array_equal(desegment(segment(AudioSignal(x)), len(x)), x)


class TestAudioSignal:
    def test_samples_are_read_only(self):
        sig = AudioSignal(np.zeros(10))
        with pytest.raises(ValueError):
            sig.samples[0] = 1.0

    @pytest.mark.parametrize("samples", [np.zeros((2, 2)), np.array([0.0, np.nan])])
    def test_rejects_bad_samples(self, samples):
        with pytest.raises(InvalidArgumentError):
            AudioSignal(samples)

    def test_snr_of_exact_copy_is_infinite(self, rng):
        x = rng.standard_normal(100)
        assert snr_db(x, x) == np.inf
        assert snr_db(x, 1.1 * x) == pytest.approx(20.0)
