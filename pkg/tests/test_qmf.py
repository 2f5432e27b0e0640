import numpy as np
import pytest

from fdlp_dereverb import qmf
from fdlp_dereverb.exceptions import InvalidArgumentError
from fdlp_dereverb.sigproc import snr_db

FS = 16000


@pytest.fixture(scope="module")
def proto():
    return qmf.design_prototype()


def tone(freq, n=FS):
    return np.cos(2 * np.pi * freq * np.arange(n) / FS + 0.3)


class TestPrototype:
    def test_lowpass_edges(self, proto):
        _, h0, _ = proto.frequency_response(1024)
        assert abs(h0[0]) == pytest.approx(1.0, abs=0.01)
        assert abs(h0[-1]) == pytest.approx(0.0, abs=0.01)

    def test_power_complementarity_by_sweep(self, proto):
        # independent sweep through numpy's polynomial evaluation
        omega = np.linspace(0, np.pi, 2001)
        z = np.exp(-1j * omega)
        h0 = np.polyval(proto.h0[::-1], z)
        h1 = np.polyval(proto.h1[::-1], z)
        assert np.max(np.abs(np.abs(h0) ** 2 + np.abs(h1) ** 2 - 1)) <= 0.02
        assert qmf.power_complementarity_error(proto) <= 0.02

    def test_mirror_and_symmetry(self, proto):
        assert proto.n_taps == 32
        np.testing.assert_array_equal(proto.h0, proto.h0[::-1])
        np.testing.assert_allclose(proto.h1, proto.h0 * (-1.0) ** np.arange(32))

    def test_rejects_odd_length(self):
        with pytest.raises(InvalidArgumentError):
            qmf.QmfPrototype(np.ones(5))


class TestAnalyze:
    def test_shape_is_critically_sampled(self, rng):
        frame = qmf.analyze(rng.standard_normal(FS))
        assert frame.shape == (64, 250)
        assert frame.size == FS

    def test_band_10_tone_concentrates_in_neighbours(self):
        energy = np.sum(qmf.analyze(tone(qmf.band_centers()[10])) ** 2, axis=1)
        assert energy[9:12].sum() / energy.sum() >= 0.8

    def test_argmax_band_for_every_center(self):
        centers = qmf.band_centers()
        tones = np.stack([tone(f) for f in centers])
        energy = np.sum(qmf.analyze(tones) ** 2, axis=-1)
        np.testing.assert_array_equal(np.argmax(energy, axis=1), np.arange(64))

    def test_zero_segment(self):
        assert not np.any(qmf.analyze(np.zeros(FS)))

    def test_white_noise_energy_preserved(self, rng):
        x = rng.standard_normal((10, FS))
        ratio_db = 10 * np.log10(np.sum(qmf.analyze(x) ** 2) / np.sum(x ** 2))
        assert abs(ratio_db) <= 1.0

    def test_linear(self, rng):
        x, y = rng.standard_normal((2, FS))
        lhs = qmf.analyze(1.5 * x - 2.0 * y)
        np.testing.assert_allclose(lhs, 1.5 * qmf.analyze(x) - 2.0 * qmf.analyze(y), atol=1e-9)

    def test_length_must_divide(self):
        with pytest.raises(InvalidArgumentError):
            qmf.analyze(np.zeros(1000))

    def test_smaller_tree(self, rng):
        x = rng.standard_normal(512)
        frame = qmf.analyze(x, n_bands=8)
        assert frame.shape == (8, 64)
        assert snr_db(x, qmf.synthesize(frame)) >= 50


class TestSynthesize:
    def test_round_trip(self, rng):
        x = rng.standard_normal((5, FS))
        y = qmf.synthesize(qmf.analyze(x))
        for a, b in zip(x, y):
            assert snr_db(a, b) >= 50

    def test_zero_frame(self):
        assert not np.any(qmf.synthesize(np.zeros((64, 250))))

    def test_linear(self, rng):
        a, b = rng.standard_normal((2, 64, 250))
        np.testing.assert_allclose(qmf.synthesize(a + b),
                                   qmf.synthesize(a) + qmf.synthesize(b), atol=1e-9)

    def test_band_count_must_be_power_of_two(self):
        with pytest.raises(InvalidArgumentError):
            qmf.synthesize(np.zeros((63, 250)))
