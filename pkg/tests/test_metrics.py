import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdlp_dereverb import metrics, roomsim, synthetic
from fdlp_dereverb.exceptions import DegenerateInputError, InvalidArgumentError
from fdlp_dereverb.sigproc import AudioSignal


def reverberant(clean, t60, seed):
    rir = roomsim.rir_generate(roomsim.ReverbSpec(t60, None, seed))
    return roomsim.apply_reverb(clean, rir)


class TestSrmr:
    def test_silence_is_degenerate(self):
        with pytest.raises(DegenerateInputError):
            metrics.srmr(AudioSignal(np.zeros(16000)))

    def test_too_short(self):
        with pytest.raises(InvalidArgumentError):
            metrics.srmr(AudioSignal(np.ones(15999)))

    @given(st.integers(0, 10_000))
    def test_positive_and_finite(self, seed):
        score = metrics.srmr(synthetic.white_noise(seed, rms=10.0 ** (-seed % 5)))
        assert np.isfinite(score) and score > 0

    @pytest.mark.parametrize("c", [1e-3, 0.3, 7.0])
    def test_scale_invariant(self, c):
        x = synthetic.speech_like(2)
        scaled = AudioSignal(c * x.samples)
        assert metrics.srmr(scaled) == pytest.approx(metrics.srmr(x), rel=1e-6)

    def test_modulation_peak_follows_am_rate(self):
        cfg = metrics.SrmrConfig()
        centers = np.asarray(cfg.modulation_band_centers)
        for k in (1, 3, 5):
            tone = synthetic.am_tone(1000.0, mod_hz=round(centers[k]), depth=0.8, duration=2.0)
            energy = metrics.modulation_energies(tone)[7]
            assert np.argmax(energy) == k

    def test_mean_decreases_with_t60(self):
        means = []
        for t60 in (0.2, 0.4, 0.6, 0.8):
            means.append(np.mean([metrics.srmr(reverberant(synthetic.speech_like(s), t60, 100 + s))
                                  for s in range(20)]))
        assert np.all(np.diff(means) < 0)
        assert np.mean([metrics.srmr(synthetic.speech_like(s)) for s in range(20)]) > means[0]

    def test_config_validation(self):
        with pytest.raises(InvalidArgumentError):
            metrics.SrmrConfig(modulation_band_centers=(4.0, 2.0, 8.0))
        with pytest.raises(InvalidArgumentError):
            metrics.SrmrConfig(low_band_count=8)


class TestSegmentalSnr:
    def test_identical_hits_ceiling(self, rng):
        x = rng.standard_normal(16000)
        assert metrics.segmental_snr(x, x) == 35.0

    def test_constructed_noise(self, rng):
        x = rng.standard_normal(16000)
        noise = rng.standard_normal(16000)
        noise *= np.sqrt(np.mean(x ** 2) / np.mean(noise ** 2) / 10.0)
        assert metrics.segmental_snr(x, x + noise) == pytest.approx(10.0, abs=1.0)

    def test_zero_reference_frames_skipped(self, rng):
        x = rng.standard_normal(16000)
        x[:512] = 0
        y = x.copy()
        y[:512] = 1.0
        assert metrics.segmental_snr(x, y) == 35.0

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            metrics.segmental_snr(np.ones(100), np.ones(99))


class TestLogSpectralDistance:
    def test_identical(self, rng):
        a = rng.uniform(0.1, 3, (4, 10))
        assert metrics.log_spectral_distance(a, a) == 0

    def test_constant_ratio(self, rng):
        a = rng.uniform(0.1, 3, (4, 10))
        assert metrics.log_spectral_distance(a, 4 * a) == pytest.approx(np.log(4), rel=1e-12)

    def test_direct_sum(self, rng):
        a, b = rng.uniform(0.01, 5, (2, 37))
        total = 0.0
        for x, y in zip(a, b):
            total += (np.log(x) - np.log(y)) ** 2
        assert metrics.log_spectral_distance(a, b) == pytest.approx(np.sqrt(total / 37))

    def test_non_positive(self):
        with pytest.raises(InvalidArgumentError):
            metrics.log_spectral_distance([1.0, 0.0], [1.0, 1.0])


class TestReport:
    def test_means_and_files(self, tmp_path):
        report = metrics.MetricReport()
        report.add("a.wav", {"srmr": 1.0, "segsnr": 10.0})
        report.add("b.wav", {"srmr": 3.0, "segsnr": 20.0})
        assert report.means() == {"srmr": 2.0, "segsnr": 15.0}
        table, summary = report.write(tmp_path / "r.tsv")
        assert table.read_text().splitlines()[0] == "item\tsrmr\tsegsnr"
        assert "mean.srmr = 2.0" in summary.read_text()
        assert "count = 2" in summary.read_text()

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidArgumentError):
            metrics.MetricReport().add("x", {"srmr": float("nan")})
