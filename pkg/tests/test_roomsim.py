import numpy as np
import pytest

from fdlp_dereverb import roomsim, synthetic
from fdlp_dereverb.exceptions import InvalidArgumentError
from fdlp_dereverb.sigproc import AudioSignal
from fdlp_dereverb.wavio import read_wav, write_wav

from _cases import narrowband_model_errors


def direct_schroeder_db(r):
    energy = np.array([np.sum(r[n:] ** 2) for n in range(r.size)])
    return 10 * np.log10(energy / energy[0])


class TestRir:
    @pytest.mark.parametrize("t60", [0.2, 0.4, 0.5, 0.6, 0.8])
    def test_schroeder_slope(self, t60):
        rir = roomsim.rir_generate(roomsim.ReverbSpec(t60, seed=3))
        assert roomsim.decay_slope_db_per_s(rir) == pytest.approx(-60 / t60, rel=0.1)

    def test_schroeder_curve_matches_direct_sum(self):
        r = np.random.default_rng(0).standard_normal(300) * 0.99 ** np.arange(300)
        np.testing.assert_allclose(roomsim.schroeder_decay_db(r), direct_schroeder_db(r),
                                   atol=1e-9)

    def test_very_short_decay(self):
        rir = roomsim.rir_generate(roomsim.ReverbSpec(0.01, seed=1))
        energy = rir.samples ** 2
        assert energy[:160].sum() >= 0.99 * energy.sum()

    def test_seeded(self):
        spec = roomsim.ReverbSpec(0.5, seed=11)
        np.testing.assert_array_equal(roomsim.rir_generate(spec).samples,
                                      roomsim.rir_generate(spec).samples)
        other = roomsim.rir_generate(roomsim.ReverbSpec(0.5, seed=12))
        assert not np.array_equal(roomsim.rir_generate(spec).samples, other.samples)

    def test_invalid_t60(self):
        with pytest.raises(InvalidArgumentError):
            roomsim.ReverbSpec(0.0)


class TestSplit:
    def test_boundary_index(self):
        rir = roomsim.rir_generate(roomsim.ReverbSpec(0.4))
        early, late = roomsim.split_early_late(rir, 50)
        assert np.count_nonzero(early[800:]) == 0
        assert np.count_nonzero(late[:800]) == 0
        np.testing.assert_array_equal(early + late, rir.samples)

    def test_zero_boundary(self):
        rir = roomsim.rir_generate(roomsim.ReverbSpec(0.4))
        early, late = roomsim.split_early_late(rir, 0)
        assert not np.any(early)
        np.testing.assert_array_equal(late, rir.samples)

    def test_boundary_past_end(self):
        with pytest.raises(InvalidArgumentError):
            roomsim.split_early_late(roomsim.delta_rir(10), 50)


class TestApplyReverb:
    def test_delta_is_identity(self):
        clean = synthetic.speech_like(0)
        out = roomsim.apply_reverb(clean, roomsim.delta_rir())
        np.testing.assert_array_equal(out.samples, clean.samples)

    def test_delayed_delta_shifts(self):
        clean = synthetic.speech_like(1)
        out = roomsim.apply_reverb(clean, roomsim.delta_rir(delay=37))
        np.testing.assert_array_equal(out.samples[37:], clean.samples[:-37])
        assert not np.any(out.samples[:37])

    def test_snr_is_exact(self):
        clean = synthetic.speech_like(2, peak=0.2)
        rir = roomsim.rir_generate(roomsim.ReverbSpec(0.5, seed=4))
        reverb, s0 = roomsim.apply_reverb(clean, rir, return_scale=True)
        noisy, s1 = roomsim.apply_reverb(clean, rir, snr_db=20, seed=9, return_scale=True)
        dry = reverb.samples / s0
        noise = noisy.samples / s1 - dry
        measured = 10 * np.log10(np.mean(dry ** 2) / np.mean(noise ** 2))
        assert measured == pytest.approx(20.0, abs=0.1)

    def test_noise_stream_differs_from_rir_stream(self):
        rir = roomsim.rir_generate(roomsim.ReverbSpec(0.5, seed=5))
        silent_room = roomsim.apply_reverb(AudioSignal(np.full(16000, 1e-3)), roomsim.delta_rir(),
                                           snr_db=0.0, seed=5)
        noise = silent_room.samples - 1e-3
        assert abs(np.corrcoef(noise[1:200], rir.samples[1:200])[0, 1]) < 0.3

    def test_linear_without_noise(self, rng):
        a, b = (AudioSignal(0.001 * rng.standard_normal(8000)) for _ in range(2))
        rir = roomsim.rir_generate(roomsim.ReverbSpec(0.3, rir_length=0.3))
        lhs = roomsim.apply_reverb(AudioSignal(2 * a.samples - b.samples), rir).samples
        rhs = (2 * roomsim.apply_reverb(a, rir).samples - roomsim.apply_reverb(b, rir).samples)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_clipping_is_rescaled(self):
        out, scale = roomsim.apply_reverb(AudioSignal(np.full(1000, 0.9)),
                                          roomsim.rir_generate(roomsim.ReverbSpec(0.5)),
                                          return_scale=True)
        assert scale < 1 and np.max(np.abs(out.samples)) == pytest.approx(1.0)


class TestEnvelopeModel:
    def test_delta_rir_is_exact(self):
        clean = synthetic.am_tone(1300.0)
        assert roomsim.envelope_model_error(clean, roomsim.delta_rir(), 10) <= 1e-6

    def test_broadband_worse_than_narrowband(self):
        seeds = range(8)
        narrow = narrowband_model_errors(seeds=seeds).mean()
        broad = np.mean([
            roomsim.envelope_model_error(synthetic.white_noise(s),
                                         roomsim.rir_generate(roomsim.ReverbSpec(0.3, None, s)), 10)
            for s in seeds])
        assert broad > narrow

    def test_additivity_against_delta_baseline(self):
        clean = synthetic.am_tone(1300.0)
        assert roomsim.envelope_additivity_error(clean, roomsim.delta_rir(1000), 10) <= 1e-12
        errors = [roomsim.envelope_additivity_error(
            clean, roomsim.rir_generate(roomsim.ReverbSpec(t60, None, 2)), 10)
            for t60 in (0.3, 0.8)]
        # cross terms between early and late parts grow with the late energy
        assert 0 < errors[0] < errors[1] < 1.5

    def test_band_index_checked(self):
        with pytest.raises(InvalidArgumentError):
            roomsim.envelope_model_error(synthetic.am_tone(1300.0), roomsim.delta_rir(), 64)


class TestCorpus:
    @pytest.fixture
    def clean_dir(self, tmp_path):
        d = tmp_path / "clean"
        for i in range(10):
            write_wav(d / f"utt{i:02d}.wav", synthetic.speech_like(i, duration=0.5))
        return d

    def test_cross_pairing_counts(self, clean_dir, tmp_path):
        specs = [roomsim.ReverbSpec(t, seed=k) for k, t in enumerate((0.2, 0.5, 0.8))]
        records = roomsim.build_corpus(clean_dir, specs, tmp_path / "out")
        assert len(records) == 30
        manifest = roomsim.read_manifest(tmp_path / "out" / "manifest.tsv")
        assert len(manifest) == 30
        assert {r.t60 for r in manifest} <= set(roomsim.DEFAULT_T60_SET)
        first = manifest[0]
        assert len(read_wav(first.clean_path)) == len(read_wav(first.reverb_path))

    def test_rerun_is_byte_identical(self, clean_dir, tmp_path):
        specs = [roomsim.ReverbSpec(0.6, seed=4)]
        roomsim.build_corpus(clean_dir, specs, tmp_path / "a")
        roomsim.build_corpus(clean_dir, specs, tmp_path / "b")
        for f in sorted((tmp_path / "a" / "reverb").iterdir()):
            assert f.read_bytes() == (tmp_path / "b" / "reverb" / f.name).read_bytes()

    def test_zip_pairing_and_skips(self, clean_dir, tmp_path):
        from scipy.io import wavfile
        wavfile.write(clean_dir / "zz_8k.wav", 8000, np.zeros(800, np.float32))
        specs = [roomsim.ReverbSpec(t, seed=i) for i, t in enumerate(roomsim.DEFAULT_T60_SET)]
        records = roomsim.build_corpus(clean_dir, specs, tmp_path / "z", pairing="zip")
        assert len(records) == 10
        assert [r.t60 for r in records[:8]] == list(roomsim.DEFAULT_T60_SET) + [0.2]

    def test_manifest_round_trip(self, tmp_path):
        recs = [roomsim.ManifestRecord("c.wav", "r.wav", 0.3, None, 4),
                roomsim.ManifestRecord("/abs/c.wav", "r2.wav", 0.7, 20.0, 5)]
        roomsim.write_manifest(tmp_path / "m.tsv", recs)
        back = roomsim.read_manifest(tmp_path / "m.tsv")
        assert back[0].snr_db is None and back[1].snr_db == 20.0
        assert back[0].clean_path == str(tmp_path / "c.wav")
        assert back[1].clean_path == "/abs/c.wav"

    def test_malformed_manifest(self, tmp_path):
        (tmp_path / "m.tsv").write_text("a\tb\t0.3\n")
        with pytest.raises(InvalidArgumentError, match="m.tsv:1"):
            roomsim.read_manifest(tmp_path / "m.tsv")
