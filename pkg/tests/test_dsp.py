import numpy as np
import pytest
from scipy.fft import idct

from dubkit.audio import Waveform
from dubkit.dsp import (EnergyTrack, FrameParams, MelSpectrogram, PitchTrack,
                        Spectrogram, energy_track, format_pitch_stats,
                        mel_band_centers, mel_filterbank, mel_spectrogram, mfcc,
                        pitch_stats, pitch_track, stft_magnitude)

from helpers import make_sawtooth, make_tone, textbook_mfcc

SR = 22050


def tone_wave(freq, duration=0.5, amplitude=0.8):
    return Waveform(make_tone(freq, duration, SR, amplitude), SR)


class TestFrameParams:
    def test_defaults_valid(self):
        p = FrameParams()
        assert (p.fft_size, p.hop, p.win_length) == (1024, 256, 1024)

    @pytest.mark.parametrize("fft,hop,win", [(1024, 0, 1024), (1024, 2048, 1024),
                                             (512, 256, 1024), (1024, 256, 0)])
    def test_bad_framing_rejected(self, fft, hop, win):
        with pytest.raises(ValueError):
            FrameParams(fft_size=fft, hop=hop, win_length=win)


class TestStft:
    def test_zero_waveform_gives_zero_magnitudes(self):
        spec = stft_magnitude(Waveform(np.zeros(4000), SR))
        assert np.all(spec.frames == 0.0)

    def test_frame_count(self):
        spec = stft_magnitude(Waveform(np.zeros(4096), SR))
        assert spec.n_frames == 1 + 4096 // 256
        assert spec.frames.shape[1] == 513

    def test_sine_peak_bin(self):
        # bin = round(f * fft / sr) = round(46.44) = 46 for 1000 Hz
        spec = stft_magnitude(tone_wave(1000))
        interior = spec.frames[4:-4]
        assert np.all(np.argmax(interior, axis=1) == 46)

    def test_linear_in_amplitude(self):
        w1 = tone_wave(500, amplitude=0.4)
        w2 = Waveform(w1.samples * 2.0, SR)
        s1 = stft_magnitude(w1)
        s2 = stft_magnitude(w2)
        assert np.allclose(s2.frames, 2.0 * s1.frames, rtol=1e-12, atol=1e-12)

    def test_empty_waveform_rejected(self):
        with pytest.raises(ValueError):
            stft_magnitude(Waveform(np.array([]), SR))

    def test_deterministic(self):
        w = tone_wave(440)
        assert np.array_equal(stft_magnitude(w).frames, stft_magnitude(w).frames)


class TestMel:
    def test_silence_hits_log_floor(self):
        spec = stft_magnitude(Waveform(np.zeros(3000), SR))
        mel = mel_spectrogram(spec, floor=1e-10)
        assert np.all(mel.frames == np.log(1e-10))

    def test_filterbank_rows_triangular(self):
        fb = mel_filterbank(SR, 1024, 80, 0.0, 8000.0)
        assert fb.shape == (80, 513)
        assert np.all(fb >= 0.0)
        assert np.all(fb.sum(axis=1) > 0.0)
        for row in fb:
            support = np.nonzero(row)[0]
            assert np.array_equal(support, np.arange(support[0], support[-1] + 1))
            peak = np.argmax(row)
            assert np.all(np.diff(row[support[0]:peak + 1]) >= 0)
            assert np.all(np.diff(row[peak:support[-1] + 1]) <= 0)

    def test_tone_lands_on_nearest_band(self):
        mel = mel_spectrogram(stft_magnitude(tone_wave(440)))
        centers = mel_band_centers(80, 0.0, 8000.0)
        expected = int(np.argmin(np.abs(centers - 440.0)))
        interior = mel.frames[4:-4]
        assert np.all(np.argmax(interior, axis=1) == expected)

    def test_band_edges_validated(self):
        spec = stft_magnitude(tone_wave(440))
        with pytest.raises(ValueError):
            mel_spectrogram(spec, fmin=4000.0, fmax=3000.0)
        with pytest.raises(ValueError):
            mel_spectrogram(spec, fmax=SR)  # above Nyquist

    def test_frame_count_preserved(self):
        spec = stft_magnitude(tone_wave(440))
        assert mel_spectrogram(spec).n_frames == spec.n_frames


class TestMfcc:
    def test_constant_logmel_has_no_ac_coefficients(self):
        frames = np.full((5, 80), 3.7)
        mel = MelSpectrogram(frames, 80, 0.0, 8000.0, 1e-10, SR / 256)
        out = mfcc(mel, 13)
        assert np.all(np.abs(out.frames) < 1e-9)

    def test_output_shape(self):
        mel = mel_spectrogram(stft_magnitude(tone_wave(440)))
        out = mfcc(mel, 13)
        assert out.frames.shape == (mel.n_frames, 13)
        assert out.n_coeffs == 13

    def test_k_out_of_range(self):
        mel = mel_spectrogram(stft_magnitude(tone_wave(440)))
        with pytest.raises(ValueError):
            mfcc(mel, 0)
        with pytest.raises(ValueError):
            mfcc(mel, 81)

    def test_matches_textbook_oracle(self):
        spec = stft_magnitude(tone_wave(440, duration=0.2))
        mel = mel_spectrogram(spec, 40, 0.0, 8000.0)
        ours = mfcc(mel, 13).frames
        oracle = textbook_mfcc(spec.frames**2, SR, 1024, 40, 0.0, 8000.0, 13)
        assert np.linalg.norm(ours - oracle) / np.linalg.norm(oracle) < 1e-6

    def test_include_zeroth_keeps_dc(self):
        frames = np.full((3, 20), 2.0)
        mel = MelSpectrogram(frames, 20, 0.0, 8000.0, 1e-10, SR / 256)
        out = mfcc(mel, 4, include_zeroth=True)
        assert np.all(np.abs(out.frames[:, 0] - 2.0 * np.sqrt(20)) < 1e-12)
        assert np.all(np.abs(out.frames[:, 1:]) < 1e-12)

    def test_full_dct_inverts_to_mel_power(self):
        spec = stft_magnitude(tone_wave(300, duration=0.1))
        mel = mel_spectrogram(spec, 40, 0.0, 8000.0)
        cepstra = mfcc(mel, 40, include_zeroth=True)
        log_back = idct(cepstra.frames, type=2, norm="ortho", axis=1)
        power_back = np.exp(log_back)
        mel_power = np.exp(mel.frames)
        assert np.allclose(power_back, mel_power, rtol=1e-9, atol=1e-12)


class TestEnergy:
    def test_silence_energy_zero(self):
        spec = stft_magnitude(Waveform(np.zeros(3000), SR))
        assert np.all(energy_track(spec).values == 0.0)

    def test_three_four_five(self):
        frame = np.zeros((1, 513))
        frame[0, 10] = 3.0
        frame[0, 20] = 4.0
        spec = Spectrogram(frame, FrameParams(), SR)
        assert energy_track(spec).values[0] == pytest.approx(5.0, abs=1e-12)

    def test_linear_scaling(self):
        w = tone_wave(440)
        e1 = energy_track(stft_magnitude(w)).values
        e2 = energy_track(stft_magnitude(Waveform(0.5 * w.samples, SR))).values
        assert np.allclose(e2, 0.5 * e1, rtol=1e-9, atol=0)


class TestPitch:
    def test_silence_all_unvoiced(self):
        track = pitch_track(Waveform(np.zeros(SR), SR))
        assert np.all(track.values == 0.0)

    @pytest.mark.parametrize("freq", [100.0, 220.0, 440.0])
    def test_sine_within_one_percent(self, freq):
        track = pitch_track(tone_wave(freq, duration=1.0))
        interior = track.values[4:-4]
        voiced = interior[interior > 0]
        assert len(voiced) >= 0.9 * len(interior)
        close = np.abs(voiced - freq) <= 0.01 * freq
        assert close.mean() >= 0.9

    def test_sawtooth_no_octave_error(self):
        w = Waveform(make_sawtooth(100, 1.0, SR), SR)
        track = pitch_track(w)
        interior = track.values[4:-4]
        close = np.abs(interior - 100.0) <= 1.0
        assert close.mean() >= 0.9

    def test_values_zero_or_in_band(self, rng):
        w = Waveform(rng.uniform(-0.9, 0.9, SR), SR)
        track = pitch_track(w, f_min=50.0, f_max=600.0)
        voiced = track.values[track.values > 0]
        assert np.all((voiced >= 50.0) & (voiced <= 600.0))

    def test_degenerate_band_rejected(self):
        w = tone_wave(440)
        with pytest.raises(ValueError):
            pitch_track(w, f_min=600.0, f_max=600.0)
        with pytest.raises(ValueError):
            pitch_track(w, f_min=0.0, f_max=600.0)

    def test_deterministic(self):
        w = tone_wave(220)
        assert np.array_equal(pitch_track(w).values, pitch_track(w).values)


class TestPitchStats:
    def test_constant_track(self):
        track = PitchTrack(np.full(10, 100.0), SR / 256)
        assert pitch_stats([track]) == (100.0, 0.0)

    def test_population_variance_by_hand(self):
        track = PitchTrack(np.array([100.0, 0.0, 200.0]), SR / 256)
        mean, var = pitch_stats([track], include_unvoiced=False)
        assert mean == pytest.approx(150.0)
        assert var == pytest.approx(2500.0)  # population, not sample

    def test_include_unvoiced_pools_zeros(self):
        track = PitchTrack(np.array([100.0, 0.0, 200.0]), SR / 256)
        mean, var = pitch_stats([track], include_unvoiced=True)
        assert mean == pytest.approx(100.0)
        assert var == pytest.approx((100.0**2 + 0.0 + 100.0**2) / 3)

    def test_pooled_across_tracks(self):
        t1 = PitchTrack(np.array([100.0]), SR / 256)
        t2 = PitchTrack(np.array([200.0]), SR / 256)
        mean, var = pitch_stats([t1, t2])
        assert (mean, var) == (150.0, 2500.0)

    def test_nothing_retained_errors(self):
        track = PitchTrack(np.zeros(5), SR / 256)
        with pytest.raises(ValueError):
            pitch_stats([track])

    def test_report_rendering(self):
        assert format_pitch_stats(117.994, 16910.768) == "117.99 ± 16910.77"
        assert format_pitch_stats(100.0, 0.0) == "100.00 ± 0.00"


def test_energy_and_pitch_tracks_share_frame_rate():
    w = tone_wave(440)
    spec = stft_magnitude(w)
    assert energy_track(spec).frame_rate == pitch_track(w).frame_rate


def test_energy_track_type():
    spec = stft_magnitude(tone_wave(440))
    assert isinstance(energy_track(spec), EnergyTrack)
