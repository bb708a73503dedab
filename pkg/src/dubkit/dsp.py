"""Frame-level feature extraction.

STFT magnitudes, HTK-mel log spectrograms, MFCCs, per-frame energy and a
YIN-style pitch tracker. All extractors are pure functions: the same
input always produces bit-identical output.
"""

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps
from scipy.fft import dct, irfft, rfft


@dataclass(frozen=True)
class FrameParams:
    """Analysis framing: FFT size, hop and Hann window length, in samples."""

    fft_size: int = 1024
    hop: int = 256
    win_length: int = 1024
    window: str = "hann"

    def __post_init__(self):
        if not 0 < self.hop <= self.win_length <= self.fft_size:
            raise ValueError(
                f"need 0 < hop <= win_length <= fft_size, got "
                f"hop={self.hop}, win={self.win_length}, fft={self.fft_size}"
            )
        if self.window != "hann":
            raise ValueError(f"unsupported window {self.window!r}")


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """T x (fft_size/2 + 1) nonnegative STFT magnitudes."""

    frames: np.ndarray
    params: FrameParams
    sample_rate: int

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_rate(self) -> float:
        return self.sample_rate / self.params.hop

    def bin_frequencies(self) -> np.ndarray:
        return np.arange(self.frames.shape[1]) * self.sample_rate / self.params.fft_size


@dataclass(frozen=True, eq=False)
class MelSpectrogram:
    """T x n_mels log filterbank energies, floored at log(floor)."""

    frames: np.ndarray
    n_mels: int
    fmin: float
    fmax: float
    floor: float
    frame_rate: float

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True, eq=False)
class MfccSequence:
    """T x K cepstral coefficient matrix."""

    frames: np.ndarray
    frame_rate: float

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_coeffs(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True, eq=False)
class PitchTrack:
    """Per-frame fundamental frequency in Hz; 0 marks an unvoiced frame."""

    values: np.ndarray
    frame_rate: float


@dataclass(frozen=True, eq=False)
class EnergyTrack:
    """Per-frame L2 norm of the magnitude spectrum."""

    values: np.ndarray
    frame_rate: float


def _frame(x: np.ndarray, frame_length: int, hop: int) -> np.ndarray:
    """Centered framing: reflect-pad frame_length//2 on both ends."""
    pad = frame_length // 2
    padded = np.pad(x, pad, mode="reflect")
    n_frames = 1 + (len(padded) - frame_length) // hop
    frames = np.lib.stride_tricks.sliding_window_view(padded, frame_length)[::hop]
    return frames[:n_frames]


def stft_magnitude(w, p: FrameParams = FrameParams()) -> Spectrogram:
    """Magnitude spectrogram of a mono waveform."""
    x = w.mono_samples()
    if len(x) == 0:
        raise ValueError("cannot analyze an empty waveform")
    window = sps.get_window("hann", p.win_length, fftbins=True)
    frames = _frame(x, p.win_length, p.hop) * window
    mags = np.abs(rfft(frames, n=p.fft_size, axis=1))
    return Spectrogram(mags, p, w.sample_rate)


def hz_to_mel(f):
    """HTK mel scale."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(sample_rate: int, fft_size: int, n_mels: int,
                   fmin: float, fmax: float) -> np.ndarray:
    """Triangular HTK-mel filterbank, shape (n_mels, fft_size//2 + 1)."""
    if not 0 <= fmin < fmax <= sample_rate / 2:
        raise ValueError(f"need 0 <= fmin < fmax <= sr/2, got fmin={fmin}, fmax={fmax}")
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    bin_freqs = np.arange(fft_size // 2 + 1) * sample_rate / fft_size
    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (bin_freqs - lower) / (center - lower)
    falling = (upper - bin_freqs) / (upper - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def mel_band_centers(n_mels: int, fmin: float, fmax: float) -> np.ndarray:
    """Center frequency (Hz) of each mel band."""
    return mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))[1:-1]


def mel_spectrogram(s: Spectrogram, n_mels: int = 80, fmin: float = 0.0,
                    fmax: float = 8000.0, floor: float = 1e-10) -> MelSpectrogram:
    """Log mel power spectrogram: log(max(floor, filterbank @ magnitude^2))."""
    fb = mel_filterbank(s.sample_rate, s.params.fft_size, n_mels, fmin, fmax)
    power = s.frames**2
    mel_power = power @ fb.T
    frames = np.log(np.maximum(floor, mel_power))
    return MelSpectrogram(frames, n_mels, fmin, fmax, floor, s.frame_rate)


def mfcc(m: MelSpectrogram, n_coeffs: int = 13, include_zeroth: bool = False) -> MfccSequence:
    """Orthonormal DCT-II of the log-mel frames.

    Keeps coefficients 1..n_coeffs; the 0th (frame log energy) is dropped
    unless ``include_zeroth`` is set, in which case 0..n_coeffs-1 are kept.
    """
    if not 1 <= n_coeffs <= m.n_mels:
        raise ValueError(f"n_coeffs must be in [1, {m.n_mels}], got {n_coeffs}")
    cepstra = dct(m.frames, type=2, norm="ortho", axis=1)
    if include_zeroth:
        frames = cepstra[:, :n_coeffs]
    else:
        frames = cepstra[:, 1 : n_coeffs + 1]
    return MfccSequence(frames, m.frame_rate)


def energy_track(s: Spectrogram) -> EnergyTrack:
    """L2 norm of each magnitude frame."""
    return EnergyTrack(np.sqrt((s.frames**2).sum(axis=1)), s.frame_rate)


def pitch_track(w, f_min: float = 50.0, f_max: float = 600.0,
                voicing_threshold: float = 0.15, frame_length: int = 2048,
                hop: int = 256) -> PitchTrack:
    """YIN pitch track of a mono waveform.

    Computes the cumulative-mean-normalized difference function per frame,
    takes the trough of its first dip below ``voicing_threshold`` inside
    [f_min, f_max], and refines the lag by parabolic interpolation. Frames
    with no dip below the threshold are unvoiced and report 0. The longest
    measurable period is frame_length/2 samples, which caps how low f_min
    can effectively reach.
    """
    x = w.mono_samples()
    sr = w.sample_rate
    if not 0 < f_min < f_max <= sr / 2:
        raise ValueError(f"need 0 < f_min < f_max <= sr/2, got [{f_min}, {f_max}]")
    if len(x) == 0:
        raise ValueError("cannot analyze an empty waveform")

    win = frame_length // 2
    tau_min = max(1, int(np.ceil(sr / f_max)))
    tau_max = min(win, int(np.floor(sr / f_min)))
    if tau_min >= tau_max:
        raise ValueError(f"band [{f_min}, {f_max}] Hz is degenerate at rate {sr}")

    frames = _frame(x, frame_length, hop)
    n_frames = len(frames)

    # difference function d[t, tau] = e0 + e_tau - 2 * xcorr(tau), batched over frames
    n_fft = 2 * frame_length
    spec_full = rfft(frames, n=n_fft, axis=1)
    spec_head = rfft(frames[:, :win], n=n_fft, axis=1)
    xcorr = irfft(spec_full * spec_head.conj(), n=n_fft, axis=1)[:, : tau_max + 1]
    sq = np.cumsum(frames**2, axis=1)
    e0 = sq[:, win - 1]
    e_tau = np.empty((n_frames, tau_max + 1))
    e_tau[:, 0] = e0
    e_tau[:, 1:] = sq[:, win : win + tau_max] - sq[:, :tau_max]
    diff = np.maximum(e0[:, None] + e_tau - 2.0 * xcorr, 0.0)

    # cumulative-mean normalization; silent frames get the unvoiced value 1
    taus = np.arange(1, tau_max + 1, dtype=np.float64)
    running = np.cumsum(diff[:, 1:], axis=1)
    cmnd = np.ones_like(diff)
    np.divide(diff[:, 1:] * taus, running, out=cmnd[:, 1:], where=running > 0)

    values = np.zeros(n_frames)
    for t in range(n_frames):
        d = cmnd[t]
        below = np.nonzero(d[tau_min : tau_max + 1] < voicing_threshold)[0]
        if len(below) == 0:
            continue
        tau = tau_min + below[0]
        while tau + 1 <= tau_max and d[tau + 1] < d[tau]:
            tau += 1
        # parabolic refinement of the trough
        shift = 0.0
        if 0 < tau < tau_max:
            a, b, c = d[tau - 1], d[tau], d[tau + 1]
            denom = a - 2.0 * b + c
            if denom > 0:
                shift = 0.5 * (a - c) / denom
        values[t] = min(max(sr / (tau + shift), f_min), f_max)

    return PitchTrack(values, sr / hop)


def pitch_stats(tracks, include_unvoiced: bool = False) -> tuple[float, float]:
    """Pooled population mean and variance of pitch values across tracks.

    Unvoiced (0 Hz) frames are dropped unless ``include_unvoiced`` is set.
    """
    pooled = np.concatenate([np.asarray(t.values, dtype=np.float64) for t in tracks]) \
        if tracks else np.array([])
    if not include_unvoiced:
        pooled = pooled[pooled > 0]
    if pooled.size == 0:
        raise ValueError("no pitch frames retained")
    return float(pooled.mean()), float(pooled.var())


def format_pitch_stats(mean: float, variance: float) -> str:
    """Render pitch statistics as 'mean ± variance' with two decimals."""
    return f"{mean:.2f} ± {variance:.2f}"
