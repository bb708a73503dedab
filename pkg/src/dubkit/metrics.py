"""Objective speech metrics: MCD, DTW-aligned MCD, and its length-weighted
variant, plus pair and corpus evaluation drivers.

The frame distance is plain Euclidean over cepstral vectors. The plain MCD
averages frame distances positionally and requires equal lengths (the pair
driver zero-pads the shorter waveform first); the DTW variants align the
sequences with the classic three-step dynamic program and normalize by the
alignment path length R. The length-weighted score additionally multiplies
by eta = max(M, N) / min(M, N), penalizing duration mismatch.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .audio import Waveform, read_wav, resample, to_mono, pad_to_length
from .dsp import FrameParams, mel_spectrogram, mfcc, stft_magnitude

# 10 * sqrt(2) / ln(10), the dB constant used by most MCD tools
CONVENTIONAL_SCALE = 10.0 * math.sqrt(2.0) / math.log(10.0)


@dataclass(frozen=True, eq=False)
class AlignmentResult:
    """Optimal monotone alignment of two cepstral sequences.

    ``cost`` is the minimal cumulative frame distance, ``path`` the list of
    0-based (i, j) index pairs from (0, 0) to (m-1, n-1) with steps in
    {(1,1), (1,0), (0,1)}; ``path_len`` is the R in cost / R.
    """

    cost: float
    path: np.ndarray
    m: int
    n: int

    @property
    def path_len(self) -> int:
        return len(self.path)


@dataclass(frozen=True)
class PairMetrics:
    """Metric row for one generated/reference pair."""

    mcd: float
    mcd_dtw: float
    mcd_dtw_sl: float
    eta: float
    m_frames: int
    n_frames: int
    pair_id: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.pair_id,
            "mcd": self.mcd,
            "mcd_dtw": self.mcd_dtw,
            "mcd_dtw_sl": self.mcd_dtw_sl,
            "eta": self.eta,
            "m_frames": self.m_frames,
            "n_frames": self.n_frames,
        }


@dataclass(frozen=True)
class MetricReport:
    """Per-pair rows in manifest order plus arithmetic-mean aggregates."""

    rows: list
    failures: list = field(default_factory=list)

    def aggregate(self) -> dict:
        agg = {"mcd": None, "mcd_dtw": None, "mcd_dtw_sl": None,
               "n_pairs": len(self.rows), "n_failures": len(self.failures)}
        if self.rows:
            for key in ("mcd", "mcd_dtw", "mcd_dtw_sl"):
                agg[key] = float(np.mean([getattr(r, key) for r in self.rows]))
        return agg

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "aggregate": self.aggregate(),
            "failures": [{"id": pid, "error": msg} for pid, msg in self.failures],
        }


@dataclass(frozen=True)
class PipelineConfig:
    """Feature and metric settings shared by pair and corpus evaluation."""

    sample_rate: int = 22050
    frame: FrameParams = FrameParams()
    n_mels: int = 80
    fmin: float = 0.0
    fmax: float = 8000.0
    n_coeffs: int = 13
    scale: str = "plain"  # or "conventional"
    pad_mode: str = "pad"  # or "strict"

    def to_dict(self) -> dict:
        return {
            "sample_rate": self.sample_rate,
            "fft_size": self.frame.fft_size,
            "hop": self.frame.hop,
            "win_length": self.frame.win_length,
            "n_mels": self.n_mels,
            "fmin": self.fmin,
            "fmax": self.fmax,
            "n_coeffs": self.n_coeffs,
            "scale": self.scale,
            "pad_mode": self.pad_mode,
        }


def frame_distance(c1: np.ndarray, c2: np.ndarray) -> float:
    """Euclidean distance between two coefficient vectors."""
    c1 = np.asarray(c1, dtype=np.float64)
    c2 = np.asarray(c2, dtype=np.float64)
    if c1.shape != c2.shape:
        raise ValueError(f"dimension mismatch: {c1.shape} vs {c2.shape}")
    return float(np.sqrt(((c1 - c2) ** 2).sum()))


def _coeff_matrix(c) -> np.ndarray:
    frames = c.frames if hasattr(c, "frames") else np.asarray(c, dtype=np.float64)
    if frames.ndim != 2:
        raise ValueError("coefficient sequence must be a T x K matrix")
    return np.asarray(frames, dtype=np.float64)


def mcd(c1, c2, scale: str = "plain") -> float:
    """Mean Euclidean frame distance between equal-length sequences.

    ``scale='conventional'`` multiplies by 10*sqrt(2)/ln(10) for
    comparability with dB-scaled MCD tools.
    """
    a, b = _coeff_matrix(c1), _coeff_matrix(c2)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"coefficient count mismatch: {a.shape[1]} vs {b.shape[1]}")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"frame count mismatch: {a.shape[0]} vs {b.shape[0]}; "
                         "pad upstream or use the DTW variants")
    if scale not in ("plain", "conventional"):
        raise ValueError(f"unknown scale {scale!r}")
    distances = np.sqrt(((a - b) ** 2).sum(axis=1))
    value = float(distances.mean())
    return value * CONVENTIONAL_SCALE if scale == "conventional" else value


def _distance_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # row-at-a-time keeps memory at O(M*N) and the arithmetic identical to
    # frame_distance (no a^2+b^2-2ab cancellation)
    out = np.empty((len(a), len(b)))
    for i in range(len(a)):
        out[i] = np.sqrt(((a[i] - b) ** 2).sum(axis=1))
    return out


def dtw_align(c1, c2) -> AlignmentResult:
    """Minimum-cost monotone alignment between two cepstral sequences.

    The cumulative cost gamma[i, j] = d(i, j) + min of the three
    predecessors; backtracking breaks ties preferring the diagonal step,
    then the vertical (i-1, j), then the horizontal (i, j-1), which yields
    the shortest path among equal-cost greedy backtracks.
    """
    a, b = _coeff_matrix(c1), _coeff_matrix(c2)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"coefficient count mismatch: {a.shape[1]} vs {b.shape[1]}")
    m, n = len(a), len(b)
    if m == 0 or n == 0:
        raise ValueError("cannot align an empty sequence")

    dist = _distance_matrix(a, b)
    gamma = np.empty((m, n))
    gamma[0, :] = np.cumsum(dist[0, :])
    gamma[:, 0] = np.cumsum(dist[:, 0])
    # sweep anti-diagonals: cells on i + j = s depend only on s-1 and s-2
    for s in range(2, m + n - 1):
        i = np.arange(max(1, s - n + 1), min(m - 1, s - 1) + 1)
        if len(i) == 0:
            continue
        j = s - i
        best = np.minimum(gamma[i - 1, j - 1], np.minimum(gamma[i - 1, j], gamma[i, j - 1]))
        gamma[i, j] = dist[i, j] + best

    path = [(m - 1, n - 1)]
    i, j = m - 1, n - 1
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, vert, horiz = gamma[i - 1, j - 1], gamma[i - 1, j], gamma[i, j - 1]
            if diag <= vert and diag <= horiz:
                i, j = i - 1, j - 1
            elif vert <= horiz:
                i -= 1
            else:
                j -= 1
        path.append((i, j))
    path.reverse()
    return AlignmentResult(float(gamma[m - 1, n - 1]), np.array(path, dtype=np.intp), m, n)


def mcd_dtw(a: AlignmentResult) -> float:
    """Alignment cost normalized by the path length R."""
    return a.cost / a.path_len


def mcd_dtw_sl(a: AlignmentResult) -> tuple[float, float]:
    """Length-weighted aligned MCD: (eta * cost / R, eta)."""
    if min(a.m, a.n) == 0:
        raise ValueError("alignment over an empty sequence")
    eta = max(a.m, a.n) / min(a.m, a.n)
    return eta * (a.cost / a.path_len), eta


def extract_mfcc(w: Waveform, cfg: PipelineConfig):
    """Waveform -> MFCC sequence under the pipeline settings."""
    spec = stft_magnitude(w, cfg.frame)
    mel = mel_spectrogram(spec, cfg.n_mels, cfg.fmin, cfg.fmax)
    return mfcc(mel, cfg.n_coeffs)


def evaluate_pair(gen: Waveform, ref: Waveform,
                  cfg: PipelineConfig = PipelineConfig()) -> PairMetrics:
    """All three metrics for one generated/reference waveform pair.

    Both waveforms must be mono; they are resampled to the pipeline rate if
    needed. For the plain MCD the shorter waveform is zero-padded in the
    time domain (pad_mode 'strict' errors on length mismatch instead); the
    DTW variants always run on the unpadded sequences.
    """
    gen = resample(gen, cfg.sample_rate)
    ref = resample(ref, cfg.sample_rate)

    if gen.n_frames == ref.n_frames:
        gen_padded, ref_padded = gen, ref
    elif cfg.pad_mode == "pad":
        longest = max(gen.n_frames, ref.n_frames)
        gen_padded = pad_to_length(gen, longest)
        ref_padded = pad_to_length(ref, longest)
    elif cfg.pad_mode == "strict":
        raise ValueError(f"length mismatch ({gen.n_frames} vs {ref.n_frames} samples) "
                         "with pad_mode='strict'")
    else:
        raise ValueError(f"unknown pad_mode {cfg.pad_mode!r}")

    c_gen = extract_mfcc(gen, cfg)
    c_ref = extract_mfcc(ref, cfg)
    if gen_padded is gen and ref_padded is ref:
        plain = mcd(c_gen, c_ref, cfg.scale)
    else:
        plain = mcd(extract_mfcc(gen_padded, cfg), extract_mfcc(ref_padded, cfg),
                    cfg.scale)

    alignment = dtw_align(c_gen, c_ref)
    dtw_value = mcd_dtw(alignment)
    sl_value, eta = mcd_dtw_sl(alignment)
    if cfg.scale == "conventional":
        dtw_value *= CONVENTIONAL_SCALE
        sl_value *= CONVENTIONAL_SCALE
    return PairMetrics(plain, dtw_value, sl_value, eta,
                       alignment.m, alignment.n)


@dataclass(frozen=True)
class PairEntry:
    """One manifest row: an id plus generated and reference audio paths."""

    pair_id: str
    generated: str
    reference: str


def load_pair_manifest(path) -> list[PairEntry]:
    """Read a JSON Lines pair manifest ({id, generated, reference} rows)."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            for key in ("id", "generated", "reference"):
                if key not in row:
                    raise ValueError(f"{path}:{lineno}: missing field {key!r}")
            entries.append(PairEntry(str(row["id"]), str(row["generated"]),
                                     str(row["reference"])))
    return entries


def _evaluate_entry(entry: PairEntry, cfg: PipelineConfig) -> PairMetrics:
    gen = to_mono(read_wav(entry.generated))
    ref = to_mono(read_wav(entry.reference))
    return replace(evaluate_pair(gen, ref, cfg), pair_id=entry.pair_id)


def evaluate_corpus(entries, cfg: PipelineConfig = PipelineConfig(),
                    jobs: int = 1) -> MetricReport:
    """Evaluate every manifest pair; failures are collected, not fatal.

    Rows come back in manifest order regardless of ``jobs``.
    """
    results = [None] * len(entries)

    def run(index):
        entry = entries[index]
        try:
            results[index] = ("ok", _evaluate_entry(entry, cfg))
        except Exception as exc:  # collected per-row, reported in the summary
            results[index] = ("err", (entry.pair_id, f"{type(exc).__name__}: {exc}"))

    if jobs > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(run, range(len(entries))))
    else:
        for index in range(len(entries)):
            run(index)

    rows = [payload for kind, payload in results if kind == "ok"]
    failures = [payload for kind, payload in results if kind == "err"]
    return MetricReport(rows, failures)
