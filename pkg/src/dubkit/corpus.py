"""Corpus construction: clip records, subtitle-driven clip plans, seeded
train/val/test splits and descriptive statistics.

A clip record is one dubbed utterance: movie, cue index, speaker, one of
eight emotion labels, the subtitle text and its time span. Media cutting
itself is delegated to an external tool; the clip plan is pure data with
optional FFmpeg-style argument vectors as a convenience.
"""

import json
import random
import string
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from . import dsp

EMOTIONS = ("angry", "disgust", "fear", "happy", "neutral", "sad", "surprise", "others")

_REQUIRED_FIELDS = ("movie_id", "clip_index", "speaker", "emotion", "text",
                    "start_ms", "end_ms")

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


class ManifestError(ValueError):
    """A manifest row is invalid; the message carries the row number."""


@dataclass(frozen=True)
class ClipRecord:
    """One utterance of the corpus."""

    movie_id: str
    clip_index: int
    speaker: str
    emotion: str
    text: str
    start_ms: int
    end_ms: int
    audio_path: str | None = None
    video_path: str | None = None

    def __post_init__(self):
        if self.emotion not in EMOTIONS:
            raise ValueError(f"unknown emotion {self.emotion!r}; "
                             f"expected one of {', '.join(EMOTIONS)}")
        if self.end_ms <= self.start_ms:
            raise ValueError(f"clip duration must be positive "
                             f"({self.start_ms}..{self.end_ms} ms)")

    @property
    def clip_id(self) -> str:
        return f"{self.movie_id}_{self.clip_index:05d}"

    @property
    def duration_s(self) -> float:
        return (self.end_ms - self.start_ms) / 1000.0

    def to_dict(self) -> dict:
        row = {f: getattr(self, f) for f in _REQUIRED_FIELDS}
        if self.audio_path is not None:
            row["audio_path"] = self.audio_path
        if self.video_path is not None:
            row["video_path"] = self.video_path
        return row


def load_manifest(path) -> list[ClipRecord]:
    """Read a JSONL clip manifest, validating every row."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"row {lineno}: invalid JSON: {exc}") from None
            if not isinstance(row, dict):
                raise ManifestError(f"row {lineno}: not an object")
            for key in _REQUIRED_FIELDS:
                if key not in row:
                    raise ManifestError(f"row {lineno}: missing field {key!r}")
            try:
                records.append(ClipRecord(
                    movie_id=str(row["movie_id"]),
                    clip_index=int(row["clip_index"]),
                    speaker=str(row["speaker"]),
                    emotion=str(row["emotion"]),
                    text=str(row["text"]),
                    start_ms=int(row["start_ms"]),
                    end_ms=int(row["end_ms"]),
                    audio_path=row.get("audio_path"),
                    video_path=row.get("video_path"),
                ))
            except (TypeError, ValueError) as exc:
                raise ManifestError(f"row {lineno}: {exc}") from None
    return records


def save_manifest(records, path) -> None:
    """Write clip records as JSONL; load_manifest(save_manifest(r)) == r."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict()) + "\n")


@dataclass(frozen=True)
class ClipJob:
    """One planned video cut plus audio extraction."""

    movie_id: str
    index: int
    start_s: float
    end_s: float
    audio_mode: str
    out_audio: str
    out_video: str

    def to_dict(self) -> dict:
        return {"movie_id": self.movie_id, "index": self.index,
                "start_s": self.start_s, "end_s": self.end_s,
                "audio_mode": self.audio_mode, "out_audio": self.out_audio,
                "out_video": self.out_video}


@dataclass(frozen=True)
class ClipPlan:
    """Machine-readable cutting plan for one movie."""

    movie_id: str
    movie_path: str
    out_dir: str
    audio_mode: str
    jobs: list
    commands: list | None = None

    def to_dict(self) -> dict:
        plan = {"movie_id": self.movie_id, "movie_path": self.movie_path,
                "out_dir": self.out_dir, "audio_mode": self.audio_mode,
                "jobs": [job.to_dict() for job in self.jobs]}
        if self.commands is not None:
            plan["commands"] = self.commands
        return plan


def _clip_commands(job: ClipJob, movie_path: str) -> list:
    span = ["-ss", f"{job.start_s:.3f}", "-to", f"{job.end_s:.3f}"]
    video = ["ffmpeg", "-y", "-i", movie_path, *span, "-c:v", "copy", "-an",
             job.out_video]
    if job.audio_mode == "center-channel":
        channel_args = ["-af", "pan=mono|c0=FC"]
    else:
        channel_args = ["-ac", "1"]
    audio = ["ffmpeg", "-y", "-i", movie_path, *span, "-map", "0:a:0",
             *channel_args, job.out_audio]
    return [video, audio]


def build_clip_plan(entries, movie_path, out_dir, audio_mode: str = "center-channel",
                    movie_id: str | None = None, emit_commands: bool = False) -> ClipPlan:
    """Turn subtitle cues into one cut-and-extract job per cue.

    Output files are named ``{movie_id}_{index:05d}.wav`` / ``.mp4`` under
    ``out_dir``. The plan is data only; ``emit_commands`` additionally
    includes FFmpeg-compatible argument vectors for an external runner.
    """
    entries = list(entries)
    if not entries:
        raise ValueError("cannot plan clips from an empty cue list")
    if audio_mode not in ("center-channel", "downmix"):
        raise ValueError(f"unknown audio_mode {audio_mode!r}")
    indices = [e.index for e in entries]
    duplicates = sorted({i for i, c in Counter(indices).items() if c > 1})
    if duplicates:
        raise ValueError(f"duplicate cue indices in plan: {duplicates}")

    movie_path = str(movie_path)
    out_dir = str(out_dir)
    if movie_id is None:
        movie_id = Path(movie_path).stem

    jobs = []
    for entry in entries:
        stem = f"{movie_id}_{entry.index:05d}"
        jobs.append(ClipJob(
            movie_id=movie_id,
            index=entry.index,
            start_s=entry.start_ms / 1000.0,
            end_s=entry.end_ms / 1000.0,
            audio_mode=audio_mode,
            out_audio=str(Path(out_dir) / f"{stem}.wav"),
            out_video=str(Path(out_dir) / f"{stem}.mp4"),
        ))
    commands = None
    if emit_commands:
        commands = [cmd for job in jobs for cmd in _clip_commands(job, movie_path)]
    return ClipPlan(movie_id, movie_path, out_dir, audio_mode, jobs, commands)


@dataclass(frozen=True)
class SplitAssignment:
    """Disjoint, exhaustive train/val/test clip-id lists."""

    train: list
    val: list
    test: list
    seed: int

    def to_dict(self) -> dict:
        return {"train": self.train, "val": self.val, "test": self.test,
                "seed": self.seed,
                "sizes": {"train": len(self.train), "val": len(self.val),
                          "test": len(self.test)}}


def _floor_sizes(n: int, ratios) -> tuple[int, int]:
    # epsilon guards float products like 0.6 * n that are integral in exact arithmetic
    n_train = int(ratios[0] * n + 1e-9)
    n_val = int(ratios[1] * n + 1e-9)
    return n_train, n_val


def split_dataset(records, ratios=(0.6, 0.1, 0.3), seed: int = 0,
                  stratify_by_speaker: bool = False) -> SplitAssignment:
    """Random train/val/test split with floor-rule sizes.

    Sizes are floor(r_train * n) and floor(r_val * n) with the remainder
    going to test; the shuffle is fully determined by ``seed``. The
    speaker-stratified mode applies the same rule within each speaker's
    records instead.
    """
    records = list(records)
    n = len(records)
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError(f"ratios must be three positive numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    if n < 3:
        raise ValueError(f"need at least 3 records to split, got {n}")

    rng = random.Random(seed)

    def assign(group):
        order = list(group)
        rng.shuffle(order)
        n_train, n_val = _floor_sizes(len(order), ratios)
        return (order[:n_train], order[n_train : n_train + n_val],
                order[n_train + n_val :])

    ids = [r.clip_id for r in records]
    if len(set(ids)) != len(ids):
        seen = set()
        clash = next(i for i in ids if i in seen or seen.add(i))
        raise ValueError(f"duplicate clip id {clash!r}; cannot partition")
    if stratify_by_speaker:
        by_speaker: dict = {}
        for record in records:
            by_speaker.setdefault(record.speaker, []).append(record.clip_id)
        train: list = []
        val: list = []
        test: list = []
        for speaker in sorted(by_speaker):
            tr, va, te = assign(by_speaker[speaker])
            train += tr
            val += va
            test += te
    else:
        train, val, test = assign(ids)
    return SplitAssignment(train, val, test, seed)


@dataclass(frozen=True)
class CorpusStats:
    """Descriptive statistics over a clip manifest."""

    n_movies: int
    n_clips: int
    n_speakers: int
    avg_subtitle_words: float
    avg_duration_s: float
    emotion_counts: dict
    word_counts: list
    utterance_length_histogram: dict
    pitch_mean_hz: float | None = None
    pitch_variance: float | None = None

    def to_dict(self, top_words: int | None = None) -> dict:
        words = self.word_counts if top_words is None else self.word_counts[:top_words]
        return {
            "n_movies": self.n_movies,
            "n_clips": self.n_clips,
            "n_speakers": self.n_speakers,
            "avg_subtitle_words": self.avg_subtitle_words,
            "avg_duration_s": self.avg_duration_s,
            "emotion_counts": dict(self.emotion_counts),
            "word_counts": [[w, c] for w, c in words],
            "utterance_length_histogram": {str(k): v for k, v
                                           in sorted(self.utterance_length_histogram.items())},
            "pitch_mean_hz": self.pitch_mean_hz,
            "pitch_variance": self.pitch_variance,
        }


def tokenize_for_counts(text: str) -> list[str]:
    """Word-count tokens: lowercase, ASCII punctuation removed."""
    return [t for t in text.lower().translate(_PUNCT_TABLE).split() if t]


def corpus_stats(records, pitch_tracks=None, include_unvoiced: bool = False) -> CorpusStats:
    """Compute manifest statistics; pitch stats only when tracks are given.

    Average subtitle length counts whitespace tokens; ranked word counts
    use lowercased, punctuation-stripped tokens.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot compute statistics of an empty record list")

    lengths = [len(r.text.split()) for r in records]
    histogram = Counter(lengths)
    total_tokens = sum(lengths)

    word_counter: Counter = Counter()
    for record in records:
        word_counter.update(tokenize_for_counts(record.text))
    ranked = sorted(word_counter.items(), key=lambda item: (-item[1], item[0]))

    emotion_counts = {emotion: 0 for emotion in EMOTIONS}
    for record in records:
        emotion_counts[record.emotion] += 1

    pitch_mean = pitch_var = None
    if pitch_tracks:
        pitch_mean, pitch_var = dsp.pitch_stats(pitch_tracks, include_unvoiced)

    return CorpusStats(
        n_movies=len({r.movie_id for r in records}),
        n_clips=len(records),
        n_speakers=len({r.speaker for r in records}),
        avg_subtitle_words=total_tokens / len(records),
        avg_duration_s=sum(r.duration_s for r in records) / len(records),
        emotion_counts=emotion_counts,
        word_counts=ranked,
        utterance_length_histogram=dict(histogram),
        pitch_mean_hz=pitch_mean,
        pitch_variance=pitch_var,
    )


def records_from_entries(entries, movie_id: str, speaker: str = "unknown",
                         emotion: str = "neutral") -> list[ClipRecord]:
    """Seed clip records from parsed subtitle cues, pending annotation."""
    return [ClipRecord(movie_id=movie_id, clip_index=e.index, speaker=speaker,
                       emotion=emotion, text=e.text, start_ms=e.start_ms,
                       end_ms=e.end_ms)
            for e in entries]
