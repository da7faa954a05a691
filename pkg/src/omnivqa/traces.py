"""Head/eye movement trace files and their alignment to video frames.

Each trace line holds seven numbers::

    timestamp pitch yaw roll em_x em_y em_flag

separated by whitespace or commas.  Angles are degrees, the timestamp is
the interval in milliseconds since the previous sample (or an absolute
time when parsing with ``absolute_time=True``), ``em_x``/``em_y`` are
normalized viewport coordinates and ``em_flag`` is 1 for a valid gaze
sample and 0 otherwise.  Blank lines and lines starting with ``#`` are
ignored.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .media_io import VideoMeta
from .sphere import Pose

_SPLIT = re.compile(r"[\s,]+")

# Slack when flooring times onto the frame grid (durations like 1/60 s
# accumulate rounding error right at frame boundaries).
_FRAME_EPS = 1e-9


class TraceError(ValueError):
    """Malformed or unusable trace data."""


@dataclass(frozen=True)
class TraceRecord:
    interval: float
    pose: Pose
    em_u: float
    em_v: float
    em_valid: bool

    @property
    def gaze(self) -> Optional[tuple[float, float]]:
        """Gaze position, or None when the sample is flagged invalid."""
        return (self.em_u, self.em_v) if self.em_valid else None


@dataclass
class SubjectTrace:
    subject: str
    records: list[TraceRecord]
    absolute_time: bool = False

    def __post_init__(self):
        if not self.records:
            raise TraceError(f"trace of subject {self.subject!r} is empty")

    def __len__(self):
        return len(self.records)

    def times(self) -> list[float]:
        """Sample times in seconds, the first sample at 0."""
        if self.absolute_time:
            t0 = self.records[0].interval
            return [(r.interval - t0) / 1000.0 for r in self.records]
        times = [0.0]
        for rec in self.records[1:]:
            times.append(times[-1] + rec.interval / 1000.0)
        return times


def parse_trace(text: str, subject: str = "", absolute_time: bool = False) -> SubjectTrace:
    """Parse trace text into a :class:`SubjectTrace`.

    Raises :class:`TraceError` naming the offending line number for a wrong
    field count, a non-numeric field, an out-of-range angle or gaze value,
    or a validity flag outside {0, 1}.  Gaze values of invalid samples are
    kept as read but never exposed through :attr:`TraceRecord.gaze`.
    """
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        if len(fields) != 7:
            raise TraceError(f"line {lineno}: expected 7 fields, got {len(fields)}")
        try:
            values = [float(f) for f in fields]
        except ValueError:
            raise TraceError(f"line {lineno}: non-numeric field in {line!r}") from None
        if not all(math.isfinite(v) for v in values):
            raise TraceError(f"line {lineno}: non-finite field")
        t, pitch, yaw, roll, em_u, em_v, flag = values
        if flag not in (0.0, 1.0):
            raise TraceError(f"line {lineno}: EM flag must be 0 or 1, got {fields[6]}")
        if t < 0 and not absolute_time:
            raise TraceError(f"line {lineno}: negative interval {t}")
        valid = flag == 1.0
        if valid and not (0.0 <= em_u <= 1.0 and 0.0 <= em_v <= 1.0):
            raise TraceError(f"line {lineno}: gaze ({em_u}, {em_v}) outside [0, 1]")
        try:
            pose = Pose(pitch, yaw, roll)
        except ValueError as exc:
            raise TraceError(f"line {lineno}: {exc}") from None
        records.append(TraceRecord(t, pose, em_u, em_v, valid))
    return SubjectTrace(subject, records, absolute_time)


def read_trace(path, subject: Optional[str] = None, absolute_time: bool = False) -> SubjectTrace:
    path = Path(path)
    return parse_trace(path.read_text(), subject or path.stem, absolute_time)


def format_trace(trace: SubjectTrace) -> str:
    """Serialize a trace; numbers keep 6 significant digits."""
    lines = []
    for r in trace.records:
        p = r.pose
        lines.append(" ".join(f"{v:.6g}" for v in (r.interval, p.pitch, p.yaw, p.roll, r.em_u, r.em_v))
                     + f" {int(r.em_valid)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FrameSample:
    pose: Pose
    gaze: Optional[tuple[float, float]]
    held: bool = False  # pose carried over from an earlier frame


@dataclass
class FrameSamples:
    """Per-frame samples of one subject."""

    subject: str
    frames: list[list[FrameSample]] = field(default_factory=list)

    def __len__(self):
        return len(self.frames)

    def record_count(self) -> int:
        return sum(1 for frame in self.frames for s in frame if not s.held)

    def first_pose(self, frame: int) -> Pose:
        return self.frames[frame][0].pose

    def poses(self, frame: int) -> list[Pose]:
        return [s.pose for s in self.frames[frame]]

    def gaze_sample(self, frame: int) -> Optional[FrameSample]:
        """First sample of the frame with a valid gaze, if any."""
        for s in self.frames[frame]:
            if s.gaze is not None and not s.held:
                return s
        return None


def align_to_frames(trace: SubjectTrace, meta: VideoMeta, min_coverage: float = 0.1) -> FrameSamples:
    """Assign each record to frame ``floor(t * frame_rate)``.

    Records past the last frame are folded into it, so no record is lost.
    Frames without records reuse the last pose of the nearest earlier frame
    (flagged ``held``, without gaze).  A trace covering less than
    ``min_coverage`` of the video's frames is rejected.
    """
    frames: list[list[FrameSample]] = [[] for _ in range(meta.frame_count)]
    last_frame = 0
    for t, rec in zip(trace.times(), trace.records):
        idx = int(math.floor(t * meta.frame_rate + _FRAME_EPS))
        idx = min(max(idx, 0), meta.frame_count - 1)
        frames[idx].append(FrameSample(rec.pose, rec.gaze))
        last_frame = max(last_frame, idx)
    covered = (last_frame + 1) / meta.frame_count
    if covered < min_coverage:
        raise TraceError(
            f"trace of subject {trace.subject!r} covers {covered:.1%} of the video "
            f"(minimum {min_coverage:.0%})")
    for k in range(1, meta.frame_count):
        if not frames[k]:
            frames[k].append(FrameSample(frames[k - 1][-1].pose, None, held=True))
    return FrameSamples(trace.subject, frames)
