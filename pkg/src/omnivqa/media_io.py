"""Raw 4:2:0 video frames and OVWM weight-map rasters.

OVWM layout (all little-endian)::

    b"OVWM" | width u32 | height u32 | frame_index u32 | width*height float32

Values are row-major and must be finite and non-negative.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import BinaryIO, NamedTuple

import numpy as np

from .projection import ProjectionKind, check_dimensions

OVWM_MAGIC = b"OVWM"
_OVWM_HEADER = struct.Struct("<4sIII")


class MediaError(ValueError):
    """Malformed raw video or weight-map data."""


@dataclass(frozen=True)
class VideoMeta:
    width: int
    height: int
    frame_rate: float = 30.0
    frame_count: int = 1
    projection: ProjectionKind = ProjectionKind.ERP

    def __post_init__(self):
        object.__setattr__(self, "projection", ProjectionKind.parse(self.projection))
        check_dimensions(self.width, self.height, self.projection)
        if not 1.0 <= self.frame_rate <= 240.0:
            raise ValueError(f"frame rate must lie in [1, 240], got {self.frame_rate}")
        if self.frame_count < 1:
            raise ValueError("frame_count must be positive")

    @property
    def chroma_size(self) -> tuple[int, int]:
        return (self.width + 1) // 2, (self.height + 1) // 2

    @property
    def frame_bytes(self) -> int:
        cw, ch = self.chroma_size
        return self.width * self.height + 2 * cw * ch

    @property
    def duration(self) -> float:
        return self.frame_count / self.frame_rate


def frame_offset(meta: VideoMeta, index: int) -> int:
    return index * meta.frame_bytes


def _read_exact(source, offset: int, size: int) -> bytes:
    if isinstance(source, (bytes, bytearray, memoryview)):
        data = bytes(source[offset:offset + size])
    else:
        source.seek(offset)
        data = source.read(size)
    if len(data) != size:
        raise MediaError(f"truncated stream: wanted {size} bytes at offset {offset}, got {len(data)}")
    return data


def read_frame(source, meta: VideoMeta, index: int) -> np.ndarray:
    """Return the Y plane of frame ``index`` as a ``(height, width)`` uint8 array.

    ``source`` is a bytes-like object or a seekable binary stream.  Chroma
    bytes are skipped.
    """
    if not 0 <= index < meta.frame_count:
        raise IndexError(f"frame {index} out of range [0, {meta.frame_count})")
    data = _read_exact(source, frame_offset(meta, index), meta.width * meta.height)
    return np.frombuffer(data, dtype=np.uint8).reshape(meta.height, meta.width).copy()


def read_frame_planes(source, meta: VideoMeta, index: int):
    """Return ``(Y, U, V)`` planes of one frame."""
    if not 0 <= index < meta.frame_count:
        raise IndexError(f"frame {index} out of range [0, {meta.frame_count})")
    data = _read_exact(source, frame_offset(meta, index), meta.frame_bytes)
    buf = np.frombuffer(data, dtype=np.uint8)
    ysize = meta.width * meta.height
    cw, ch = meta.chroma_size
    y = buf[:ysize].reshape(meta.height, meta.width)
    u = buf[ysize:ysize + cw * ch].reshape(ch, cw)
    v = buf[ysize + cw * ch:].reshape(ch, cw)
    return y.copy(), u.copy(), v.copy()


def count_frames(path, meta: VideoMeta) -> int:
    """Number of whole frames stored in a raw file."""
    size = os.path.getsize(path)
    return size // meta.frame_bytes


def write_frame(sink: BinaryIO, y, u=None, v=None) -> None:
    """Append one planar 4:2:0 frame; missing chroma is written as neutral 128."""
    y = np.asarray(y)
    h, w = y.shape
    cshape = ((h + 1) // 2, (w + 1) // 2)
    if u is None:
        u = np.full(cshape, 128, dtype=np.uint8)
    if v is None:
        v = np.full(cshape, 128, dtype=np.uint8)
    for plane in (y, u, v):
        sink.write(np.ascontiguousarray(to_uint8(plane)).tobytes())


def to_uint8(plane) -> np.ndarray:
    plane = np.asarray(plane)
    if plane.dtype == np.uint8:
        return plane
    return np.clip(np.rint(plane), 0, 255).astype(np.uint8)


class WeightMapFile(NamedTuple):
    values: np.ndarray
    frame_index: int


def encode_weight_map(values, frame_index: int = 0) -> bytes:
    values = np.asarray(values)
    if values.ndim != 2:
        raise MediaError("weight map must be two-dimensional")
    arr = values.astype("<f4")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise MediaError("weight map values must be finite and non-negative")
    h, w = arr.shape
    return _OVWM_HEADER.pack(OVWM_MAGIC, w, h, int(frame_index)) + arr.tobytes()


def decode_weight_map(data: bytes) -> WeightMapFile:
    if len(data) < _OVWM_HEADER.size:
        raise MediaError("truncated OVWM header")
    magic, w, h, frame_index = _OVWM_HEADER.unpack_from(data)
    if magic != OVWM_MAGIC:
        raise MediaError(f"bad magic {magic!r}, expected {OVWM_MAGIC!r}")
    expected = _OVWM_HEADER.size + 4 * w * h
    if len(data) != expected:
        raise MediaError(f"OVWM size mismatch: {w}x{h} needs {expected} bytes, got {len(data)}")
    values = np.frombuffer(data, dtype="<f4", offset=_OVWM_HEADER.size).reshape(h, w)
    if not np.all(np.isfinite(values)):
        raise MediaError("OVWM contains non-finite values")
    if np.any(values < 0):
        raise MediaError("OVWM contains negative values")
    return WeightMapFile(values.astype(np.float32), int(frame_index))


def write_weight_map(values, sink, frame_index: int = 0) -> None:
    """Write an OVWM raster to a path or binary stream."""
    payload = encode_weight_map(values, frame_index)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(payload)
    else:
        sink.write(payload)


def read_weight_map(source) -> WeightMapFile:
    """Read an OVWM raster from a path, bytes, or binary stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray, memoryview)):
        data = bytes(source)
    else:
        data = source.read()
    return decode_weight_map(data)
