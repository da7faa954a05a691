"""Behavior weight maps (I-HM, O-HM, I-EM) and viewing-behavior statistics."""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

import numpy as np

from .media_io import VideoMeta
from .projection import ProjectionKind, check_dimensions, pixel_directions, pixel_latitudes
from .sphere import Fov, Pose, direction_to_viewport

DEFAULT_SIGMA = 0.1


def _grid(meta_or_size, kind=None):
    if isinstance(meta_or_size, VideoMeta):
        return meta_or_size.width, meta_or_size.height, meta_or_size.projection
    width, height = meta_or_size
    return width, height, check_dimensions(width, height, kind or ProjectionKind.ERP)


def viewport_mask(pose: Pose, fov: Fov, meta) -> np.ndarray:
    """Boolean mask of the pixels seen through the viewport.

    ``meta`` is a :class:`VideoMeta` or a ``(width, height)`` pair (ERP).
    """
    width, height, kind = _grid(meta)
    dirs, valid = pixel_directions(width, height, kind)
    _, _, inside = direction_to_viewport(dirs, pose, fov)
    return inside & valid


def i_hm_map(pose: Pose, fov: Fov, meta) -> np.ndarray:
    """Binary individual head-movement map: 1 inside the viewport, 0 elsewhere."""
    return viewport_mask(pose, fov, meta).astype(float)


def o_hm_map(maps: Sequence[np.ndarray]) -> np.ndarray:
    """Overall head-movement map: pixel-wise sum over subjects, normalized to unit mass."""
    maps = [np.asarray(m, dtype=float) for m in maps]
    if not maps:
        raise ValueError("o_hm_map needs at least one map")
    shape = maps[0].shape
    if any(m.shape != shape for m in maps):
        raise ValueError("all maps must share one shape")
    total = np.sum(maps, axis=0)
    mass = total.sum()
    if not mass > 0:
        raise ValueError("input maps carry no weight")
    return total / mass


def i_em_map(pose: Pose, gaze, sigma: float, fov: Fov, meta) -> np.ndarray:
    """Gaussian eye-movement map centered on the gaze point inside the viewport.

    Distances are measured in normalized viewport coordinates; pixels
    outside the viewport get weight 0.
    """
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be positive and finite, got {sigma}")
    gu, gv = gaze
    if not (0.0 <= gu <= 1.0 and 0.0 <= gv <= 1.0):
        raise ValueError(f"gaze ({gu}, {gv}) outside [0, 1]^2")
    width, height, kind = _grid(meta)
    dirs, valid = pixel_directions(width, height, kind)
    u, v, inside = direction_to_viewport(dirs, pose, fov)
    dist2 = (u - gu) ** 2 + (v - gv) ** 2
    return np.where(inside & valid, np.exp(-dist2 / (2.0 * sigma * sigma)), 0.0)


def pixel_solid_angles(width: int, height: int, kind) -> np.ndarray:
    """Relative solid angle of each pixel, summing to 1 over valid pixels.

    Supported for ERP (cosine of latitude) and CPP (equal-area, padding
    excluded).
    """
    kind = check_dimensions(width, height, kind)
    if kind is ProjectionKind.ERP:
        w = np.cos(np.radians(pixel_latitudes(width, height, kind)))
    elif kind is ProjectionKind.CPP:
        _, valid = pixel_directions(width, height, kind)
        w = valid.astype(float)
    else:
        raise ValueError(f"solid-angle weights are not defined for {kind.value.upper()}; convert first")
    return w / w.sum()


def viewport_coverage(maps: Iterable[np.ndarray], kind=ProjectionKind.ERP) -> float:
    """Fraction of the sphere covered by the union of the viewports of one frame."""
    maps = [np.asarray(m) for m in maps]
    if not maps:
        raise ValueError("viewport_coverage needs at least one map")
    union = np.any(np.stack(maps) > 0, axis=0)
    height, width = union.shape
    area = pixel_solid_angles(width, height, kind)
    return float(min(1.0, area[union].sum()))


def pearson(a, b) -> float:
    """Pearson correlation of two rasters; NaN when either has zero variance."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(da @ da) * float(db @ db))
    if denom == 0.0:
        return math.nan
    return float(da @ db) / denom


def split_half_consistency(group_a, group_b, kind: str = "hm") -> np.ndarray:
    """Per-frame correlation between the aggregated maps of two subject groups.

    ``group_a`` and ``group_b`` are sequences over subjects of per-frame map
    sequences (or arrays shaped ``(subjects, frames, height, width)``).
    HM maps are aggregated with :func:`o_hm_map`, EM maps by pixel-wise mean.
    Frames where a correlation is undefined come back as NaN; average with
    :func:`numpy.nanmean`.
    """
    if kind not in ("hm", "em"):
        raise ValueError("kind must be 'hm' or 'em'")
    a = [list(s) for s in group_a]
    b = [list(s) for s in group_b]
    if not a or not b:
        raise ValueError("both groups need at least one subject")
    n_frames = len(a[0])
    if any(len(s) != n_frames for s in a + b):
        raise ValueError("all subjects must have the same frame count")
    out = np.empty(n_frames)
    for f in range(n_frames):
        ma = [s[f] for s in a]
        mb = [s[f] for s in b]
        if np.shape(ma[0]) != np.shape(mb[0]):
            raise ValueError("map dimensions differ between groups")
        if kind == "hm":
            try:
                agg_a, agg_b = o_hm_map(ma), o_hm_map(mb)
            except ValueError:
                out[f] = math.nan
                continue
        else:
            agg_a, agg_b = np.mean(ma, axis=0), np.mean(mb, axis=0)
        out[f] = pearson(agg_a, agg_b)
    return out


def random_halves(subjects: Sequence, seed=None) -> tuple[list, list]:
    """Split subjects at random into two non-overlapping halves of equal size (±1)."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(subjects))
    half = len(subjects) // 2
    return [subjects[i] for i in order[:half]], [subjects[i] for i in order[half:]]


def subject_frame_maps(samples, frame: int, fov: Fov, meta, sigma: float = DEFAULT_SIGMA,
                       average_poses: bool = False) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """I-HM and I-EM maps of one subject at one frame from aligned trace samples.

    ``samples`` is a :class:`~omnivqa.traces.FrameSamples`.  The HM map uses
    the frame's first pose (or the mean of all pose maps with
    ``average_poses``).  The EM map comes from the frame's first valid gaze
    sample and is None when the frame has no valid gaze.
    """
    if average_poses:
        hm = np.mean([i_hm_map(p, fov, meta) for p in samples.poses(frame)], axis=0)
    else:
        hm = i_hm_map(samples.first_pose(frame), fov, meta)
    gaze = samples.gaze_sample(frame)
    em = None if gaze is None else i_em_map(gaze.pose, gaze.gaze, sigma, fov, meta)
    return hm, em
