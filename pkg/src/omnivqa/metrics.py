"""Objective quality metrics on the luma plane.

Every PSNR-family function returns decibels capped at :data:`PSNR_CAP`
when the (weighted) error vanishes.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .projection import (
    ProjectionKind,
    SampleSet,
    check_dimensions,
    pixel_directions,
    resample_frame,
    sample_directions,
    uniform_samples,
)

Y_MAX = 255.0
PSNR_CAP = 100.0
DEFAULT_SPSNR_POINTS = 655362


class MetricError(ValueError):
    pass


def _pair(ref, imp):
    ref = np.asarray(ref, dtype=float)
    imp = np.asarray(imp, dtype=float)
    if ref.shape != imp.shape:
        raise MetricError(f"frame shapes differ: {ref.shape} vs {imp.shape}")
    return ref, imp


def _db(signal: float, noise: float) -> float:
    if noise <= 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(signal / noise))


def psnr(ref, imp) -> float:
    ref, imp = _pair(ref, imp)
    mse = float(np.mean((ref - imp) ** 2))
    return _db(Y_MAX ** 2, mse)


def weighted_psnr(ref, imp, weights, normalize: bool = True) -> float:
    """PSNR with a per-pixel weighting of the squared error.

    With ``normalize`` the peak power is scaled by the total weight (for
    arbitrary non-negative maps); without it the map must already carry
    unit mass.
    """
    ref, imp = _pair(ref, imp)
    w = np.asarray(weights, dtype=float)
    if w.shape != ref.shape:
        raise MetricError(f"weight map shape {w.shape} does not match frame {ref.shape}")
    err = float(np.sum(w * (ref - imp) ** 2))
    if normalize:
        mass = float(w.sum())
        if not mass > 0:
            raise MetricError("weight map has no mass")
        return _db(Y_MAX ** 2 * mass, err)
    return _db(Y_MAX ** 2, err)


def _subject_mean(ref, imp, maps) -> float:
    scores = []
    for m in maps:
        if m is None or not float(np.sum(m)) > 0:
            continue
        scores.append(weighted_psnr(ref, imp, m, normalize=True))
    if not scores:
        raise MetricError("no usable subject maps")
    return float(np.mean(scores))


def psnr_i_hm(ref, imp, maps: Sequence[np.ndarray]) -> float:
    """Mean over subjects of the viewport-weighted PSNR."""
    return _subject_mean(ref, imp, maps)


def psnr_i_em(ref, imp, maps: Sequence[Optional[np.ndarray]]) -> float:
    """Mean over subjects of the gaze-weighted PSNR.

    Subjects whose map is None (no valid gaze this frame) are skipped.
    """
    return _subject_mean(ref, imp, maps)


def psnr_o_hm(ref, imp, o_map) -> float:
    mass = float(np.sum(o_map))
    if abs(mass - 1.0) > 1e-4:
        raise MetricError(f"O-HM map must sum to 1, got {mass}")
    return weighted_psnr(ref, imp, o_map, normalize=False)


def ws_weights(width: int, height: int) -> np.ndarray:
    rows = np.cos((np.arange(height) + 0.5 - height / 2.0) * math.pi / height)
    return np.broadcast_to(rows[:, None], (height, width))


def ws_psnr(ref, imp) -> float:
    """Weighted-to-spherically-uniform PSNR for ERP frames."""
    ref, imp = _pair(ref, imp)
    height, width = ref.shape
    try:
        check_dimensions(width, height, ProjectionKind.ERP)
    except ValueError as exc:
        raise MetricError(f"WS-PSNR needs ERP frames: {exc}") from None
    return weighted_psnr(ref, imp, ws_weights(width, height), normalize=True)


def s_psnr(ref, imp, samples: Optional[SampleSet] = None, kind=ProjectionKind.ERP) -> float:
    """PSNR over bilinear samples taken at near-uniform sphere points."""
    ref, imp = _pair(ref, imp)
    if samples is None:
        samples = uniform_samples(DEFAULT_SPSNR_POINTS)
    dirs = samples.directions()
    a, valid = sample_directions(ref, dirs, kind)
    b, _ = sample_directions(imp, dirs, kind)
    if not np.any(valid):
        raise MetricError("no sample point falls inside the frame")
    mse = float(np.mean((a[valid] - b[valid]) ** 2))
    return _db(Y_MAX ** 2, mse)


def cpp_psnr(ref, imp, kind=ProjectionKind.ERP) -> float:
    """PSNR after resampling both frames to Craster parabolic projection.

    The working size keeps the source width at a 2:1 aspect; only pixels
    inside the map outline count.
    """
    ref, imp = _pair(ref, imp)
    width = ref.shape[1] + ref.shape[1] % 2
    height = width // 2
    a = resample_frame(ref, kind, ProjectionKind.CPP, width, height)
    b = resample_frame(imp, kind, ProjectionKind.CPP, width, height)
    _, valid = pixel_directions(width, height, ProjectionKind.CPP)
    mse = float(np.mean((a[valid] - b[valid]) ** 2))
    return _db(Y_MAX ** 2, mse)


SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def ssim(ref, imp) -> float:
    """Mean SSIM with an 11x11 Gaussian window (sigma 1.5) over valid positions."""
    ref, imp = _pair(ref, imp)
    if ref.ndim != 2 or min(ref.shape) < SSIM_WINDOW:
        raise MetricError(f"SSIM needs frames of at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    c1 = (0.01 * Y_MAX) ** 2
    c2 = (0.03 * Y_MAX) ** 2
    radius = SSIM_WINDOW // 2

    def blur(x):
        out = ndimage.gaussian_filter(x, SSIM_SIGMA, truncate=radius / SSIM_SIGMA, mode="constant")
        return out[radius:-radius, radius:-radius]

    mu_a, mu_b = blur(ref), blur(imp)
    var_a = blur(ref * ref) - mu_a ** 2
    var_b = blur(imp * imp) - mu_b ** 2
    cov = blur(ref * imp) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def pool_sequence(scores: Sequence[float]) -> float:
    """Temporal pooling: the arithmetic mean of per-frame scores."""
    scores = [float(s) for s in scores]
    if not scores:
        raise MetricError("cannot pool an empty score list")
    return math.fsum(scores) / len(scores)


METRIC_NAMES = ("psnr", "ssim", "ws-psnr", "s-psnr", "cpp-psnr", "psnr-i-hm", "psnr-o-hm", "psnr-i-em")
BEHAVIOR_METRICS = ("psnr-i-hm", "psnr-o-hm", "psnr-i-em")
