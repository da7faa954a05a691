"""Pixel <-> sphere mappings for ERP, RCMP, TSP and CPP frames.

Continuous pixel coordinates put the center of pixel ``(x, y)`` at
``(x + 0.5, y + 0.5)``.  All array functions work on the whole raster at
once; the scalar helpers :func:`pixel_to_sphere` and :func:`sphere_to_pixel`
wrap them for single points.

Layouts
-------
ERP
    2:1 latitude/longitude grid, longitude growing rightward.
RCMP
    3:2 grid of 90 degree cube faces.  Top row: left, front, right (one
    continuous strip).  Bottom row: bottom, back, top, each rotated 90
    degrees clockwise.
TSP
    2:1.  The left half is the front cube face.  The right half unfolds
    the rest of a truncated square pyramid: the back face is the central
    square and four trapezoids connect it to the right-half border, which
    is glued to the matching front-face edge.
CPP
    2:1 Craster parabolic (equal-area) map; pixels outside the map outline
    are padding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .sphere import direction_to_latlon, latlon_to_direction


class ProjectionKind(str, enum.Enum):
    ERP = "erp"
    RCMP = "rcmp"
    TSP = "tsp"
    CPP = "cpp"

    @classmethod
    def parse(cls, value) -> "ProjectionKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown projection {value!r}") from None


ASPECT = {
    ProjectionKind.ERP: (2, 1),
    ProjectionKind.CPP: (2, 1),
    ProjectionKind.TSP: (2, 1),
    ProjectionKind.RCMP: (3, 2),
}

# TSP geometry: back face half-size (the front face has half-size 1 at unit
# distance) and the back square's half-size inside the unfolded right half.
TSP_BACK_HALF = 0.5
TSP_LAYOUT_BACK_HALF = 0.25

OUTSIDE = None


class SpherePoint(NamedTuple):
    latitude: float
    longitude: float


@dataclass(frozen=True)
class SampleSet:
    """Ordered sphere sample points in degrees."""

    latitude: np.ndarray
    longitude: np.ndarray

    @property
    def count(self) -> int:
        return len(self.latitude)

    def __len__(self):
        return self.count

    def __iter__(self):
        for lat, lon in zip(self.latitude, self.longitude):
            yield SpherePoint(float(lat), float(lon))

    def directions(self) -> np.ndarray:
        return latlon_to_direction(self.latitude, self.longitude)


def check_dimensions(width: int, height: int, kind) -> ProjectionKind:
    """Validate a frame size against the projection's aspect ratio."""
    kind = ProjectionKind.parse(kind)
    if width <= 0 or height <= 0:
        raise ValueError(f"frame size must be positive, got {width}x{height}")
    aw, ah = ASPECT[kind]
    if width * ah != height * aw:
        raise ValueError(
            f"{kind.value.upper()} frames must be {aw}:{ah}, got {width}x{height}")
    return kind


# -- cube faces ------------------------------------------------------------

# (center, right, up) per RCMP cell, indexed by row * 3 + col.
_CUBE_FACES = np.array([
    [[0, -1, 0], [1, 0, 0], [0, 0, 1]],    # left
    [[1, 0, 0], [0, 1, 0], [0, 0, 1]],     # front
    [[0, 1, 0], [-1, 0, 0], [0, 0, 1]],    # right
    [[0, 0, -1], [-1, 0, 0], [0, 1, 0]],   # bottom
    [[-1, 0, 0], [0, 0, -1], [0, -1, 0]],  # back
    [[0, 0, 1], [1, 0, 0], [0, 1, 0]],     # top
], dtype=float)


def _rcmp_to_dir(xc, yc, width, height):
    face = width / 3.0
    col = np.clip(np.floor(xc / face), 0, 2).astype(int)
    row = np.clip(np.floor(yc / face), 0, 1).astype(int)
    a = 2.0 * (xc / face - col) - 1.0
    b = 1.0 - 2.0 * (yc / face - row)
    basis = _CUBE_FACES[row * 3 + col]
    vec = basis[..., 0, :] + a[..., None] * basis[..., 1, :] + b[..., None] * basis[..., 2, :]
    return vec, np.ones(np.shape(xc), dtype=bool)


def rcmp_face_coords(dirs):
    """Face index and in-face coordinates ``a, b`` in [-1, 1] for directions."""
    dirs = np.asarray(dirs, dtype=float)
    dots = dirs @ _CUBE_FACES[:, 0, :].T
    face = np.argmax(dots, axis=-1)
    basis = _CUBE_FACES[face]
    depth = np.take_along_axis(dots, face[..., None], axis=-1)[..., 0]
    a = np.einsum("...k,...k->...", dirs, basis[..., 1, :]) / depth
    b = np.einsum("...k,...k->...", dirs, basis[..., 2, :]) / depth
    return face, a, b


def _dir_to_rcmp(dirs, width, height):
    face_px = width / 3.0
    face, a, b = rcmp_face_coords(dirs)
    col = face % 3
    row = face // 3
    xc = (col + (a + 1.0) / 2.0) * face_px
    yc = (row + (1.0 - b) / 2.0) * face_px
    return xc, yc, np.ones(np.shape(xc), dtype=bool)


# -- truncated square pyramid ------------------------------------------------

def _tsp_planes(t=TSP_BACK_HALF):
    k = (1.0 - t) / 2.0
    h = (1.0 + t) / 2.0
    normals = np.array([
        [1, 0, 0],      # front
        [-1, 0, 0],     # back
        [-k, 1, 0],     # +y side
        [-k, -1, 0],    # -y side
        [-k, 0, 1],     # +z side
        [-k, 0, -1],    # -z side
    ], dtype=float)
    offsets = np.array([1.0, 1.0, h, h, h, h])
    return normals, offsets


def tsp_face_of(dirs):
    """Index of the pyramid face hit by each direction (0 front, 1 back, 2..5 sides)."""
    normals, offsets = _tsp_planes()
    dirs = np.asarray(dirs, dtype=float)
    dots = dirs @ normals.T
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = np.where(dots > 0, offsets / np.where(dots > 0, dots, 1.0), np.inf)
    face = np.argmin(dist, axis=-1)
    return face, np.min(dist, axis=-1)


def _tsp_to_dir(xc, yc, width, height):
    t, s = TSP_BACK_HALF, TSP_LAYOUT_BACK_HALF
    side = float(height)
    out = np.empty(np.shape(xc) + (3,))
    left = xc < side
    # front face
    a = 2.0 * xc / side - 1.0
    b = 1.0 - 2.0 * yc / side
    out[..., 0] = 1.0
    out[..., 1] = a
    out[..., 2] = b
    # unfolded remainder
    p = 2.0 * (xc - side) / side - 1.0
    q = b
    m = np.maximum(np.abs(p), np.abs(q))
    tau = np.clip((m - s) / (1.0 - s), 0.0, 1.0)
    w = t + tau * (1.0 - t)
    x_side = -1.0 + 2.0 * tau
    safe_m = np.where(m > 0, m, 1.0)
    horiz = np.abs(p) >= np.abs(q)
    lam = np.where(horiz, q, p) / safe_m
    y_side = np.where(horiz, -np.sign(p) * w, -lam * w)
    z_side = np.where(horiz, lam * w, np.sign(q) * w)
    back = m <= s
    px = np.where(back, -1.0, x_side)
    py = np.where(back, -p / s * t, y_side)
    pz = np.where(back, q / s * t, z_side)
    right = ~left
    out[right, 0] = px[right]
    out[right, 1] = py[right]
    out[right, 2] = pz[right]
    return out, np.ones(np.shape(xc), dtype=bool)


def _dir_to_tsp(dirs, width, height):
    t, s = TSP_BACK_HALF, TSP_LAYOUT_BACK_HALF
    side = float(height)
    face, dist = tsp_face_of(dirs)
    P = np.asarray(dirs, dtype=float) * dist[..., None]
    tau = (P[..., 0] + 1.0) / 2.0
    w = t + tau * (1.0 - t)
    m = s + tau * (1.0 - s)
    # side faces run along the edges of the central back square
    lam_y = P[..., 2] / w
    lam_z = -P[..., 1] / w
    p = np.select([face == 2, face == 3, face == 4, face == 5, face == 1],
                  [-m, m, lam_z * m, lam_z * m, -P[..., 1] / t * s], 0.0)
    q = np.select([face == 2, face == 3, face == 4, face == 5, face == 1],
                  [lam_y * m, lam_y * m, m, -m, P[..., 2] / t * s], 0.0)
    xc = np.where(face == 0, (P[..., 1] + 1.0) / 2.0 * side, side + (p + 1.0) / 2.0 * side)
    yc = np.where(face == 0, (1.0 - P[..., 2]) / 2.0 * side, (1.0 - q) / 2.0 * side)
    return xc, yc, np.ones(np.shape(xc), dtype=bool)


# -- equirectangular and Craster parabolic ----------------------------------

def _erp_to_latlon(xc, yc, width, height):
    lon = (xc / width - 0.5) * 360.0
    lat = (0.5 - yc / height) * 180.0
    return lat, lon


def _cpp_to_latlon(xc, yc, width, height):
    X = (xc / width - 0.5) * 2.0 * math.pi
    Y = (0.5 - yc / height) * math.pi
    lat = 3.0 * np.arcsin(np.clip(Y / math.pi, -0.5, 0.5))
    g = 2.0 * np.cos(2.0 * lat / 3.0) - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        lon = np.where(g > 0, X / np.where(g > 0, g, 1.0), np.inf)
    valid = np.abs(lon) <= math.pi
    return np.degrees(lat), np.degrees(np.where(valid, lon, 0.0)), valid


def _latlon_to_cpp(lat, lon, width, height):
    lat_r = np.radians(lat)
    lon_r = np.radians(lon)
    X = lon_r * (2.0 * np.cos(2.0 * lat_r / 3.0) - 1.0)
    Y = math.pi * np.sin(lat_r / 3.0)
    return (X / (2.0 * math.pi) + 0.5) * width, (0.5 - Y / math.pi) * height


# -- public array API -------------------------------------------------------

def plane_to_direction(xc, yc, width: int, height: int, kind):
    """Map continuous pixel coordinates to unit directions.

    Returns ``(dirs, valid)``; ``valid`` is False on CPP padding.
    """
    kind = check_dimensions(width, height, kind)
    xc = np.asarray(xc, dtype=float)
    yc = np.asarray(yc, dtype=float)
    if kind is ProjectionKind.ERP:
        lat, lon = _erp_to_latlon(xc, yc, width, height)
        return latlon_to_direction(lat, lon), np.ones(xc.shape, dtype=bool)
    if kind is ProjectionKind.CPP:
        lat, lon, valid = _cpp_to_latlon(xc, yc, width, height)
        return latlon_to_direction(lat, lon), valid
    if kind is ProjectionKind.RCMP:
        vec, valid = _rcmp_to_dir(xc, yc, width, height)
    else:
        vec, valid = _tsp_to_dir(xc, yc, width, height)
    return vec / np.linalg.norm(vec, axis=-1, keepdims=True), valid


def direction_to_plane(dirs, width: int, height: int, kind):
    """Map unit directions to continuous pixel coordinates.

    Returns ``(xc, yc, valid)``.  ``valid`` is False where the projection
    has no image of the direction.
    """
    kind = check_dimensions(width, height, kind)
    dirs = np.asarray(dirs, dtype=float)
    if kind is ProjectionKind.ERP:
        lat, lon = direction_to_latlon(dirs)
        xc = (lon / 360.0 + 0.5) * width
        yc = (0.5 - lat / 180.0) * height
        return xc, yc, np.ones(xc.shape, dtype=bool)
    if kind is ProjectionKind.CPP:
        lat, lon = direction_to_latlon(dirs)
        xc, yc = _latlon_to_cpp(lat, lon, width, height)
        return xc, yc, np.ones(xc.shape, dtype=bool)
    if kind is ProjectionKind.RCMP:
        return _dir_to_rcmp(dirs, width, height)
    return _dir_to_tsp(dirs, width, height)


@lru_cache(maxsize=8)
def pixel_directions(width: int, height: int, kind) -> tuple[np.ndarray, np.ndarray]:
    """Directions of every pixel center, shape ``(height, width, 3)``, plus validity.

    Cached; the returned arrays are read-only.
    """
    kind = check_dimensions(width, height, kind)
    yc, xc = np.mgrid[0:height, 0:width] + 0.5
    dirs, valid = plane_to_direction(xc, yc, width, height, kind)
    dirs.setflags(write=False)
    valid.setflags(write=False)
    return dirs, valid


@lru_cache(maxsize=8)
def pixel_latitudes(width: int, height: int, kind) -> np.ndarray:
    dirs, _ = pixel_directions(width, height, kind)
    lat, _ = direction_to_latlon(dirs)
    lat.setflags(write=False)
    return lat


def pixel_to_sphere(x: int, y: int, width: int, height: int, kind) -> SpherePoint:
    """Sphere point of the center of pixel ``(x, y)``."""
    kind = check_dimensions(width, height, kind)
    if not (0 <= x < width and 0 <= y < height):
        raise ValueError(f"pixel ({x}, {y}) outside {width}x{height} frame")
    dirs, valid = plane_to_direction(x + 0.5, y + 0.5, width, height, kind)
    if not bool(valid):
        raise ValueError(f"pixel ({x}, {y}) lies in the {kind.value.upper()} padding")
    lat, lon = direction_to_latlon(dirs)
    return SpherePoint(float(lat), float(lon))


def sphere_to_pixel(point, width: int, height: int, kind):
    """Continuous pixel coordinates of a sphere point, or ``OUTSIDE`` (None)."""
    lat, lon = point
    if not -90.0 <= lat <= 90.0:
        raise ValueError(f"latitude must lie in [-90, 90], got {lat}")
    xc, yc, valid = direction_to_plane(latlon_to_direction(lat, lon), width, height, kind)
    if not bool(valid):
        return OUTSIDE
    return float(xc), float(yc)


def uniform_samples(n: int) -> SampleSet:
    """Spherical Fibonacci lattice of ``n`` near-uniform points."""
    if n < 1:
        raise ValueError("sample count must be positive")
    i = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n
    golden_angle = math.pi * (3.0 - math.sqrt(5.0))
    lon = np.degrees(np.mod(i * golden_angle + math.pi, 2.0 * math.pi) - math.pi)
    lat = np.degrees(np.arcsin(z))
    return SampleSet(lat, lon)


# -- resampling -------------------------------------------------------------

def sample_bilinear(plane, xc, yc, wrap_x: bool = False) -> np.ndarray:
    """Bilinear lookup at continuous pixel coordinates.

    Rows are clamped at the borders; columns wrap around when ``wrap_x``
    (ERP longitude seam) and clamp otherwise.
    """
    plane = np.asarray(plane, dtype=float)
    height, width = plane.shape
    x = np.asarray(xc, dtype=float) - 0.5
    y = np.asarray(yc, dtype=float) - 0.5
    x0 = np.floor(x)
    y0 = np.floor(y)
    fx = x - x0
    fy = y - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    if wrap_x:
        xa = np.mod(x0, width)
        xb = np.mod(x0 + 1, width)
    else:
        xa = np.clip(x0, 0, width - 1)
        xb = np.clip(x0 + 1, 0, width - 1)
    ya = np.clip(y0, 0, height - 1)
    yb = np.clip(y0 + 1, 0, height - 1)
    top = plane[ya, xa] * (1.0 - fx) + plane[ya, xb] * fx
    bottom = plane[yb, xa] * (1.0 - fx) + plane[yb, xb] * fx
    return top * (1.0 - fy) + bottom * fy


def sample_directions(plane, dirs, kind) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear samples of a projected frame along directions; returns (values, valid)."""
    kind = ProjectionKind.parse(kind)
    height, width = np.shape(plane)
    xc, yc, valid = direction_to_plane(dirs, width, height, kind)
    wrap = kind is ProjectionKind.ERP
    values = sample_bilinear(plane, xc, yc, wrap_x=wrap)
    if kind is ProjectionKind.CPP:
        # renormalize over taps inside the outline so padding never bleeds in
        _, inside = pixel_directions(width, height, kind)
        mask = inside.astype(float)
        coverage = sample_bilinear(mask, xc, yc)
        masked = sample_bilinear(np.asarray(plane, dtype=float) * mask, xc, yc)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.where(coverage > 0, masked / np.where(coverage > 0, coverage, 1.0), values)
    return np.where(valid, values, 0.0), valid


def resample_frame(src, src_kind, dst_kind, dst_width: int, dst_height: int) -> np.ndarray:
    """Convert a single-channel frame between projections.

    Every destination pixel center is mapped to the sphere, then into the
    source frame, and bilinearly interpolated.  Destination pixels without
    a sphere point (CPP padding) are 0.  Returns a float64 array.
    """
    src = np.asarray(src)
    src_kind = check_dimensions(src.shape[1], src.shape[0], src_kind)
    dst_kind = check_dimensions(dst_width, dst_height, dst_kind)
    if (src_kind is dst_kind and src.shape == (dst_height, dst_width)):
        return src.astype(float)
    dirs, dst_valid = pixel_directions(dst_width, dst_height, dst_kind)
    values, src_valid = sample_directions(src, dirs, src_kind)
    return np.where(dst_valid & src_valid, values, 0.0)
