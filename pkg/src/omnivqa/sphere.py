"""Spherical geometry for head poses and viewports.

Conventions
-----------
Latitude 0 / longitude 0 is the +x axis, +90 deg latitude is +z and
+90 deg longitude is +y.  A pose's pitch is the latitude of the viewport
center and its yaw the longitude; roll spins the viewport about its own
forward axis.  Viewports are rectilinear (pinhole) frusta.  Normalized
viewport coordinates ``(u, v)`` live in ``[0, 1]^2`` with ``u`` growing
rightward (toward increasing longitude) and ``v`` growing downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Slack on the frustum test so that points constructed exactly on the
# viewport border are still classified as inside.
_EDGE_TOL = 1e-12


def wrap_degrees(angle: float) -> float:
    """Wrap an angle in degrees into [-180, 180)."""
    wrapped = (angle + 180.0) % 360.0 - 180.0
    # float modulo can return exactly 180 for tiny negative inputs
    return -180.0 if wrapped >= 180.0 else wrapped


@dataclass(frozen=True)
class Pose:
    """Head orientation as Euler angles in degrees."""

    pitch: float
    yaw: float = 0.0
    roll: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.pitch) or not -90.0 <= self.pitch <= 90.0:
            raise ValueError(f"pitch must lie in [-90, 90], got {self.pitch}")
        if not (math.isfinite(self.yaw) and math.isfinite(self.roll)):
            raise ValueError("yaw and roll must be finite")
        object.__setattr__(self, "yaw", wrap_degrees(float(self.yaw)))
        object.__setattr__(self, "roll", wrap_degrees(float(self.roll)))


@dataclass(frozen=True)
class Fov:
    """Full horizontal and vertical viewport extent in degrees."""

    horizontal: float = 110.0
    vertical: float = 110.0

    def __post_init__(self):
        for name in ("horizontal", "vertical"):
            value = getattr(self, name)
            if not 0.0 < value < 180.0:
                raise ValueError(f"{name} FOV must lie in (0, 180), got {value}")

    @property
    def half_tangents(self) -> tuple[float, float]:
        return (math.tan(math.radians(self.horizontal) / 2),
                math.tan(math.radians(self.vertical) / 2))


DEFAULT_FOV = Fov()


def latlon_to_direction(lat, lon):
    """Unit vectors for latitude/longitude in degrees (array friendly).

    Returns an array of shape ``np.shape(lat) + (3,)``.
    """
    lat = np.radians(np.asarray(lat, dtype=float))
    lon = np.radians(np.asarray(lon, dtype=float))
    clat = np.cos(lat)
    return np.stack([clat * np.cos(lon), clat * np.sin(lon), np.sin(lat)], axis=-1)


def direction_to_latlon(dirs):
    """Inverse of :func:`latlon_to_direction`; returns ``(lat, lon)`` degrees.

    Longitudes are wrapped into [-180, 180).
    """
    dirs = np.asarray(dirs, dtype=float)
    x, y, z = dirs[..., 0], dirs[..., 1], dirs[..., 2]
    lat = np.degrees(np.arctan2(z, np.hypot(x, y)))
    lon = np.degrees(np.arctan2(y, x))
    lon = np.where(lon >= 180.0, lon - 360.0, lon)
    return lat, lon


def pose_to_direction(pose: Pose) -> np.ndarray:
    """Unit vector of the viewport center; roll is ignored."""
    return latlon_to_direction(pose.pitch, pose.yaw)


def viewport_basis(pose: Pose) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(forward, right, up)`` world vectors of the viewport.

    The frame is built by yaw about +z, then pitch toward +z, then roll
    about the forward axis.
    """
    p, y, r = (math.radians(a) for a in (pose.pitch, pose.yaw, pose.roll))
    forward = np.array([math.cos(p) * math.cos(y), math.cos(p) * math.sin(y), math.sin(p)])
    right0 = np.array([-math.sin(y), math.cos(y), 0.0])
    up0 = np.array([-math.sin(p) * math.cos(y), -math.sin(p) * math.sin(y), math.cos(p)])
    right = math.cos(r) * right0 + math.sin(r) * up0
    up = -math.sin(r) * right0 + math.cos(r) * up0
    return forward, right, up


def direction_to_viewport(dirs, pose: Pose, fov: Fov = DEFAULT_FOV):
    """Project directions into normalized viewport coordinates.

    Parameters
    ----------
    dirs : array_like, shape (..., 3)
        Unit directions.
    pose, fov
        Viewport placement and size.

    Returns
    -------
    u, v : ndarray
        Normalized viewport coordinates (meaningful only where ``inside``).
    inside : ndarray of bool
        Frustum membership.
    """
    dirs = np.asarray(dirs, dtype=float)
    forward, right, up = viewport_basis(pose)
    zf = dirs @ forward
    xl = dirs @ right
    yl = dirs @ up
    th, tv = fov.half_tangents
    front = zf > 0
    safe = np.where(front, zf, 1.0)
    px = xl / safe
    py = yl / safe
    inside = front & (np.abs(px) <= th * (1 + _EDGE_TOL)) & (np.abs(py) <= tv * (1 + _EDGE_TOL))
    u = 0.5 * (px / th + 1.0)
    v = 0.5 * (1.0 - py / tv)
    return u, v, inside


def in_viewport(direction, pose: Pose, fov: Fov = DEFAULT_FOV):
    """Frustum membership test for one or many directions."""
    _, _, inside = direction_to_viewport(direction, pose, fov)
    return bool(inside) if np.ndim(inside) == 0 else inside


def viewport_point_to_direction(u, v, pose: Pose, fov: Fov = DEFAULT_FOV) -> np.ndarray:
    """Map normalized viewport coordinates to a unit direction.

    ``(0.5, 0.5)`` maps onto :func:`pose_to_direction`.  Accepts scalars or
    arrays; raises :class:`ValueError` for coordinates outside ``[0, 1]``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any((u < 0) | (u > 1) | (v < 0) | (v > 1)) or not (
            np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("viewport coordinates must lie in [0, 1]")
    forward, right, up = viewport_basis(pose)
    th, tv = fov.half_tangents
    px = (2.0 * u - 1.0) * th
    py = (1.0 - 2.0 * v) * tv
    vec = forward + px[..., None] * right + py[..., None] * up
    return vec / np.linalg.norm(vec, axis=-1, keepdims=True)
