import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from omnivqa.media_io import write_frame


def rotation_of(pitch, yaw, roll):
    """Independent pose rotation: body frame forward=x, right=y, up=z."""
    return Rotation.from_euler("ZYX", [yaw, -pitch, roll], degrees=True)


def frustum_oracle(dirs, pitch, yaw, roll, fov_h, fov_v):
    """Viewport membership and (u, v) by rotating directions into the body frame."""
    local = rotation_of(pitch, yaw, roll).inv().apply(np.atleast_2d(dirs))
    x, y, z = local.T
    th = np.tan(np.radians(fov_h) / 2)
    tv = np.tan(np.radians(fov_v) / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = 0.5 + (y / x) / (2 * th)
        v = 0.5 - (z / x) / (2 * tv)
        inside = (x > 0) & (np.abs(y / x) <= th) & (np.abs(z / x) <= tv)
    return u, v, inside


def write_video(path, frames):
    with open(path, "wb") as fh:
        for f in frames:
            write_frame(fh, f)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
