"""Homogeneous 4x4 transforms and the pen-pose rotation.

All rotations are proper (det +1) 3x3 blocks; translations are in mm.
The bottom row [0, 0, 0, 1] is implicit in :class:`Transform4` and is
preserved by composition and inversion.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Transform4:
    """Rigid transform: rotation block ``r`` (3x3) and translation ``p`` (3,)."""

    r: np.ndarray = field(default_factory=lambda: np.eye(3))
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float).reshape(3, 3))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(3))

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(m[:3, :3], m[:3, 3])

    def as_matrix(self):
        m = np.eye(4)
        m[:3, :3] = self.r
        m[:3, 3] = self.p
        return m

    def is_rigid(self, tol=1e-9):
        """True when the rotation block is orthonormal with det +1 within ``tol``."""
        r = self.r
        return (
            np.allclose(r.T @ r, np.eye(3), atol=tol)
            and abs(np.linalg.det(r) - 1.0) <= tol
        )


def compose(a: Transform4, b: Transform4) -> Transform4:
    """Standard homogeneous composition a*b (associative)."""
    return Transform4(a.r @ b.r, a.r @ b.p + a.p)


def invert(t: Transform4) -> Transform4:
    """Inverse of a rigid transform: (R, p) -> (R^T, -R^T p)."""
    rt = t.r.T
    return Transform4(rt, -rt @ t.p)


def translation(x, y, z) -> Transform4:
    return Transform4(np.eye(3), np.array([x, y, z], dtype=float))


def rot_x(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_zyx(rx, ry, rz):
    """Rz(rz) * Ry(ry) * Rx(rx), used to tilt the writing plane."""
    return rot_z(rz) @ rot_y(ry) @ rot_x(rx)


def pen_pose_rotation(theta, phi):
    """Rotation block of the pen frame for azimuth ``theta`` and inclination ``phi``.

    Equals Rz(pi/2 - theta) * Ry(-(pi/2 + phi)); the third column is the pen
    axis direction.  Accepts scalars or equal-shaped arrays (batched output
    has shape (..., 3, 3)).
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    zero = np.zeros_like(st)
    r = np.stack(
        [
            np.stack([-st * sp, -ct, -st * cp], axis=-1),
            np.stack([-ct * sp, st, -ct * cp], axis=-1),
            np.stack([cp, zero, -sp], axis=-1),
        ],
        axis=-2,
    )
    return r


def pen_direction(theta, phi):
    """Unit pen-axis direction for (theta, phi); third column of the pen rotation."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack(
        [
            -np.sin(theta) * np.cos(phi),
            -np.cos(theta) * np.cos(phi),
            -np.sin(phi),
        ],
        axis=-1,
    )


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    wrapped = -((-a + np.pi) % (2.0 * np.pi) - np.pi)
    return wrapped if wrapped.ndim else float(wrapped)


def pen_angles_from_direction(d, ref_theta, ref_phi):
    """Recover (theta, phi) whose pen direction equals ``d``.

    The map (theta, phi) -> direction is two-to-one: (theta, phi) and
    (theta + pi, pi - phi) coincide.  Returns the representation closest to
    (ref_theta, ref_phi) in wrapped angle distance, so rotating a sample by
    the identity returns it unchanged and involutive rotations invert.
    """
    d = np.asarray(d, dtype=float)
    rho = np.hypot(d[0], d[1])
    if rho < 1e-12:
        # vertical pen: azimuth undefined, keep the reference value
        phi = np.pi / 2.0 if d[2] < 0 else -np.pi / 2.0
        return float(ref_theta), phi
    best = None
    for eps in (1.0, -1.0):
        theta = np.arctan2(-eps * d[0], -eps * d[1])
        phi = np.arctan2(-d[2], eps * rho)
        dist = abs(wrap_angle(theta - ref_theta)) + abs(wrap_angle(phi - ref_phi))
        if best is None or dist < best[0]:
            best = (dist, float(theta), float(phi))
    return best[1], best[2]
