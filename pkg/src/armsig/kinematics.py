"""Forward and inverse kinematics of the six-joint virtual arm.

The arm chain is waist (q1, yaw), shoulder (q2), elbow bend (q3) with the
elbow offset link, forearm roll (q4), wrist bend (q5) and hand/pen twist
(q6).  Joint frames follow the standard Denavit-Hartenberg convention;
lengths are millimetres, angles radians.

The inverse solver decouples the wrist point p5 = p6 - l5*a6 from the pen
pose, solves q1..q3 from planar two-link geometry (elbow-down branch,
elbow angle in (0, pi)) and q4..q6 from the residual rotation, returning
the wrist solution with cos(q4) >= 0.  On that branch the closed forms are
q4 = atan2(-a_y, -a_x), q5 = atan2(+hypot(a_x, a_y), a_z) and
q6 = atan2(-o_z, n_z); the mirrored solution (q4+pi, -q5, q6+pi) produces
the identical pose and is never returned away from the wrist singularity.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import SingularError, UnreachableError
from .trajectory import PenSample
from .transforms import (
    Transform4,
    euler_zyx,
    pen_angles_from_direction,
    pen_direction,
    pen_pose_rotation,
    wrap_angle,
)

# Reference writing posture and the pen position it must produce (mm).
INITIAL_POSTURE = np.array([0.0, 3 * np.pi / 4, -2 * np.pi / 3, 0.0, np.pi / 2, 0.0])
INITIAL_PEN_POSITION = np.array([475.29, 0.0, -73.65])

SINGULARITY_TOL = 1e-3  # |sin q5| below this is treated as a wrist singularity
ACOS_CLAMP_TOL = 1e-9  # law-of-cosines arguments this far past [-1, 1] still clamp


@dataclass(frozen=True)
class ArmGeometry:
    """Link lengths l1..l5 (mm) and the constant writing-surface offset."""

    l1: float
    l2: float
    l3: float
    l4: float
    l5: float
    surface_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("l1", "l2", "l3", "l4", "l5"):
            if getattr(self, name) <= 0:
                raise ValueError(f"link length {name} must be strictly positive")
        object.__setattr__(
            self, "surface_offset", np.asarray(self.surface_offset, dtype=float).reshape(3)
        )

    @property
    def lengths(self):
        return (self.l1, self.l2, self.l3, self.l4, self.l5)

    @property
    def l34(self):
        """Effective forearm length across the elbow offset."""
        return math.hypot(self.l3, self.l4)

    @property
    def elbow_offset_angle(self):
        """Fixed angle atan2(l4, l3) folded into q3 by the elbow offset."""
        return math.atan2(self.l4, self.l3)


@dataclass(frozen=True)
class DHRow:
    """One Denavit-Hartenberg row: joint angle, offset d, link a, twist alpha."""

    delta: float
    d: float
    a: float
    alpha: float


@dataclass(frozen=True)
class JointAngles:
    """Six joint angles in radians."""

    q1: float
    q2: float
    q3: float
    q4: float
    q5: float
    q6: float

    def as_array(self):
        return np.array([self.q1, self.q2, self.q3, self.q4, self.q5, self.q6])

    @classmethod
    def from_array(cls, q):
        q = np.asarray(q, dtype=float).reshape(6)
        return cls(*(float(v) for v in q))


@dataclass(frozen=True)
class JointPositions:
    """Positions p0..p6 of the seven joints in the base frame, as a (7, 3) array."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float).reshape(7, 3))

    def __getattr__(self, name):
        if name.startswith("p") and name[1:].isdigit() and 0 <= int(name[1:]) <= 6:
            return self.points[int(name[1:])]
        raise AttributeError(name)

    @property
    def elbow(self):
        return self.points[2]

    @property
    def wrist(self):
        return self.points[5]

    @property
    def finger(self):
        return self.points[6]


def _as_q_array(q):
    if isinstance(q, JointAngles):
        return q.as_array()
    return np.asarray(q, dtype=float).reshape(6)


def _dh_rows(q, l1, l2, l3, l4, l5):
    """Raw DH table rows (delta, d, a, alpha); only delta depends on q."""
    return (
        (q[0], l1, 0.0, -np.pi / 2),
        (q[1] - np.pi / 2, 0.0, l2, 0.0),
        (q[2], 0.0, l3, -np.pi / 2),
        (q[3], l4, 0.0, np.pi / 2),
        (q[4], 0.0, 0.0, -np.pi / 2),
        (q[5], l5, 0.0, 0.0),
    )


def dh_table(q, g: ArmGeometry):
    """The six DH rows for joint angles ``q`` and geometry ``g``."""
    q = _as_q_array(q)
    return [DHRow(*row) for row in _dh_rows(q, *g.lengths)]


def _dh_matrix(delta, d, a, alpha):
    cd, sd = math.cos(delta), math.sin(delta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array(
        [
            [cd, -ca * sd, sa * sd, a * cd],
            [sd, ca * cd, -sa * cd, a * sd],
            [0.0, sa, ca, d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def dh_transform(row: DHRow) -> Transform4:
    """Homogeneous transform of one DH row (standard convention)."""
    m = _dh_matrix(row.delta, row.d, row.a, row.alpha)
    return Transform4(m[:3, :3], m[:3, 3])


def forward_transforms(q, g: ArmGeometry):
    """Cumulative base-frame transforms [T0..T6]; T0 is the identity."""
    q = _as_q_array(q)
    t = np.eye(4)
    out = [Transform4.from_matrix(t)]
    for row in _dh_rows(q, *g.lengths):
        t = t @ _dh_matrix(*row)
        out.append(Transform4.from_matrix(t))
    return out


def forward_pose(q, g: ArmGeometry) -> Transform4:
    """Pose of the pen frame in the base frame."""
    return forward_transforms(q, g)[6]


def forward_positions(q, g: ArmGeometry) -> JointPositions:
    """Base-frame positions of all seven joints for joint angles ``q``."""
    ts = forward_transforms(q, g)
    return JointPositions(np.stack([t.p for t in ts]))


def _fk_batch(qs, g: ArmGeometry):
    """Vectorized FK: (n, 6) angles -> ((n, 7, 3) positions, (n, 3, 3) pen rotations)."""
    qs = np.asarray(qs, dtype=float)
    n = qs.shape[0]
    l1, l2, l3, l4, l5 = g.lengths
    consts = [(l1, 0.0, -np.pi / 2), (0.0, l2, 0.0), (0.0, l3, -np.pi / 2),
              (l4, 0.0, np.pi / 2), (0.0, 0.0, -np.pi / 2), (l5, 0.0, 0.0)]
    deltas = qs.copy()
    deltas[:, 1] -= np.pi / 2
    pos = np.zeros((n, 7, 3))
    t = np.broadcast_to(np.eye(4), (n, 4, 4)).copy()
    for k, (d, a, alpha) in enumerate(consts):
        cd, sd = np.cos(deltas[:, k]), np.sin(deltas[:, k])
        ca, sa = math.cos(alpha), math.sin(alpha)
        m = np.zeros((n, 4, 4))
        m[:, 0, 0] = cd
        m[:, 0, 1] = -ca * sd
        m[:, 0, 2] = sa * sd
        m[:, 0, 3] = a * cd
        m[:, 1, 0] = sd
        m[:, 1, 1] = ca * cd
        m[:, 1, 2] = -sa * cd
        m[:, 1, 3] = a * sd
        m[:, 2, 1] = sa
        m[:, 2, 2] = ca
        m[:, 2, 3] = d
        m[:, 3, 3] = 1.0
        t = np.einsum("nij,njk->nik", t, m)
        pos[:, k + 1] = t[:, :3, 3]
    return pos, t[:, :3, :3]


@lru_cache(maxsize=None)
def _calibrated_lengths(l1=290.0, l3=70.0, l4=302.0):
    """Solve (l2, l5) so the initial posture reaches INITIAL_PEN_POSITION.

    The pen position is linear in both lengths, so the x/z checkpoint
    components give an exactly determined 2x2 system (y vanishes by
    symmetry of the posture).
    """

    def p6(l2, l5):
        t = np.eye(4)
        for row in _dh_rows(INITIAL_POSTURE, l1, l2, l3, l4, l5):
            t = t @ _dh_matrix(*row)
        return t[:3, 3]

    c0 = p6(0.0, 0.0)
    c2 = p6(1.0, 0.0) - c0
    c5 = p6(0.0, 1.0) - c0
    a = np.array([[c2[0], c5[0]], [c2[2], c5[2]]])
    b = (INITIAL_PEN_POSITION - c0)[[0, 2]]
    l2, l5 = np.linalg.solve(a, b)
    residual = np.linalg.norm(c0 + l2 * c2 + l5 * c5 - INITIAL_PEN_POSITION)
    if residual > 0.05:
        raise RuntimeError(f"geometry calibration residual {residual:.3g} mm")
    return l1, float(l2), l3, l4, float(l5)


def default_geometry() -> ArmGeometry:
    """Calibrated default geometry (l2 and l5 fitted to the posture checkpoint)."""
    return ArmGeometry(*_calibrated_lengths())


def pen_pose_matrix(s: PenSample, g: ArmGeometry) -> Transform4:
    """Base-frame pen pose of one sample: orientation from (theta, phi),
    translation = surface offset + pen position."""
    if s.theta is None or s.phi is None:
        raise ValueError("sample has no pen angles; resolve a pen-angle mode first")
    r = pen_pose_rotation(s.theta, s.phi)
    p = g.surface_offset + np.array([s.x, s.y, s.z])
    return Transform4(r, p)


def _shoulder_elbow(px, py, pz, g: ArmGeometry):
    """q1..q3 from the wrist point; vectorized over equally shaped inputs."""
    q1 = np.arctan2(py, px)
    r1 = np.hypot(px, py)
    r2 = pz - g.l1
    l2, l34 = g.l2, g.l34
    c = (r1 * r1 + r2 * r2 - l2 * l2 - l34 * l34) / (2.0 * l2 * l34)
    out_of_range = np.abs(c) > 1.0 + ACOS_CLAMP_TOL
    if np.any(out_of_range):
        idx = int(np.argmax(out_of_range))
        raise UnreachableError(
            "wrist point violates the two-link triangle inequality "
            f"(law-of-cosines argument {np.max(np.abs(c)):.6f})",
            sample_index=None if np.ndim(c) == 0 else idx,
        )
    phi4 = np.arccos(np.clip(c, -1.0, 1.0))
    q3 = -g.elbow_offset_angle - phi4
    q2 = (
        np.pi / 2
        + np.arctan2(l34 * np.sin(phi4), l2 + l34 * np.cos(phi4))
        + np.arctan2(-r2, r1)
    )
    return q1, q2, q3


def _r03(q1, q2, q3):
    """Rotation of frame 3 in the base frame; vectorized to (..., 3, 3)."""
    d23 = q2 - np.pi / 2 + q3
    c1, s1 = np.cos(q1), np.sin(q1)
    c23, s23 = np.cos(d23), np.sin(d23)
    zero = np.zeros_like(c1)
    return np.stack(
        [
            np.stack([c1 * c23, s1, -c1 * s23], axis=-1),
            np.stack([s1 * c23, -c1, -s1 * s23], axis=-1),
            np.stack([-s23, zero, -c23], axis=-1),
        ],
        axis=-2,
    )


def _wrist_angles(m):
    """q4..q6 from the 3->6 rotation block, cos(q4) >= 0 branch (non-singular)."""
    ax, ay, az = m[..., 0, 2], m[..., 1, 2], m[..., 2, 2]
    s5 = np.hypot(ax, ay)
    sgn = np.where(-ax >= 0, 1.0, -1.0)
    q4 = np.arctan2(-sgn * ay, -sgn * ax)
    q5 = np.arctan2(sgn * s5, az)
    q6 = np.arctan2(-sgn * m[..., 2, 1], sgn * m[..., 2, 0])
    return q4, q5, q6, s5


def _wrist_singular(m, prev_q4):
    """q4..q6 at the singularity: only q4 +/- q6 is determined, hold q4."""
    az = m[2, 2]
    q5 = math.atan2(math.hypot(m[0, 2], m[1, 2]), az)
    if az >= 0:
        q6 = wrap_angle(math.atan2(m[1, 0], m[0, 0]) - prev_q4)
    else:
        q6 = wrap_angle(prev_q4 - math.atan2(-m[1, 0], -m[0, 0]))
    return prev_q4, q5, q6


def inverse_kinematics(target: Transform4, g: ArmGeometry, prev: JointAngles = None) -> JointAngles:
    """Joint angles reproducing ``target``; ``prev`` disambiguates only at the
    wrist singularity (|sin q5| < 1e-3), which otherwise raises SingularError."""
    a6 = target.r[:, 2]
    p5 = target.p - g.l5 * a6
    q1, q2, q3 = _shoulder_elbow(p5[0], p5[1], p5[2], g)
    r03 = _r03(q1, q2, q3)
    m = r03.T @ target.r
    q4, q5, q6, s5 = _wrist_angles(m)
    if s5 < SINGULARITY_TOL:
        if prev is None:
            raise SingularError(
                f"wrist singularity (|sin q5| = {float(s5):.2e}) and no previous angles"
            )
        q4, q5, q6 = _wrist_singular(m, prev.q4)
    return JointAngles(float(q1), float(q2), float(q3), float(q4), float(q5), float(q6))


def inverse_kinematics_batch(rotations, positions, g: ArmGeometry, prev: JointAngles = None):
    """Per-sample IK over a trajectory: (n,3,3) rotations, (n,3) positions -> (n,6).

    Singular samples take q4 from the previous sample's solution (or ``prev``
    for the first sample).  UnreachableError carries the sample index.
    """
    rotations = np.asarray(rotations, dtype=float)
    positions = np.asarray(positions, dtype=float)
    a6 = rotations[:, :, 2]
    p5 = positions - g.l5 * a6
    q1, q2, q3 = _shoulder_elbow(p5[:, 0], p5[:, 1], p5[:, 2], g)
    m = np.einsum("nji,njk->nik", _r03(q1, q2, q3), rotations)
    q4, q5, q6, s5 = _wrist_angles(m)
    qs = np.column_stack([q1, q2, q3, q4, q5, q6])
    for i in np.flatnonzero(s5 < SINGULARITY_TOL):
        if i == 0:
            if prev is None:
                raise SingularError("first sample is wrist-singular and no previous angles given")
            prev_q4 = prev.q4
        else:
            prev_q4 = qs[i - 1, 3]
        qs[i, 3:] = _wrist_singular(m[i], prev_q4)
    return qs


def rotate_writing_plane(s: PenSample, gamma) -> PenSample:
    """Rotate one sample's position and pen direction by Rz*Ry*Rx of ``gamma``.

    The returned sample's (theta, phi) are re-extracted from the rotated
    direction, choosing the representation closest to the input angles.
    """
    gamma = np.asarray(gamma, dtype=float).reshape(3)
    if not gamma.any():
        return s
    if s.theta is None or s.phi is None:
        raise ValueError("sample has no pen angles; resolve a pen-angle mode first")
    r = euler_zyx(*gamma)
    pos = r @ np.array([s.x, s.y, s.z])
    direction = r @ pen_direction(s.theta, s.phi)
    theta, phi = pen_angles_from_direction(direction, s.theta, s.phi)
    return PenSample(
        x=float(pos[0]),
        y=float(pos[1]),
        z=float(pos[2]),
        pressure=s.pressure,
        t=s.t,
        theta=theta,
        phi=phi,
        pen_down=s.pen_down,
    )
