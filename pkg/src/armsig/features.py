"""From raw pen trajectories to arm-feature sequences and verifier matrices.

The preprocessing pipeline runs, in order: pen-angle resolution, pen-up
lift, scaling, writing-plane rotation, anchoring to the arm workspace.
Anchoring is per signature: the first sample of every signature maps to
the pen position of the reference writing posture (an alternative would
be to preserve per-signature tablet offsets; the anchored convention
makes extraction invariant to global tablet translations).
"""

from dataclasses import dataclass

import numpy as np

from .errors import MissingAnglesError, TooShortError, UnreachableError
from .kinematics import (
    INITIAL_POSTURE,
    ArmGeometry,
    JointAngles,
    _fk_batch,
    default_geometry,
    forward_positions,
    inverse_kinematics_batch,
)
from .trajectory import SignatureTrajectory
from .transforms import euler_zyx, pen_direction, pen_pose_rotation, wrap_angle

PEN_ANGLE_MODES = ("raw", "smoothed", "fixed")
PENUP_MODES = ("lift5mm", "flat", "flat_q6_bump")
SCALE_FACTORS = (0.1, 1.0, 10.0)

FIXED_THETA = np.pi / 3
FIXED_PHI = 3 * np.pi / 4
SMOOTH_SPAN = 15  # samples in the moving-average window
PENUP_LIFT_MM = 5.0
Q6_BUMP_RAD = np.deg2rad(1.0)

# Forensic long-bone length distributions (mm): mean, std by gender.
HUMERUS_DIST = {"male": (334.0, 15.8), "female": (307.0, 15.9)}
RADIUS_DIST = {"male": (265.0, 15.4), "female": (238.0, 10.7)}
EPSILON_ELBOW_OFFSET_MM = 1.0


@dataclass(frozen=True)
class ExtractionConfig:
    """Pipeline configuration; defaults are the best-performing setup
    (fixed pen angles pi/3 and 3pi/4, 1:1 scale, 5 mm pen-up lift,
    horizontal writing plane, score-fusion weight 0.4)."""

    pen_angle_mode: str = "fixed"
    fixed_theta: float = FIXED_THETA
    fixed_phi: float = FIXED_PHI
    scale: float = 1.0
    penup_mode: str = "lift5mm"
    gamma: tuple = (0.0, 0.0, 0.0)
    fuse_omega: float = 0.4

    def __post_init__(self):
        if self.pen_angle_mode not in PEN_ANGLE_MODES:
            raise ValueError(f"pen_angle_mode must be one of {PEN_ANGLE_MODES}")
        if self.penup_mode not in PENUP_MODES:
            raise ValueError(f"penup_mode must be one of {PENUP_MODES}")
        if not 0.0 <= self.fuse_omega <= 1.0:
            raise ValueError("fuse_omega must lie in [0, 1]")
        object.__setattr__(self, "gamma", tuple(float(v) for v in self.gamma))

    @property
    def plane_normal(self):
        """Normal of the (rotated) writing plane in the base frame."""
        return euler_zyx(*self.gamma) @ np.array([0.0, 0.0, 1.0])


def _moving_average(v, span):
    """Centered moving average; the window truncates at the ends."""
    n = len(v)
    half = span // 2
    cs = np.concatenate([[0.0], np.cumsum(v)])
    lo = np.clip(np.arange(n) - half, 0, None)
    hi = np.clip(np.arange(n) + half + 1, None, n)
    return (cs[hi] - cs[lo]) / (hi - lo)


def resolve_pen_angles(traj, mode, fixed_theta=FIXED_THETA, fixed_phi=FIXED_PHI):
    """Fill or smooth the per-sample pen angles according to ``mode``."""
    if mode == "fixed":
        n = len(traj)
        return traj.copy(theta=np.full(n, fixed_theta), phi=np.full(n, fixed_phi))
    if not traj.has_angles:
        raise MissingAnglesError(f"pen-angle mode '{mode}' needs device-provided angles")
    if mode == "raw":
        return traj.copy()
    if mode == "smoothed":
        return traj.copy(
            theta=_moving_average(traj.theta, SMOOTH_SPAN),
            phi=_moving_average(traj.phi, SMOOTH_SPAN),
        )
    raise ValueError(f"unknown pen-angle mode '{mode}'")


def apply_penup_lift(traj, penup_mode):
    """Synthesize pen height: 0 mm on paper, and per-mode during pen-ups."""
    if penup_mode not in PENUP_MODES:
        raise ValueError(f"unknown pen-up mode '{penup_mode}'")
    z = np.zeros(len(traj))
    if penup_mode == "lift5mm":
        z[~traj.pen_down] = PENUP_LIFT_MM
    # flat and flat_q6_bump keep z = 0; the q6 bump is applied after the
    # angle extraction, keyed off pen_down.
    return traj.copy(z=z)


def apply_scale(traj, scale):
    """Scale the planar trajectory (1:10, 1:1 or 10:1)."""
    if scale == 1.0:
        return traj.copy()
    return traj.copy(x=traj.x * scale, y=traj.y * scale)


def _pen_angles_from_directions(dirs, ref_theta, ref_phi):
    """Vectorized inverse of pen_direction, closest to the reference angles."""
    dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    rho = np.hypot(dx, dy)
    theta_p = np.arctan2(-dx, -dy)
    phi_p = np.arctan2(-dz, rho)
    theta_m = np.arctan2(dx, dy)
    phi_m = np.arctan2(-dz, -rho)
    dist_p = np.abs(wrap_angle(theta_p - ref_theta)) + np.abs(wrap_angle(phi_p - ref_phi))
    dist_m = np.abs(wrap_angle(theta_m - ref_theta)) + np.abs(wrap_angle(phi_m - ref_phi))
    pick_p = dist_p <= dist_m
    theta = np.where(pick_p, theta_p, theta_m)
    phi = np.where(pick_p, phi_p, phi_m)
    vertical = rho < 1e-12
    if vertical.any():
        theta = np.where(vertical, ref_theta, theta)
        phi = np.where(vertical, np.where(dz < 0, np.pi / 2, -np.pi / 2), phi)
    return theta, phi


def rotate_writing_plane(traj, gamma):
    """Rotate positions and pen directions by Rz(rz)*Ry(ry)*Rx(rx); pen
    angles are re-extracted from the rotated directions.  Accepts a whole
    trajectory or a single :class:`PenSample`."""
    if not isinstance(traj, SignatureTrajectory):
        from .kinematics import rotate_writing_plane as rotate_sample

        return rotate_sample(traj, gamma)
    gamma = np.asarray(gamma, dtype=float).reshape(3)
    if not gamma.any():
        return traj.copy()
    if not traj.has_angles:
        raise MissingAnglesError("plane rotation needs resolved pen angles")
    r = euler_zyx(*gamma)
    pos = traj.positions @ r.T
    dirs = pen_direction(traj.theta, traj.phi) @ r.T
    theta, phi = _pen_angles_from_directions(dirs, traj.theta, traj.phi)
    return traj.copy(x=pos[:, 0], y=pos[:, 1], z=pos[:, 2], theta=theta, phi=phi)


def anchor_to_workspace(traj, g: ArmGeometry):
    """Translate the trajectory so its first sample sits at the reference
    posture's pen position; coordinates become base-frame coordinates."""
    target = forward_positions(INITIAL_POSTURE, g).finger
    shift = target - traj.positions[0]
    return traj.copy(x=traj.x + shift[0], y=traj.y + shift[1], z=traj.z + shift[2])


def preprocess(traj, g: ArmGeometry, config: ExtractionConfig):
    """Run the full preprocessing pipeline in the canonical order."""
    out = resolve_pen_angles(traj, config.pen_angle_mode, config.fixed_theta, config.fixed_phi)
    out = apply_penup_lift(out, config.penup_mode)
    out = apply_scale(out, config.scale)
    out = rotate_writing_plane(out, config.gamma)
    return anchor_to_workspace(out, g)


@dataclass
class AnthroSequence:
    """Per-sample joint angles (n, 6) and the reduced joint positions."""

    angles: np.ndarray
    elbow: np.ndarray
    wrist: np.ndarray
    finger: np.ndarray

    def __len__(self):
        return len(self.angles)

    def joint_angles(self, i) -> JointAngles:
        return JointAngles.from_array(self.angles[i])

    def position_channels(self):
        """(n, 9) matrix [elbow | wrist | finger]."""
        return np.hstack([self.elbow, self.wrist, self.finger])

    def angle_channels(self):
        return self.angles


def unwrap_angles(qs):
    """Remove +/-2pi branch jumps between consecutive samples, per joint."""
    return np.unwrap(np.asarray(qs, dtype=float), axis=0)


def extract_anthro(traj, g: ArmGeometry, config: ExtractionConfig) -> AnthroSequence:
    """Angles and reduced positions for a *preprocessed* trajectory.

    Per sample: build the base-frame pen pose, run the inverse kinematics
    (previous sample's angles resolve wrist singularities), unwrap, apply
    the pen-up q6 bump when configured, then recover the elbow/wrist/finger
    positions through the forward kinematics.
    """
    if not traj.has_angles:
        raise MissingAnglesError("extraction needs resolved pen angles")
    rotations = pen_pose_rotation(traj.theta, traj.phi)
    positions = traj.positions + g.surface_offset
    try:
        qs = inverse_kinematics_batch(rotations, positions, g)
    except UnreachableError as e:
        raise UnreachableError(
            f"signature {traj.signer_id}/{traj.signature_id}: {e}",
            sample_index=e.sample_index,
        ) from e
    qs = unwrap_angles(qs)
    if config.penup_mode == "flat_q6_bump":
        qs[~traj.pen_down, 5] += Q6_BUMP_RAD
    pos, _ = _fk_batch(qs, g)
    return AnthroSequence(angles=qs, elbow=pos[:, 2], wrist=pos[:, 5], finger=pos[:, 6])


def extract(traj, g: ArmGeometry = None, config: ExtractionConfig = None) -> AnthroSequence:
    """Preprocess a raw trajectory and extract its feature sequence."""
    g = g if g is not None else default_geometry()
    config = config if config is not None else ExtractionConfig()
    return extract_anthro(preprocess(traj, g, config), g, config)


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-sample feature rows plus channel bookkeeping."""

    rows: np.ndarray
    channel_names: tuple
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "rows", np.asarray(self.rows, dtype=float))
        if self.rows.shape[1] != len(self.channel_names):
            raise ValueError("channel_names length must match row width")

    def __len__(self):
        return len(self.rows)

    @property
    def n_channels(self):
        return self.rows.shape[1]


def _pad_front(d, count):
    return np.vstack([np.repeat(d[:1], count, axis=0), d]) if count else d


def _with_derivatives(base):
    """[v | dv | ddv]; differences keep the length by repeating their first row."""
    d1 = np.diff(base, axis=0)
    d2 = np.diff(d1, axis=0)
    return np.hstack([base, _pad_front(d1, 1), _pad_front(d2, 2)])


def _zscore(m):
    mean = m.mean(axis=0)
    std = m.std(axis=0)
    safe = np.where(std > 1e-12, std, 1.0)
    return np.where(std > 1e-12, (m - mean) / safe, 0.0)


def build_feature_matrix(seq: AnthroSequence, kind) -> FeatureMatrix:
    """Verifier-ready matrix: base channels + first/second differences,
    z-scored per channel (constant channels map to zeros)."""
    if len(seq) < 3:
        raise TooShortError(f"need at least 3 samples, got {len(seq)}")
    if kind == "fused":
        mp = build_feature_matrix(seq, "position")
        ma = build_feature_matrix(seq, "angle")
        return fuse_feature_matrices(mp, ma)
    if kind == "position":
        base = seq.position_channels()
        names = [f"{j}_{c}" for j in ("e", "w", "f") for c in ("x", "y", "z")]
    elif kind == "angle":
        base = seq.angle_channels()
        names = [f"q{k}" for k in range(1, 7)]
    else:
        raise ValueError(f"unknown feature kind '{kind}'")
    rows = _zscore(_with_derivatives(base))
    channel_names = tuple(names + [f"d_{n}" for n in names] + [f"dd_{n}" for n in names])
    return FeatureMatrix(rows=rows, channel_names=channel_names, kind=kind)


def fuse_feature_matrices(mp: FeatureMatrix, ma: FeatureMatrix) -> FeatureMatrix:
    """Channel concatenation (position block first); per-source normalization
    is preserved."""
    from .errors import LengthMismatchError

    if len(mp) != len(ma):
        raise LengthMismatchError(f"sample counts differ: {len(mp)} vs {len(ma)}")
    return FeatureMatrix(
        rows=np.hstack([mp.rows, ma.rows]),
        channel_names=mp.channel_names + ma.channel_names,
        kind="fused",
    )


def assign_gender(signer_seed) -> str:
    """The seeded coin flip used when no gender is supplied; shares the seed
    derivation with :func:`sample_realistic_geometry`."""
    return "male" if np.random.default_rng(signer_seed).random() < 0.5 else "female"


def sample_realistic_geometry(signer_seed, gender=None, base: ArmGeometry = None) -> ArmGeometry:
    """Per-signer bone lengths drawn from forensic Gaussian distributions.

    Humerus (l2) and radius (l4) are sampled by gender; the elbow offset
    l3 collapses to a 1 mm epsilon; l1 and l5 keep the base values.  The
    gender coin flip is seeded, so the same seed always yields the same
    geometry.
    """
    base = base if base is not None else default_geometry()
    rng = np.random.default_rng(signer_seed)
    if gender is None:
        gender = "male" if rng.random() < 0.5 else "female"
    if gender not in HUMERUS_DIST:
        raise ValueError(f"unknown gender '{gender}'")
    l2 = rng.normal(*HUMERUS_DIST[gender])
    l4 = rng.normal(*RADIUS_DIST[gender])
    return ArmGeometry(
        l1=base.l1,
        l2=float(l2),
        l3=EPSILON_ELBOW_OFFSET_MM,
        l4=float(l4),
        l5=base.l5,
        surface_offset=base.surface_offset.copy(),
    )
