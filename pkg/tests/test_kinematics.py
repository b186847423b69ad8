import numpy as np
import pytest

from armsig.errors import SingularError, UnreachableError
from armsig.kinematics import (
    INITIAL_PEN_POSITION,
    INITIAL_POSTURE,
    ArmGeometry,
    DHRow,
    JointAngles,
    _fk_batch,
    default_geometry,
    dh_table,
    dh_transform,
    forward_pose,
    forward_positions,
    forward_transforms,
    inverse_kinematics,
    inverse_kinematics_batch,
    pen_pose_matrix,
    rotate_writing_plane,
)
from armsig.trajectory import PenSample
from armsig.transforms import Transform4, rot_z, wrap_angle


def wrapped_diff(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b))
    return np.minimum(d, 2 * np.pi - d)


def make_sample(x=0.0, y=0.0, z=0.0, theta=np.pi / 3, phi=3 * np.pi / 4, pen_down=True):
    return PenSample(x=x, y=y, z=z, pressure=500.0, t=0.0, theta=theta, phi=phi, pen_down=pen_down)


# --------------------------------------------------------------------------
# DH rows and transforms

def test_dh_transform_zero_row_is_identity():
    t = dh_transform(DHRow(0.0, 0.0, 0.0, 0.0))
    assert np.allclose(t.as_matrix(), np.eye(4))


def test_dh_transform_twist_row():
    # delta=0, d=L1, a=0, alpha=-pi/2 (first row of the table at q1=0)
    t = dh_transform(DHRow(0.0, 290.0, 0.0, -np.pi / 2))
    assert np.allclose(t.r, [[1, 0, 0], [0, 0, 1], [0, -1, 0]], atol=1e-15)
    assert np.allclose(t.p, [0, 0, 290.0])
    assert t.is_rigid()


def test_dh_transform_planar_row():
    t = dh_transform(DHRow(np.pi / 2, 0.0, 5.0, 0.0))
    assert np.allclose(t.r, rot_z(np.pi / 2), atol=1e-15)
    assert np.allclose(t.p, [0.0, 5.0, 0.0], atol=1e-12)


def test_dh_transform_always_proper(rng):
    for _ in range(200):
        row = DHRow(*rng.uniform(-np.pi, np.pi, 2), *rng.uniform(-5, 5, 1), rng.uniform(-np.pi, np.pi))
        assert dh_transform(row).is_rigid()


def test_dh_table_structure(geometry):
    rows = dh_table(np.zeros(6), geometry)
    assert len(rows) == 6
    assert rows[0] == DHRow(0.0, geometry.l1, 0.0, -np.pi / 2)
    assert rows[1].delta == pytest.approx(-np.pi / 2)  # q2 enters shifted by -pi/2
    assert rows[1].a == geometry.l2 and rows[1].d == 0.0 and rows[1].alpha == 0.0
    assert rows[2] == DHRow(0.0, 0.0, geometry.l3, -np.pi / 2)
    assert rows[3] == DHRow(0.0, geometry.l4, 0.0, np.pi / 2)
    assert rows[4] == DHRow(0.0, 0.0, 0.0, -np.pi / 2)
    assert rows[5] == DHRow(0.0, geometry.l5, 0.0, 0.0)


def test_dh_table_only_delta_varies(geometry):
    base = dh_table(np.zeros(6), geometry)
    moved = dh_table([1.0, 0, 0, 0, 0, 0], geometry)
    assert moved[0].delta == 1.0
    for k in range(6):
        assert (moved[k].d, moved[k].a, moved[k].alpha) == (base[k].d, base[k].a, base[k].alpha)
    q6_row = dh_table([0, 0, 0, 0, 0, 0.3], geometry)[5]
    assert q6_row == DHRow(0.3, geometry.l5, 0.0, 0.0)


# --------------------------------------------------------------------------
# forward kinematics

def test_calibrated_initial_pen_position(geometry):
    p = forward_positions(INITIAL_POSTURE, geometry)
    assert np.linalg.norm(p.finger - INITIAL_PEN_POSITION) < 0.05


def test_base_chain(geometry, rng):
    q = rng.uniform(-np.pi, np.pi, 6)
    p = forward_positions(q, geometry)
    assert np.allclose(p.p0, [0, 0, 0])
    assert np.allclose(p.p1, [0, 0, geometry.l1])


def test_wrist_pair_coincides(geometry, joint_tuples):
    for q in joint_tuples[:50]:
        p = forward_positions(q, geometry)
        assert np.allclose(p.p4, p.p5, atol=1e-9)


def test_link_length_invariants(geometry, joint_tuples):
    for q in joint_tuples[:100]:
        p = forward_positions(q, geometry)
        assert np.linalg.norm(p.p2 - p.p1) == pytest.approx(geometry.l2, abs=1e-9)
        assert np.linalg.norm(p.p5 - p.p3) == pytest.approx(geometry.l4, abs=1e-9)
        assert np.linalg.norm(p.p6 - p.p5) == pytest.approx(geometry.l5, abs=1e-9)


def test_q1_is_base_yaw(geometry, rng):
    q = np.array([0.0, 2.1, -1.9, 0.2, 0.9, 0.4])
    shifted = q.copy()
    shifted[0] = np.pi / 2
    p = forward_positions(q, geometry).points
    ps = forward_positions(shifted, geometry).points
    r = rot_z(np.pi / 2)
    for k in range(1, 7):
        assert np.allclose(ps[k], r @ p[k], atol=1e-9)
        assert ps[k][2] == pytest.approx(p[k][2], abs=1e-9)


def test_forward_transforms_are_rigid(geometry, joint_tuples):
    for q in joint_tuples[:20]:
        for t in forward_transforms(q, geometry):
            assert t.is_rigid(tol=1e-9)


def test_fk_batch_matches_scalar(geometry, joint_tuples):
    qs = joint_tuples[:30]
    pos, rot = _fk_batch(qs, geometry)
    for i, q in enumerate(qs):
        ref = forward_positions(q, geometry)
        assert np.allclose(pos[i], ref.points, atol=1e-9)
        assert np.allclose(rot[i], forward_pose(q, geometry).r, atol=1e-9)


# --------------------------------------------------------------------------
# pen pose

def test_pen_pose_matrix_identity_rotation(geometry):
    s = make_sample(theta=np.pi / 2, phi=-np.pi / 2)
    t = pen_pose_matrix(s, ArmGeometry(*geometry.lengths))
    assert np.allclose(t.r, np.eye(3), atol=1e-15)


def test_pen_pose_matrix_translation_offset():
    g = ArmGeometry(290, 290, 70, 302, 153, surface_offset=[400.0, 0.0, 0.0])
    t = pen_pose_matrix(make_sample(x=10.0, y=20.0, z=0.0), g)
    assert np.allclose(t.p, [410.0, 20.0, 0.0])


def test_pen_pose_matrix_orthonormal(geometry, rng):
    for _ in range(50):
        s = make_sample(theta=rng.uniform(-np.pi, np.pi), phi=rng.uniform(-np.pi, np.pi))
        assert pen_pose_matrix(s, geometry).is_rigid(tol=1e-12)


# --------------------------------------------------------------------------
# inverse kinematics

def test_ik_recovers_initial_posture(geometry):
    target = forward_pose(INITIAL_POSTURE, geometry)
    q = inverse_kinematics(target, geometry)
    assert np.max(wrapped_diff(q.as_array(), INITIAL_POSTURE)) < 1e-6


def test_ik_q1_zero_for_wrist_on_x_axis(geometry):
    # a pose whose decoupled wrist point has p_y = 0, p_x > 0
    target = forward_pose(INITIAL_POSTURE, geometry)
    q = inverse_kinematics(target, geometry)
    assert q.q1 == pytest.approx(0.0, abs=1e-12)


def test_ik_roundtrip_componentwise(geometry, joint_tuples):
    for q in joint_tuples[:300]:
        qhat = inverse_kinematics(forward_pose(q, geometry), geometry)
        assert np.max(wrapped_diff(qhat.as_array(), q)) < 1e-6


def test_ik_pose_reproduction(geometry, joint_tuples):
    for q in joint_tuples[:100]:
        target = forward_pose(q, geometry)
        back = forward_pose(inverse_kinematics(target, geometry), geometry)
        assert np.linalg.norm(back.p - target.p) < 1e-6
        assert np.linalg.norm(back.r - target.r) < 1e-6


def test_ik_unreachable(geometry):
    target = Transform4(np.eye(3), [2000.0, 0.0, 0.0])
    with pytest.raises(UnreachableError):
        inverse_kinematics(target, geometry)


def singular_pose(geometry):
    """A reachable pose with sin(q5) = 0."""
    q = np.array([0.0, 2.2, -2.0, 0.3, 0.0, 0.4])
    return q, forward_pose(q, geometry)


def test_ik_singular_without_prev_raises(geometry):
    _, target = singular_pose(geometry)
    with pytest.raises(SingularError):
        inverse_kinematics(target, geometry)


def test_ik_singular_holds_prev_q4(geometry):
    q, target = singular_pose(geometry)
    prev = JointAngles.from_array(q)
    qhat = inverse_kinematics(target, geometry, prev=prev)
    assert qhat.q4 == pytest.approx(q[3])
    back = forward_pose(qhat, geometry)
    assert np.linalg.norm(back.p - target.p) < 1e-6
    assert np.linalg.norm(back.r - target.r) < 1e-6


def test_ik_singular_folded_wrist_branch(geometry):
    # the other singular sheet: q5 = pi, cos q5 = -1
    q = np.array([0.1, 2.2, -2.0, 0.3, np.pi, 0.4])
    target = forward_pose(q, geometry)
    qhat = inverse_kinematics(target, geometry, prev=JointAngles.from_array(q))
    back = forward_pose(qhat, geometry)
    assert np.linalg.norm(back.p - target.p) < 1e-6
    assert np.linalg.norm(back.r - target.r) < 1e-6


def test_ik_batch_matches_scalar(geometry, joint_tuples):
    qs = joint_tuples[:50]
    pos, rots = _fk_batch(qs, geometry)
    got = inverse_kinematics_batch(rots, pos[:, 6], geometry)
    for i, q in enumerate(qs):
        scalar = inverse_kinematics(forward_pose(q, geometry), geometry)
        assert np.allclose(got[i], scalar.as_array(), atol=1e-12)


def test_ik_batch_unreachable_carries_index(geometry, joint_tuples):
    qs = joint_tuples[:5]
    pos, rots = _fk_batch(qs, geometry)
    p = pos[:, 6].copy()
    p[3] = [1500.0, 0.0, 0.0]
    with pytest.raises(UnreachableError) as err:
        inverse_kinematics_batch(rots, p, geometry)
    assert err.value.sample_index == 3


# --------------------------------------------------------------------------
# writing-plane rotation

def test_rotate_plane_identity():
    s = make_sample(x=1.0, y=2.0, z=0.0)
    assert rotate_writing_plane(s, (0.0, 0.0, 0.0)) == s


def test_rotate_plane_involution():
    s = make_sample(x=3.0, y=-1.0, z=5.0)
    gamma = (0.0, -np.pi, 0.0)
    back = rotate_writing_plane(rotate_writing_plane(s, gamma), gamma)
    for field in ("x", "y", "z"):
        assert getattr(back, field) == pytest.approx(getattr(s, field), abs=1e-9)
    assert wrap_angle(back.theta - s.theta) == pytest.approx(0.0, abs=1e-9)
    assert wrap_angle(back.phi - s.phi) == pytest.approx(0.0, abs=1e-9)


def test_rotate_plane_quarter_turn_position():
    s = make_sample(x=1.0, y=0.0, z=0.0)
    out = rotate_writing_plane(s, (0.0, -np.pi / 2, 0.0))
    assert np.allclose([out.x, out.y, out.z], [0.0, 0.0, 1.0], atol=1e-12)


def test_rotate_plane_preserves_direction_consistency(rng):
    from armsig.transforms import euler_zyx, pen_direction

    for _ in range(50):
        gamma = rng.uniform(-np.pi, np.pi, 3)
        s = make_sample(x=1.0, y=2.0, z=3.0,
                        theta=rng.uniform(-np.pi, np.pi), phi=rng.uniform(-np.pi, np.pi))
        out = rotate_writing_plane(s, gamma)
        expected = euler_zyx(*gamma) @ pen_direction(s.theta, s.phi)
        assert np.allclose(pen_direction(out.theta, out.phi), expected, atol=1e-9)


# --------------------------------------------------------------------------
# geometry

def test_default_geometry_is_calibrated(geometry):
    assert geometry.l1 == 290.0
    assert geometry.l3 == 70.0
    assert geometry.l4 == 302.0
    # calibration leaves l2 near the trunk length and l5 a plausible hand+pen
    assert 285.0 < geometry.l2 < 295.0
    assert 140.0 < geometry.l5 < 165.0


def test_geometry_rejects_nonpositive_lengths():
    with pytest.raises(ValueError):
        ArmGeometry(0.0, 290, 70, 302, 150)
