import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from armsig.transforms import (
    Transform4,
    compose,
    euler_zyx,
    invert,
    pen_angles_from_direction,
    pen_direction,
    pen_pose_rotation,
    translation,
    wrap_angle,
)

angles = st.floats(-np.pi, np.pi, allow_nan=False)


def random_rigid(rng):
    a, b, c = rng.uniform(-np.pi, np.pi, 3)
    return Transform4(euler_zyx(a, b, c), rng.uniform(-100, 100, 3))


def test_compose_identity():
    t = Transform4(euler_zyx(0.3, -0.2, 1.1), [1.0, 2.0, 3.0])
    out = compose(Transform4.identity(), t)
    assert np.allclose(out.as_matrix(), t.as_matrix())


def test_compose_inverse_is_identity(rng):
    t = random_rigid(rng)
    out = compose(t, invert(t))
    assert np.allclose(out.as_matrix(), np.eye(4), atol=1e-9)


def test_pure_translations_add():
    out = compose(translation(1, 0, 0), translation(0, 2, 0))
    assert np.allclose(out.p, [1, 2, 0])
    assert np.allclose(out.r, np.eye(3))


def test_composition_preserves_rigidity(rng):
    t = random_rigid(rng)
    u = random_rigid(rng)
    assert compose(t, u).is_rigid()
    assert invert(t).is_rigid()


def test_compose_associative(rng):
    a, b, c = (random_rigid(rng) for _ in range(3))
    left = compose(compose(a, b), c)
    right = compose(a, compose(b, c))
    assert np.allclose(left.as_matrix(), right.as_matrix(), atol=1e-12)


@given(theta=angles, phi=angles)
@settings(max_examples=200, deadline=None)
def test_pen_pose_rotation_is_proper(theta, phi):
    r = pen_pose_rotation(theta, phi)
    assert np.allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert abs(np.linalg.det(r) - 1.0) < 1e-12


def test_pen_pose_rotation_identity_case():
    # theta = pi/2, phi = -pi/2 aligns the pen frame with the surface frame
    r = pen_pose_rotation(np.pi / 2, -np.pi / 2)
    assert np.allclose(r, np.eye(3), atol=1e-15)


def test_pen_pose_rotation_batched():
    thetas = np.array([0.1, 1.2, -2.0])
    phis = np.array([2.4, -0.3, 0.9])
    batched = pen_pose_rotation(thetas, phis)
    assert batched.shape == (3, 3, 3)
    for k in range(3):
        assert np.allclose(batched[k], pen_pose_rotation(thetas[k], phis[k]))


def test_pen_direction_is_third_column():
    r = pen_pose_rotation(0.7, 2.1)
    assert np.allclose(pen_direction(0.7, 2.1), r[:, 2])


@given(theta=angles, phi=angles)
@settings(max_examples=200, deadline=None)
def test_pen_angles_from_direction_roundtrip(theta, phi):
    d = pen_direction(theta, phi)
    t2, p2 = pen_angles_from_direction(d, theta, phi)
    assert np.allclose(pen_direction(t2, p2), d, atol=1e-12)
    # the recovered pair is the representation closest to the input
    assert abs(wrap_angle(t2 - theta)) + abs(wrap_angle(p2 - phi)) < 1e-9


def test_pen_angles_vertical_direction_keeps_reference_azimuth():
    theta, phi = pen_angles_from_direction(np.array([0.0, 0.0, -1.0]), 0.42, 1.0)
    assert theta == 0.42
    assert phi == pytest.approx(np.pi / 2)


def test_wrap_angle():
    assert wrap_angle(0.0) == 0.0
    assert wrap_angle(np.pi) == pytest.approx(np.pi)
    assert wrap_angle(-np.pi) == pytest.approx(np.pi)
    assert wrap_angle(3 * np.pi) == pytest.approx(np.pi)
    assert wrap_angle(2 * np.pi + 0.25) == pytest.approx(0.25)
