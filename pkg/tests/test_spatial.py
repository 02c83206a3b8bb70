import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chebalance.spatial import (
    WORLD,
    Frame,
    FrameError,
    Wrench,
    WrenchTransform,
    axis_angle,
    cross_mat,
    gravity_wrench,
    is_rotation,
    to_local,
    to_world,
)

from conftest import random_rotation

finite = st.floats(-100, 100, allow_nan=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)


def test_cross_mat_right_hand_rule():
    np.testing.assert_array_equal(cross_mat([1, 0, 0]) @ [0, 1, 0], [0, 0, 1])


def test_cross_mat_zero():
    np.testing.assert_array_equal(cross_mat([0, 0, 0]), np.zeros((3, 3)))


@given(vec3, vec3)
def test_cross_mat_matches_cross(v, w):
    np.testing.assert_allclose(cross_mat(v) @ w, np.cross(v, w), atol=1e-9)
    np.testing.assert_allclose(cross_mat(v) @ v, 0.0, atol=1e-9)


def test_to_world_identity_only_retags():
    w = Wrench([1, 2, 3], [4, 5, 6], Frame.local("a"))
    out = to_world(w, WrenchTransform.identity())
    assert out.frame == WORLD
    np.testing.assert_array_equal(out.vector, w.vector)


def test_to_world_moment_arm():
    w = Wrench([0, 0, 10], [0, 0, 0], Frame.local("a"))
    out = to_world(w, WrenchTransform(np.eye(3), [1, 0, 0]))
    np.testing.assert_allclose(out.force, [0, 0, 10])
    np.testing.assert_allclose(out.torque, [0, -10, 0])


def test_to_world_rejects_world_wrench():
    with pytest.raises(FrameError):
        to_world(Wrench([0, 0, 1], [0, 0, 0]), WrenchTransform.identity())


def test_round_trip(rng):
    for _ in range(50):
        t = WrenchTransform(random_rotation(rng), rng.normal(size=3))
        w = Wrench(rng.normal(size=3), rng.normal(size=3), Frame.local("c"))
        back = to_local(to_world(w, t), t, "c")
        np.testing.assert_allclose(back.vector, w.vector, atol=1e-12)
        assert back.frame == w.frame


def test_transform_matrix_agrees_with_to_world(rng):
    t = WrenchTransform(random_rotation(rng), rng.normal(size=3))
    w = Wrench(rng.normal(size=3), rng.normal(size=3), Frame.local("c"))
    np.testing.assert_allclose(t.matrix() @ w.vector, to_world(w, t).vector, atol=1e-12)
    assert abs(np.linalg.det(t.matrix())) > 0.5


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_rotation_preserves_force_norm(seed):
    rng = np.random.default_rng(seed)
    R = random_rotation(rng)
    assert is_rotation(R)
    t = WrenchTransform(R, rng.normal(size=3))
    w = Wrench(rng.normal(size=3) * 50, rng.normal(size=3), Frame.local("c"))
    assert abs(np.linalg.norm(to_world(w, t).force) - np.linalg.norm(w.force)) < 1e-10


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), finite, finite)
def test_to_world_is_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    t = WrenchTransform(random_rotation(rng), rng.normal(size=3))
    f = Frame.local("c")
    w1 = Wrench(rng.normal(size=3), rng.normal(size=3), f)
    w2 = Wrench(rng.normal(size=3), rng.normal(size=3), f)
    lhs = to_world(a * w1 + b * w2, t).vector
    rhs = (a * to_world(w1, t) + b * to_world(w2, t)).vector
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + abs(a) + abs(b)))


def test_mixed_frame_arithmetic_rejected():
    with pytest.raises(FrameError):
        Wrench([1, 0, 0], [0, 0, 0], Frame.local("a")) + Wrench([1, 0, 0], [0, 0, 0], WORLD)


def test_gravity_wrench_on_axis():
    w = gravity_wrench(40, 9.81, [0, 0, 1])
    np.testing.assert_allclose(w.force, [0, 0, -392.4])
    np.testing.assert_allclose(w.torque, [0, 0, 0], atol=1e-12)


def test_gravity_wrench_offset_com():
    w = gravity_wrench(40, 9.81, [0.1, 0, 1])
    np.testing.assert_allclose(w.torque, [0, 39.24, 0], atol=1e-12)


@pytest.mark.parametrize("mass", [0.0, -1.0])
def test_gravity_wrench_rejects_mass(mass):
    with pytest.raises(ValueError):
        gravity_wrench(mass, 9.81, [0, 0, 1])


def test_axis_angle_is_rotation():
    R = axis_angle([1, 2, 3], 0.7)
    assert is_rotation(R)
    with pytest.raises(ValueError):
        WrenchTransform(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
