import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attitude_fusion.core import (
    GRAVITY,
    BodyRates,
    DegenerateAccel,
    DegenerateMag,
    DomainError,
    EulerAngles,
    GimbalLock,
    accel_attitude,
    angle_diff,
    euler_rates,
    euler_rates_jacobian,
    integrate_gyro,
    mag_yaw,
    wrap_angle,
)
from attitude_fusion.sim import field_in_body, gravity_in_body

finite = st.floats(-1e4, 1e4, allow_nan=False)


def rot_zyx(roll, pitch, yaw):
    # independent oracle: compose elementary rotations (body -> nav)
    cx, sx = math.cos(roll), math.sin(roll)
    cy, sy = math.cos(pitch), math.sin(pitch)
    cz, sz = math.cos(yaw), math.sin(yaw)
    Rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    Ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    Rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


class TestWrap:
    def test_examples(self):
        assert wrap_angle(0.0) == 0.0
        assert wrap_angle(3 * math.pi) == pytest.approx(math.pi, abs=1e-12)
        assert wrap_angle(-3.5 * math.pi) == pytest.approx(0.5 * math.pi, abs=1e-12)

    def test_range_is_half_open(self):
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)
        assert wrap_angle(math.pi) == math.pi

    def test_vectorized_matches_scalar(self):
        x = np.linspace(-20, 20, 401)
        np.testing.assert_array_equal(wrap_angle(x), [wrap_angle(float(v)) for v in x])

    @given(finite)
    def test_in_range_and_idempotent(self, x):
        w = wrap_angle(x)
        assert -math.pi < w <= math.pi
        assert wrap_angle(w) == w

    @given(finite)
    def test_congruent(self, x):
        # oracle: IEEE remainder gives the representative in [-pi, pi]
        assert abs(math.remainder(x - wrap_angle(x), 2 * math.pi)) < 1e-9

    def test_non_finite(self):
        with pytest.raises(DomainError):
            wrap_angle(float("nan"))
        with pytest.raises(DomainError):
            wrap_angle(np.array([0.0, np.inf]))


class TestAngleDiff:
    def test_examples(self):
        assert angle_diff(0.3, 0.1) == pytest.approx(0.2, abs=1e-15)
        assert angle_diff(math.pi - 0.1, -math.pi + 0.1) == pytest.approx(-0.2, abs=1e-12)

    @given(finite)
    def test_self_zero(self, x):
        assert angle_diff(x, x) == 0.0

    @given(finite, finite)
    def test_antisymmetric_off_branch(self, a, b):
        d = angle_diff(a, b)
        assert -math.pi < d <= math.pi
        if abs(abs(d) - math.pi) > 1e-6:
            assert angle_diff(b, a) == pytest.approx(-d, abs=1e-9)


class TestEulerRates:
    def test_level_identity(self):
        out = euler_rates((0, 0, 0), (0.1, 0.2, 0.3))
        assert isinstance(out, tuple)
        np.testing.assert_allclose(out, (0.1, 0.2, 0.3), atol=1e-15)

    def test_roll_quarter_turn(self):
        np.testing.assert_allclose(euler_rates((math.pi / 2, 0, 0), (0.1, 0.2, 0.3)), (0.1, -0.3, 0.2), atol=1e-15)

    def test_gimbal_lock(self):
        with pytest.raises(GimbalLock):
            euler_rates((0, math.pi / 2, 0), (0.1, 0.2, 0.3))

    def test_matches_matrix_oracle(self):
        rng = np.random.default_rng(5)
        att = rng.uniform(-1.2, 1.2, (50, 3))
        w = rng.normal(size=(50, 3))
        out = euler_rates(att, w)
        for a, ww, o in zip(att, w, out):
            r, p = a[0], a[1]
            T = np.array([
                [1, math.sin(r) * math.tan(p), math.cos(r) * math.tan(p)],
                [0, math.cos(r), -math.sin(r)],
                [0, math.sin(r) / math.cos(p), math.cos(r) / math.cos(p)],
            ])
            np.testing.assert_allclose(o, T @ ww, atol=1e-12)

    def test_jacobian_finite_difference(self):
        rng = np.random.default_rng(1)
        h = 1e-6
        for _ in range(20):
            x = rng.uniform(-1.2, 1.2, 3)
            w = rng.normal(size=3)
            J = euler_rates_jacobian(x, w)
            fd = np.empty((3, 3))
            for j in range(3):
                e = np.zeros(3)
                e[j] = h
                fd[:, j] = (np.array(euler_rates(x + e, w)) - np.array(euler_rates(x - e, w))) / (2 * h)
            np.testing.assert_allclose(J, fd, atol=1e-6)


class TestIntegrate:
    def test_examples(self):
        assert integrate_gyro((0, 0, 0), (0, 0, 0), 0.01) == EulerAngles(0, 0, 0)
        np.testing.assert_allclose(integrate_gyro((0, 0, 0), (0.5, 0, 0), 0.01), (0.005, 0, 0), atol=1e-15)

    def test_hundred_steps(self):
        att = (0.0, 0.0, 0.0)
        for _ in range(100):
            att = integrate_gyro(att, BodyRates(0.5, 0, 0), 0.01)
        assert abs(att.roll - 0.5) < 1e-6
        assert att.pitch == 0 and att.yaw == 0

    def test_wraps_roll(self):
        out = integrate_gyro((math.pi - 0.001, 0, 0), (1.0, 0, 0), 0.01)
        assert out.roll == pytest.approx(math.pi - 0.001 + 0.01 - 2 * math.pi)

    def test_bad_dt(self):
        with pytest.raises(ValueError):
            integrate_gyro((0, 0, 0), (0, 0, 0), 0.0)


class TestAccel:
    def test_examples(self):
        np.testing.assert_allclose(accel_attitude((0, 0, GRAVITY)), (0, 0), atol=1e-15)
        np.testing.assert_allclose(accel_attitude((0, GRAVITY, 0)), (math.pi / 2, 0), atol=1e-15)
        a = (-GRAVITY * math.sin(0.3), 0, GRAVITY * math.cos(0.3))
        np.testing.assert_allclose(accel_attitude(a), (0, 0.3), atol=1e-12)

    def test_free_fall(self):
        with pytest.raises(DegenerateAccel):
            accel_attitude((0.0, 0.01, 0.0))

    @settings(max_examples=200)
    @given(st.floats(-1.3, 1.3), st.floats(-1.3, 1.3))
    def test_round_trip_with_rotation_oracle(self, roll, pitch):
        # specific force = R^T * (0, 0, -g) in NED, sign flipped for the reaction
        a = rot_zyx(roll, pitch, 0.7).T @ np.array([0, 0, GRAVITY])
        np.testing.assert_allclose(accel_attitude(a), (roll, pitch), atol=1e-9)
        np.testing.assert_allclose(gravity_in_body((roll, pitch, 0.7)), a, atol=1e-12)


class TestMag:
    def test_examples(self):
        assert mag_yaw((1, 0, 0), 0, 0) == 0
        assert mag_yaw((0, 1, 0), 0, 0) == pytest.approx(-math.pi / 2)

    def test_round_trip(self):
        dip = math.radians(60)
        m_nav = np.array([math.cos(dip), 0, math.sin(dip)])
        m = rot_zyx(0.2, -0.1, 1.0).T @ m_nav
        assert mag_yaw(m, 0.2, -0.1) == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(field_in_body((0.2, -0.1, 1.0)), m, atol=1e-12)

    def test_vertical_field(self):
        with pytest.raises(DegenerateMag):
            mag_yaw((0, 0, 1), 0, 0)
