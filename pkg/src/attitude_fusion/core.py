"""Euler-angle kinematics and per-sensor attitude extraction.

All angles are ZYX (yaw-pitch-roll) Euler angles in radians. Functions accept
either a single 3-vector or an array whose last axis has length 3; a single
vector returns the matching named tuple, a stack returns an ndarray.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

GRAVITY = 9.80665

GIMBAL_TOL = 1e-6
ACCEL_TOL = 0.1
MAG_TOL = 1e-9

TWO_PI = 2.0 * math.pi


class AttitudeError(ValueError):
    """Base class for attitude-math failures."""


class DomainError(AttitudeError):
    """Non-finite input to an angle operation."""


class GimbalLock(AttitudeError):
    """Pitch too close to +-90 deg for the Euler-rate map."""


class DegenerateAccel(AttitudeError):
    """Specific force too small to observe roll/pitch (free fall)."""


class DegenerateMag(AttitudeError):
    """Horizontal field components vanish; heading unobservable."""


class EulerAngles(NamedTuple):
    roll: float
    pitch: float
    yaw: float


class BodyRates(NamedTuple):
    p: float
    q: float
    r: float


class EulerRates(NamedTuple):
    roll_rate: float
    pitch_rate: float
    yaw_rate: float


class AccelVector(NamedTuple):
    ax: float
    ay: float
    az: float


class MagVector(NamedTuple):
    mx: float
    my: float
    mz: float


def _finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DomainError("non-finite input")


def _pack(values, single, kind):
    out = np.stack(values, axis=-1)
    if single:
        return kind(*(float(v) for v in out))
    return out


def _wrap_scalar(x):
    if -math.pi < x <= math.pi:
        return x
    if not math.isfinite(x):
        raise DomainError("non-finite input")
    # same arithmetic as the array path, so scalar and vector results agree bitwise
    w = math.pi - (math.pi - x) % TWO_PI
    return w + TWO_PI if w <= -math.pi else w


def wrap_angle(x):
    """Map an angle (or array of angles) into (-pi, pi]."""
    if isinstance(x, (float, int, np.floating)):
        return _wrap_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    _finite(arr)
    inside = (arr > -math.pi) & (arr <= math.pi)
    w = math.pi - np.mod(math.pi - arr, TWO_PI)
    w = np.where(w <= -math.pi, w + TWO_PI, w)
    out = np.where(inside, arr, w)
    if out.ndim == 0:
        return float(out)
    return out


def angle_diff(a, b):
    """Shortest signed arc from ``b`` to ``a``."""
    if isinstance(a, (float, int, np.floating)) and isinstance(b, (float, int, np.floating)):
        return _wrap_scalar(float(a) - float(b))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _finite(a, b)
    return wrap_angle(a - b)


def _check_gimbal(pitch):
    if np.any(np.abs(np.cos(pitch)) <= GIMBAL_TOL):
        raise GimbalLock("pitch at the Euler singularity (|cos(pitch)| <= %g)" % GIMBAL_TOL)


def euler_rates(att, w):
    """Euler-angle time derivatives from body rates (p, q, r)."""
    if len(att) == 3 and len(w) == 3 and np.ndim(att) == 1 and np.ndim(w) == 1:
        return _euler_rates_scalar(att, w)
    att = np.asarray(att, dtype=float)
    w = np.asarray(w, dtype=float)
    _finite(att, w)
    single = att.ndim == 1 and w.ndim == 1
    phi, theta = att[..., 0], att[..., 1]
    p, q, r = w[..., 0], w[..., 1], w[..., 2]
    _check_gimbal(theta)
    sphi, cphi = np.sin(phi), np.cos(phi)
    ctheta = np.cos(theta)
    ttheta = np.tan(theta)
    qs_rc = q * sphi + r * cphi
    return _pack(
        (p + qs_rc * ttheta, q * cphi - r * sphi, qs_rc / ctheta),
        single,
        EulerRates,
    )


def _euler_rates_scalar(att, w):
    phi, theta = float(att[0]), float(att[1])
    p, q, r = float(w[0]), float(w[1]), float(w[2])
    if not all(map(math.isfinite, (phi, theta, float(att[2]), p, q, r))):
        raise DomainError("non-finite input")
    ctheta = math.cos(theta)
    if abs(ctheta) <= GIMBAL_TOL:
        raise GimbalLock("pitch at the Euler singularity (|cos(pitch)| <= %g)" % GIMBAL_TOL)
    sphi, cphi = math.sin(phi), math.cos(phi)
    qs_rc = q * sphi + r * cphi
    return EulerRates(p + qs_rc * math.tan(theta), q * cphi - r * sphi, qs_rc / ctheta)


def euler_rates_jacobian(att, w):
    """Partial derivatives of :func:`euler_rates` w.r.t. (roll, pitch, yaw).

    Returns a 3x3 array; the yaw column is identically zero.
    """
    phi, theta = float(att[0]), float(att[1])
    p, q, r = float(w[0]), float(w[1]), float(w[2])
    if abs(math.cos(theta)) <= GIMBAL_TOL:
        raise GimbalLock("pitch at the Euler singularity")
    sphi, cphi = math.sin(phi), math.cos(phi)
    stheta, ctheta = math.sin(theta), math.cos(theta)
    ttheta = stheta / ctheta
    qc_rs = q * cphi - r * sphi
    qs_rc = q * sphi + r * cphi
    return np.array(
        [
            [qc_rs * ttheta, qs_rc / (ctheta * ctheta), 0.0],
            [-qs_rc, 0.0, 0.0],
            [qc_rs / ctheta, qs_rc * stheta / (ctheta * ctheta), 0.0],
        ]
    )


def integrate_gyro(att, w, dt):
    """One forward-Euler step of the Euler-rate kinematics."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    rates = np.asarray(euler_rates(att, w), dtype=float)
    nxt = wrap_angle(np.asarray(att, dtype=float) + rates * dt)
    nxt = np.array(nxt, dtype=float)
    # a step can carry pitch past +-pi/2 while the start point is still regular
    nxt[..., 1] = np.clip(nxt[..., 1], -math.pi / 2, math.pi / 2)
    if nxt.ndim == 1:
        return EulerAngles(*(float(v) for v in nxt))
    return nxt


def accel_angles(a):
    """Roll and pitch from specific force, unchecked; returns (roll, pitch, ok)."""
    a = np.asarray(a, dtype=float)
    ax, ay, az = a[..., 0], a[..., 1], a[..., 2]
    roll = np.arctan2(ay, az)
    # ay*sin(roll) + az*cos(roll) == hypot(ay, az) >= 0, so the two-argument
    # form equals the single-argument arctangent and stays in [-pi/2, pi/2]
    denom = ay * np.sin(roll) + az * np.cos(roll)
    pitch = np.arctan2(-ax, np.maximum(denom, 0.0))
    ok = np.linalg.norm(a, axis=-1) > ACCEL_TOL
    return roll, pitch, ok


def accel_attitude(a):
    """Roll and pitch (radians) from an accelerometer sample."""
    a = np.asarray(a, dtype=float)
    _finite(a)
    roll, pitch, ok = accel_angles(a)
    if not np.all(ok):
        raise DegenerateAccel("|a| <= %g m/s^2" % ACCEL_TOL)
    if a.ndim == 1:
        return float(roll), float(pitch)
    return roll, pitch


def mag_angles(m, roll, pitch):
    """Tilt-compensated heading, unchecked; returns (yaw, ok)."""
    m = np.asarray(m, dtype=float)
    mx, my, mz = m[..., 0], m[..., 1], m[..., 2]
    sphi, cphi = np.sin(roll), np.cos(roll)
    stheta, ctheta = np.sin(pitch), np.cos(pitch)
    num = mz * sphi - my * cphi
    den = mx * ctheta + my * stheta * sphi + mz * stheta * cphi
    ok = (np.abs(num) >= MAG_TOL) | (np.abs(den) >= MAG_TOL)
    yaw = np.arctan2(num, den)
    yaw = np.where(yaw <= -math.pi, yaw + TWO_PI, yaw)
    return yaw, ok


def mag_yaw(m, roll, pitch):
    """Heading (radians) from a magnetometer sample and the current tilt."""
    m = np.asarray(m, dtype=float)
    _finite(m, roll, pitch)
    yaw, ok = mag_angles(m, roll, pitch)
    if not np.all(ok):
        raise DegenerateMag("horizontal field below %g" % MAG_TOL)
    if np.ndim(yaw) == 0:
        return float(yaw)
    return yaw
