"""Three-state Euler-angle Extended Kalman Filter.

The state is (roll, pitch, yaw). Prediction integrates the gyro through the
Euler-rate kinematics; the correction uses the accelerometer/magnetometer
attitude directly as the measurement (``H = I``) with wrapped innovations and
a Joseph-form covariance update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import ACCEL_TOL, MAG_TOL, angle_diff, euler_rates, euler_rates_jacobian, wrap_angle

_I3 = np.eye(3)


@dataclass(frozen=True)
class EkfConfig:
    q_diag: tuple = (1e-4, 1e-4, 1e-4)
    r_diag: tuple = (1e-2, 1e-2, 4e-2)
    p0_diag: tuple = (1e-2, 1e-2, 1e-2)
    # None: initialize from the first accelerometer/magnetometer sample
    initial_attitude: tuple | None = None
    declination: float = 0.0

    def __post_init__(self):
        for name in ("q_diag", "r_diag", "p0_diag"):
            v = getattr(self, name)
            if len(v) != 3 or min(v) <= 0:
                raise ValueError(f"{name} needs three positive variances")
        if self.initial_attitude is not None and len(self.initial_attitude) != 3:
            raise ValueError("initial_attitude needs three angles")


@dataclass
class EkfState:
    x: np.ndarray
    P: np.ndarray

    def copy(self):
        return EkfState(self.x.copy(), self.P.copy())


class UpdateReport(NamedTuple):
    used: tuple
    innovation: np.ndarray


def _symmetrize(P):
    return 0.5 * (P + P.T)


def initial_state(config, accel=None, mag=None):
    if config.initial_attitude is not None:
        x = np.array(config.initial_attitude, dtype=float)
    else:
        x = measured_attitude(accel, mag, declination=config.declination)[0]
    x[0] = wrap_angle(float(x[0]))
    x[2] = wrap_angle(float(x[2]))
    return EkfState(x, np.diag(np.asarray(config.p0_diag, dtype=float)))


def measured_attitude(accel, mag, fallback=(0.0, 0.0), declination=0.0):
    """Attitude from one accel/mag sample plus validity flags per angle.

    When the accelerometer is degenerate the heading is tilt-compensated with
    ``fallback`` roll/pitch instead.
    """
    ax, ay, az = float(accel[0]), float(accel[1]), float(accel[2])
    roll = math.atan2(ay, az)
    pitch = math.atan2(-ax, max(ay * math.sin(roll) + az * math.cos(roll), 0.0))
    accel_ok = math.sqrt(ax * ax + ay * ay + az * az) > ACCEL_TOL
    phi, theta = (roll, pitch) if accel_ok else (float(fallback[0]), float(fallback[1]))
    mx, my, mz = float(mag[0]), float(mag[1]), float(mag[2])
    sphi, cphi = math.sin(phi), math.cos(phi)
    stheta, ctheta = math.sin(theta), math.cos(theta)
    num = mz * sphi - my * cphi
    den = mx * ctheta + my * stheta * sphi + mz * stheta * cphi
    mag_ok = abs(num) >= MAG_TOL or abs(den) >= MAG_TOL
    yaw = wrap_angle(math.atan2(num, den) - declination)
    return np.array([roll, pitch, yaw]), (accel_ok, accel_ok, mag_ok)


def transition_matrix(x, gyro, dt):
    return _I3 + euler_rates_jacobian(x, gyro) * dt


def predict(state, gyro, dt, q_diag):
    """Propagate the state through the gyro kinematics for ``dt`` seconds."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = state.x
    rates = euler_rates(x, gyro)
    F = transition_matrix(x, gyro, dt)
    x_new = x + np.asarray(rates) * dt
    x_new[0] = wrap_angle(float(x_new[0]))
    x_new[2] = wrap_angle(float(x_new[2]))
    x_new[1] = min(max(x_new[1], -math.pi / 2), math.pi / 2)
    P = F @ state.P @ F.T + np.diag(q_diag) * dt
    return EkfState(x_new, _symmetrize(P))


def correct(state, z, r_diag, used=(True, True, True)):
    """Kalman correction with ``H`` selecting the measured angles."""
    idx = [i for i in range(3) if used[i]]
    innovation = np.zeros(3)
    if not idx:
        return state.copy(), UpdateReport(tuple(used), innovation)
    z = np.asarray(z, dtype=float)
    for i in idx:
        innovation[i] = angle_diff(float(z[i]), float(state.x[i]))
    P = state.P
    if len(idx) == 3:
        H = _I3
        R = np.diag(np.asarray(r_diag, dtype=float))
        nu = innovation
    else:
        H = _I3[idx]
        R = np.diag(np.asarray(r_diag, dtype=float)[idx])
        nu = innovation[idx]
    S = H @ P @ H.T + R
    K = P @ H.T @ np.linalg.inv(S)
    x = state.x + K @ nu
    x[0] = wrap_angle(float(x[0]))
    x[2] = wrap_angle(float(x[2]))
    x[1] = min(max(x[1], -math.pi / 2), math.pi / 2)
    IKH = _I3 - K @ H
    P = IKH @ P @ IKH.T + K @ R @ K.T
    return EkfState(x, _symmetrize(P)), UpdateReport(tuple(used), innovation)


def update(state, accel, mag, r_diag, declination=0.0):
    """Fuse one accelerometer/magnetometer sample.

    Degenerate sensors drop their components from the measurement vector;
    ``UpdateReport.used`` records which angles took part.
    """
    z, used = measured_attitude(accel, mag, fallback=(state.x[0], state.x[1]), declination=declination)
    return correct(state, z, r_diag, used)


@dataclass
class EkfRun:
    estimates: np.ndarray
    cov_trace: np.ndarray
    skipped: int = 0
    covariances: np.ndarray | None = field(default=None, repr=False)


def run(config, dataset, keep_covariances=False):
    """Filter a whole dataset; one post-update estimate per sample.

    Sample 0 is a pure correction of the initial state; every later sample
    first predicts across the preceding interval with the previous gyro
    reading, then corrects with its own accel/mag reading.
    """
    n = len(dataset)
    dt = dataset.dt
    est = np.empty((n, 3))
    trace = np.empty(n)
    covs = np.empty((n, 3, 3)) if keep_covariances else None
    skipped = 0
    state = initial_state(config, dataset.accel[0], dataset.mag[0])
    q_diag, r_diag = config.q_diag, config.r_diag
    for k in range(n):
        if k:
            state = predict(state, dataset.gyro[k - 1], dt, q_diag)
        state, report = update(state, dataset.accel[k], dataset.mag[k], r_diag, config.declination)
        if not all(report.used):
            skipped += 1
        est[k] = state.x
        trace[k] = np.trace(state.P)
        if covs is not None:
            covs[k] = state.P
    return EkfRun(est, trace, skipped, covs)

