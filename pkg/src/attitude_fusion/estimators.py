"""Per-sample baseline estimators: gyro dead reckoning and accel/mag snapshots."""

from __future__ import annotations

import numpy as np

from .core import integrate_gyro
from .ekf import measured_attitude


def resolve_initial_attitude(dataset, initial="measured", declination=0.0):
    """Starting attitude: ``"measured"``, ``"reference"`` or an explicit triple."""
    if isinstance(initial, str):
        if initial == "measured":
            return measured_attitude(dataset.accel[0], dataset.mag[0], declination=declination)[0]
        if initial == "reference":
            return np.array(dataset.reference_at(0), dtype=float)
        raise ValueError(f"unknown initial attitude mode {initial!r}")
    return np.asarray(initial, dtype=float)


def gyro_only(dataset, initial="measured"):
    """Integrate the gyro from the initial attitude (forward Euler at 1/rate)."""
    n = len(dataset)
    out = np.empty((n, 3))
    att = resolve_initial_attitude(dataset, initial)
    out[0] = att
    dt = dataset.dt
    for k in range(1, n):
        att = integrate_gyro(att, dataset.gyro[k - 1], dt)
        out[k] = att
    return out


def accel_mag(dataset, declination=0.0):
    """Roll/pitch from the accelerometer and tilt-compensated magnetometer yaw.

    Samples whose sensors are degenerate repeat the last valid angle.
    """
    n = len(dataset)
    out = np.empty((n, 3))
    last = np.zeros(3)
    for k in range(n):
        z, used = measured_attitude(dataset.accel[k], dataset.mag[k], fallback=(last[0], last[1]),
                                    declination=declination)
        last = np.where(used, z, last)
        out[k] = last
    return out
