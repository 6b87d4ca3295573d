"""Synthetic attitude trajectories and noisy 9-axis IMU measurements.

Trajectories are sums of sinusoids per Euler angle, so attitude and Euler
rates are both analytic. Measurements follow the conventions of
:mod:`attitude_fusion.core`: the accelerometer reports the gravity reaction
``g * (-sin(pitch), cos(pitch) sin(roll), cos(pitch) cos(roll))`` and the
magnetometer a unit reference field rotated into the body frame.

Random streams
--------------
Every draw comes from a PCG64 generator seeded through ``numpy``'s
``SeedSequence``. The IMU seed is split into four child streams, in this
order: gyro noise, accelerometer noise, magnetometer noise, disturbance
pulses. Each stream always draws its full block (even when the matching sigma
is zero), so changing one noise term never shifts another channel's values.
Within a stream the draws are ``standard_normal((N, 3))`` for the white noise;
the disturbance stream draws ``random(N)`` onset variates and then
``standard_normal((N, 3))`` pulse directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import GIMBAL_TOL, GRAVITY, BodyRates, GimbalLock, wrap_angle
from .dataset import LabeledDataset, concatenate

N_COMPONENTS = 4
MAX_PITCH = math.radians(75.0)

LOW_DYNAMIC = "low_dynamic"
HIGH_DYNAMIC = "high_dynamic"

# per-axis sinusoid amplitudes (rad) for roll, pitch, yaw
_PRESETS = {
    LOW_DYNAMIC: dict(
        amplitudes=((0.35, 0.30, 0.20, 0.10), (0.25, 0.20, 0.15, 0.10), (0.20, 0.15, 0.10, 0.10)),
        freq_band=(0.03, 0.3),
    ),
    HIGH_DYNAMIC: dict(
        amplitudes=((1.5, 1.2, 0.8, 0.5), (0.5, 0.4, 0.25, 0.15), (1.2, 0.9, 0.6, 0.3)),
        freq_band=(0.05, 1.5),
    ),
}


@dataclass(frozen=True)
class TrajectoryProfile:
    regime: str = LOW_DYNAMIC
    duration: float = 60.0
    rate: float = 100.0
    seed: int = 0
    amplitudes: tuple | None = None
    freq_band: tuple | None = None

    def __post_init__(self):
        if self.regime not in _PRESETS:
            raise ValueError(f"unknown regime {self.regime!r}")
        if not self.duration > 0 or not self.rate > 0:
            raise ValueError("duration and rate must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        amps = np.asarray(self.resolved_amplitudes, dtype=float)
        if amps.shape != (3, N_COMPONENTS) or np.any(amps < 0):
            raise ValueError(f"amplitudes must be a non-negative 3x{N_COMPONENTS} table")
        if amps[1].sum() > MAX_PITCH + 1e-12:
            raise ValueError("pitch amplitudes could exceed 75 deg")
        lo, hi = self.resolved_freq_band
        if not 0 <= lo <= hi or hi >= self.rate / 2:
            raise ValueError("frequency band must satisfy 0 <= lo <= hi < rate/2")

    @property
    def resolved_amplitudes(self):
        return self.amplitudes if self.amplitudes is not None else _PRESETS[self.regime]["amplitudes"]

    @property
    def resolved_freq_band(self):
        return self.freq_band if self.freq_band is not None else _PRESETS[self.regime]["freq_band"]

    @property
    def n_samples(self):
        return int(round(self.duration * self.rate))


@dataclass(frozen=True)
class NoiseModel:
    gyro_bias: tuple = (0.01, 0.01, 0.01)
    gyro_sigma: float = 0.005
    accel_sigma: float = 0.05
    mag_sigma: float = 0.005
    disturbance_rate: float = 0.05
    disturbance_amplitude: float = 2.0
    disturbance_duration: float = 0.5
    declination: float = 0.0
    dip: float = math.radians(60.0)

    def __post_init__(self):
        if len(self.gyro_bias) != 3:
            raise ValueError("gyro_bias needs three components")
        if min(self.gyro_sigma, self.accel_sigma, self.mag_sigma) < 0:
            raise ValueError("noise sigmas must be non-negative")
        if self.disturbance_amplitude < 0 or self.disturbance_duration < 0:
            raise ValueError("disturbance amplitude and duration must be non-negative")
        if not 0.0 <= self.disturbance_rate:
            raise ValueError("disturbance rate must be non-negative")

    @classmethod
    def noiseless(cls, **kw):
        base = dict(
            gyro_bias=(0.0, 0.0, 0.0), gyro_sigma=0.0, accel_sigma=0.0, mag_sigma=0.0,
            disturbance_rate=0.0,
        )
        base.update(kw)
        return cls(**base)


@dataclass(frozen=True, eq=False)
class GroundTruthTrack:
    t: np.ndarray
    attitude: np.ndarray
    euler_rates: np.ndarray
    rate: float

    def __len__(self):
        return len(self.t)


def generate_trajectory(profile):
    """Seeded sum-of-sinusoids attitude track with analytic Euler rates."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(profile.seed)))
    n = profile.n_samples
    t = np.arange(n) / profile.rate
    lo, hi = profile.resolved_freq_band
    amps = np.asarray(profile.resolved_amplitudes, dtype=float)
    att = np.zeros((n, 3))
    rates = np.zeros((n, 3))
    for axis in range(3):
        freqs = rng.uniform(lo, hi, N_COMPONENTS)
        phases = rng.uniform(0.0, 2 * math.pi, N_COMPONENTS)
        omega = 2 * math.pi * freqs
        arg = np.outer(t, omega) + phases
        att[:, axis] = np.sin(arg) @ amps[axis]
        rates[:, axis] = np.cos(arg) @ (amps[axis] * omega)
    att[:, 0] = wrap_angle(att[:, 0])
    att[:, 2] = wrap_angle(att[:, 2])
    return GroundTruthTrack(t, att, rates, float(profile.rate))


def static_track(attitude=(0.0, 0.0, 0.0), duration=60.0, rate=100.0):
    n = int(round(duration * rate))
    att = np.tile(np.asarray(attitude, dtype=float), (n, 1))
    return GroundTruthTrack(np.arange(n) / rate, att, np.zeros((n, 3)), float(rate))


def body_rates_from_euler(att, er):
    """Inverse of :func:`attitude_fusion.core.euler_rates`."""
    att = np.asarray(att, dtype=float)
    er = np.asarray(er, dtype=float)
    phi, theta = att[..., 0], att[..., 1]
    if np.any(np.abs(np.cos(theta)) <= GIMBAL_TOL):
        raise GimbalLock("pitch at the Euler singularity")
    dphi, dtheta, dpsi = er[..., 0], er[..., 1], er[..., 2]
    sphi, cphi = np.sin(phi), np.cos(phi)
    stheta, ctheta = np.sin(theta), np.cos(theta)
    p = dphi - dpsi * stheta
    q = dtheta * cphi + dpsi * ctheta * sphi
    r = -dtheta * sphi + dpsi * ctheta * cphi
    out = np.stack([p, q, r], axis=-1)
    if out.ndim == 1:
        return BodyRates(*map(float, out))
    return out


def rotation_body_to_nav(att):
    """ZYX direction cosine matrices, ``(..., 3, 3)``, mapping body to navigation."""
    att = np.asarray(att, dtype=float)
    sphi, cphi = np.sin(att[..., 0]), np.cos(att[..., 0])
    sth, cth = np.sin(att[..., 1]), np.cos(att[..., 1])
    spsi, cpsi = np.sin(att[..., 2]), np.cos(att[..., 2])
    r = np.empty(att.shape[:-1] + (3, 3))
    r[..., 0, 0] = cth * cpsi
    r[..., 0, 1] = sphi * sth * cpsi - cphi * spsi
    r[..., 0, 2] = cphi * sth * cpsi + sphi * spsi
    r[..., 1, 0] = cth * spsi
    r[..., 1, 1] = sphi * sth * spsi + cphi * cpsi
    r[..., 1, 2] = cphi * sth * spsi - sphi * cpsi
    r[..., 2, 0] = -sth
    r[..., 2, 1] = sphi * cth
    r[..., 2, 2] = cphi * cth
    return r


def gravity_in_body(att, g=GRAVITY):
    att = np.asarray(att, dtype=float)
    phi, theta = att[..., 0], att[..., 1]
    return g * np.stack(
        [-np.sin(theta), np.cos(theta) * np.sin(phi), np.cos(theta) * np.cos(phi)], axis=-1
    )


def reference_field(declination=0.0, dip=math.radians(60.0)):
    """Unit field in north-east-down coordinates."""
    return np.array(
        [math.cos(dip) * math.cos(declination), math.cos(dip) * math.sin(declination), math.sin(dip)]
    )


def field_in_body(att, declination=0.0, dip=math.radians(60.0)):
    m_nav = reference_field(declination, dip)
    # body = R^T nav
    return np.einsum("...ji,j->...i", rotation_body_to_nav(att), m_nav)


def _streams(seed):
    children = np.random.SeedSequence(seed).spawn(4)
    return [np.random.Generator(np.random.PCG64(s)) for s in children]


def synthesize_imu(track, noise, seed):
    """Noisy gyro/accel/mag samples along ``track``, labeled with its attitude."""
    n = len(track)
    gyro_rng, accel_rng, mag_rng, dist_rng = _streams(seed)
    gyro_noise = gyro_rng.standard_normal((n, 3))
    accel_noise = accel_rng.standard_normal((n, 3))
    mag_noise = mag_rng.standard_normal((n, 3))
    onset_u = dist_rng.random(n)
    directions = dist_rng.standard_normal((n, 3))

    gyro = body_rates_from_euler(track.attitude, track.euler_rates)
    gyro = gyro + np.asarray(noise.gyro_bias, dtype=float) + noise.gyro_sigma * gyro_noise

    accel = gravity_in_body(track.attitude)
    accel = accel + _disturbance(onset_u, directions, noise, track.rate)
    accel = accel + noise.accel_sigma * accel_noise

    mag = field_in_body(track.attitude, noise.declination, noise.dip)
    mag = mag + noise.mag_sigma * mag_noise

    return LabeledDataset(track.t.copy(), gyro, accel, mag, track.attitude.copy(), track.rate)


def _disturbance(onset_u, directions, noise, rate):
    n = len(onset_u)
    out = np.zeros((n, 3))
    p_onset = min(1.0, noise.disturbance_rate / rate)
    width = int(round(noise.disturbance_duration * rate))
    if p_onset <= 0 or width <= 0 or noise.disturbance_amplitude == 0:
        return out
    for k in np.flatnonzero(onset_u < p_onset):
        d = directions[k]
        norm = np.linalg.norm(d)
        if norm == 0:
            continue
        out[k : k + width] += noise.disturbance_amplitude * d / norm
    return out


def simulate(profile, noise, seed=None):
    """Trajectory plus measurements; the IMU seed defaults to the profile seed."""
    track = generate_trajectory(profile)
    return synthesize_imu(track, noise, profile.seed if seed is None else seed)


def simulate_segments(profiles, noise, seed):
    """Back-to-back regimes (e.g. low then high dynamic) as one dataset.

    Each segment uses its own profile seed for motion and ``seed + i`` for
    measurement noise. Attitude is not continuous across a segment boundary.
    """
    parts = [synthesize_imu(generate_trajectory(p), noise, seed + i) for i, p in enumerate(profiles)]
    return concatenate(parts)


def preset(regime, **overrides):
    return replace(TrajectoryProfile(regime=regime), **overrides)
