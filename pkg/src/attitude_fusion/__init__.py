"""Attitude estimation from gyro, accelerometer and magnetometer streams.

Submodules: ``core`` (kinematics and per-sensor attitude), ``sim``, ``dataset``,
``ekf``, ``lstm``, ``incremental``, ``metrics``, ``experiment`` and ``cli``.
"""

__version__ = "0.1.0"
