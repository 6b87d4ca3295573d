"""Regime-change comparison of LSTM-inc, offline LSTM and the EKF.

Per seed: train offline on a low-dynamic recording, then stream a recording
that switches from low- to high-dynamic motion, and score each estimator on
the two segments separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import ekf as ekf_mod
from . import incremental as inc
from .lstm import LstmNetwork, TrainConfig
from .metrics import rmse_report
from .sim import HIGH_DYNAMIC, LOW_DYNAMIC, NoiseModel, TrajectoryProfile, simulate, simulate_segments


@dataclass
class RegimeChangeSetup:
    train_duration: float = 300.0
    low_duration: float = 60.0
    high_duration: float = 120.0
    rate: float = 100.0
    noise: NoiseModel = field(default_factory=NoiseModel)
    hidden_sizes: tuple = (32, 32)
    train: TrainConfig = field(default_factory=TrainConfig)
    incremental: inc.IncrementalConfig = field(default_factory=inc.IncrementalConfig)
    ekf: ekf_mod.EkfConfig = field(default_factory=ekf_mod.EkfConfig)


@dataclass
class RegimeChangeResult:
    seed: int
    low: dict
    high: dict
    offline_losses: list
    events: list

    def improvement(self):
        """Relative drop in post-changepoint average RMSE from LSTM to LSTM-inc."""
        off = self.high["lstm"].average_rmse
        return (off - self.high["lstm-inc"].average_rmse) / off

    def low_ratio(self):
        return self.low["lstm-inc"].average_rmse / self.low["ekf"].average_rmse


def datasets_for_seed(setup, seed):
    base = 1000 * (seed + 1)
    train = simulate(
        TrajectoryProfile(LOW_DYNAMIC, setup.train_duration, setup.rate, seed=base + 1), setup.noise, base + 2
    )
    stream_ds = simulate_segments(
        [
            TrajectoryProfile(LOW_DYNAMIC, setup.low_duration, setup.rate, seed=base + 3),
            TrajectoryProfile(HIGH_DYNAMIC, setup.high_duration, setup.rate, seed=base + 4),
        ],
        setup.noise,
        base + 5,
    )
    return train, stream_ds


def run_seed(setup, seed):
    train_ds, stream_ds = datasets_for_seed(setup, seed)
    net = LstmNetwork.initialize(setup.hidden_sizes, seed=seed)
    net, losses = inc.offline_phase(net, train_ds, replace(setup.train, seed=seed))
    offline = inc.offline_estimates(net, stream_ds)
    report = inc.stream(net, stream_ds, replace(setup.incremental, seed=seed))
    offset = report.first_index
    ekf_est = ekf_mod.run(setup.ekf, stream_ds).estimates[offset:]
    ref = stream_ds.reference[offset:]
    change = int(round(setup.low_duration * setup.rate)) - offset
    estimates = {"lstm-inc": report.estimates, "lstm": offline, "ekf": ekf_est}
    low = {k: rmse_report(ref[:change], v[:change]) for k, v in estimates.items()}
    high = {k: rmse_report(ref[change:], v[change:]) for k, v in estimates.items()}
    return RegimeChangeResult(seed, low, high, losses, report.events)


def run(setup=None, seeds=range(5)):
    setup = setup or RegimeChangeSetup()
    return [run_seed(setup, s) for s in seeds]


def summarize(results):
    """Median improvement and median low-segment LSTM-inc/EKF ratio."""
    return {
        "median_improvement": float(np.median([r.improvement() for r in results])),
        "median_low_ratio": float(np.median([r.low_ratio() for r in results])),
        "median_high_inc": float(np.median([r.high["lstm-inc"].average_rmse for r in results])),
        "median_high_lstm": float(np.median([r.high["lstm"].average_rmse for r in results])),
        "median_low_inc": float(np.median([r.low["lstm-inc"].average_rmse for r in results])),
        "median_low_ekf": float(np.median([r.low["ekf"].average_rmse for r in results])),
    }
