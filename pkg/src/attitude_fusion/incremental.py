"""Offline training followed by streaming estimation with periodic retraining."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import ekf as ekf_mod
from .dataset import ChannelStats, compute_stats
from .lstm import TrainConfig, loss, make_windows, predict_aligned, train

TEACHERS = ("reference", "ekf")


class IncrementalConfigError(ValueError):
    pass


@dataclass(frozen=True)
class IncrementalConfig:
    window_len: int = 3000
    update_epochs: int = 5
    update_learning_rate: float = 3e-4
    teacher: str = "reference"
    seed: int = 0
    batch_size: int = 64

    def __post_init__(self):
        if self.window_len < 2:
            raise ValueError("window_len must be at least 2")
        if self.update_epochs < 0:
            raise ValueError("update_epochs must be non-negative")
        if not self.update_learning_rate > 0:
            raise ValueError("update_learning_rate must be positive")
        if self.teacher not in TEACHERS:
            raise ValueError(f"teacher must be one of {TEACHERS}")


class UpdateEvent(NamedTuple):
    sample_index: int
    pre_loss: float
    post_loss: float


@dataclass
class StreamReport:
    """Estimates for samples ``first_index`` .. N-1 and the weight-update log."""

    estimates: np.ndarray
    first_index: int
    events: list = field(default_factory=list)
    net: object = None


def training_pairs(net, dataset):
    """Standardized windows and their reference targets (sample ``t >= seq_len-1``)."""
    if not dataset.labeled:
        raise IncrementalConfigError("dataset has no reference attitude")
    windows = make_windows(dataset.inputs, net.input_stats, net.seq_len)
    return windows, dataset.reference[net.seq_len - 1 :]


def offline_phase(net, train_set, train_config, normalize=True):
    """Freeze input statistics from ``train_set`` and fit the network to it.

    Returns ``(trained_net, losses)``; with zero epochs the weights are untouched
    (only the frozen statistics are attached).
    """
    stats = compute_stats(train_set) if normalize else ChannelStats.identity()
    net = replace(net.copy(), input_stats=stats)
    windows, targets = training_pairs(net, train_set)
    result = train(net, windows, targets, train_config)
    return result.net, result.losses


def offline_estimates(net, dataset):
    """Frozen-network estimates for samples ``seq_len-1`` .. N-1 (raw radians)."""
    windows = make_windows(dataset.inputs, net.input_stats, net.seq_len)
    return predict_aligned(net, windows, 0)


def teacher_targets(dataset, config, ekf_config=None):
    if config.teacher == "reference":
        if not dataset.labeled:
            raise IncrementalConfigError("teacher 'reference' needs a reference attitude column")
        return dataset.reference
    # a causal filter: the target at t only uses samples up to t
    return ekf_mod.run(ekf_config or ekf_mod.EkfConfig(), dataset).estimates


def stream(net, dataset, config, ekf_config=None, batch_size=None):
    """Predict every sample with the current weights, retraining every window.

    For each sample ``t >= seq_len-1`` the estimate comes from the window ending
    at ``t``. Pairs (window, teacher target) accumulate in a buffer; once it
    holds ``window_len`` pairs the network trains ``update_epochs`` epochs on
    them, the buffer empties, and the next sample is predicted by the updated
    weights. Chunks of predictions between updates are evaluated together,
    which matches the sample-by-sample schedule exactly.
    """
    if len(dataset) < config.window_len + 1:
        raise IncrementalConfigError(
            f"stream needs at least window_len + 1 = {config.window_len + 1} samples"
        )
    targets_all = teacher_targets(dataset, config, ekf_config)
    offset = net.seq_len - 1
    windows = make_windows(dataset.inputs, net.input_stats, net.seq_len)
    targets = targets_all[offset:]
    n = len(windows)
    out = np.empty((n, net.output_size))
    events = []
    current = net
    update_cfg = TrainConfig(
        learning_rate=config.update_learning_rate,
        epochs=config.update_epochs,
        batch_size=batch_size or config.batch_size,
    )
    k = 0
    for lo in range(0, n, config.window_len):
        hi = min(lo + config.window_len, n)
        out[lo:hi] = predict_aligned(current, windows[lo:hi], lo)
        if hi - lo < config.window_len:
            break
        if config.update_epochs > 0:
            w, y = windows[lo:hi], targets[lo:hi]
            pre = loss(w, y, current)
            cfg = replace(update_cfg, seed=config.seed + k)
            current = train(current, w, y, cfg).net
            post = loss(w, y, current)
        else:
            pre = post = loss(windows[lo:hi], targets[lo:hi], current)
        events.append(UpdateEvent(offset + hi - 1, pre, post))
        k += 1
    return StreamReport(out, offset, events, current)
