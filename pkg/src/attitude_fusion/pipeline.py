"""Glue between configuration, datasets and the five estimators."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import ekf as ekf_mod
from . import estimators as base
from . import incremental as inc
from .core import wrap_angle
from .lstm import LstmNetwork, load_weights
from .metrics import BenchmarkReport


class PipelineError(ValueError):
    pass


@dataclass
class EstimatorOutput:
    """Estimates for samples ``first_index`` .. N-1 of a dataset."""

    name: str
    first_index: int
    estimates: np.ndarray
    extra: dict = field(default_factory=dict)
    events: list = field(default_factory=list)


def _initial(dataset, mode):
    if mode == "reference" and not dataset.labeled:
        raise PipelineError("initial_attitude 'reference' needs a reference column")
    return base.resolve_initial_attitude(dataset, mode)


def ekf_config_for(cfg, dataset):
    mode = cfg.ekf_initial
    if isinstance(mode, str) and mode == "reference":
        return replace(cfg.ekf, initial_attitude=tuple(_initial(dataset, "reference")))
    return cfg.ekf


def new_network(cfg):
    return LstmNetwork.initialize(cfg.hidden_sizes, seed=cfg.init_seed, seq_len=cfg.seq_len)


def train_offline(cfg, train_set):
    return inc.offline_phase(new_network(cfg), train_set, cfg.train, normalize=cfg.normalize)


def run_estimator(name, dataset, cfg, net=None):
    if name == "gyro":
        return EstimatorOutput(name, 0, base.gyro_only(dataset, _initial(dataset, cfg.gyro_initial)))
    if name == "accelmag":
        return EstimatorOutput(name, 0, base.accel_mag(dataset, cfg.ekf.declination))
    if name == "ekf":
        res = ekf_mod.run(ekf_config_for(cfg, dataset), dataset)
        return EstimatorOutput(name, 0, res.estimates, {"cov_trace": res.cov_trace})
    if name in ("lstm", "lstm-inc"):
        if net is None:
            raise PipelineError(f"estimator {name!r} needs trained weights")
        if name == "lstm":
            est = inc.offline_estimates(net, dataset)
            return EstimatorOutput(name, net.seq_len - 1, est)
        rep = inc.stream(net, dataset, cfg.incremental, ekf_config_for(cfg, dataset))
        return EstimatorOutput(name, rep.first_index, rep.estimates, events=rep.events)
    raise PipelineError(f"unknown estimator {name!r}")


def load_network(path):
    return load_weights(path)


def write_estimates(out, dataset, path):
    t = dataset.t[out.first_index :]
    est = out.estimates.copy()
    est[:, 0] = wrap_angle(est[:, 0])
    est[:, 2] = wrap_angle(est[:, 2])
    cols = ["t", "roll", "pitch", "yaw"] + list(out.extra)
    extra = [np.asarray(v) for v in out.extra.values()]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for i in range(len(t)):
            row = [t[i], *est[i]] + [e[i] for e in extra]
            w.writerow([format(float(v), ".17g") for v in row])


def write_events(events, dataset, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_index", "t", "pre_loss", "post_loss"])
        for ev in events:
            w.writerow([ev.sample_index, format(float(dataset.t[ev.sample_index]), ".17g"),
                        format(ev.pre_loss, ".17g"), format(ev.post_loss, ".17g")])


def write_losses(losses, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "loss"])
        for i, v in enumerate(losses, start=1):
            w.writerow([i, format(v, ".17g")])


def aligned(outputs):
    """Common first sample index and each estimator's estimates from there on."""
    first = max(o.first_index for o in outputs.values())
    return first, {k: o.estimates[first - o.first_index :] for k, o in outputs.items()}


def write_timeseries(dataset, outputs, path):
    first, est = aligned(outputs)
    cols = ["t"]
    data = [dataset.t[first:]]
    if dataset.labeled:
        for i, ax in enumerate(("roll", "pitch", "yaw")):
            cols.append(f"reference_{ax}")
            data.append(dataset.reference[first:, i])
    for name, e in est.items():
        wrapped = e.copy()
        wrapped[:, 0] = wrap_angle(wrapped[:, 0])
        wrapped[:, 2] = wrap_angle(wrapped[:, 2])
        for i, ax in enumerate(("roll", "pitch", "yaw")):
            cols.append(f"{name}_{ax}")
            data.append(wrapped[:, i])
    table = np.column_stack(data)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in table.tolist():
            w.writerow([format(v, ".17g") for v in row])
    return first, est


def add_to_report(report, name, dataset, outputs, segments=None):
    first, est = aligned(outputs)
    ref = dataset.reference[first:]
    report.add(name, ref, est)
    for seg, (lo, hi) in (segments or {}).items():
        lo_i, hi_i = max(lo, first) - first, min(hi, len(dataset)) - first
        if hi_i <= lo_i:
            raise PipelineError(f"segment {seg} of {name} is empty")
        report.add(f"{name}[{seg}]", ref[lo_i:hi_i], {k: v[lo_i:hi_i] for k, v in est.items()})


def new_report(estimators):
    return BenchmarkReport(list(estimators))


def ensure_dir(path):
    Path(path).mkdir(parents=True, exist_ok=True)
    return Path(path)
