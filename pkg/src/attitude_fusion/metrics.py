"""RMSE, variance and Table-style benchmark reports."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import angle_diff

AXES = ("roll", "pitch", "yaw")


def rmse(truth, estimate, wrapped=True):
    """Root mean square error; ``wrapped`` measures errors as shortest arcs."""
    truth = np.asarray(truth, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if truth.shape != estimate.shape:
        raise ValueError(f"length mismatch: {truth.shape} vs {estimate.shape}")
    if truth.size == 0:
        raise ValueError("rmse of an empty sequence")
    err = angle_diff(truth, estimate) if wrapped else truth - estimate
    return float(np.sqrt(np.mean(np.square(err))))


def average_rmse(roll, pitch, yaw):
    if min(roll, pitch, yaw) < 0:
        raise ValueError("RMSE values are non-negative")
    return (roll + pitch + yaw) / 3.0


def variance(series):
    """Population variance (divide by N)."""
    x = np.asarray(series, dtype=float)
    if x.size < 2:
        raise ValueError("variance needs at least two values")
    return float(np.mean(np.square(x - x.mean())))


@dataclass(frozen=True)
class RmseReport:
    roll_rmse: float
    pitch_rmse: float
    yaw_rmse: float
    n: int

    @property
    def average_rmse(self):
        return average_rmse(self.roll_rmse, self.pitch_rmse, self.yaw_rmse)

    def as_tuple(self):
        return (self.roll_rmse, self.pitch_rmse, self.yaw_rmse, self.average_rmse)


def rmse_report(truth, estimate, wrapped=True):
    truth = np.asarray(truth, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if truth.shape != estimate.shape or truth.ndim != 2 or truth.shape[1] != 3:
        raise ValueError("truth and estimate must be aligned (N, 3) arrays")
    axes = [rmse(truth[:, i], estimate[:, i], wrapped) for i in range(3)]
    return RmseReport(*axes, n=len(truth))


@dataclass
class BenchmarkReport:
    """RMSE per dataset row and estimator, laid out axis-major.

    Columns run Roll (each estimator), Pitch (each), Yaw (each), Average (each).
    """

    estimators: list
    rows: dict = field(default_factory=dict)
    unwrapped: dict = field(default_factory=dict)

    @property
    def columns(self):
        return [f"{metric}[{est}]" for metric in AXES + ("average",) for est in self.estimators]

    def add(self, name, reference, estimates):
        if set(estimates) != set(self.estimators):
            raise ValueError("estimate set does not match report estimators")
        self.rows[name] = {e: rmse_report(reference, estimates[e]) for e in self.estimators}
        self.unwrapped[name] = {e: rmse_report(reference, estimates[e], wrapped=False) for e in self.estimators}

    def values(self, name, unwrapped=False):
        row = (self.unwrapped if unwrapped else self.rows)[name]
        return [row[e].as_tuple()[m] for m in range(4) for e in self.estimators]

    def to_text(self, decimals=2):
        head = ["dataset"] + self.columns
        body = [[name] + [f"{v:.{decimals}f}" for v in self.values(name)] for name in self.rows]
        widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
        lines = ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths)))
                 for r in [head] + body]
        return "\n".join(lines) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "mode"] + self.columns)
        for name in self.rows:
            w.writerow([name, "wrapped"] + [format(v, ".17g") for v in self.values(name)])
            w.writerow([name, "unwrapped"] + [format(v, ".17g") for v in self.values(name, True)])
        return buf.getvalue()

    def write_csv(self, path):
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def read_report_csv(path):
    """Parse a report CSV back into ``{(dataset, mode): {column: value}}``."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        for rec in reader:
            out[(rec[0], rec[1])] = {c: float(v) for c, v in zip(header[2:], rec[2:])}
    return out


def benchmark_report(reference, estimates, name="dataset"):
    """One-row report for a single dataset; ``estimates`` maps name to (N, 3)."""
    report = BenchmarkReport(list(estimates))
    report.add(name, reference, estimates)
    return report


def display(value, decimals=2):
    """Round half away from zero for table display (``0.0667 -> '0.07'``)."""
    q = 10 ** decimals
    return f"{math.floor(value * q + 0.5) / q:.{decimals}f}"
