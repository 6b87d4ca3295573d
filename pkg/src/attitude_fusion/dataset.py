"""Labeled IMU datasets, canonical CSV I/O, splitting and input standardization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .core import AccelVector, BodyRates, EulerAngles, MagVector

INPUT_COLUMNS = ("gx", "gy", "gz", "ax", "ay", "az", "mx", "my", "mz")
REFERENCE_COLUMNS = ("roll", "pitch", "yaw")
HEADER = ("t",) + INPUT_COLUMNS + REFERENCE_COLUMNS
UNLABELED_HEADER = ("t",) + INPUT_COLUMNS

STD_FLOOR = 1e-8
RATE_TOL = 1e-6


class DatasetError(ValueError):
    """Invalid dataset contents."""


class ParseError(DatasetError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


class ImuSample(NamedTuple):
    t: float
    gyro: BodyRates
    accel: AccelVector
    mag: MagVector


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """A fixed-rate IMU recording with an optional reference attitude.

    ``gyro``, ``accel``, ``mag`` and ``reference`` are ``(N, 3)`` arrays;
    ``reference`` may be ``None`` for recordings without ground truth.
    """

    t: np.ndarray
    gyro: np.ndarray
    accel: np.ndarray
    mag: np.ndarray
    reference: np.ndarray | None
    rate: float

    def __post_init__(self):
        n = len(self.t)
        if n < 2:
            raise DatasetError("a dataset needs at least two samples")
        for name in ("gyro", "accel", "mag", "reference"):
            arr = getattr(self, name)
            if arr is None:
                continue
            if arr.shape != (n, 3):
                raise DatasetError(f"{name} has shape {arr.shape}, expected ({n}, 3)")
            if not np.all(np.isfinite(arr)):
                raise DatasetError(f"{name} contains non-finite values")
        if not self.rate > 0:
            raise DatasetError("rate must be positive")
        expected = self.t[0] + np.arange(n) / self.rate
        if np.max(np.abs(self.t - expected)) > RATE_TOL:
            raise DatasetError(f"timestamps are not spaced at 1/{self.rate} s")
        if self.reference is not None:
            ref = self.reference
            if (
                np.any(ref[:, [0, 2]] <= -math.pi)
                or np.any(ref[:, [0, 2]] > math.pi)
                or np.any(np.abs(ref[:, 1]) > math.pi / 2)
            ):
                raise DatasetError("reference angles outside the Euler ranges")

    def __len__(self):
        return len(self.t)

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        if (self.reference is None) != (other.reference is None):
            return False
        same = self.rate == other.rate and len(self) == len(other)
        names = ["t", "gyro", "accel", "mag"] + (["reference"] if self.reference is not None else [])
        return same and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in names)

    @property
    def dt(self):
        return 1.0 / self.rate

    @property
    def labeled(self):
        return self.reference is not None

    @property
    def inputs(self):
        """The nine input channels, ``(N, 9)``, in gyro/accel/mag order."""
        return np.hstack([self.gyro, self.accel, self.mag])

    @property
    def samples(self) -> Iterator[ImuSample]:
        for i in range(len(self)):
            yield self.sample(i)

    def sample(self, i):
        return ImuSample(
            float(self.t[i]),
            BodyRates(*map(float, self.gyro[i])),
            AccelVector(*map(float, self.accel[i])),
            MagVector(*map(float, self.mag[i])),
        )

    def reference_at(self, i):
        if self.reference is None:
            raise DatasetError("dataset has no reference attitude")
        return EulerAngles(*map(float, self.reference[i]))

    def slice(self, start, stop):
        ref = None if self.reference is None else self.reference[start:stop]
        return LabeledDataset(
            self.t[start:stop], self.gyro[start:stop], self.accel[start:stop],
            self.mag[start:stop], ref, self.rate,
        )


def concatenate(parts):
    """Join datasets end to end, re-timing each part to follow the previous one."""
    parts = list(parts)
    rate = parts[0].rate
    if any(p.rate != rate for p in parts):
        raise DatasetError("cannot concatenate datasets with different rates")
    labeled = all(p.labeled for p in parts)
    n = sum(len(p) for p in parts)
    t = parts[0].t[0] + np.arange(n) / rate
    return LabeledDataset(
        t,
        np.vstack([p.gyro for p in parts]),
        np.vstack([p.accel for p in parts]),
        np.vstack([p.mag for p in parts]),
        np.vstack([p.reference for p in parts]) if labeled else None,
        rate,
    )


def _fmt(x):
    return format(x, ".17g")


def write_csv(ds, path):
    """Write ``ds`` in the canonical column order (17 significant digits)."""
    cols = [ds.t[:, None], ds.gyro, ds.accel, ds.mag]
    header = HEADER
    if ds.reference is not None:
        cols.append(ds.reference)
    else:
        header = UNLABELED_HEADER
    table = np.hstack(cols)
    lines = [",".join(header)]
    lines.extend(",".join(map(_fmt, row)) for row in table.tolist())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path, rate=None):
    """Read a canonical CSV file.

    The sampling rate is inferred from the first two timestamps unless given.
    Files carrying only the ten input columns load with ``reference=None``.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise ParseError(path, 1, "empty file")
    header = tuple(h.strip() for h in lines[0].split(","))
    if header not in (HEADER, UNLABELED_HEADER):
        raise ParseError(path, 1, "unexpected header %r" % lines[0])
    ncol = len(header)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != ncol:
            raise ParseError(path, lineno, f"expected {ncol} columns, got {len(fields)}")
        try:
            values = [float(f) for f in fields]
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
        if not all(math.isfinite(v) for v in values):
            raise ParseError(path, lineno, "non-finite value")
        rows.append(values)
    if len(rows) < 2:
        raise ParseError(path, len(lines), "fewer than two data rows")
    table = np.array(rows)
    if rate is None:
        rate = 1.0 / (table[1, 0] - table[0, 0])
        # timestamps written at 17 digits recover the nominal rate to ~1e-12
        rounded = round(rate, 6)
        if abs(rounded - rate) < 1e-6 * rate:
            rate = rounded
    ref = table[:, 10:13] if ncol == 13 else None
    try:
        return LabeledDataset(table[:, 0], table[:, 1:4], table[:, 4:7], table[:, 7:10], ref, rate)
    except DatasetError as exc:
        raise ParseError(path, 2, str(exc)) from None


def split(ds, train_fraction):
    """Contiguous prefix/suffix split; the prefix gets ``floor(N * fraction)`` samples."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    k = int(math.floor(len(ds) * train_fraction))
    return ds.slice(0, k), ds.slice(k, len(ds))


@dataclass(frozen=True)
class ChannelStats:
    mean: np.ndarray = field(default_factory=lambda: np.zeros(9))
    std: np.ndarray = field(default_factory=lambda: np.ones(9))

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        std = np.asarray(self.std, dtype=float)
        if mean.shape != (9,) or std.shape != (9,):
            raise ValueError("channel stats must have nine entries")
        if np.any(std <= 0) or not np.all(np.isfinite(mean)):
            raise ValueError("invalid channel stats")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @classmethod
    def identity(cls):
        return cls()

    def __eq__(self, other):
        return (
            isinstance(other, ChannelStats)
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.std, other.std)
        )


def compute_stats(ds_or_inputs):
    """Per-channel mean and population standard deviation (floored)."""
    x = ds_or_inputs.inputs if isinstance(ds_or_inputs, LabeledDataset) else np.asarray(ds_or_inputs, float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DatasetError("cannot compute statistics of an empty dataset")
    return ChannelStats(x.mean(axis=0), np.maximum(x.std(axis=0), STD_FLOOR))


def standardize(window, stats):
    return (np.asarray(window, dtype=float) - stats.mean) / stats.std


@dataclass
class ColumnMapping:
    """How to pull canonical channels out of a foreign CSV recording.

    ``columns`` maps each canonical name (``t``, ``gx`` ... ``yaw``) to a source
    column header; ``scale`` optionally multiplies a canonical channel (e.g.
    ``pi/180`` for degrees).
    """

    columns: dict
    scale: dict = field(default_factory=dict)
    delimiter: str = ","
    rate: float | None = None


def convert_recording(src, mapping, dst=None):
    """Adapt an external recording into a :class:`LabeledDataset`."""
    import csv

    required = ("t",) + INPUT_COLUMNS
    missing = [c for c in required if c not in mapping.columns]
    if missing:
        raise DatasetError("column mapping lacks " + ", ".join(missing))
    unknown = set(mapping.columns) - set(HEADER)
    if unknown:
        raise DatasetError("unknown canonical columns: " + ", ".join(sorted(unknown)))
    labeled = all(c in mapping.columns for c in REFERENCE_COLUMNS)
    wanted = HEADER if labeled else UNLABELED_HEADER
    with open(src, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=mapping.delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(src, 1, "empty file") from None
        try:
            idx = [header.index(mapping.columns[c]) for c in wanted]
        except ValueError as exc:
            raise ParseError(src, 1, f"source column missing: {exc}") from None
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                vals = [float(rec[i]) for i in idx]
            except (ValueError, IndexError) as exc:
                raise ParseError(src, lineno, str(exc)) from None
            rows.append(vals)
    table = np.array(rows, dtype=float)
    for j, name in enumerate(wanted):
        table[:, j] *= float(mapping.scale.get(name, 1.0))
    if labeled:
        from .core import wrap_angle

        table[:, 10] = wrap_angle(table[:, 10])
        table[:, 12] = wrap_angle(table[:, 12])
    rate = mapping.rate or 1.0 / (table[1, 0] - table[0, 0])
    ds = LabeledDataset(
        table[:, 0], table[:, 1:4], table[:, 4:7], table[:, 7:10],
        table[:, 10:13] if labeled else None, rate,
    )
    if dst is not None:
        write_csv(ds, dst)
    return ds
