import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attitude_fusion.dataset import (
    HEADER,
    ChannelStats,
    ColumnMapping,
    DatasetError,
    LabeledDataset,
    ParseError,
    compute_stats,
    concatenate,
    convert_recording,
    read_csv,
    split,
    standardize,
    write_csv,
)
from attitude_fusion.sim import LOW_DYNAMIC, NoiseModel, TrajectoryProfile, simulate


def make(n, rate=100.0, labeled=True, seed=0):
    rng = np.random.default_rng(seed)
    ref = None
    if labeled:
        ref = np.column_stack([rng.uniform(-3, 3, n), rng.uniform(-1.5, 1.5, n), rng.uniform(-3, 3, n)])
    return LabeledDataset(np.arange(n) / rate, rng.normal(size=(n, 3)), rng.normal(size=(n, 3)),
                          rng.normal(size=(n, 3)), ref, rate)


def test_round_trip(tmp_path):
    ds = make(50)
    write_csv(ds, tmp_path / "a.csv")
    back = read_csv(tmp_path / "a.csv")
    assert back == ds
    assert back.rate == 100.0


def test_unlabeled_round_trip(tmp_path):
    ds = make(20, labeled=False)
    write_csv(ds, tmp_path / "u.csv")
    back = read_csv(tmp_path / "u.csv")
    assert not back.labeled and back == ds
    with pytest.raises(DatasetError):
        back.reference_at(0)


def test_row_count_sixty_seconds(tmp_path):
    ds = simulate(TrajectoryProfile(LOW_DYNAMIC, 60.0, 100.0, seed=1), NoiseModel())
    write_csv(ds, tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == ",".join(HEADER)
    assert len(lines) - 1 == 6000


def test_twelve_columns_names_line(tmp_path):
    ds = make(5)
    p = tmp_path / "bad.csv"
    write_csv(ds, p)
    lines = p.read_text().splitlines()
    lines[3] = ",".join(lines[3].split(",")[:12])
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as err:
        read_csv(p)
    assert err.value.line == 4
    assert ":4:" in str(err.value)


def test_non_finite_rejected(tmp_path):
    p = tmp_path / "nan.csv"
    write_csv(make(4), p)
    lines = p.read_text().splitlines()
    lines[2] = lines[2].replace(lines[2].split(",")[3], "nan", 1)
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError):
        read_csv(p)


def test_bad_header(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ParseError):
        read_csv(p)


def test_validation():
    with pytest.raises(DatasetError):
        LabeledDataset(np.array([0.0, 0.01, 0.05]), np.zeros((3, 3)), np.zeros((3, 3)), np.zeros((3, 3)), None, 100)
    with pytest.raises(DatasetError):
        LabeledDataset(np.arange(3) / 100, np.zeros((3, 3)), np.zeros((3, 3)), np.zeros((3, 3)),
                       np.full((3, 3), 4.0), 100)


@pytest.mark.parametrize("n,head", [(6000, 3000), (6001, 3000)])
def test_split_floor(n, head):
    a, b = split(make(n), 0.5)
    assert (len(a), len(b)) == (head, n - head)


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 60), st.floats(0.05, 0.95))
def test_split_partition(n, frac):
    k = math.floor(n * frac)
    if not 2 <= k <= n - 2:
        return
    ds = make(n)
    a, b = split(ds, frac)
    assert len(a) == k
    assert concatenate([a, b]) == ds


def test_stats_two_point():
    x = np.zeros((2, 9))
    x[:, 0] = [1.0, 3.0]
    s = compute_stats(x)
    assert s.mean[0] == 2.0 and s.std[0] == 1.0


def test_stats_constant_channel_floor():
    x = np.ones((10, 9))
    s = compute_stats(x)
    np.testing.assert_array_equal(s.std, 1e-8)
    np.testing.assert_array_equal(standardize(x, s), 0.0)


def test_standardized_moments():
    ds = make(500, seed=3)
    s = compute_stats(ds)
    z = standardize(ds.inputs, s)
    np.testing.assert_allclose(z.mean(axis=0), 0, atol=1e-9)
    np.testing.assert_allclose(z.std(axis=0), 1, atol=1e-9)


def test_identity_stats():
    x = np.arange(9.0)
    np.testing.assert_array_equal(standardize(x, ChannelStats.identity()), x)


def test_convert_recording(tmp_path):
    src = tmp_path / "rec.txt"
    rows = ["time;wx;wy;wz;fx;fy;fz;hx;hy;hz;r;p;y"]
    for k in range(5):
        rows.append(";".join(str(v) for v in [k * 0.01, 1, 2, 3, 0, 0, 9.8, 1, 0, 0, 90, 10, -190]))
    src.write_text("\n".join(rows) + "\n")
    cols = dict(zip(HEADER, ["time", "wx", "wy", "wz", "fx", "fy", "fz", "hx", "hy", "hz", "r", "p", "y"]))
    deg = math.pi / 180
    mapping = ColumnMapping(cols, {"gx": deg, "gy": deg, "gz": deg, "roll": deg, "pitch": deg, "yaw": deg}, ";")
    ds = convert_recording(src, mapping, tmp_path / "out.csv")
    assert ds.rate == pytest.approx(100.0)
    np.testing.assert_allclose(ds.gyro[0], np.radians([1, 2, 3]))
    np.testing.assert_allclose(ds.reference[0], [math.pi / 2, np.radians(10), np.radians(170)])
    assert read_csv(tmp_path / "out.csv") == ds


def test_convert_missing_mapping(tmp_path):
    with pytest.raises(DatasetError):
        convert_recording(tmp_path / "x", ColumnMapping({"t": "t"}))
