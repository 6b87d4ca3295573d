import math

import numpy as np
import pytest

from attitude_fusion.metrics import (
    BenchmarkReport,
    average_rmse,
    benchmark_report,
    display,
    read_report_csv,
    rmse,
    rmse_report,
    variance,
)


def brute_rmse(a, b):
    s = 0.0
    for x, y in zip(a, b):
        s += (x - y) ** 2
    return math.sqrt(s / len(a))


def test_rmse_examples():
    assert rmse([1, 2, 3], [1, 2, 3]) == 0
    assert rmse([1, 2, 3], [2, 2, 2], wrapped=False) == pytest.approx(math.sqrt(2 / 3), abs=1e-15)
    assert rmse([1, 2, 3], [2, 2, 2]) == pytest.approx(0.816497, abs=1e-6)


def test_rmse_wrapped_branch_cut():
    assert rmse([3.1], [-3.1]) == pytest.approx(2 * math.pi - 6.2, abs=1e-12)
    assert rmse([3.1], [-3.1]) == pytest.approx(0.0832, abs=1e-4)
    assert rmse([3.1], [-3.1], wrapped=False) == pytest.approx(6.2)


def test_rmse_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = rng.integers(1, 50)
        a, b = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
        assert abs(rmse(a, b) - brute_rmse(a, b)) < 1e-12


def test_rmse_errors():
    with pytest.raises(ValueError):
        rmse([1, 2], [1])
    with pytest.raises(ValueError):
        rmse([], [])


def test_average_rmse_table_rows():
    assert average_rmse(0.05, 0.03, 0.12) == pytest.approx(0.0667, abs=1e-4)
    assert display(average_rmse(0.05, 0.03, 0.12)) == "0.07"
    assert average_rmse(1.52, 0.45, 1.17) == pytest.approx(1.0467, abs=1e-4)
    assert display(average_rmse(1.52, 0.45, 1.17)) == "1.05"
    assert average_rmse(0, 0, 0) == 0


def test_display_rounds_half_up():
    assert display(0.125) == "0.13"
    assert display(1.0) == "1.00"


def test_variance():
    assert variance([2.0, 2.0, 2.0]) == 0
    assert variance([1.0, 3.0]) == 1.0
    assert variance([-1.0, 0.0, 1.0]) == pytest.approx(2 / 3)


def test_rmse_report():
    truth = np.zeros((4, 3))
    est = np.tile([0.1, 0.2, 0.3], (4, 1))
    r = rmse_report(truth, est)
    assert r.as_tuple() == pytest.approx((0.1, 0.2, 0.3, 0.2))


def test_perfect_row_is_zero():
    ref = np.random.default_rng(0).normal(size=(10, 3))
    rep = benchmark_report(ref, {"ekf": ref.copy()})
    assert rep.values("dataset") == [0.0, 0.0, 0.0, 0.0]


def test_table_shape(tmp_path):
    rng = np.random.default_rng(1)
    rep = BenchmarkReport(["lstm-inc", "lstm", "ekf"])
    for name in ("D1", "D2"):
        ref = rng.normal(size=(20, 3))
        rep.add(name, ref, {e: ref + rng.normal(scale=0.1, size=ref.shape) for e in rep.estimators})
    assert len(rep.columns) == 12
    assert rep.columns[:3] == ["roll[lstm-inc]", "roll[lstm]", "roll[ekf]"]
    assert rep.columns[-1] == "average[ekf]"
    text = rep.to_text().splitlines()
    assert len(text) == 3 and len(text[1].split()) == 13
    rep.write_csv(tmp_path / "r.csv")
    back = read_report_csv(tmp_path / "r.csv")
    assert set(back) == {("D1", "wrapped"), ("D1", "unwrapped"), ("D2", "wrapped"), ("D2", "unwrapped")}
    assert list(back[("D2", "wrapped")].values()) == rep.values("D2")


def test_report_rejects_mismatched_estimators():
    rep = BenchmarkReport(["ekf"])
    with pytest.raises(ValueError):
        rep.add("x", np.zeros((2, 3)), {"lstm": np.zeros((2, 3))})
