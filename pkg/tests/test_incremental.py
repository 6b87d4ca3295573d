import numpy as np
import pytest

from attitude_fusion import incremental as inc
from attitude_fusion.dataset import LabeledDataset
from attitude_fusion.lstm import LstmNetwork, TrainConfig
from attitude_fusion.sim import HIGH_DYNAMIC, LOW_DYNAMIC, NoiseModel, TrajectoryProfile, simulate


@pytest.fixture(scope="module")
def trained():
    train_ds = simulate(TrajectoryProfile(LOW_DYNAMIC, 30.0, 100.0, seed=1), NoiseModel(), seed=2)
    net, losses = inc.offline_phase(LstmNetwork.initialize((8, 8), seed=0), train_ds,
                                    TrainConfig(epochs=3, seed=0))
    return net, losses


@pytest.fixture(scope="module")
def stream_ds():
    return simulate(TrajectoryProfile(HIGH_DYNAMIC, 12.0, 100.0, seed=3), NoiseModel(), seed=4)


def test_offline_phase_freezes_stats_and_learns(trained):
    net, losses = trained
    assert len(losses) == 3
    assert losses[-1] < losses[0]
    assert not np.all(net.input_stats.std == 1.0)


def test_zero_epoch_offline_keeps_weights():
    ds = simulate(TrajectoryProfile(LOW_DYNAMIC, 5.0, 100.0, seed=1), NoiseModel(), seed=2)
    net0 = LstmNetwork.initialize((4,), seed=0)
    net, losses = inc.offline_phase(net0, ds, TrainConfig(epochs=0))
    assert losses == []
    for k in net0.params:
        np.testing.assert_array_equal(net.params[k], net0.params[k])


def test_zero_update_epochs_bit_identical(trained, stream_ds):
    net, _ = trained
    rep = inc.stream(net, stream_ds, inc.IncrementalConfig(window_len=250, update_epochs=0))
    off = inc.offline_estimates(net, stream_ds)
    assert rep.first_index == 1
    np.testing.assert_array_equal(rep.estimates, off)
    assert all(e.pre_loss == e.post_loss for e in rep.events)


def test_one_update_at_window_boundary(trained, stream_ds):
    net, _ = trained
    W = 300
    ds = stream_ds.slice(0, W + 1)
    rep = inc.stream(net, ds, inc.IncrementalConfig(window_len=W, update_epochs=2))
    assert len(rep.events) == 1
    # the update follows the prediction for the final sample, so it changes no estimate
    assert rep.events[0].sample_index == W
    np.testing.assert_array_equal(rep.estimates, inc.offline_estimates(net, ds))


def test_cadence_and_loss_drop(trained, stream_ds):
    net, _ = trained
    rep = inc.stream(net, stream_ds, inc.IncrementalConfig(window_len=250, update_epochs=3,
                                                           update_learning_rate=1e-3))
    assert [e.sample_index for e in rep.events] == [250 * (k + 1) for k in range(len(rep.events))]
    assert len(rep.events) == (len(stream_ds) - 1) // 250
    assert all(e.post_loss < e.pre_loss for e in rep.events)
    # the first chunk is predicted before any update
    off = inc.offline_estimates(net, stream_ds)
    np.testing.assert_array_equal(rep.estimates[:250], off[:250])
    assert not np.array_equal(rep.estimates[250:500], off[250:500])


def test_causality(trained, stream_ds):
    net, _ = trained
    cfg = inc.IncrementalConfig(window_len=250, update_epochs=1)
    a = inc.stream(net, stream_ds, cfg)
    tampered = LabeledDataset(
        stream_ds.t, stream_ds.gyro.copy(), stream_ds.accel.copy(), stream_ds.mag.copy(),
        stream_ds.reference.copy(), stream_ds.rate,
    )
    tampered.accel[800:] += 3.0
    tampered.reference[800:, 1] *= 0.5
    b = inc.stream(net, tampered, cfg)
    # estimate for sample t sits at row t-1; samples before 800 are untouched
    np.testing.assert_array_equal(a.estimates[:799], b.estimates[:799])


def test_deterministic(trained, stream_ds):
    net, _ = trained
    cfg = inc.IncrementalConfig(window_len=400, update_epochs=2, seed=5)
    a, b = inc.stream(net, stream_ds, cfg), inc.stream(net, stream_ds, cfg)
    np.testing.assert_array_equal(a.estimates, b.estimates)
    assert a.events == b.events


def test_ekf_teacher_runs_unlabeled(trained, stream_ds):
    net, _ = trained
    ds = LabeledDataset(stream_ds.t, stream_ds.gyro, stream_ds.accel, stream_ds.mag, None, stream_ds.rate)
    rep = inc.stream(net, ds, inc.IncrementalConfig(window_len=400, update_epochs=1, teacher="ekf"))
    assert len(rep.events) == 2
    with pytest.raises(inc.IncrementalConfigError):
        inc.stream(net, ds, inc.IncrementalConfig(window_len=400, teacher="reference"))


def test_too_short(trained, stream_ds):
    net, _ = trained
    with pytest.raises(inc.IncrementalConfigError):
        inc.stream(net, stream_ds.slice(0, 100), inc.IncrementalConfig(window_len=100))


def test_config_validation():
    with pytest.raises(ValueError):
        inc.IncrementalConfig(window_len=1)
    with pytest.raises(ValueError):
        inc.IncrementalConfig(teacher="oracle")
    with pytest.raises(ValueError):
        inc.IncrementalConfig(update_learning_rate=0)
