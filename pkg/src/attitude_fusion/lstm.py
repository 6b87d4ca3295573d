"""Two-layer LSTM regressor written directly in NumPy.

Windows are ``(batch, steps, 9)`` arrays of standardized sensor vectors. Each
LSTM layer stacks its gate weights row-wise in the order input, forget,
output, candidate, so a layer holds ``W`` (4H x in), ``U`` (4H x H) and ``b``
(4H). A linear head maps the last hidden state of the top layer to
(roll, pitch, yaw) in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .core import angle_diff
from .dataset import ChannelStats, standardize

GATES = ("input", "forget", "output", "candidate")
FORMAT_VERSION = 1
_MAGIC = "attitude-fusion-lstm"

# prediction runs on zero-padded blocks aligned to absolute window indices so a
# window's output never depends on how a caller chunks the stream
PREDICT_BLOCK = 256


class ShapeError(ValueError):
    """Parameter or input arrays do not chain together."""


class WeightFileError(ValueError):
    """Base class for weight-file failures."""


class WeightVersionError(WeightFileError):
    pass


class WeightShapeError(WeightFileError):
    pass


class CorruptWeightFile(WeightFileError):
    pass


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _layer_names(n_layers):
    names = []
    for k in range(1, n_layers + 1):
        names += [f"l{k}.W", f"l{k}.U", f"l{k}.b"]
    return names + ["head.W", "head.b"]


@dataclass(eq=False)
class LstmNetwork:
    """Parameters of the stacked LSTM plus its frozen input statistics."""

    params: dict
    hidden_sizes: tuple
    input_size: int = 9
    output_size: int = 3
    seq_len: int = 2
    input_stats: ChannelStats = field(default_factory=ChannelStats.identity)

    def __post_init__(self):
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise ShapeError("hidden sizes must be positive")
        if self.seq_len < 1:
            raise ShapeError("seq_len must be at least 1")
        expected = self.expected_shapes()
        if set(self.params) != set(expected):
            raise ShapeError(f"parameter names {sorted(self.params)} != {sorted(expected)}")
        for name, shape in expected.items():
            arr = np.asarray(self.params[name], dtype=float)
            if arr.shape != shape:
                raise ShapeError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ShapeError(f"{name} contains non-finite values")
            self.params[name] = arr

    def expected_shapes(self):
        shapes = {}
        fan_in = self.input_size
        for k, h in enumerate(self.hidden_sizes, start=1):
            shapes[f"l{k}.W"] = (4 * h, fan_in)
            shapes[f"l{k}.U"] = (4 * h, h)
            shapes[f"l{k}.b"] = (4 * h,)
            fan_in = h
        shapes["head.W"] = (self.output_size, fan_in)
        shapes["head.b"] = (self.output_size,)
        return shapes

    @property
    def names(self):
        return _layer_names(len(self.hidden_sizes))

    def copy(self):
        return replace(self, params={k: v.copy() for k, v in self.params.items()})

    @classmethod
    def initialize(cls, hidden_sizes=(32, 32), seed=0, input_stats=None, seq_len=2,
                   input_size=9, output_size=3):
        """Uniform(+-1/sqrt(fan_in)) weights, forget-gate bias 1, other biases 0."""
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        params = {}
        fan_in = input_size
        for k, h in enumerate(hidden_sizes, start=1):
            lim_w = 1.0 / math.sqrt(fan_in)
            lim_u = 1.0 / math.sqrt(h)
            params[f"l{k}.W"] = rng.uniform(-lim_w, lim_w, (4 * h, fan_in))
            params[f"l{k}.U"] = rng.uniform(-lim_u, lim_u, (4 * h, h))
            b = np.zeros(4 * h)
            b[h : 2 * h] = 1.0
            params[f"l{k}.b"] = b
            fan_in = h
        lim = 1.0 / math.sqrt(fan_in)
        params["head.W"] = rng.uniform(-lim, lim, (output_size, fan_in))
        params["head.b"] = np.zeros(output_size)
        return cls(params, tuple(hidden_sizes), input_size, output_size, seq_len,
                   input_stats if input_stats is not None else ChannelStats.identity())

    def predict(self, raw_windows):
        """Forward pass on unstandardized ``(B, steps, 9)`` windows."""
        return network_forward(standardize(raw_windows, self.input_stats), self)


class LayerCache(NamedTuple):
    xs: list
    hs: list  # hs[t] is the hidden state entering step t; hs[-1] is the final one
    cs: list
    gates: list  # (i, f, o, g, tanh(c)) per step


def cell_forward(x, h, c, W, U, b):
    """One LSTM step for a batch; returns ``(h_next, c_next, cache)``."""
    H = h.shape[-1]
    if W.shape != (4 * H, x.shape[-1]) or U.shape != (4 * H, H) or b.shape != (4 * H,):
        raise ShapeError("cell parameters do not match input/hidden sizes")
    a = x @ W.T + h @ U.T + b
    i = sigmoid(a[..., :H])
    f = sigmoid(a[..., H : 2 * H])
    o = sigmoid(a[..., 2 * H : 3 * H])
    g = np.tanh(a[..., 3 * H :])
    c_next = f * c + i * g
    tc = np.tanh(c_next)
    h_next = o * tc
    return h_next, c_next, (i, f, o, g, tc)


def _layer_forward(xs, W, U, b, H):
    batch = xs[0].shape[0]
    h = np.zeros((batch, H))
    c = np.zeros((batch, H))
    hs, cs, gates = [h], [c], []
    for x in xs:
        h, c, g = cell_forward(x, h, c, W, U, b)
        hs.append(h)
        cs.append(c)
        gates.append(g)
    return LayerCache(list(xs), hs, cs, gates)


def _forward(windows, net):
    windows = np.asarray(windows, dtype=float)
    if windows.ndim != 3 or windows.shape[2] != net.input_size:
        raise ShapeError(f"windows must be (batch, steps, {net.input_size}), got {windows.shape}")
    p = net.params
    xs = [windows[:, t, :] for t in range(windows.shape[1])]
    caches = []
    for k, H in enumerate(net.hidden_sizes, start=1):
        cache = _layer_forward(xs, p[f"l{k}.W"], p[f"l{k}.U"], p[f"l{k}.b"], H)
        caches.append(cache)
        xs = cache.hs[1:]
    out = xs[-1] @ p["head.W"].T + p["head.b"]
    return out, caches


def network_forward(windows, net):
    """Raw (unwrapped) radian outputs, ``(B, 3)``, for standardized windows."""
    return _forward(windows, net)[0]


def predict_aligned(net, windows, start=0):
    """Forward pass evaluated in fixed blocks aligned to ``start``-based indices.

    ``windows[j]`` is treated as window number ``start + j``; the result for a
    given window is bitwise independent of ``start`` and ``len(windows)``
    chunking, which keeps incremental and offline runs comparable.
    """
    windows = np.asarray(windows, dtype=float)
    n = len(windows)
    out = np.empty((n, net.output_size))
    if n == 0:
        return out
    first = (start // PREDICT_BLOCK) * PREDICT_BLOCK
    pos = 0
    block_start = first
    while pos < n:
        lo = start + pos - block_start
        take = min(PREDICT_BLOCK - lo, n - pos)
        block = np.zeros((PREDICT_BLOCK,) + windows.shape[1:])
        block[lo : lo + take] = windows[pos : pos + take]
        out[pos : pos + take] = network_forward(block, net)[lo : lo + take]
        pos += take
        block_start += PREDICT_BLOCK
    return out


def _layer_backward(cache, dh_out, W, U):
    """BPTT through one layer; ``dh_out[t]`` is dLoss/dh_t from above."""
    T = len(cache.xs)
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(W.shape[0])
    dxs = [None] * T
    dh_next = np.zeros_like(cache.hs[0])
    dc_next = np.zeros_like(cache.cs[0])
    for t in reversed(range(T)):
        i, f, o, g, tc = cache.gates[t]
        dh = dh_next if dh_out[t] is None else dh_out[t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * cache.cs[t]
        dc_next = dc * f
        da = np.concatenate(
            [di * i * (1.0 - i), df * f * (1.0 - f), do * o * (1.0 - o), dg * (1.0 - g * g)], axis=-1
        )
        dW += da.T @ cache.xs[t]
        dU += da.T @ cache.hs[t]
        db += da.sum(axis=0)
        dxs[t] = da @ W
        dh_next = da @ U
    return dW, dU, db, dxs


def loss_and_gradients(windows, targets, net, wrapped=True):
    """Mean squared (angle) error over batch and outputs, and its gradient.

    Returns ``(loss, grads)`` with ``grads`` keyed like ``net.params``.
    """
    targets = np.asarray(targets, dtype=float)
    if len(targets) == 0:
        raise ValueError("empty batch")
    pred, caches = _forward(windows, net)
    if targets.shape != pred.shape:
        raise ShapeError(f"targets shape {targets.shape} != predictions {pred.shape}")
    err = angle_diff(pred, targets) if wrapped else pred - targets
    loss = float(np.mean(err * err))
    dpred = 2.0 * err / err.size
    p = net.params
    grads = {}
    top = caches[-1].hs[-1]
    grads["head.W"] = dpred.T @ top
    grads["head.b"] = dpred.sum(axis=0)
    T = len(caches[0].xs)
    dh_out = [None] * (T - 1) + [dpred @ p["head.W"]]
    for k in range(len(caches), 0, -1):
        dW, dU, db, dxs = _layer_backward(caches[k - 1], dh_out, p[f"l{k}.W"], p[f"l{k}.U"])
        grads[f"l{k}.W"], grads[f"l{k}.U"], grads[f"l{k}.b"] = dW, dU, db
        dh_out = dxs
    return loss, grads


def loss(windows, targets, net, wrapped=True):
    pred = network_forward(windows, net)
    err = angle_diff(pred, targets) if wrapped else pred - np.asarray(targets, dtype=float)
    return float(np.mean(err * err))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 3e-3
    epochs: int = 40
    batch_size: int = 64
    seed: int = 0
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8
    clip_norm: float = 5.0
    wrapped_loss: bool = True

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if not self.clip_norm > 0:
            raise ValueError("clip_norm must be positive")
        b1, b2 = self.betas
        if not (0 <= b1 < 1 and 0 <= b2 < 1):
            raise ValueError("moment decays must lie in [0, 1)")


@dataclass
class AdamState:
    m: dict
    v: dict
    step: int = 0

    @classmethod
    def zeros_like(cls, params):
        return cls({k: np.zeros_like(a) for k, a in params.items()},
                   {k: np.zeros_like(a) for k, a in params.items()})


def clip_gradients(grads, max_norm):
    """Scale all gradients together so their global L2 norm is at most ``max_norm``."""
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        scale = max_norm / norm
        return {k: g * scale for k, g in grads.items()}, norm
    return grads, norm


def optimizer_step(params, grads, state, config):
    """In-place Adam update of ``params``; returns the advanced state."""
    grads, _ = clip_gradients(grads, config.clip_norm)
    b1, b2 = config.betas
    state.step += 1
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for k in sorted(params):
        g = grads[k]
        m = state.m[k]
        v = state.v[k]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        params[k] = params[k] - config.learning_rate * (m / c1) / (np.sqrt(v / c2) + config.eps)
    return state


class TrainResult(NamedTuple):
    net: LstmNetwork
    losses: list
    opt_state: AdamState


def train(net, windows, targets, config, opt_state=None):
    """Mini-batch Adam training on standardized windows.

    Batches are reshuffled every epoch from a generator seeded with
    ``config.seed``. ``losses[e]`` is the full-set loss after epoch ``e``.
    The input network is not modified.
    """
    windows = np.asarray(windows, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if len(windows) == 0:
        raise ValueError("training needs at least one window")
    if len(windows) != len(targets):
        raise ShapeError("windows and targets differ in length")
    net = net.copy()
    if opt_state is None:
        opt_state = AdamState.zeros_like(net.params)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    n = len(windows)
    losses = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            _, grads = loss_and_gradients(windows[idx], targets[idx], net, config.wrapped_loss)
            optimizer_step(net.params, grads, opt_state, config)
        losses.append(loss(windows, targets, net, config.wrapped_loss))
    return TrainResult(net, losses, opt_state)


def make_windows(inputs, stats, seq_len=2):
    """Standardized sliding windows; window ``j`` ends at sample ``j + seq_len - 1``."""
    x = standardize(inputs, stats)
    n = len(x) - seq_len + 1
    if n < 1:
        raise ValueError("not enough samples for one window")
    return np.stack([x[s : s + n] for s in range(seq_len)], axis=1)


def save_weights(net, path):
    """Versioned plain-text weight file (row-major, 17 significant digits)."""
    fmt = lambda a: " ".join(format(v, ".17g") for v in np.ravel(a))  # noqa: E731
    lines = [
        f"{_MAGIC} {FORMAT_VERSION}",
        f"input_size {net.input_size}",
        "hidden_sizes " + " ".join(str(h) for h in net.hidden_sizes),
        f"output_size {net.output_size}",
        f"seq_len {net.seq_len}",
    ]
    for name in net.names:
        arr = net.params[name]
        lines.append(f"tensor {name} " + " ".join(str(d) for d in arr.shape))
        rows = arr.reshape(arr.shape[0], -1) if arr.ndim > 1 else arr[None, :]
        lines.extend(fmt(r) for r in rows)
    lines.append("stats_mean " + fmt(net.input_stats.mean))
    lines.append("stats_std " + fmt(net.input_stats.std))
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_weights(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    it = iter(lines)

    def nxt(expect=None):
        try:
            line = next(it)
        except StopIteration:
            raise CorruptWeightFile(f"{path}: unexpected end of file") from None
        parts = line.split()
        if not parts or (expect is not None and parts[0] != expect):
            raise CorruptWeightFile(f"{path}: expected {expect!r}, got {line[:40]!r}")
        return parts

    def floats(parts, count):
        try:
            vals = np.array([float(v) for v in parts], dtype=float)
        except ValueError:
            raise CorruptWeightFile(f"{path}: non-numeric value") from None
        if vals.size != count:
            raise CorruptWeightFile(f"{path}: expected {count} values, got {vals.size}")
        return vals

    head = nxt(_MAGIC)
    if len(head) != 2 or not head[1].isdigit():
        raise CorruptWeightFile(f"{path}: bad header")
    if int(head[1]) != FORMAT_VERSION:
        raise WeightVersionError(f"{path}: format version {head[1]}, expected {FORMAT_VERSION}")
    try:
        input_size = int(nxt("input_size")[1])
        hidden = tuple(int(h) for h in nxt("hidden_sizes")[1:])
        output_size = int(nxt("output_size")[1])
        seq_len = int(nxt("seq_len")[1])
    except (IndexError, ValueError):
        raise CorruptWeightFile(f"{path}: bad shape header") from None
    probe = LstmNetwork.initialize(hidden, 0, None, seq_len, input_size, output_size) if hidden else None
    if probe is None:
        raise CorruptWeightFile(f"{path}: no hidden sizes")
    expected = probe.expected_shapes()
    params = {}
    for name in probe.names:
        parts = nxt("tensor")
        if len(parts) < 3 or parts[1] != name:
            raise CorruptWeightFile(f"{path}: expected tensor {name}")
        try:
            shape = tuple(int(d) for d in parts[2:])
        except ValueError:
            raise CorruptWeightFile(f"{path}: bad tensor shape") from None
        if shape != expected[name]:
            raise WeightShapeError(f"{path}: {name} declared {shape}, header implies {expected[name]}")
        nrows = shape[0] if len(shape) > 1 else 1
        ncols = int(np.prod(shape)) // nrows
        rows = [floats(nxt(), ncols) for _ in range(nrows)]
        params[name] = np.concatenate(rows).reshape(shape)
    mean = floats(nxt("stats_mean")[1:], input_size)
    std = floats(nxt("stats_std")[1:], input_size)
    nxt("end")
    try:
        stats = ChannelStats(mean, std)
    except ValueError as exc:
        raise CorruptWeightFile(f"{path}: {exc}") from None
    return LstmNetwork(params, hidden, input_size, output_size, seq_len, stats)
