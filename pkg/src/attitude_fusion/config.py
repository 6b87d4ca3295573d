"""TOML run configuration with one section per pipeline stage.

Unknown sections and keys are rejected so typos fail loudly. Command-line
``--set section.key=value`` overrides are parsed as TOML values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .dataset import ColumnMapping
from .ekf import EkfConfig
from .incremental import IncrementalConfig
from .lstm import TrainConfig
from .sim import NoiseModel, TrajectoryProfile


class ConfigError(ValueError):
    pass


SIMULATE_KEYS = {"regime", "duration", "rate", "seed", "noise_seed", "amplitudes", "freq_band", "segments"}
SEGMENT_KEYS = {"regime", "duration", "seed", "amplitudes", "freq_band"}
NOISE_KEYS = {f.name for f in fields(NoiseModel)}
EKF_KEYS = {"q_diag", "r_diag", "p0_diag", "initial_attitude", "declination"}
GYRO_KEYS = {"initial_attitude"}
LSTM_KEYS = {f.name for f in fields(TrainConfig)} | {"hidden_sizes", "seq_len", "normalize", "init_seed"}
INCREMENTAL_KEYS = {f.name for f in fields(IncrementalConfig)}
BENCHMARK_KEYS = {"train", "train_fraction", "weights", "datasets", "estimators", "plots", "decimals"}
DATASET_ENTRY_KEYS = {"path", "name", "segments"}
CONVERT_KEYS = {"columns", "scale", "delimiter", "rate"}

SECTIONS = {
    "simulate": SIMULATE_KEYS,
    "noise": NOISE_KEYS,
    "ekf": EKF_KEYS,
    "gyro": GYRO_KEYS,
    "lstm": LSTM_KEYS,
    "incremental": INCREMENTAL_KEYS,
    "benchmark": BENCHMARK_KEYS,
    "convert": CONVERT_KEYS,
}

ESTIMATORS = ("gyro", "accelmag", "ekf", "lstm", "lstm-inc")


@dataclass
class DatasetEntry:
    path: str
    name: str
    segments: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    profiles: list
    noise_seed: int
    noise: NoiseModel
    ekf: EkfConfig
    ekf_initial: object
    gyro_initial: object
    train: TrainConfig
    hidden_sizes: tuple
    seq_len: int
    normalize: bool
    init_seed: int
    incremental: IncrementalConfig
    benchmark: dict
    convert: ColumnMapping | None
    base_dir: Path = Path(".")

    def resolve(self, path):
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def _check_keys(table, allowed, where):
    if not isinstance(table, dict):
        raise ConfigError(f"[{where}] must be a table")
    extra = set(table) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(sorted(extra))}")


def _tuple(value, where):
    if isinstance(value, list):
        return tuple(_tuple(v, where) if isinstance(v, list) else v for v in value)
    return value


def _build(kind, kwargs, where):
    try:
        return kind(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}] {exc}") from None


def _initial(value, where):
    if value is None or isinstance(value, str):
        if value not in (None, "measured", "reference"):
            raise ConfigError(f"[{where}] initial_attitude must be 'measured', 'reference' or three angles")
        return value or "measured"
    if not (isinstance(value, list) and len(value) == 3):
        raise ConfigError(f"[{where}] initial_attitude must be three angles")
    return tuple(float(v) for v in value)


def parse_override(text):
    """Split ``section.key=value`` and parse the value as a TOML scalar/array."""
    if "=" not in text or "." not in text.split("=", 1)[0]:
        raise ConfigError(f"override {text!r} is not section.key=value")
    lhs, rhs = text.split("=", 1)
    section, key = lhs.strip().split(".", 1)
    try:
        value = tomllib.loads(f"v = {rhs.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = rhs.strip()
    return section, key, value


def load(path=None, overrides=(), seed=None):
    """Read a config file (or defaults when ``path`` is None) into a RunConfig."""
    data = {}
    base = Path(".")
    if path is not None:
        try:
            data = tomllib.loads(Path(path).read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        base = Path(path).resolve().parent
    for text in overrides:
        section, key, value = parse_override(text)
        data.setdefault(section, {})[key] = value
    return from_dict(data, base, seed)


def from_dict(data, base_dir=Path("."), seed=None):
    extra = set(data) - set(SECTIONS)
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(extra))}")
    for name, allowed in SECTIONS.items():
        _check_keys(data.get(name, {}), allowed, name)

    sim = dict(data.get("simulate", {}))
    if seed is not None:
        sim["seed"] = seed
    rate = float(sim.get("rate", 100.0))
    base_seed = int(sim.get("seed", 0))
    segments = sim.pop("segments", None)
    if segments is None:
        segments = [{k: sim[k] for k in ("regime", "duration", "amplitudes", "freq_band") if k in sim}]
    elif any(k in sim for k in ("regime", "duration", "amplitudes", "freq_band")):
        raise ConfigError("[simulate] give either segments or regime/duration, not both")
    profiles = []
    for i, seg in enumerate(segments):
        _check_keys(seg, SEGMENT_KEYS, f"simulate.segments[{i}]")
        kw = {k: _tuple(v, "simulate") for k, v in seg.items()}
        kw.setdefault("seed", base_seed + i)
        profiles.append(_build(TrajectoryProfile, dict(kw, rate=rate), f"simulate.segments[{i}]"))
    noise_seed = int(sim.get("noise_seed", base_seed + 1_000_003))

    noise = _build(NoiseModel, {k: _tuple(v, "noise") for k, v in data.get("noise", {}).items()}, "noise")

    e = dict(data.get("ekf", {}))
    init = _initial(e.pop("initial_attitude", None), "ekf")
    ekf_cfg = _build(
        EkfConfig,
        dict({k: _tuple(v, "ekf") for k, v in e.items()},
             initial_attitude=init if isinstance(init, tuple) else None),
        "ekf",
    )
    ekf_init = init
    if isinstance(init, tuple) or init == "measured":
        ekf_init = "config"
    gyro_initial = _initial(data.get("gyro", {}).get("initial_attitude"), "gyro")

    lstm = dict(data.get("lstm", {}))
    if seed is not None:
        lstm["seed"] = seed
    hidden = tuple(lstm.pop("hidden_sizes", (32, 32)))
    seq_len = int(lstm.pop("seq_len", 2))
    normalize = bool(lstm.pop("normalize", True))
    init_seed = int(lstm.pop("init_seed", lstm.get("seed", 0)))
    if not hidden or min(hidden) < 1 or seq_len < 1:
        raise ConfigError("[lstm] hidden_sizes and seq_len must be positive")
    train_cfg = _build(TrainConfig, {k: _tuple(v, "lstm") for k, v in lstm.items()}, "lstm")

    inc = dict(data.get("incremental", {}))
    if seed is not None:
        inc["seed"] = seed
    inc_cfg = _build(IncrementalConfig, inc, "incremental")

    bench = dict(data.get("benchmark", {}))
    entries = []
    for i, d in enumerate(bench.get("datasets", [])):
        if isinstance(d, str):
            entries.append(DatasetEntry(d, Path(d).stem))
            continue
        _check_keys(d, DATASET_ENTRY_KEYS, f"benchmark.datasets[{i}]")
        if "path" not in d:
            raise ConfigError(f"[benchmark.datasets[{i}]] needs a path")
        segs = {k: tuple(v) for k, v in d.get("segments", {}).items()}
        for k, v in segs.items():
            if len(v) != 2 or not 0 <= v[0] < v[1]:
                raise ConfigError(f"[benchmark.datasets[{i}]] segment {k} must be [start, stop)")
        entries.append(DatasetEntry(d["path"], d.get("name", Path(d["path"]).stem), segs))
    bench["datasets"] = entries
    estimators = list(bench.get("estimators", ["lstm-inc", "lstm", "ekf"]))
    bad = [e for e in estimators if e not in ESTIMATORS]
    if bad:
        raise ConfigError(f"[benchmark] unknown estimator(s): {', '.join(bad)}")
    bench["estimators"] = estimators
    frac = bench.get("train_fraction")
    if frac is not None and not 0 < frac <= 1:
        raise ConfigError("[benchmark] train_fraction must lie in (0, 1]")

    conv = data.get("convert")
    mapping = None
    if conv is not None:
        if "columns" not in conv:
            raise ConfigError("[convert] needs a columns table")
        mapping = ColumnMapping(dict(conv["columns"]), dict(conv.get("scale", {})),
                                conv.get("delimiter", ","), conv.get("rate"))

    return RunConfig(
        profiles=profiles,
        noise_seed=noise_seed,
        noise=noise,
        ekf=ekf_cfg,
        ekf_initial=ekf_init,
        gyro_initial=gyro_initial,
        train=train_cfg,
        hidden_sizes=hidden,
        seq_len=seq_len,
        normalize=normalize,
        init_seed=init_seed,
        incremental=inc_cfg,
        benchmark=bench,
        convert=mapping,
        base_dir=Path(base_dir),
    )
