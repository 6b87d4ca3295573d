"""``attitude-fusion`` command line: simulate, train, run, benchmark, convert.

Exit status: 0 success, 2 configuration error, 3 file/parse/weights error,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import dataset as ds_mod
from . import pipeline
from .core import AttitudeError
from .incremental import IncrementalConfigError
from .lstm import ShapeError, WeightFileError, save_weights
from .metrics import AXES, variance
from .sim import simulate, simulate_segments

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def exit_code(exc):
    if isinstance(exc, (config_mod.ConfigError, IncrementalConfigError, pipeline.PipelineError)):
        return EXIT_CONFIG
    if isinstance(exc, (OSError, ds_mod.DatasetError, WeightFileError, ShapeError)):
        return EXIT_IO
    if isinstance(exc, (AttitudeError, FloatingPointError, np.linalg.LinAlgError, ArithmeticError)):
        return EXIT_NUMERIC
    return None


def _config(args):
    return config_mod.load(args.config, args.set or (), args.seed)


def _sibling(path, suffix):
    p = Path(path)
    return p.with_name(p.stem + suffix)


def _variance_table(ds):
    lines = ["axis   variance [rad^2]"]
    for i, ax in enumerate(AXES):
        lines.append(f"{ax:<6} {variance(ds.reference[:, i]):.4f}")
    return "\n".join(lines)


def cmd_simulate(args):
    cfg = _config(args)
    if len(cfg.profiles) == 1:
        ds = simulate(cfg.profiles[0], cfg.noise, cfg.noise_seed)
    else:
        ds = simulate_segments(cfg.profiles, cfg.noise, cfg.noise_seed)
    out = Path(args.out or "dataset.csv")
    ds_mod.write_csv(ds, out)
    print(f"wrote {len(ds)} samples to {out}")
    print(_variance_table(ds))


def cmd_train(args):
    cfg = _config(args)
    train_set = ds_mod.read_csv(args.data)
    net, losses = pipeline.train_offline(cfg, train_set)
    if not all(np.isfinite(losses)):
        raise FloatingPointError("training loss became non-finite")
    out = Path(args.out or "weights.txt")
    save_weights(net, out)
    pipeline.write_losses(losses, _sibling(out, "_losses.csv"))
    final = f"{losses[-1]:.6g}" if losses else "n/a (0 epochs)"
    print(f"wrote {out}; final loss {final}")


def _network(cfg, weights, required):
    if weights is None:
        if required:
            raise pipeline.PipelineError("lstm estimators need --weights or [benchmark] weights/train")
        return None
    net = pipeline.load_network(cfg.resolve(weights) if not Path(weights).is_absolute() else weights)
    if net.seq_len != cfg.seq_len:
        raise pipeline.PipelineError(f"weights use seq_len {net.seq_len}, config says {cfg.seq_len}")
    return net


def cmd_run(args):
    cfg = _config(args)
    data = ds_mod.read_csv(args.data)
    lstm = args.estimator in ("lstm", "lstm-inc")
    net = _network(cfg, args.weights, lstm) if lstm else None
    res = pipeline.run_estimator(args.estimator, data, cfg, net)
    out = Path(args.out or f"{args.estimator}.csv")
    pipeline.write_estimates(res, data, out)
    if args.estimator == "lstm-inc":
        pipeline.write_events(res.events, data, _sibling(out, "_updates.csv"))
    print(f"wrote {len(res.estimates)} estimates to {out}")


def _benchmark_network(cfg, args, entries, bench):
    weights = args.weights or bench.get("weights")
    if weights is not None:
        return _network(cfg, weights, True), None, entries
    if bench.get("train"):
        train_set = ds_mod.read_csv(cfg.resolve(bench["train"]))
    elif bench.get("train_fraction"):
        # train on each dataset's prefix, evaluate on the remainder
        prefixes, rest = [], []
        for name, data, segs in entries:
            head, tail = ds_mod.split(data, bench["train_fraction"])
            k = len(head)
            prefixes.append(head)
            rest.append((name, tail, {s: (lo - k, hi - k) for s, (lo, hi) in segs.items() if hi > k}))
        train_set, entries = ds_mod.concatenate(prefixes), rest
    else:
        raise pipeline.PipelineError("lstm estimators need weights, [benchmark] train or train_fraction")
    net, losses = pipeline.train_offline(cfg, train_set)
    return net, losses, entries


def cmd_benchmark(args):
    cfg = _config(args)
    bench = cfg.benchmark
    estimators = args.estimator or bench["estimators"]
    for e in estimators:
        if e not in config_mod.ESTIMATORS:
            raise config_mod.ConfigError(f"unknown estimator {e!r}")
    specs = [config_mod.DatasetEntry(p, Path(p).stem) for p in args.data] or bench["datasets"]
    if not specs:
        raise config_mod.ConfigError("no datasets: list them in [benchmark] datasets or on the command line")
    out = pipeline.ensure_dir(args.out or "benchmark")
    plots = bench.get("plots", True) and not args.no_plots
    if plots:
        from . import plotting

    entries = []
    for spec in specs:
        data = ds_mod.read_csv(cfg.resolve(spec.path))
        if not data.labeled:
            raise ds_mod.DatasetError(f"{spec.path}: benchmark datasets need reference columns")
        entries.append((spec.name, data, spec.segments))

    needs_net = any(e in ("lstm", "lstm-inc") for e in estimators)
    net, losses = None, None
    if needs_net:
        net, losses, entries = _benchmark_network(cfg, args, entries, bench)
        if losses is not None:
            pipeline.write_losses(losses, out / "train_losses.csv")

    report = pipeline.new_report(estimators)
    failures = []
    events_by_name = {}
    for name, data, segs in entries:
        try:
            outputs = {e: pipeline.run_estimator(e, data, cfg, net) for e in estimators}
            first, est = pipeline.write_timeseries(data, outputs, out / f"timeseries_{name}.csv")
            pipeline.add_to_report(report, name, data, outputs, segs)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            failures.append((name, exc))
            print(f"error: dataset {name}: {exc}", file=sys.stderr)
            continue
        if "lstm-inc" in outputs:
            events_by_name[name] = outputs["lstm-inc"].events
            pipeline.write_events(outputs["lstm-inc"].events, data, out / f"updates_{name}.csv")
        if plots:
            fig = plotting.attitude_figure(data.t[first:], data.reference[first:], est, title=name)
            plotting.save(fig, out / f"attitude_{name}.png")

    decimals = int(bench.get("decimals", 2))
    text = report.to_text(decimals) if report.rows else "no successful datasets\n"
    (out / "report.txt").write_text(text, encoding="utf-8")
    report.write_csv(out / "report.csv")
    if plots and report.rows:
        plotting.save(plotting.rmse_figure(report), out / "rmse.png")
        if losses:
            events = next(iter(events_by_name.values()), None)
            plotting.save(plotting.loss_figure(losses, events), out / "losses.png")
    print(text, end="")
    if failures:
        codes = [exit_code(exc) or EXIT_NUMERIC for _, exc in failures]
        return max(codes)
    return EXIT_OK


def cmd_convert(args):
    cfg = _config(args)
    if cfg.convert is None:
        raise config_mod.ConfigError("convert needs a [convert] section with a columns table")
    out = Path(args.out or "converted.csv")
    ds = ds_mod.convert_recording(args.data, cfg.convert, out)
    print(f"wrote {len(ds)} samples to {out}")


def build_parser():
    parser = argparse.ArgumentParser(prog="attitude-fusion", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML run configuration")
    common.add_argument("--seed", type=int, help="override every seed in the configuration")
    common.add_argument("--out", help="output file (or directory for benchmark)")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override one configuration value (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic labelled dataset")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", parents=[common], help="offline LSTM training")
    p.add_argument("data", help="canonical training CSV")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run", parents=[common], help="run one estimator over a dataset")
    p.add_argument("data", help="canonical dataset CSV")
    p.add_argument("--estimator", required=True, choices=config_mod.ESTIMATORS)
    p.add_argument("--weights", help="LSTM weight file (lstm and lstm-inc)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("benchmark", parents=[common], help="RMSE report, time series and figures")
    p.add_argument("data", nargs="*", help="datasets (default: [benchmark] datasets)")
    p.add_argument("--estimator", action="append", choices=config_mod.ESTIMATORS,
                   help="estimator to include (repeatable; default from config)")
    p.add_argument("--weights", help="LSTM weight file instead of training")
    p.add_argument("--no-plots", action="store_true", help="skip PNG figures")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("convert", parents=[common], help="adapt an external recording to canonical CSV")
    p.add_argument("data", help="source recording")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except Exception as exc:  # map known failures to exit codes
        code = exit_code(exc)
        if code is None:
            raise
        print(f"error: {exc}", file=sys.stderr)
        return code
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
