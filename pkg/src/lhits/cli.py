"""Command-line workflow: generate data, train, predict, score, and run the
comparison studies, all driven by a JSON configuration file.

Exit codes: 0 success, 2 configuration error, 3 file-format error,
4 divergence/selection failure, 5 training failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import sys
import time

from .config import parse_config
from .data import TrajectorySet
from .errors import (ConfigError, DivergenceError, FormatError, LhitsError,
                     SelectionError, TrainingError)
from .experiments import (benchmark_full_state_vs_latent,
                          compare_individual_vs_coupled, sensitivity_sweep)
from .forecasting import HierarchicalForecaster, evaluate
from .storage import (load_dataset, load_model, save_dataset, save_model,
                      write_report_csv, write_report_json)
from .systems import generate_dataset
from .utils import resolve_threads

EXIT_CONFIG = 2
EXIT_FORMAT = 3
EXIT_DIVERGENCE = 4
EXIT_TRAINING = 5


def _add_common(parser, *, config_required=True):
    parser.add_argument("--config", required=config_required,
                        help="path to the JSON experiment configuration")
    parser.add_argument("--out", required=True, help="output path")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the configuration seed")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: LHITS_THREADS or CPU count)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lhits",
        description="Latent hierarchical time stepping for multiscale PDE forecasting")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate ground-truth trajectories")
    _add_common(p)

    p = sub.add_parser("train", help="train coder, stepper bank, and coupling plan")
    p.add_argument("data", help="dataset file produced by generate")
    _add_common(p)

    p = sub.add_parser("predict", help="forecast from the test initial state")
    p.add_argument("model", help="trained model file")
    p.add_argument("data", help="dataset file with the test trajectory")
    p.add_argument("--horizon", type=int, default=None,
                   help="prediction horizon in unit steps (default: config)")
    _add_common(p)

    p = sub.add_parser("evaluate", help="score a predicted trajectory file")
    p.add_argument("pred", help="predicted trajectory file")
    p.add_argument("data", help="ground-truth dataset file")
    _add_common(p)

    p = sub.add_parser("sweep", help="latent-dimension sensitivity study")
    p.add_argument("data", help="dataset file")
    p.add_argument("--z", default=None,
                   help="comma-separated latent dimensions (default: config z_list)")
    p.add_argument("--horizon", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("compare", help="individual steppers vs the coupled model")
    p.add_argument("model", help="trained model file")
    p.add_argument("data", help="dataset file")
    p.add_argument("--horizon", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("benchmark", help="full-state vs latent cost table")
    p.add_argument("data", help="dataset file")
    p.add_argument("--horizon", type=int, default=None)
    _add_common(p)
    return parser


def _config_from_args(args):
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={int(args.seed)}")
    return parse_config(args.config, overrides=overrides)


def _load_splits(cfg, path):
    ts = load_dataset(path)
    return ts.split(cfg.train_trajectories, cfg.val_trajectories,
                    cfg.test_trajectories)


def _horizon(cfg, args, *sets):
    horizon = cfg.horizon if args.horizon is None else int(args.horizon)
    limit = min(s.n_steps - 1 for s in sets)
    if horizon > limit:
        raise ConfigError(f"horizon {horizon} exceeds the available {limit} steps")
    return horizon


def _report_paths(out):
    base = str(out)
    for suffix in (".csv", ".json"):
        if base.endswith(suffix):
            base = base[: -len(suffix)]
    return f"{base}.csv", f"{base}.json"


def cmd_generate(args) -> None:
    cfg = _config_from_args(args)
    total = cfg.train_trajectories + cfg.val_trajectories + cfg.test_trajectories
    ts = generate_dataset(cfg.system, cfg.grid(), cfg.dt, total,
                          cfg.time_steps - 1, cfg.seed, substeps=cfg.substeps,
                          eps=cfg.fhn_epsilon, uxx_coeff=cfg.ks_uxx_coefficient,
                          **cfg.ic_params())
    save_dataset(args.out, ts)
    print(f"generate: wrote {total} trajectories of {cfg.time_steps} x "
          f"{cfg.state_dim} states to {args.out}")


def cmd_train(args) -> None:
    cfg = _config_from_args(args)
    train, val, _ = _load_splits(cfg, args.data)
    model = HierarchicalForecaster(n_threads=resolve_threads(args.threads),
                                   **cfg.forecaster_params())
    start = time.perf_counter()
    model.fit(train, val)
    elapsed = time.perf_counter() - start
    save_model(args.out, model, config_fingerprint=cfg.fingerprint())
    active = [model.bank_.step_multiples[i] for i in model.plan_.active_indices]
    print(f"train: {elapsed:.1f}s, active steps {active}, model saved to {args.out}")


def cmd_predict(args) -> None:
    cfg = _config_from_args(args)
    model = load_model(args.model)
    _, _, test = _load_splits(cfg, args.data)
    horizon = _horizon(cfg, args, test)
    x0 = test.data[0, 0]
    start = time.perf_counter()
    pred = model.predict(x0, horizon)
    elapsed = time.perf_counter() - start
    save_dataset(args.out, TrajectorySet(pred[None, :, :], test.dt, test.system))
    report = evaluate(pred, test.data[0, :horizon + 1], cfg.checkpoint_stride,
                      wall_clock_seconds=elapsed,
                      config_fingerprint=cfg.fingerprint())
    csv_path, json_path = _report_paths(f"{args.out}.report")
    _write_prediction_report(report, csv_path, json_path)
    print(f"predict: horizon {horizon}, overall MSE {report.overall_mse:.3e}, "
          f"{elapsed:.2f}s, trajectory saved to {args.out}")


def _write_prediction_report(report, csv_path, json_path) -> None:
    rows = [{"time_step": t, "mse": m}
            for t, m in zip(report.checkpoint_times, report.mse_per_checkpoint)]
    write_report_csv(csv_path, rows, ["time_step", "mse"])
    write_report_json(json_path, {
        "checkpoint_times": report.checkpoint_times,
        "mse_per_checkpoint": report.mse_per_checkpoint,
        "overall_mse": report.overall_mse,
        "wall_clock_seconds": report.wall_clock_seconds,
        "config_fingerprint": report.config_fingerprint,
        "metadata": report.metadata,
    })


def cmd_evaluate(args) -> None:
    cfg = _config_from_args(args)
    pred_set = load_dataset(args.pred)
    truth_set = load_dataset(args.data)
    if truth_set.n_trajectories > 1:
        _, _, truth_set = truth_set.split(cfg.train_trajectories,
                                          cfg.val_trajectories,
                                          cfg.test_trajectories)
    pred = pred_set.data[0]
    truth = truth_set.data[0, : pred.shape[0]]
    report = evaluate(pred, truth, cfg.checkpoint_stride,
                      config_fingerprint=cfg.fingerprint())
    csv_path, json_path = _report_paths(args.out)
    _write_prediction_report(report, csv_path, json_path)
    print(f"evaluate: overall MSE {report.overall_mse:.3e}, report at {csv_path}")


def cmd_sweep(args) -> None:
    cfg = _config_from_args(args)
    train, val, test = _load_splits(cfg, args.data)
    z_list = (cfg.z_list if args.z is None
              else [int(z) for z in str(args.z).split(",") if z.strip()])
    if not z_list:
        raise ConfigError("sweep needs at least one latent dimension")
    horizon = _horizon(cfg, args, test)
    params = cfg.forecaster_params()
    params.pop("latent_dim")
    params.pop("seed")
    params["n_threads"] = resolve_threads(args.threads)
    rows = sensitivity_sweep(train, val, test, z_list, params, horizon,
                             seed=cfg.seed)
    csv_path, json_path = _report_paths(args.out)
    write_report_csv(csv_path, rows, ["z", "latent_mse", "reconstruction_mse",
                                      "status"])
    write_report_json(json_path, rows)
    print(f"sweep: {len(rows)} latent dimensions scored, report at {csv_path}")


def cmd_compare(args) -> None:
    cfg = _config_from_args(args)
    model = load_model(args.model)
    _, _, test = _load_splits(cfg, args.data)
    horizon = _horizon(cfg, args, test)
    rows = compare_individual_vs_coupled(model, test, horizon)
    csv_path, json_path = _report_paths(args.out)
    write_report_csv(csv_path, rows, ["model", "step_multiple", "mse",
                                      "prediction_seconds", "evals"])
    write_report_json(json_path, rows)
    print(f"compare: {len(rows) - 1} individual steppers vs coupled, "
          f"report at {csv_path}")


def cmd_benchmark(args) -> None:
    cfg = _config_from_args(args)
    train, val, test = _load_splits(cfg, args.data)
    horizon = _horizon(cfg, args, test)
    latent_params = cfg.forecaster_params()
    latent_params.pop("seed")
    latent_params.pop("coder")
    baseline_params = dict(latent_params)
    for params in (latent_params, baseline_params):
        params["n_threads"] = resolve_threads(args.threads)
    rows = benchmark_full_state_vs_latent(train, val, test, latent_params,
                                          baseline_params, horizon,
                                          seed=cfg.seed)
    csv_path, json_path = _report_paths(args.out)
    write_report_csv(csv_path, rows, ["technique", "training_seconds",
                                      "prediction_seconds", "overall_mse",
                                      "relative_l2"])
    write_report_json(json_path, rows)
    print(f"benchmark: report at {csv_path}")


_COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"lhits {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FormatError as exc:
        print(f"lhits {args.command}: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (DivergenceError, SelectionError) as exc:
        print(f"lhits {args.command}: divergence error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except TrainingError as exc:
        print(f"lhits {args.command}: training error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except LhitsError as exc:
        print(f"lhits {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
