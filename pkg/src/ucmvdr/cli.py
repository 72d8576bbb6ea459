"""Command-line entry point: ``ucmvdr {run,beampattern,zeros,calibrate-dl}``."""
import argparse
import logging
import sys

import numpy as np

from .beamformers import Method
from .covariance import calibrate_on_pilots, mean_dl_wng, pilot_sample_covariances
from .errors import CalibrationError, ConfigError, NumericalError, UcmvdrError
from .experiment import (
    DlPolicy,
    evaluate_trial,
    load_config,
    pilot_mean_uc_wng,
    resolve_dl_factor,
    run_experiment,
)
from .metrics import beampattern
from .polynomial import weights_to_polynomial, write_zeros_csv

DEFAULT_CONFIG = "paper_fig3.cfg"


def _common(p):
    p.add_argument("--config", default=DEFAULT_CONFIG,
                   help="experiment config file (bare names also resolve to bundled configs)")
    p.add_argument("--seed", type=int, help="override the run seed")
    p.add_argument("--snapshots", type=int, help="override the snapshot count L")
    p.add_argument("--delta", type=float, help="use a fixed DL loading factor instead of calibrating")


def build_parser():
    parser = argparse.ArgumentParser(prog="ucmvdr", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the Monte Carlo experiment and write CSV artifacts")
    _common(p)
    p.add_argument("--trials", type=int, help="override the trial count")
    p.add_argument("--method", action="append", help="restrict to a method (repeatable)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker processes")

    p = sub.add_parser("beampattern", help="beampattern of one trial as CSV (u, re, im, db)")
    _common(p)
    p.add_argument("--method", default="UC")
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--points", type=int, default=2001)
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("zeros", help="array polynomial zeros of one trial as CSV")
    _common(p)
    p.add_argument("--method", default="UC")
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("calibrate-dl", help="calibrate the DL factor on pilot trials")
    _common(p)
    p.add_argument("--pilots", type=int, help="pilot trial count")
    p.add_argument("--target-wng", type=float,
                   help="target mean WNG (default: pilot mean of UC MVDR)")
    return parser


def _apply_overrides(config, args):
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.snapshots is not None:
        changes["n_snapshots"] = args.snapshots
    if getattr(args, "trials", None) is not None:
        changes["n_trials"] = args.trials
    if getattr(args, "out", None) is not None and args.command == "run":
        changes["output_dir"] = args.out
    if args.delta is not None:
        changes["dl_policy"] = DlPolicy("fixed", delta=args.delta)
    if args.command == "run" and args.method:
        changes["methods"] = _methods(args.method)
    elif args.command in ("beampattern", "zeros"):
        changes["methods"] = _methods([args.method])
    if getattr(args, "pilots", None) is not None:
        changes["dl_policy"] = DlPolicy(config.dl_policy.kind, config.dl_policy.delta, args.pilots)
    return config.replace(**changes) if changes else config


def _methods(names):
    try:
        return tuple(Method(n.strip().upper()) for n in names)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _print_summary(summary, stream):
    print(f"trials={summary.n_trials} seed={summary.seed} L={summary.n_snapshots} "
          f"backend={summary.backend}", file=stream)
    if summary.dl_factor is not None:
        extra = ""
        if summary.dl_target_wng is not None:
            extra = f" (target mean WNG {summary.dl_target_wng:.4f}, pilot {summary.dl_pilot_mean_wng:.4f})"
        print(f"DL factor: {summary.dl_factor:.6g}{extra}", file=stream)
    print(f"ensemble: WNG {summary.ensemble_wng:.4f}  interferer power {summary.ensemble_out_power:.4e}",
          file=stream)
    print(f"{'method':<6} {'median P_int':>14} {'mean P_int':>14} {'mean WNG':>9} {'failed':>7}",
          file=stream)
    for name, st in summary.per_method.items():
        if st["n_valid"] == 0:
            print(f"{name:<6} {'-':>14} {'-':>14} {'-':>9} {st['n_failed']:>7}", file=stream)
            continue
        print(f"{name:<6} {st['median_out_power']:>14.4e} {st['mean_out_power']:>14.4e} "
              f"{st['mean_wng']:>9.4f} {st['n_failed']:>7}", file=stream)
    if summary.fraction_uc_wng_above_smi is not None:
        print(f"fraction of trials with UC WNG > SMI WNG: {summary.fraction_uc_wng_above_smi:.4f}",
              file=stream)


def _single_trial_weights(config, args):
    method = config.methods[0]
    delta = None
    if method is Method.DL:
        delta, _, _ = resolve_dl_factor(config)
    record, weights, zeros = evaluate_trial(config, args.trial, delta)
    if method not in weights:
        raise NumericalError(record.results[method].error)
    return method, weights[method], zeros.get(method)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _apply_overrides(load_config(args.config), args)

        if args.command == "run":
            summary = run_experiment(config, workers=args.workers)
            _print_summary(summary, sys.stdout)
            print(f"artifacts written to {config.output_dir}")

        elif args.command == "beampattern":
            method, w, _ = _single_trial_weights(config, args)
            bp = beampattern(w, config.ula, np.linspace(-1.0, 1.0, args.points))
            _write_or_print(args.out, bp.to_csv)

        elif args.command == "zeros":
            method, w, zeros = _single_trial_weights(config, args)
            if zeros is None:
                zeros = weights_to_polynomial(w).zeros
            _write_or_print(args.out, lambda p: write_zeros_csv(p, zeros))

        elif args.command == "calibrate-dl":
            policy = config.dl_policy
            cfg, scene = config.ula, config.scene
            scms = pilot_sample_covariances(cfg, scene, config.n_snapshots, policy.pilot_trials,
                                            config.seed)
            target = args.target_wng if args.target_wng is not None else pilot_mean_uc_wng(scms, cfg)
            if not 0 < target <= cfg.n_sensors:
                raise ConfigError(f"target WNG must lie in (0, {cfg.n_sensors}]")
            delta = calibrate_on_pilots(scms, cfg, scene.noise_power, target)
            print(f"pilots={policy.pilot_trials} target_mean_wng={target:.17g}")
            print(f"achieved_mean_wng={mean_dl_wng(scms, cfg, delta):.17g}")
            print(f"delta={delta:.17g}")
    except ConfigError as exc:
        print(f"ucmvdr: configuration error: {exc}", file=sys.stderr)
        return 1
    except CalibrationError as exc:
        print(f"ucmvdr: calibration failed: {exc}", file=sys.stderr)
        return 1
    except (UcmvdrError, OSError) as exc:
        print(f"ucmvdr: error: {exc}", file=sys.stderr)
        return 1
    return 0


def _write_or_print(path, writer):
    writer(path if path else sys.stdout)


if __name__ == "__main__":
    sys.exit(main())
