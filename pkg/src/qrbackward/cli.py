"""Command line entry point: ``qrbackward {run,sweep,verify}``.

Exit codes: 0 success, 1 failed verification or experiment, 2 usage error,
3 configuration error. Errors are printed to stderr as one JSON object.
"""

import argparse
import json
import logging
import sys

from .harness import ConfigError, ExperimentConfig, ExperimentError, emit, load_config, run_experiment

EXIT_FAILED = 1
EXIT_CONFIG = 3


def _fail(code, kind, message, **extra):
    print(json.dumps({"error": kind, "message": message, **extra}), file=sys.stderr)
    return code


def _print_report(report):
    print(f"{'case':6} {'epsilon':>8} {'n':>5} {'t_eps':>7} {'k':>4} {'E_u':>10} {'E_v':>10} {'excl':>4}")
    for r in report.results:
        print(
            f"{report.config.case:6} {r.epsilon:8.0e} {r.params['n']:5d} {r.params['t_eps']:7.4f} "
            f"{r.k:4d} {r.mean_u:10.5f} {r.mean_v:10.5f} {len(r.excluded):4d}"
        )


def _execute(cfg, out_dir, plots):
    try:
        report = run_experiment(cfg)
        paths = emit(report, out_dir, plots)
    except ExperimentError as e:
        return _fail(EXIT_FAILED, "experiment", str(e))
    except OSError as e:
        return _fail(EXIT_FAILED, "io", str(e))
    _print_report(report)
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_run(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        return _fail(EXIT_CONFIG, "config", e.message, path=e.path)
    return _execute(cfg, args.out, args.plots or None)


def _eps_list(text):
    try:
        values = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: {text!r}")
    return values


def cmd_sweep(args):
    data = {
        "case": args.case,
        "epsilons": args.eps,
        "samples": args.samples,
        "M": args.M,
        "K": args.K,
        "theta": args.theta,
        "p": args.p,
        "base_seed": args.seed,
        "operator": args.operator,
        "workers": args.workers,
        "output": {"directory": args.out, "plots": args.plots},
    }
    try:
        cfg = ExperimentConfig.from_dict(data)
    except ConfigError as e:
        return _fail(EXIT_CONFIG, "config", e.message, path=e.path)
    return _execute(cfg, None, None)


def cmd_verify(args):
    from .verify import run_checks

    results = run_checks(quick=args.quick)
    width = max(len(name) for name, _, _ in results)
    for name, ok, detail in results:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    return 0 if all(ok for _, ok, _ in results) else EXIT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog="qrbackward", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a JSON config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=None, help="override the output directory")
    run.add_argument("--plots", action="store_true", help="also write SVG plots")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="epsilon sweep with the default experiment settings")
    sweep.add_argument("--case", required=True, choices=["test1", "test2"])
    sweep.add_argument("--eps", type=_eps_list, default=[1e-3, 1e-4, 1e-5])
    sweep.add_argument("--samples", type=int, default=100)
    sweep.add_argument("--M", type=int, default=15)
    sweep.add_argument("--K", type=int, default=100)
    sweep.add_argument("--theta", type=float, default=0.3)
    sweep.add_argument("--p", type=float, default=1.0)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--operator", default="truncation", choices=["truncation", "classical", "hybrid"])
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--out", default="results")
    sweep.add_argument("--plots", action="store_true")
    sweep.set_defaults(func=cmd_sweep)

    verify = sub.add_parser("verify", help="forward refinement study and operator / reconstruction checks")
    verify.add_argument("--quick", action="store_true", help="smaller sample counts")
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
