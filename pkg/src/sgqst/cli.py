"""Command-line entry point: ``sgqst run | figure | validate``.

Exit codes: 0 success, 1 usage error, 2 runtime failure (including a state
file that is not a valid density matrix).
"""

import argparse
import json
import os
import sys

from .core import density_report
from .harness import (
    FIGURES, MODES, SCALES, ExperimentConfig, emit_report, figure_preset,
    load_state, report_csv, report_json, run_experiment,
)
from .learner import NORMALIZATION_MODES

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    parser = _Parser(prog="sgqst", description="Self-guided mixed-state tomography simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one seeded trial ensemble")
    run.add_argument("--d", type=int, required=True, help="state dimension")
    run.add_argument("--n", type=int, default=1000, help="copies per measurement setting")
    run.add_argument("--k", type=int, default=100, help="SPSA iterations per eigenvector")
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--lambda", dest="lam", type=float, default=0.0, help="readout noise strength")
    run.add_argument("--mode", choices=MODES, default="shots")
    run.add_argument("--epsilon", type=float, default=1e-4)
    run.add_argument("--normalization", choices=NORMALIZATION_MODES, default="standard")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--rank", type=int, default=None, help="rank of the random states (default d)")
    run.add_argument("--checkpoints", type=_int_list, default=(), help="e.g. 10,100,300")
    run.add_argument("--state", default=None, help="JSON file with a fixed true state")
    run.add_argument("--out", default=None, help="output path (default stdout)")
    run.add_argument("--format", choices=("csv", "json"), default="csv")

    fig = sub.add_parser("figure", help="run a figure preset")
    fig.add_argument("--name", choices=FIGURES, required=True)
    fig.add_argument("--scale", choices=SCALES, default="desk")
    fig.add_argument("--seed", type=int, default=0)
    fig.add_argument("--out-dir", default=".")

    val = sub.add_parser("validate", help="check a state-matrix file")
    val.add_argument("path")
    return parser


def _cmd_run(args):
    state = None
    if args.state is not None:
        state = tuple(tuple(row) for row in load_state(args.state))
    try:
        cfg = ExperimentConfig(
            d=args.d, N=args.n, K=args.k, trials=args.trials, lam=args.lam,
            mode=args.mode, epsilon=args.epsilon, normalization=args.normalization,
            seed=args.seed, checkpoints=args.checkpoints, rank=args.rank, state=state,
        )
    except ValueError as exc:
        print(f"sgqst run: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run_experiment(cfg)
    if args.out is None:
        sys.stdout.write(report_csv(report) if args.format == "csv" else report_json(report) + "\n")
    else:
        emit_report(report, args.format, args.out)
    s = report.final_summary
    print(
        f"final infidelity median {s['median']:.4g} (25-75%: {s['q25']:.4g}-{s['q75']:.4g}), "
        f"{report.total_copies} copies, {report.wall_time:.1f}s",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_figure(args):
    configs = figure_preset(args.name, args.scale, seed=args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    reports = []
    for cfg in configs:
        rep = run_experiment(cfg)
        print(f"{cfg.config_id}: median final infidelity {rep.final_summary['median']:.4g}", file=sys.stderr)
        reports.append(rep)
    stem = os.path.join(args.out_dir, f"{args.name}-{args.scale}")
    emit_report(reports, "csv", stem + ".csv")
    emit_report(reports, "json", stem + ".json")
    print(stem + ".csv")
    return EXIT_OK


def _cmd_validate(args):
    try:
        m = load_state(args.path)
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"{args.path}: malformed state file: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    report = density_report(m)
    print(f"{args.path}: {report}")
    return EXIT_OK if report.ok else EXIT_RUNTIME


def main(argv=None):
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "figure": _cmd_figure, "validate": _cmd_validate}
    try:
        return handlers[args.command](args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"sgqst {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
