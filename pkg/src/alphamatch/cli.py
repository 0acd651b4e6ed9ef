"""Command-line front end.

Each subcommand reads series files, calls the library, and writes CSV/JSON
data for external plotting.  Exit status: 0 on success, 1 on bad arguments
or unparsable input, 2 on I/O failure.  Outputs default to the directory in
``$ALPHAMATCH_OUTPUT_DIR`` (or the current directory).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .core import TimeSeries
from .detection import SURROGATE_RATE, coverage_experiment, gaussian_noise, inject, limit_template, periodic_surrogate
from .errors import ContractError
from .ingest import atomic_write, read_series, write_curves, write_series
from .matcher import DEFAULT_THRESHOLD, alpha_profile, match_curve
from .selection import default_max_len, discriminate, partition, select_template

OUTPUT_DIR_ENV = "ALPHAMATCH_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for I/O here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _threshold(text):
    value = float(text)
    if not 0.5 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"threshold must lie in [0.5, 1.0], got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _output(path, default_name):
    if path is not None:
        return Path(path)
    return Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / default_name


def _write_json(obj, path):
    with atomic_write(path) as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _label(path):
    return Path(path).stem


def _grid_args(p, max_default_help):
    p.add_argument("--min-len", type=_positive_int, default=10)
    p.add_argument("--max-len", type=_positive_int, default=None, help=max_default_help)
    p.add_argument("--step", type=_positive_int, default=1)
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD,
                   help="match when |alpha_N| >= threshold (default 0.98)")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=_positive_int, default=1,
                        help="worker threads for partition/curve loops; output does not depend on it")

    parser = _Parser(prog="alphamatch", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("match", parents=[common], help="alpha_N at every lag (CSV lag,alpha_n)")
    p.add_argument("--template", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--output")

    p = sub.add_parser("curve", parents=[common], help="match count vs template length")
    p.add_argument("--template", required=True)
    p.add_argument("--data", required=True)
    _grid_args(p, "default: min(template length, 200)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--output")

    p = sub.add_parser("select", parents=[common], help="pick the most representative partition")
    p.add_argument("--data", required=True)
    p.add_argument("--partitions", type=_positive_int, default=5)
    p.add_argument("--partition-len", type=_positive_int, default=1000)
    _grid_args(p, "default: min(partition length, 200)")
    p.add_argument("--output", help="selected partition as a series file (default selected.csv)")
    p.add_argument("--report", help="JSON scores per partition (default select_report.json)")

    p = sub.add_parser("discriminate", parents=[common], help="self vs cross curves for several classes")
    p.add_argument("--data", required=True, nargs="+", help="one series file per class; label = file stem")
    p.add_argument("--partitions", type=_positive_int, default=5)
    p.add_argument("--partition-len", type=_positive_int, default=1000)
    _grid_args(p, "default: min(partition length, 200)")
    p.add_argument("--cross-tolerance", type=_nonneg_int, default=0)
    p.add_argument("--output", help="JSON report (default discrimination.json)")
    p.add_argument("--curves", help="CSV of all curves (default discrimination_curves.csv)")

    p = sub.add_parser("synth", parents=[common], help="generate noise or a surrogate vowel")
    p.add_argument("--kind", choices=("noise", "surrogate"), default="noise")
    p.add_argument("--length", type=_positive_int, required=True)
    p.add_argument("--sigma", type=_positive_float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class-id", type=int, default=1)
    p.add_argument("--sample-rate", type=_positive_float, default=None)
    p.add_argument("--inject", dest="inject_template", help="template series file added to noise")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--offset", type=_nonneg_int, default=0)
    p.add_argument("--output")

    p = sub.add_parser("detect-limit", parents=[common], help="Monte-Carlo coverage of the amplitude estimate")
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--alpha", type=float, default=0.14)
    p.add_argument("--delta-alpha", type=_positive_float, default=0.045)
    p.add_argument("--template-len", type=_positive_int, default=64)
    p.add_argument("--sigma", type=_positive_float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    return parser


def cmd_match(args):
    template = read_series(args.template)
    data = read_series(args.data)
    profile = alpha_profile(template.samples, data)
    out = _output(args.output, "match.csv")
    with atomic_write(out) as fh:
        fh.write("lag,alpha_n\n")
        for lag, v in enumerate(profile.values):
            fh.write(f"{lag},{'' if math.isnan(v) else format(v, '.17g')}\n")


def cmd_curve(args):
    template = read_series(args.template)
    data = read_series(args.data)
    curve = match_curve(
        template.samples, data, args.min_len, args.max_len, args.step, args.threshold,
        source_label=_label(args.template), data_label=_label(args.data),
    )
    write_curves([curve], _output(args.output, "curve.csv"), args.format)


def cmd_select(args):
    data = read_series(args.data)
    parts = partition(data, args.partitions, args.partition_len, label=_label(args.data))
    chosen = select_template(data, parts, args.min_len, args.max_len, args.step, args.threshold, args.threads)
    max_len = args.max_len if args.max_len is not None else default_max_len(args.partition_len)
    write_series(TimeSeries(chosen.samples, data.sample_rate), _output(args.output, "selected.csv"))
    _write_json(
        {
            "source": chosen.source_label,
            "partition_index": chosen.partition_index,
            "score": chosen.score,
            "scores": list(chosen.scores),
            "partitions": args.partitions,
            "partition_len": args.partition_len,
            "min_len": args.min_len,
            "max_len": max_len,
            "step": args.step,
            "threshold": args.threshold,
        },
        _output(args.report, "select_report.json"),
    )


def cmd_discriminate(args):
    labels = [_label(p) for p in args.data]
    if len(set(labels)) != len(labels):
        raise ContractError(f"class labels (file stems) must be unique, got {labels}")
    classes = {label: read_series(p) for label, p in zip(labels, args.data)}
    selected, reports = discriminate(
        classes, args.partitions, args.partition_len, args.min_len, args.max_len, args.step,
        args.threshold, args.cross_tolerance, args.threads,
    )
    report = {
        "threshold": args.threshold,
        "cross_tolerance": args.cross_tolerance,
        "classes": [
            dict(
                reports[label].to_dict(),
                partition_index=selected[label].partition_index,
                scores=list(selected[label].scores),
            )
            for label in labels
        ],
    }
    curves = []
    for label in labels:
        curves.append(reports[label].self_curve)
        curves.extend(reports[label].cross_curves)
    write_curves(curves, _output(args.curves, "discrimination_curves.csv"), "csv")
    _write_json(report, _output(args.output, "discrimination.json"))


def cmd_synth(args):
    if args.kind == "surrogate":
        rate = args.sample_rate if args.sample_rate is not None else SURROGATE_RATE
        series = periodic_surrogate(args.class_id, args.length, rate, args.seed)
    else:
        series = gaussian_noise(args.length, args.sigma, args.seed, args.sample_rate)
        if args.inject_template:
            series = inject(series, read_series(args.inject_template).samples, args.alpha, args.offset)
    write_series(series, _output(args.output, "synth.csv"))


def cmd_detect_limit(args):
    template = limit_template(args.delta_alpha, args.template_len, args.sigma)
    result = coverage_experiment(template, args.alpha, args.trials, args.seed, args.sigma)
    _write_json(result.to_dict(), _output(args.output, "detect_limit.json"))


COMMANDS = {
    "match": cmd_match,
    "curve": cmd_curve,
    "select": cmd_select,
    "discriminate": cmd_discriminate,
    "synth": cmd_synth,
    "detect-limit": cmd_detect_limit,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except ContractError as exc:
        print(f"alphamatch {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"alphamatch {args.command}: I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


def run(argv=None) -> int:
    """Like :func:`main` but converts argparse's ``SystemExit`` into a status."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1


if __name__ == "__main__":
    sys.exit(main())
