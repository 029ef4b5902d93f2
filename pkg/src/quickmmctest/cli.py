"""
Command-line front end.

``quickmmctest simulate``  simulation study, one metrics row per run
``quickmmctest power``     power / (1 - fnp) curves over an effort grid
``quickmmctest run``       decisions for a recorded-statistics file

Exit status: 0 success, 1 internal error, 2 configuration or format
error, 3 a recorded source ran out of statistics.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import sys

import numpy as np

from . import __version__
from .baselines import run_naive
from .config import build_simulation_config, convert_value, format_config, read_config
from .engine import DECISION_MODES, EngineConfig, run_quickmmctest
from .errors import ConfigurationError, InputError, SourceExhaustedError
from .experiments import METHODS, run_study, summarize, write_metrics_csv
from .procedures import PROCEDURE_NAMES, ThresholdRule, get_procedure
from .samplers import RecordedStatisticsSource

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_EXHAUSTED = 0, 1, 2, 3

DEFAULT_POWER_GRID = (10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--out", metavar="PATH", help="output CSV (default: stdout)")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--procedure", choices=PROCEDURE_NAMES)
    p.add_argument("--threshold", choices=("constant", "pounds-cheng"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--budget", type=int,
                   help="simulate/power: samples per hypothesis; run: total budget K")
    p.add_argument("--iterations", type=int, help="n_max, number of allocation rounds")
    p.add_argument("--resamples", type=int, help="R, posterior resamples per round")
    p.add_argument("--cutoff", type=float)
    p.add_argument("--decision-mode", choices=DECISION_MODES)
    p.add_argument("--seed", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--threads", type=int, help="worker processes for replications")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quickmmctest", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "run a simulation study"),
                        ("power", "power curves over an effort grid"),
                        ("run", "test hypotheses from a recorded statistics file")):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name == "run":
            p.add_argument("--data", metavar="PATH", required=True, help="statistics file")
    return parser


def _overrides(args) -> dict:
    pairs = {
        "procedure": args.procedure, "threshold_rule": args.threshold, "alpha": args.alpha,
        "n_max": args.iterations, "R": args.resamples, "cutoff": args.cutoff,
        "decision_mode": args.decision_mode, "seed": args.seed,
        "replications": args.replications, "threads": args.threads,
    }
    if args.method is not None:
        pairs["methods"] = (args.method,)
    return {k: v for k, v in pairs.items() if v is not None}


def _load(args, **defaults):
    values = read_config(args.config) if args.config else {}
    values.update(_overrides(args))
    if args.command != "run" and args.budget is not None:
        values["efforts"] = (args.budget,)
    threads = convert_value("threads", values.pop("threads", 1))
    if threads < 1:
        raise ConfigurationError("threads must be at least 1")
    return values, threads


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _header(command: str, config_lines) -> list:
    return [f"quickmmctest {__version__}", f"command: {command}"] + [
        f"config: {line}" for line in config_lines
    ]


def cmd_simulate(args) -> int:
    values, threads = _load(args)
    config = build_simulation_config(values)
    records = list(run_study(config, threads=threads))
    with _output(args.out) as fh:
        write_metrics_csv(records, fh, _header("simulate", format_config(config)))
    report = sys.stdout if args.out else sys.stderr
    for row in summarize(records):
        print(
            f"{row['method']:>12} effort={row['effort']:<6} "
            f"switched={row['switched']:.3g}±{row['switched_se']:.2g} "
            f"switched_rejections={row['switched_rejections']:.3g}±{row['switched_rejections_se']:.2g} "
            f"power={row['power']:.3g}±{row['power_se']:.2g} "
            f"fnp={row['fnp']:.3g}±{row['fnp_se']:.2g}",
            file=report,
        )
    return EXIT_OK


def cmd_power(args) -> int:
    values, threads = _load(args)
    defaults = {"efforts": DEFAULT_POWER_GRID, "fixed_set": False}
    config = build_simulation_config(values, **defaults)
    rows = summarize(run_study(config, threads=threads))
    rows.sort(key=lambda r: (r["effort"], METHODS.index(r["method"])))
    with _output(args.out) as fh:
        for line in _header("power", format_config(config)):
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["effort", "method", "procedure", "mean_power", "se_power",
                         "mean_one_minus_fnp", "se"])
        for r in rows:
            writer.writerow([r["effort"], r["method"], r["procedure"],
                             f"{r['power']:.6g}", f"{r['power_se']:.6g}",
                             f"{1.0 - r['fnp']:.6g}", f"{r['fnp_se']:.6g}"])
    return EXIT_OK


def cmd_run(args) -> int:
    values, _ = _load(args)
    values = {k: convert_value(k, v) for k, v in values.items()}
    source = RecordedStatisticsSource.from_file(args.data)
    m = source.m
    methods = values.get("methods", ("quickmmctest",))
    if len(methods) != 1 or methods[0] not in METHODS:
        raise ConfigurationError(f"run needs exactly one method from {METHODS}, got {methods}")
    method = methods[0]
    proc = get_procedure(values.get("procedure", "bh"))
    rule = ThresholdRule(values.get("threshold_rule", "constant"), values.get("alpha", 0.1))
    budget = args.budget if args.budget is not None else 1000 * m
    seed = values.get("seed", 0)
    engine = EngineConfig(
        K=budget, n_max=values.get("n_max", 10), R=values.get("R", 1000),
        cutoff=values.get("cutoff", 0.5),
        decision_mode=values.get("decision_mode", "empirical_rejection_prob"),
    )
    if method == "naive":
        if budget // m < 1:
            raise ConfigurationError(f"budget {budget} gives no samples per hypothesis for m={m}")
        report = run_naive(budget // m, source, proc, rule)
    else:
        report = run_quickmmctest(engine, source, proc, rule, seed)

    config_lines = [
        f"data = {args.data}", f"method = {method}", f"procedure = {proc.name}",
        f"threshold_rule = {rule.label}", f"alpha = {rule.alpha_star}", f"budget = {budget}",
        f"n_max = {engine.n_max}", f"R = {engine.R}", f"cutoff = {engine.cutoff}",
        f"decision_mode = {report.decision_mode}", f"seed = {seed}",
    ]
    probs = report.empirical_rejection_probability
    with _output(args.out) as fh:
        for line in _header("run", config_lines):
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["hypothesis_id", "samples", "exceedances", "point_estimate",
                         "rejection_prob", "decision"])
        for i in range(m):
            prob = "" if np.isnan(probs[i]) else f"{probs[i]:.6g}"
            writer.writerow([i + 1, int(report.k[i]), int(report.S[i]),
                             f"{report.point_estimates[i]:.6g}", prob,
                             "reject" if report.decisions[i] else "non-reject"])
    return EXIT_OK


_COMMANDS = {"simulate": cmd_simulate, "power": cmd_power, "run": cmd_run}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SourceExhaustedError as exc:
        print(f"quickmmctest: error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (ConfigurationError, InputError) as exc:
        print(f"quickmmctest: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        name = exc.filename if exc.filename is not None else ""
        print(f"quickmmctest: error: cannot open {name}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"quickmmctest: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
