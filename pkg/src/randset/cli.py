"""Command-line front end.

Subcommands are thin adapters over the library: given the same config, the
CLI and a direct library call produce identical records. stdout carries the
human-readable summary, files carry the machine-readable data, stderr
carries diagnostics. Exit codes: 0 success, 2 configuration or usage error,
3 divergence-dominated experiment or no usable records.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import dynamics as dyn
from . import harness as hn
from . import plotting
from . import problem as pb
from .errors import ConfigError, DomainError, ParseError, RandsetError
from .seeds import mix64
from .suite import run_oracle_suite

__all__ = ["dispatch", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_DATA = 3


def _config_key_epilog() -> str:
    lines = ["config keys (JSON document, schema v1):"]
    for key, typ, default, help_text in hn.CONFIG_KEYS:
        lines.append(f"  {key:<36} {typ:<22} default={default:<10} {help_text}")
    lines.append("")
    lines.append('overrides: repeat --set dotted.key=value (values parsed as JSON,')
    lines.append("e.g. --set dynamics.beta=10 --set bounds.0.zeta=0.1)")
    return "\n".join(lines)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randset",
        description="Bound-verification experiments on random hypothesis sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_parser(name, help_text):
        p = sub.add_parser(
            name,
            help=help_text,
            epilog=_config_key_epilog(),
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument(
            "--set", dest="overrides", action="append", default=[],
            metavar="KEY=VALUE", help="dotted-key config override",
        )
        p.add_argument("--out", help="records output path (overrides config.output)")
        p.add_argument(
            "--dump-traj", metavar="PATH",
            help="dump the first trial's first trajectory as line-oriented text",
        )
        p.add_argument("--zeta", type=float, default=0.05,
                       help="confidence level used for the summary tolerances")
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    experiment_parser("sgld-bound", "trajectory-uniform bound experiment (minibatch ok)")
    experiment_parser("cld-bound", "full-batch diffusion-discretization experiment")
    experiment_parser("fractal-dim", "trajectory covering + dimension-fit pipeline")

    p_oracle = sub.add_parser("oracle-suite", help="run the exact verification battery")
    p_oracle.add_argument("--seed", type=int, required=True,
                          help="battery seed (wall-clock seeding is refused)")
    p_oracle.add_argument("--fast", action="store_true",
                          help="smaller batteries, for smoke testing")

    p_report = sub.add_parser("report", help="summarize a records file into CSV + figures")
    p_report.add_argument("--records", required=True, help="JSON-lines records path")
    p_report.add_argument("--out", default="report_out", help="output directory")
    p_report.add_argument("--zeta", type=float, default=0.05)
    return parser


def _parse_override(text: str):
    key, sep, raw = text.partition("=")
    if not sep:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def _apply_override(config: dict, path: list[str], value):
    node = config
    for i, part in enumerate(path[:-1]):
        key = int(part) if part.isdigit() else part
        try:
            node = node[key]
        except (KeyError, IndexError, TypeError):
            raise ConfigError(f"override path {'.'.join(path)!r} does not resolve")
    last = path[-1]
    key = int(last) if last.isdigit() else last
    if isinstance(node, list):
        if not isinstance(key, int) or key >= len(node):
            raise ConfigError(f"override path {'.'.join(path)!r} does not resolve")
    node[key] = value


def _load_config(path: str, overrides: list[str], pipeline: str) -> hn.ExperimentConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}")
    for text in overrides:
        key_path, value = _parse_override(text)
        _apply_override(data, key_path, value)
    data["pipeline"] = pipeline
    return hn.ExperimentConfig.from_dict(data)


def _dump_first_trajectory(config: hn.ExperimentConfig, path: str) -> None:
    dist = hn.build_distribution(config.distribution)
    model = hn.build_loss(config.loss)
    spec = dict(config.dynamics)
    w0 = spec.pop("w0", "zeros")
    w0_arr = np.zeros(model.dimension) if w0 == "zeros" else np.asarray(w0, float)
    dataset_seed = mix64(config.master_seed, 0)
    dataset = pb.sample_dataset(dist, config.n, dataset_seed)
    cfg = dyn.SgldConfig(
        iterations=int(spec["iterations"]),
        etas=spec["eta"],
        beta=float(spec["beta"]),
        w0=w0_arr,
        seed=mix64(dataset_seed, hn.DYNAMICS_STREAM),
        batch_size=spec.get("batch_size", "full"),
        noise_free=bool(spec.get("noise_free", False)),
    )
    runner = dyn.run_cld_euler if config.pipeline == "cld" else dyn.run_sgld
    dyn.dump_trajectory(runner(cfg, model, dataset), path)


def _run_experiment(args, pipeline: str) -> int:
    config = _load_config(args.config, args.overrides, pipeline)
    if args.verbose:
        print(f"config digest {config.digest()}, {config.trials} trials x "
              f"{config.replicates} replicates", file=sys.stderr)
    records = hn.run_trials(config)
    if args.verbose:
        for r in records:
            print(f"trial {r.trial}: gap={r.gap_mean:.5g} kl={r.kl_mean:.5g} "
                  f"flagged={int(r.flagged)} ({r.wall_time:.2f}s)",
                  file=sys.stderr)
    out_path = args.out or config.output or f"{pipeline}_records.jsonl"
    hn.write_records(records, out_path)
    if args.dump_traj:
        _dump_first_trajectory(config, args.dump_traj)
        print(f"trajectory dump: {args.dump_traj}", file=sys.stderr)
    print(f"records: {out_path}")
    if not records:
        print("0 trials requested; records file is empty")
        return EXIT_OK
    try:
        summary = hn.summarize(records, args.zeta)
    except DomainError as exc:
        print(f"divergence-dominated experiment: {exc}", file=sys.stderr)
        return EXIT_NO_DATA
    for line in summary.lines():
        print(line)
    return EXIT_OK


def _run_report(args) -> int:
    if not os.path.exists(args.records):
        raise ConfigError(f"records file not found: {args.records}")
    records = hn.read_records(args.records)
    if not records:
        print(f"no records in {args.records}", file=sys.stderr)
        return EXIT_NO_DATA
    try:
        summary = hn.summarize(records, args.zeta)
    except DomainError as exc:
        print(f"no usable records: {exc}", file=sys.stderr)
        return EXIT_NO_DATA
    os.makedirs(args.out, exist_ok=True)
    written = []
    for kind, filename in (
        ("bound-vs-gap", "bound_vs_gap.csv"),
        ("term-breakdown", "term_breakdown.csv"),
    ):
        path = os.path.join(args.out, filename)
        hn.emit_plot_data(records, kind, path)
        written.append(path)
    if any(r.curve for r in records):
        path = os.path.join(args.out, "dim_fit.csv")
        hn.emit_plot_data(records, "dim-fit", path)
        written.append(path)
    written += plotting.render_report_figures(records, args.out)
    for line in summary.lines():
        print(line)
    for path in written:
        print(f"wrote: {path}")
    return EXIT_OK


def _run_oracle_suite(args) -> int:
    checks = run_oracle_suite(args.seed, fast=args.fast)
    failed = 0
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        failed += not check.passed
        print(f"{status} {check.name}: {check.detail}")
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else 1


def dispatch(argv) -> int:
    """Parse argv and run; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors
        return int(exc.code or 0)
    try:
        if args.command == "sgld-bound":
            return _run_experiment(args, "sgld")
        if args.command == "cld-bound":
            return _run_experiment(args, "cld")
        if args.command == "fractal-dim":
            return _run_experiment(args, "fractal")
        if args.command == "oracle-suite":
            return _run_oracle_suite(args)
        if args.command == "report":
            return _run_report(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RandsetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
