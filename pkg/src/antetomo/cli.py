"""Command-line entry point.

Subcommands::

    antetomo simulate    --config cfg.json --out DIR [--seed S]
    antetomo reconstruct COUNTS --group phi+|phi-|combined --out DIR
    antetomo process     COUNTS --out DIR | --fixture --out DIR
    antetomo report      REPORT [REPORT ...] --out DIR
    antetomo fixtures    --out DIR
    antetomo pipeline    --config cfg.json --out DIR

Every stage draws randomness from one 64-bit seed: sampling for the k-th
prepared state uses entropy ``[seed, 0, k]``, state bootstraps
``[seed, 1, group, state, r]`` and process bootstraps ``[seed, 2, bell, r]``.
Output files depend only on their inputs and the seed; ``manifest.json``
additionally records a timestamp (taken from ``SOURCE_DATE_EPOCH`` when set).

Exit codes: 0 success, 2 invalid input, 3 an iterative fit hit its cap.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .counts import CountsTable
from .reports import (
    STATE_GROUPS,
    fixture_catalogue_json,
    fixture_process_report,
    fixture_state_report,
    process_report,
    state_report,
    summarize,
    summary_table,
)
from .simproto import ExperimentConfig, simulate_counts

log = logging.getLogger("antetomo")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NONCONVERGED = 3


class NonConvergence(RuntimeError):
    pass


def _write_json(path, data):
    path.write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")


def _read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
            else _dt.datetime.now(_dt.timezone.utc))
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def _write_manifest(out, command, stages, seed, config=None, inputs=()):
    _write_json(out / "manifest.json", {
        "tool": "antetomo",
        "version": __version__,
        "command": command,
        "config": None if config is None else str(config),
        "inputs": [str(p) for p in inputs],
        "output_dir": str(out),
        "stages": list(stages),
        "seed": seed,
        "timestamp": _timestamp(),
    })


def _check_converged(*reports):
    bad = [e for r in reports for e in r["entries"] if e.get("converged") is False]
    if bad:
        raise NonConvergence(f"{len(bad)} reconstruction(s) hit the iteration cap")


def _outdir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config(args):
    config = ExperimentConfig.load(args.config)
    if args.seed is not None:
        data = config.to_dict()
        data["seed"] = args.seed
        config = ExperimentConfig.from_dict(data)
    return config


def run_simulate(config, out, workers=None):
    counts = simulate_counts(config, workers=workers)
    counts.dump(out / "counts.json")
    return counts


def run_reconstruct(counts, group, out, seed, resamples, max_iter=None):
    report = state_report(counts, group, seed=seed, resamples=resamples, max_iter=max_iter)
    _write_json(out / f"states_{group}.json", report)
    return report


def run_process(counts, out, seed, resamples, max_iter=None):
    report = process_report(counts, seed=seed, resamples=resamples, max_iter=max_iter)
    _write_json(out / "process.json", report)
    return report


def run_report(reports, out):
    summary, plot_csv = summarize(reports)
    _write_json(out / "summary.json", summary)
    (out / "summary.txt").write_text(summary_table(summary), encoding="utf-8")
    (out / "plot_data.csv").write_text(plot_csv, encoding="utf-8")
    return summary


def cmd_simulate(args):
    config = _load_config(args)
    out = _outdir(args.out)
    counts = run_simulate(config, out, workers=args.workers)
    _write_manifest(out, "simulate", ["simulate"], config.seed, config=args.config)
    log.info("wrote %d count cells to %s", len(counts.cells), out / "counts.json")


def cmd_reconstruct(args):
    counts = CountsTable.load(args.counts)
    out = _outdir(args.out)
    report = run_reconstruct(counts, args.group, out, args.seed, args.resamples, args.max_iter)
    _write_manifest(out, "reconstruct", ["reconstruct"], args.seed, inputs=[args.counts])
    for e in report["entries"]:
        if "error" in e:
            log.warning("%s: %s", e["state"], e["error"])
        else:
            log.info("%s %s fidelity %.4f", e["state"], args.group, e["fidelity"])
    _check_converged(report)


def cmd_process(args):
    out = _outdir(args.out)
    if args.fixture:
        report = fixture_process_report()
        _write_json(out / "process.json", report)
        inputs = []
    else:
        if args.counts is None:
            raise ValueError("process needs a counts file or --fixture")
        counts = CountsTable.load(args.counts)
        report = run_process(counts, out, args.seed, args.resamples, args.max_iter)
        inputs = [args.counts]
    _write_manifest(out, "process", ["process"], args.seed, inputs=inputs)
    for e in report["entries"]:
        log.info("%s process fidelity %.4f", e["bell_group"], e["process_fidelity"])
    _check_converged(report)


def cmd_report(args):
    reports = [_read_json(p) for p in args.reports]
    out = _outdir(args.out)
    summary = run_report(reports, out)
    _write_manifest(out, "report", ["report"], None, inputs=args.reports)
    sys.stdout.write(summary_table(summary))


def cmd_fixtures(args):
    out = _outdir(args.out)
    _write_json(out / "published_matrices.json", fixture_catalogue_json())
    for group in STATE_GROUPS:
        _write_json(out / f"states_{group}.json", fixture_state_report(group))
    _write_json(out / "process.json", fixture_process_report())
    _write_manifest(out, "fixtures", ["fixtures"], None)


def cmd_pipeline(args):
    config = _load_config(args)
    out = _outdir(args.out)
    counts = run_simulate(config, out, workers=args.workers)
    # re-read so that every stage sees exactly what a staged run would
    counts = CountsTable.load(out / "counts.json")
    reports = [run_reconstruct(counts, g, out, config.seed, args.resamples, args.max_iter)
               for g in STATE_GROUPS]
    reports.append(run_process(counts, out, config.seed, args.resamples, args.max_iter))
    run_report(reports, out)
    _write_manifest(out, "pipeline", ["simulate", "reconstruct", "process", "report"],
                    config.seed, config=args.config)
    sys.stdout.write((out / "summary.txt").read_text(encoding="utf-8"))
    _check_converged(*reports)


def build_parser():
    p = argparse.ArgumentParser(prog="antetomo", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def fit_options(sp):
        sp.add_argument("--seed", type=int, default=0, help="master seed for bootstrap resampling")
        sp.add_argument("--resamples", type=int, default=100,
                        help="Poisson bootstrap resamples (0 disables error bars)")
        sp.add_argument("--max-iter", type=int, default=None, help="iteration cap for MLE fits")

    sp = sub.add_parser("simulate", help="Monte Carlo counts from an experiment config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("reconstruct", help="single-qubit MLE per prepared state")
    sp.add_argument("counts")
    sp.add_argument("--group", choices=STATE_GROUPS, default="combined")
    sp.add_argument("--out", required=True)
    fit_options(sp)
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("process", help="process tomography per Bell outcome")
    sp.add_argument("counts", nargs="?")
    sp.add_argument("--fixture", action="store_true", help="use the published process matrices")
    sp.add_argument("--out", required=True)
    fit_options(sp)
    sp.set_defaults(func=cmd_process)

    sp = sub.add_parser("report", help="summary table and plot-data CSV")
    sp.add_argument("reports", nargs="*")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("fixtures", help="dump the published matrices")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_fixtures)

    sp = sub.add_parser("pipeline", help="simulate, reconstruct, process and report in one run")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.add_argument("--resamples", type=int, default=100)
    sp.add_argument("--max-iter", type=int, default=None)
    sp.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
