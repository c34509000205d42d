"""``novabot`` command line.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 simulation error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from novabot.errors import ConfigError, EvaluationError, SimulationError, SnapshotError
from novabot.harness.config import ExperimentConfig, load_config

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_SIM = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _global_flags(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", metavar="PATH", default=d, help="flat key = value config file")
    p.add_argument("--seed", type=int, metavar="N", default=d, help="master seed override")
    p.add_argument("--out", metavar="DIR", default=d, help="output directory")
    p.add_argument("--jobs", type=int, metavar="N", default=d, help="parallel evaluation width")
    p.add_argument("--fast", action="store_true", default=argparse.SUPPRESS if suppress else False,
                   help="CI profile: 600 µm domain, R=3")
    p.add_argument("-v", "--verbose", action="store_true",
                   default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="novabot", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("grow", help="grow the fixed tumor and save its snapshot")
    g.add_argument("--days", type=float, default=None)

    e = sub.add_parser("evolve", help="one method on one initial population")
    e.add_argument("--method", choices=("ga", "hybrid"), default="hybrid")
    e.add_argument("--s-thr", type=float, default=None)
    e.add_argument("--pop-index", type=int, default=0)

    s = sub.add_parser("sweep", help="full protocol: GA and every s_thr on every population")
    s.add_argument("--s-thr", type=float, nargs="+", default=None)

    b = sub.add_parser("bench", help="deceptive surrogate benchmark or kernel timings")
    b.add_argument("--surrogate", action="store_true", help="sweep on the deceptive surrogate")
    b.add_argument("--kernels", action="store_true", help="time compiled vs pure-Python kernels")
    b.add_argument("--pairs", type=int, default=None, help="number of shared populations")
    b.add_argument("--s-thr", type=float, nargs="+", default=None)

    m = sub.add_parser("summarize", help="summary tables from runs.csv")
    m.add_argument("runs", nargs="?", default=None, help="runs.csv (default: OUT/runs.csv)")

    pl = sub.add_parser("plot", help="SVG charts from summary tables")
    pl.add_argument("input", nargs="?", default=None,
                    help="directory with summary tables or runs.csv (default: OUT)")

    for p in (g, e, s, b, m, pl):
        _global_flags(p, suppress=True)
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.fast:
        cfg = cfg.fast()
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.jobs is not None:
        changes["jobs"] = args.jobs
    return cfg.replace(**changes) if changes else cfg


def _cmd_grow(args, cfg):
    from novabot.sim.engine import grow_tumor_with_log
    from novabot.sim.snapshot import save_snapshot

    days = cfg.growth_days if args.days is None else args.days
    os.makedirs(cfg.output_dir, exist_ok=True)
    snap, events = grow_tumor_with_log(cfg.effective_growth_seed, days, cfg.sim_config(),
                                       cfg.treatment_params())
    path = os.path.join(cfg.output_dir, "snapshot.txt")
    save_snapshot(snap, path)
    print(f"grew {snap.count} tumor cells in {days:g} days "
          f"(births {events['births']}, necrosis {events['necrosis_deaths']}) -> {path}")


def _cmd_evolve(args, cfg):
    from novabot.harness.experiment import Method, run_one

    s_thr = args.s_thr
    if args.method == "hybrid" and s_thr is None:
        if len(cfg.s_thr_sweep) != 1:
            raise ConfigError("evolve --method hybrid needs --s-thr (or a one-value s_thr_sweep)")
        s_thr = cfg.s_thr_sweep[0]
    method = Method("ga") if args.method == "ga" else Method("hybrid", float(s_thr))
    out = run_one(cfg, method, args.pop_index)
    print(f"{method.key} on population {args.pop_index} -> {out}")


def _cmd_sweep(args, cfg):
    from novabot.harness.experiment import run_experiment

    if args.s_thr:
        cfg = cfg.replace(s_thr_sweep=tuple(args.s_thr))
    out = run_experiment(cfg)
    _print_stats(out)


def _print_stats(out_dir):
    from novabot.harness.summarize import method_label, read_summary

    for row in read_summary(out_dir).stats:
        print(f"{method_label(row[0], row[1]):>20} {row[2]:<13} median {row[4]:.6g} "
              f"[q1 {row[5]:.6g}, q3 {row[6]:.6g}] n={row[3]}")


def _cmd_bench(args, cfg):
    if not (args.surrogate or args.kernels):
        raise ConfigError("bench needs --surrogate and/or --kernels")
    if args.kernels:
        from novabot.harness.kernel_bench import format_report, run_kernel_bench

        print(format_report(run_kernel_bench()))
    if args.surrogate:
        from novabot.harness.bench import paired_reports
        from novabot.harness.experiment import execute, methods_for

        changes = {"evaluator": "surrogate"}
        if args.pairs is not None:
            changes["n_initial_populations"] = args.pairs
        if args.s_thr:
            changes["s_thr_sweep"] = tuple(args.s_thr)
        cfg = cfg.replace(**changes)
        t0 = time.perf_counter()
        results = execute(cfg, cfg.output_dir, methods_for(cfg), range(cfg.n_initial_populations))
        for rep in paired_reports(results):
            print(rep.line())
        print(f"surrogate bench: {len(results)} runs in {time.perf_counter() - t0:.2f} s "
              f"-> {cfg.output_dir}")


def _cmd_summarize(args, cfg):
    from novabot.harness.summarize import summarize, write_summary

    runs = args.runs or os.path.join(cfg.output_dir, "runs.csv")
    out = cfg.output_dir if args.out is not None else (os.path.dirname(runs) or ".")
    os.makedirs(out, exist_ok=True)
    write_summary(summarize(runs), out)
    _print_stats(out)


def _cmd_plot(args, cfg):
    from novabot.harness.plots import emit_plots
    from novabot.harness.summarize import read_summary, summarize

    src = args.input or cfg.output_dir
    if os.path.isfile(src):
        summary = summarize(src)
    elif not os.path.exists(os.path.join(src, "summary_best.csv")) and \
            os.path.exists(os.path.join(src, "runs.csv")):
        summary = summarize(os.path.join(src, "runs.csv"))
    else:
        summary = read_summary(src)
    out = cfg.output_dir if args.out is not None else (src if os.path.isdir(src)
                                                       else os.path.dirname(src) or ".")
    for path in emit_plots(summary, out):
        print(path)


COMMANDS = {"grow": _cmd_grow, "evolve": _cmd_evolve, "sweep": _cmd_sweep,
            "bench": _cmd_bench, "summarize": _cmd_summarize, "plot": _cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("config", "seed", "out", "jobs"):
        if not hasattr(args, name):
            setattr(args, name, None)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"novabot: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, EvaluationError) as exc:
        print(f"novabot: simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM
    except (OSError, SnapshotError, ValueError) as exc:
        print(f"novabot: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
