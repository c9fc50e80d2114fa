"""Command-line entry point.

    mtlweight <command> [--config PATH] [--data PATH] [--out PATH] [--seed N]

Commands: ``gen-data``, ``compare``, ``simulate``, ``plot``, ``delta-m``.
Exit codes: 0 success, 2 config/schema error, 3 I/O error, 4 numeric divergence.
Diagnostics go to stderr, level set by ``MTLWEIGHT_LOG`` (debug|info|warn).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import RunConfig, load_config
from .data import atomic_write_text, generate_synthetic, load_csv, write_csv
from .errors import InvalidConfig, MtlWeightError, ParseError, ZeroBaseline
from .metrics import DeltaMReport, delta_m_per_task, delta_m_total, format_2dp
from .plot import weights_chart
from .simdyn import run_sim
from .trainer import ComparisonReport, run_comparison

log = logging.getLogger("mtlweight")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_DIVERGED = 0, 2, 3, 4

WEIGHTS_HEADER = ["strategy", "epoch", "task", "weight", "train_loss", "train_acc"]
SIM_HEADER = WEIGHTS_HEADER + ["source"]
DELTA_M_HEADER = ["task", "stl_loss", "mtl_loss", "delta_m"]
DELTA_M_INPUT_HEADER = ["task", "mtl_loss", "stl_loss"]


def fmt(v: float) -> str:
    return format(float(v), ".9g")


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _config(args) -> RunConfig:
    if args.config is None:
        from .config import parse_config
        return parse_config({}, args.seed)
    return load_config(args.config, args.seed)


def cmd_gen_data(args) -> int:
    cfg = _config(args)
    out = Path(args.out) if args.out else Path(cfg.output.dir) / "dataset.csv"
    if out.is_dir():
        out = out / "dataset.csv"
    ds = generate_synthetic(cfg.data.n, cfg.data.d, cfg.task_profiles(), cfg.seed,
                            shared_rank=cfg.data.shared_rank)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(ds, out)
    rates = ds.labels.mean(axis=0)
    print(f"n={ds.n_samples} d={ds.n_features} T={ds.n_tasks}")
    for name, r in zip(ds.task_names, rates):
        print(f"  {name}: positive rate {r:.4f}")
    return EXIT_OK


def weights_rows(report: ComparisonReport) -> list[list[str]]:
    rows = []
    for strategy, run in report.mtl_runs.items():
        for es in run.epoch_stats:
            for name, ts in zip(run.task_names, es.per_task):
                rows.append([strategy.value, str(es.epoch), name, fmt(ts.weight),
                             fmt(ts.train_loss), fmt(ts.train_accuracy)])
    return rows


def delta_m_rows(report: DeltaMReport) -> list[list[str]]:
    rows = [[r.task, fmt(r.stl_loss), fmt(r.mtl_loss), fmt(r.delta_m)] for r in report.per_task]
    rows.append(["TOTAL", "", "", fmt(report.total)])
    return rows


def summary_text(report: ComparisonReport, source: str) -> str:
    lines = [f"dataset: {source}",
             "all losses and accuracies below are on the validation split",
             "",
             f"{'task':<16}{'stl_acc':>10}{'stl_loss':>10}"
             + "".join(f"{s.value + '_loss':>20}" for s in report.mtl_runs),
             ]
    for i, name in enumerate(report.task_names):
        lines.append(f"{name:<16}{report.stl_accuracies[i]:>10.4f}{report.stl_losses[i]:>10.4f}"
                     + "".join(f"{r.final_val_losses[i]:>20.4f}" for r in report.mtl_runs.values()))
    lines.append("")
    for s, r in report.mtl_runs.items():
        mean_acc = sum(r.final_val_accuracies) / len(r.final_val_accuracies)
        lines.append(f"{s.value}: mean validation accuracy {mean_acc:.4f}")
    lines.append("")
    lines.append("delta_m (deepchest vs single-task, lower is better):")
    for row in report.delta_m.per_task:
        lines.append(f"  {row.task:<16}{format_2dp(row.delta_m):>8}")
    lines.append(f"total delta_m: {format_2dp(report.delta_m.total)}")
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> int:
    cfg = _config(args)
    out = Path(args.out) if args.out else Path(cfg.output.dir)
    if args.data:
        ds = load_csv(args.data)
        source = Path(args.data).name
    else:
        ds = generate_synthetic(cfg.data.n, cfg.data.d, cfg.task_profiles(), cfg.seed,
                                shared_rank=cfg.data.shared_rank)
        source = f"synthetic (seed {cfg.seed})"
    t0 = time.perf_counter()
    report = run_comparison(ds, cfg.hyperparams(), cfg.train.strategies)
    log.info("comparison finished in %.2fs; controller time %.3g%% of MTL training time",
             time.perf_counter() - t0,
             100.0 * report.controller_seconds
             / max(sum(r.train_seconds for r in report.mtl_runs.values()), 1e-12))
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "delta_m.csv", _csv_text(DELTA_M_HEADER, delta_m_rows(report.delta_m)))
    atomic_write_text(out / "weights.csv", _csv_text(WEIGHTS_HEADER, weights_rows(report)))
    atomic_write_text(out / "summary.txt", summary_text(report, source))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = Path(args.out) if args.out else Path(cfg.output.dir)
    tasks = cfg.sim_tasks()
    wcfg = cfg.weight_config()
    rows = []
    for strategy in cfg.sim.strategies:
        for state in run_sim(tasks, strategy, wcfg, cfg.sim.epochs, cfg.seed):
            for task, w, a in zip(tasks, state.weights, state.accuracies):
                rows.append([strategy.value, str(state.epoch), task.name, fmt(w), "", fmt(a), "sim"])
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "trajectory.csv", _csv_text(SIM_HEADER, rows))
    return EXIT_OK


def _read_table(path, required: Sequence[str]) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(f"{path}: missing column(s) {missing}", line=1)
        rows = []
        for row in reader:
            if None in row or any(row.get(c) is None for c in required):
                raise ParseError("wrong number of fields", line=reader.line_num)
            rows.append(row)
    return rows


def cmd_plot(args) -> int:
    if not args.data or not args.out:
        raise InvalidConfig("plot needs --data <weights.csv> and --out <chart.svg>")
    rows = _read_table(args.data, WEIGHTS_HEADER)
    for i, r in enumerate(rows):
        try:
            float(r["weight"]), float(r["epoch"])
        except ValueError:
            raise ParseError("non-numeric epoch or weight", line=i + 2) from None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out, weights_chart(rows))
    return EXIT_OK


def cmd_delta_m(args) -> int:
    if not args.data:
        raise InvalidConfig("delta-m needs --data <table.csv> with columns task,mtl_loss,stl_loss")
    rows = _read_table(args.data, DELTA_M_INPUT_HEADER)
    if not rows:
        raise ParseError("no data rows", line=2)
    values, bad = [], []
    for i, r in enumerate(rows):
        try:
            mtl, stl = float(r["mtl_loss"]), float(r["stl_loss"])
        except ValueError:
            raise ParseError("non-numeric loss", line=i + 2) from None
        try:
            values.append((r["task"], delta_m_per_task(mtl, stl)))
        except ZeroBaseline:
            bad.append((i + 2, r["task"]))
    if bad:
        for line, task in bad:
            print(f"line {line}: task {task!r} has a non-positive single-task loss", file=sys.stderr)
        raise ZeroBaseline(f"{len(bad)} row(s) with zero baseline; aborting")
    width = max(len(t) for t, _ in values) + 2
    for task, d in values:
        print(f"{task:<{width}}{format_2dp(d):>7}")
    print(f"{'total':<{width}}{format_2dp(delta_m_total([d for _, d in values])):>7}")
    return EXIT_OK


COMMANDS = {
    "gen-data": cmd_gen_data,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
    "plot": cmd_plot,
    "delta-m": cmd_delta_m,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mtlweight", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--data", help="input CSV (dataset, weights log or loss table)")
    p.add_argument("--out", help="output directory (or file for gen-data / plot)")
    p.add_argument("--seed", type=int, help="override the config seed")
    return p


def _setup_logging() -> None:
    level = {"debug": logging.DEBUG, "info": logging.INFO, "warn": logging.WARNING,
             "warning": logging.WARNING}.get(os.environ.get("MTLWEIGHT_LOG", "warn").lower(),
                                              logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except MtlWeightError as exc:
        print(f"mtlweight: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"mtlweight: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
