"""Command-line runner: init, run, report, export."""

from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
import time
from pathlib import Path

from .checkpoint import load_checkpoint
from .config import ExperimentConfig, load_config, preset_config, run_label, save_config
from .metrics import curves, error_grid, reference_error_grid, write_curves
from .network import MlpSpec, Network
from .problems import PROBLEM_NAMES, get_problem
from .reference import MissingDatasetError, resolve_reference
from .training import MODES, ConfigError, TrainConfig, Trainer, TrainRecord

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED = 0, 2, 3

CONFIG_NAME = "config.yaml"
RECORD_NAME = "record.csv"
CHECKPOINT_NAME = "checkpoint.ckpt"
SUMMARY_NAME = "summary.json"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# init
# ---------------------------------------------------------------------------


def cmd_init(args) -> int:
    cfg = preset_config(args.problem, args.mode)
    exp = ExperimentConfig(runs=[cfg], seeds=list(args.seeds), name=run_label(cfg),
                           output_dir=args.output_dir or f"results/{run_label(cfg)}")
    out = Path(args.output or f"{run_label(cfg)}.yaml")
    if out.exists() and not args.force:
        raise UsageError(f"{out} exists; pass --force to overwrite")
    save_config(exp, out)
    print(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def run_dir(root, label: str, seed: int) -> Path:
    return Path(root) / label / f"seed-{seed}"


def _check_references(exp: ExperimentConfig) -> None:
    for _, _, cfg in exp.expand():
        problem = get_problem(cfg.problem, **cfg.problem_options)
        if not problem.has_analytic:
            resolve_reference(problem, cfg.data_root, cfg.fallback_reference, cfg.reference_resolution)


def execute_run(exp: ExperimentConfig, label: str, seed: int, cfg: TrainConfig, root: Path,
                log=print) -> TrainRecord:
    """Train one (config, seed) pair inside its own directory; resumes from a checkpoint."""
    d = run_dir(root, label, seed)
    d.mkdir(parents=True, exist_ok=True)
    summary_path = d / SUMMARY_NAME
    ckpt = d / CHECKPOINT_NAME
    if summary_path.exists():
        done = json.loads(summary_path.read_text())
        if done.get("reason") is not None:
            log(f"{label} seed {seed}: already finished ({done['reason']})")
            return TrainRecord.read_csv(d / RECORD_NAME)
    snapshot = ExperimentConfig(runs=[cfg], seeds=[seed], output_dir=str(root), data_root=exp.data_root,
                                fallback_reference=cfg.fallback_reference,
                                checkpoint_every=exp.checkpoint_every, name=label)
    save_config(snapshot, d / CONFIG_NAME)

    if ckpt.exists():
        trainer = Trainer.resume(ckpt, cfg)
        log(f"{label} seed {seed}: resuming at epoch {trainer.epoch}")
    else:
        trainer = Trainer(cfg)
    # rewrite the CSV from the trainer's record, then stream new rows
    record_path = d / RECORD_NAME
    record_path.write_text(trainer.record.to_csv())
    t0 = time.perf_counter()
    with record_path.open("a") as fh:
        while not trainer.done:
            n = len(trainer.record.rows)
            trainer.step()
            for i in range(n, len(trainer.record.rows)):
                fh.write(trainer.record.csv_line(i))
            fh.flush()
            if trainer.epoch % exp.checkpoint_every == 0 or trainer.done:
                trainer.save(ckpt)
    rec = trainer.record
    summary = {"label": label, "problem": cfg.problem, "mode": cfg.mode, "seed": seed, **rec.summary(),
               "final_L_PINN": rec.last("L_PINN") if rec.rows else None,
               "wall_time_s": round(time.perf_counter() - t0, 3)}
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    nr = "n/a" if rec.final_nrmse is None else f"{rec.final_nrmse:.4g}"
    log(f"{label} seed {seed}: {rec.reason} at epoch {rec.termination_epoch}, NRMSE {nr}")
    if rec.error:
        log(f"  {rec.error}")
    return rec


def cmd_run(args) -> int:
    try:
        exp = load_config(args.config)
        if args.fallback_reference:
            exp.fallback_reference = True
        if args.data_root:
            exp.data_root = args.data_root
        if args.output_dir:
            exp.output_dir = args.output_dir
        exp.validate()
        _check_references(exp)
    except (ConfigError, MissingDatasetError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    root = Path(exp.output_dir)
    diverged = False
    for label, seed, cfg in exp.expand():
        rec = execute_run(exp, label, seed, cfg, root)
        diverged |= rec.reason == "numeric_error"
    return EXIT_DIVERGED if diverged else EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def collect_summaries(root) -> list[dict]:
    root = Path(root)
    if not root.is_dir():
        raise UsageError(f"{root} is not a directory")
    out = [json.loads(p.read_text()) for p in sorted(root.rglob(SUMMARY_NAME))]
    if not out:
        raise UsageError(f"no finished runs under {root}")
    return out


def report_table(summaries: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for s in summaries:
        groups.setdefault((s["problem"], s["mode"]), []).append(s)
    rows = []
    for (problem, mode), runs in sorted(groups.items()):
        runs.sort(key=lambda s: s["seed"])
        ok = [s for s in runs if s["reason"] not in (None, "numeric_error")]
        aborted = [s for s in runs if s not in ok]
        rows.append({
            "problem": problem,
            "mode": mode,
            "seeds": " ".join(str(s["seed"]) for s in runs),
            "epochs": " ".join(str(s["termination_epoch"]) + ("*" if s in aborted else "") for s in runs),
            "nrmse": " ".join("aborted" if s in aborted else f"{s['final_nrmse']:.4g}" for s in runs),
            "median_epoch": statistics.median([s["termination_epoch"] for s in ok]) if ok else "",
            "median_nrmse": statistics.median([s["final_nrmse"] for s in ok]) if ok else "",
            "aborted": len(aborted),
        })
    return rows


def _aligned(rows: list[dict]) -> str:
    cols = list(rows[0])
    cells = [[str(c) for c in cols]] + [[_cell(r[c]) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells) + "\n"


def _cell(v) -> str:
    return f"{v:.4g}" if isinstance(v, float) else str(v)


def cmd_report(args) -> int:
    rows = report_table(collect_summaries(args.results))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    root = Path(args.results)
    (root / "report.csv").write_text(buf.getvalue())
    text = _aligned(rows)
    (root / "report.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def _run_dirs(root: Path) -> list[Path]:
    if (root / SUMMARY_NAME).exists() or (root / CHECKPOINT_NAME).exists():
        return [root]
    dirs = sorted({p.parent for p in root.rglob(CHECKPOINT_NAME)})
    if not dirs:
        raise UsageError(f"no runs under {root}")
    return dirs


def _load_run(d: Path) -> TrainConfig:
    _, _, cfg = next(load_config(d / CONFIG_NAME).expand())
    return cfg


def _parse_slice(items, problem) -> dict[int, float] | None:
    if not items:
        return None
    out = {}
    for item in items:
        name, _, value = item.partition("=")
        if name not in problem.coords:
            raise UsageError(f"unknown coordinate {name!r}; {problem.name} has {', '.join(problem.coords)}")
        out[problem.coords.index(name)] = float(value)
    return out


def cmd_export(args) -> int:
    root = Path(args.results)
    if not root.is_dir():
        raise UsageError(f"{root} is not a directory")
    for d in _run_dirs(root):
        cfg = _load_run(d)
        if args.kind == "curves":
            rec = TrainRecord.read_csv(d / RECORD_NAME)
            try:
                series = curves(rec, args.quantities or ["L_PINN"])
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            out = d / "curves.csv"
            write_curves(out, series)
        else:
            meta, arrays = load_checkpoint(d / CHECKPOINT_NAME)
            model = Network(MlpSpec.from_dict(meta["generator_spec"]), arrays["theta_g"])
            problem = get_problem(cfg.problem, **cfg.problem_options)
            try:
                if problem.has_analytic:
                    grid = error_grid(model, problem, args.resolution, _parse_slice(args.slice, problem))
                else:
                    ref = resolve_reference(problem, args.data_root or cfg.data_root,
                                            args.fallback_reference or cfg.fallback_reference,
                                            cfg.reference_resolution)
                    grid = reference_error_grid(model, problem, ref)
            except MissingDatasetError as exc:
                raise UsageError(str(exc)) from None
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            out = d / "heatmap.csv"
            grid.to_csv(out)
        print(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gapinn", description="Train and compare physics-informed networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="write a config with the preset hyperparameters")
    p.add_argument("problem", choices=PROBLEM_NAMES)
    p.add_argument("mode", choices=MODES)
    p.add_argument("-o", "--output", help="config path (default <problem>-<mode>.yaml)")
    p.add_argument("--output-dir", help="results directory written into the config")
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("run", help="run every (mode, seed) of a config")
    p.add_argument("config")
    p.add_argument("--fallback-reference", action="store_true",
                   help="use the in-repo reference solvers when a dataset file is missing")
    p.add_argument("--data-root", help="directory holding reference datasets")
    p.add_argument("--output-dir", help="override the config's results directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="summarize finished runs")
    p.add_argument("results")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export", help="write plot-ready CSV files")
    p.add_argument("results")
    p.add_argument("--kind", choices=("curves", "heatmap"), required=True)
    p.add_argument("--quantities", nargs="+", help="record columns for curves (default L_PINN)")
    p.add_argument("--resolution", type=int, default=128)
    p.add_argument("--slice", nargs="+", metavar="COORD=VALUE", help="fixed coordinates for >2-D problems")
    p.add_argument("--fallback-reference", action="store_true")
    p.add_argument("--data-root")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
