"""Command-line entry point.

Subcommands: run (a scenario from a config file), admire (the aircraft preset),
demo-oco (the two-player game demonstration), demo-shared-controls (the
no-sharing impossibility construction), regret-report (run plus the four-term
regret decomposition). Every run writes a per-step CSV, a flat key=value
summary, and, unless --no-figures is given, rendered figures alongside.

Exit codes: 0 on success, 2 for configuration or usage errors, 3 for I/O
failures. stdout carries a single summary line; diagnostics go to stderr.
"""

import argparse
import os
import sys
import time
from pathlib import Path

from . import figures
from .harness import (ConfigError, config_hash,
                      constant_strategy, cost_descent_strategy,
                      demo_oco_counterexample, demo_shared_controls,
                      measure_regret_terms, parse_config, run_experiment,
                      serialize_config)

OUT_ENV = "MACONTROL_OUT"


def _build_parser():
    p = argparse.ArgumentParser(prog="macontrol",
                                description="regret-minimizing multi-agent control experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_config=False):
        if with_config:
            sp.add_argument("--config", help="path to a flat key = value config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
        sp.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./out)")
        sp.add_argument("--seed", type=int, default=None, help="seed override")
        sp.add_argument("--no-figures", action="store_true", help="skip figure rendering")
        sp.add_argument("--replicas", type=int, default=1,
                        help="fan out N seed-varied replicas")

    common(sub.add_parser("run", help="run a scenario from a config file"), with_config=True)
    common(sub.add_parser("admire", help="run the aircraft preset"))
    common(sub.add_parser("regret-report", help="run and decompose the regret"), with_config=True)
    demo = sub.add_parser("demo-oco", help="two-player game demonstration")
    common(demo)
    shared = sub.add_parser("demo-shared-controls", help="no-sharing impossibility demo")
    common(shared)
    return p


def _out_dir(args):
    out = args.out or os.environ.get(OUT_ENV) or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _overrides(args):
    result = {}
    for item in args.set:
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        result[key.strip()] = val.strip()
    if args.seed is not None:
        result["seed"] = str(args.seed)
    return result


def _load_config(args, default_scenario=None):
    text = ""
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    cfg = parse_config(text, scenario=default_scenario, overrides=_overrides(args))
    return cfg


def _write_run_outputs(result, outdir, render, stem=None):
    cfg = result.cfg
    stem = stem or f"{cfg.scenario}_{cfg.controller}"
    csv_path = outdir / f"{stem}.csv"
    result.log.write_csv(csv_path)
    result.log.write_summary(outdir / f"{stem}_summary.txt")
    (outdir / f"{stem}_config.txt").write_text(serialize_config(cfg))
    if render:
        figures.render_run_figure(result.log, outdir / f"{stem}.png",
                                  title=f"{cfg.scenario} / {cfg.controller}")
    return csv_path


def _cmd_run(args, default_scenario=None):
    t0 = time.perf_counter()
    cfg = _load_config(args, default_scenario=default_scenario)
    outdir = _out_dir(args)
    if args.replicas > 1:
        _fan_out(cfg, args, outdir)
        return 0
    result = run_experiment(cfg)
    csv_path = _write_run_outputs(result, outdir, not args.no_figures)
    print(f"{cfg.scenario} {cfg.controller} T={cfg.T} seed={cfg.seed} "
          f"avg_cost={float(result.costs.mean()):.6g} -> {csv_path}")
    print(f"wall_clock_s={time.perf_counter() - t0:.3f}", file=sys.stderr)
    return 0


def _replica_job(payload):
    cfg_text, out_str, render, idx = payload
    cfg = parse_config(cfg_text)
    outdir = Path(out_str)
    outdir.mkdir(parents=True, exist_ok=True)
    result = run_experiment(cfg)
    _write_run_outputs(result, outdir, render)
    return idx, float(result.costs.mean())


def _fan_out(cfg, args, outdir):
    from concurrent.futures import ProcessPoolExecutor
    from dataclasses import replace
    jobs = []
    for i in range(args.replicas):
        rc = replace(cfg, seed=cfg.seed + i)
        jobs.append((serialize_config(rc), str(outdir / f"replica_{i:02d}"),
                     not args.no_figures, i))
    workers = min(args.replicas, os.cpu_count() or 1)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = sorted(pool.map(_replica_job, jobs))
    means = [m for _, m in results]
    print(f"{cfg.scenario} {cfg.controller} replicas={args.replicas} "
          f"avg_cost_mean={sum(means) / len(means):.6g} -> {outdir}")


def _cmd_regret_report(args):
    cfg = _load_config(args, default_scenario="stable-pair")
    if cfg.controller not in ("magpc", "gpc"):
        raise ConfigError("regret-report needs a learned controller (magpc or gpc)")
    outdir = _out_dir(args)
    result = run_experiment(cfg)
    _write_run_outputs(result, outdir, not args.no_figures)
    decomp = measure_regret_terms(result)
    stem = f"{cfg.scenario}_{cfg.controller}_regret"
    report_path = outdir / f"{stem}.txt"
    with open(report_path, "w") as fh:
        fh.write(f"config_hash = {config_hash(cfg)}\n")
        fh.write(f"seed = {cfg.seed}\n")
        for key, val in decomp.as_dict().items():
            fh.write(f"{key} = {val}\n")
    if not args.no_figures:
        figures.render_regret_figure(decomp, outdir / f"{stem}.png")
    print(f"regret-report {cfg.scenario} {cfg.controller} T={cfg.T} "
          f"total_regret={decomp.total_regret:.6g} -> {report_path}")
    return 0


def _cmd_demo_oco(args):
    overrides = _overrides(args)
    T = int(overrides.get("T", 10000))
    if T < 2 or T % 2:
        raise ConfigError("demo-oco needs an even T >= 2")
    outdir = _out_dir(args)
    report = demo_oco_counterexample(T)
    csv_path = outdir / "demo_oco.csv"
    with open(csv_path, "w") as fh:
        fh.write("t,scripted_joint_loss,ogd_joint_loss\n")
        for t, s, o in report.rows():
            fh.write(f"{t},{float(s)!r},{float(o)!r}\n")
    with open(outdir / "demo_oco_summary.txt", "w") as fh:
        fh.write(f"T = {T}\n")
        fh.write(f"scripted_joint_loss_per_round = {float(report.scripted_joint_losses[0])!r}\n")
        fh.write(f"scripted_player_best = {float(report.scripted_player_best)!r}\n")
        fh.write(f"scripted_player_regret = {float(report.scripted_player_regret)!r}\n")
        fh.write(f"scripted_multiagent_regret_per_round = "
                 f"{float(report.scripted_regret_per_round)!r}\n")
        fh.write(f"ogd_avg_multiagent_regret = {float(report.ogd_avg_regret)!r}\n")
    if not args.no_figures:
        figures.render_oco_demo_figure(report, outdir / "demo_oco.png")
    print(f"demo-oco T={T} scripted_per_round={report.scripted_regret_per_round:.6g} "
          f"ogd_avg_regret={report.ogd_avg_regret:.6g} -> {csv_path}")
    return 0


def _cmd_demo_shared(args):
    overrides = _overrides(args)
    T = int(overrides.get("T", 1000))
    outdir = _out_dir(args)
    battery = {
        "constant_0": constant_strategy(0.0),
        "constant_1": constant_strategy(1.0),
        "constant_0.5": constant_strategy(0.5),
        "cost_descent": cost_descent_strategy(),
    }
    reports = {name: demo_shared_controls(strategy, T)
               for name, strategy in battery.items()}
    csv_path = outdir / "demo_shared_controls.csv"
    with open(csv_path, "w") as fh:
        fh.write("strategy,regret_world1,regret_world2,max_regret\n")
        for name, rep in reports.items():
            fh.write(f"{name},{rep.regret_traj1!r},{rep.regret_traj2!r},{rep.max_regret!r}\n")
    if not args.no_figures:
        figures.render_shared_controls_figure(reports, outdir / "demo_shared_controls.png")
    worst = min(rep.max_regret for rep in reports.values())
    print(f"demo-shared-controls T={T} min_over_strategies_of_max_regret={worst:.6g} "
          f"-> {csv_path}")
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            if not args.config and not args.set:
                raise ConfigError("run needs --config or --set overrides")
            return _cmd_run(args)
        if args.command == "admire":
            return _cmd_run(args, default_scenario="admire")
        if args.command == "regret-report":
            return _cmd_regret_report(args)
        if args.command == "demo-oco":
            return _cmd_demo_oco(args)
        if args.command == "demo-shared-controls":
            return _cmd_demo_shared(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
