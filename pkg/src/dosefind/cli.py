"""Command-line entry point.

Subcommands: `table` (decision tables), `simulate` (Monte Carlo operating
characteristics), `verify` (the equivalence-check battery), and `decide`
(a single scripted decision). All outputs are deterministic for a fixed
configuration and seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    RunConfig,
    default_config,
    default_designs,
    load_config,
    resolve_seed,
)
from .designs import (
    HISTORY_DESIGNS,
    TALLY_DESIGNS,
    DesignConfig,
    decide_from_tallies,
    decide_tally,
)
from .sim import (
    METRIC_NAMES,
    Scenario,
    evaluate,
    fixed_scenarios,
    random_scenario,
    scenarios_from_lines,
)
from .tables import build_table, emit
from .verify import standard_checks

__all__ = ["main"]


def _load_or_default(path: str | None, tally_only: bool = False) -> RunConfig:
    if path is not None:
        return load_config(path)
    cfg = default_config()
    if tally_only:
        return RunConfig(
            designs=default_designs(tally_only=True),
            trial=cfg.trial,
            sim=cfg.sim,
            output=cfg.output,
        )
    return cfg


def _out_dir(args, run: RunConfig) -> Path:
    out = Path(args.out if args.out is not None else run.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(args, run: RunConfig) -> str:
    return args.format if args.format is not None else run.output.fmt


def cmd_table(args) -> int:
    run = _load_or_default(args.config, tally_only=True)
    bad = [cfg.design for cfg in run.designs if cfg.design in HISTORY_DESIGNS]
    if bad:
        print(
            f"error: {', '.join(bad)} cannot be tabulated: decisions depend "
            f"on the full assignment history, not a single (n, y) tally",
            file=sys.stderr,
        )
        return 1
    fmt = _fmt(args, run)
    out = _out_dir(args, run)
    max_n = args.max_n if args.max_n is not None else run.trial.max_n
    for cfg in run.designs:
        table = build_table(cfg, max_n=max_n)
        path = out / f"table_{cfg.design}.{fmt}"
        path.write_text(emit(table, fmt))
        print(f"wrote {path}")
    return 0


def _gather_scenarios(run: RunConfig, seed: int) -> list[Scenario]:
    src = run.sim.scenarios
    if src == "fixed":
        return fixed_scenarios()
    if src == "random":
        base = run.designs[0]
        out = []
        for i in range(run.sim.n_scenarios):
            n_doses = run.sim.doses_mix[i % len(run.sim.doses_mix)]
            rng = np.random.default_rng(
                np.random.SeedSequence(seed, spawn_key=(0, i))
            )
            out.append(random_scenario(n_doses, base.p_T, base.ei, rng))
        return out
    path = Path(src)
    if not path.exists():
        raise ConfigError(f"config error at sim.scenarios: no such file {src}")
    return scenarios_from_lines(path.read_text().splitlines())


def _summary_rows(summaries) -> list[str]:
    rows = ["design,metric,mean,sd"]
    for design, oc in summaries.items():
        for name in METRIC_NAMES:
            m = oc.metric(name)
            rows.append(f"{design},{name},{m.mean:.6f},{m.sd:.6f}")
    return rows


def _summary_text(summaries) -> list[str]:
    designs = list(summaries)
    width = max(len(d) for d in designs) + 2
    head = "metric".ljust(12) + "".join(d.rjust(width) for d in designs)
    lines = [head]
    for name in METRIC_NAMES:
        cells = []
        for d in designs:
            m = summaries[d].metric(name)
            cells.append(f"{m.mean:.3f}({m.sd:.3f})".rjust(width))
        lines.append(name.ljust(12) + "".join(cells))
    return lines


def cmd_simulate(args) -> int:
    run = _load_or_default(args.config)
    seed = resolve_seed(args.seed, run.sim.seed)
    scenarios = _gather_scenarios(run, seed)
    summaries, per_scenario = evaluate(
        list(run.designs),
        scenarios,
        replicates=run.sim.replicates,
        seed=seed,
        max_n=run.trial.max_n,
        cohort_size=run.trial.cohort_size,
        start_dose=run.trial.start_dose,
        workers=args.workers,
    )
    out = _out_dir(args, run)
    fmt = _fmt(args, run)
    if fmt == "csv":
        (out / "summary.csv").write_text("\n".join(_summary_rows(summaries)) + "\n")
    else:
        (out / "summary.txt").write_text("\n".join(_summary_text(summaries)) + "\n")
    long_rows = ["design,scenario,label," + ",".join(METRIC_NAMES)]
    for design, rows in per_scenario.items():
        for si, row in enumerate(rows):
            cells = ",".join(f"{v:.6f}" for v in row)
            long_rows.append(f"{design},{si},{scenarios[si].label},{cells}")
    (out / "per_scenario.csv").write_text("\n".join(long_rows) + "\n")
    print(f"wrote {out / ('summary.' + fmt)} and {out / 'per_scenario.csv'}")
    return 0


def cmd_verify(args) -> int:
    run = _load_or_default(args.config)
    interval = next(
        (c for c in run.designs if c.design in TALLY_DESIGNS),
        run.designs[0],
    )
    model = next(
        (c for c in run.designs if c.design in HISTORY_DESIGNS),
        DesignConfig(design="IntCRM", p_T=interval.p_T),
    )
    results = standard_checks(
        p_T=interval.p_T,
        eps1=interval.eps1,
        eps2=interval.eps2,
        n_doses=run.trial.n_doses,
        delta=model.delta,
        sigma2=model.sigma2,
    )
    out = _out_dir(args, run)
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results)
    lines.append("ALL CHECKS PASSED" if ok else "CHECKS FAILED")
    cert = out / "certificate.txt"
    cert.write_text("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    return 0 if ok else 1


def _read_history(path: str) -> list[tuple[int, int]]:
    history = []
    for i, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ConfigError(
                f"history line {i}: expected `dose,dlt`, got {line!r}"
            )
        history.append((int(parts[0]), int(parts[1])))
    return history


def cmd_decide(args) -> int:
    run = _load_or_default(args.config)
    match = [c for c in run.designs if c.design == args.design]
    if not match:
        print(f"error: design {args.design!r} not configured", file=sys.stderr)
        return 1
    cfg = match[0]
    if cfg.design in HISTORY_DESIGNS:
        if args.history is None:
            print(
                f"error: {cfg.design} needs --history FILE (its decisions "
                f"depend on the full assignment record)",
                file=sys.stderr,
            )
            return 1
        cfg = cfg.for_doses(run.trial.n_doses)
        history = _read_history(args.history)
        tallies = [0] * run.trial.n_doses
        ys = [0] * run.trial.n_doses
        for dose, dlt in history:
            if not 1 <= dose <= run.trial.n_doses:
                print(f"error: dose {dose} outside 1..{run.trial.n_doses}",
                      file=sys.stderr)
                return 1
            tallies[dose - 1] += 1
            ys[dose - 1] += dlt
        if not history:
            print(1)
            return 0
        print(decide_from_tallies(cfg, tuple(zip(tallies, ys))))
        return 0
    if args.n is None or args.y is None:
        print("error: tally designs need N and Y arguments", file=sys.stderr)
        return 1
    if not 0 <= args.y <= args.n or args.n < 1:
        print(f"error: need 1 <= n and 0 <= y <= n, got n={args.n} y={args.y}",
              file=sys.stderr)
        return 1
    print(decide_tally(cfg, args.n, args.y))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dosefind",
        description="Dose-finding designs, decision tables, trial "
        "simulation, and machine verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None,
                        help="TOML run configuration (defaults built in)")
    common.add_argument("--out", metavar="DIR", default=None,
                        help="output directory (default from config)")
    common.add_argument("--format", choices=("csv", "txt"), default=None,
                        help="output format (default from config)")

    p_table = sub.add_parser("table", parents=[common],
                             help="emit decision tables")
    p_table.add_argument("--max-n", type=int, default=None,
                         help="largest tally column (default: trial max_n)")
    p_table.set_defaults(func=cmd_table)

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="Monte Carlo operating characteristics")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="master seed (beats the SEED env var and config)")
    p_sim.add_argument("--workers", type=int, default=1,
                       help="parallel scenario workers")
    p_sim.set_defaults(func=cmd_simulate)

    p_verify = sub.add_parser("verify", parents=[common],
                              help="run the equivalence-check battery")
    p_verify.set_defaults(func=cmd_verify)

    p_decide = sub.add_parser("decide", parents=[common],
                              help="print one dosing decision")
    p_decide.add_argument("design", help="design name, e.g. mTPI or BOIN")
    p_decide.add_argument("n", type=int, nargs="?", default=None,
                          help="patients treated at the current dose")
    p_decide.add_argument("y", type=int, nargs="?", default=None,
                          help="DLTs observed at the current dose")
    p_decide.add_argument("--history", metavar="FILE", default=None,
                          help="dose,dlt lines for history-based designs")
    p_decide.set_defaults(func=cmd_decide)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
