"""Command-line interface: gen, run, sweep, fit, verify.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .generator import NAMED_GAMES, named_game, random_zero_sum
from .games import load_game, save_game
from .harness import (
    ExperimentConfig,
    confidence_interval,
    fit_loglog_slope,
    load_config_file,
    read_trace_csv,
    run_experiment,
    seeded_init_actions,
    weight_correspondence,
    write_trace_csv,
)
from .solvers import SOLVERS, log_schedule, run
from .verify import run_verification


def _add_game_source(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--game", help="path to a game file")
    parser.add_argument("--name", choices=NAMED_GAMES, help="named fixture game")
    parser.add_argument("--rows", type=int, help="rows of a random zero-sum game")
    parser.add_argument("--cols", type=int, help="cols of a random zero-sum game")
    parser.add_argument("--seed", type=int, default=0, help="seed for a random game")


def _resolve_game(args):
    if args.game:
        return load_game(args.game)
    if args.name:
        return named_game(args.name)
    if args.rows and args.cols:
        return random_zero_sum(args.rows, args.cols, args.seed)
    raise ValueError("no game specified: use --game, --name, or --rows/--cols")


def _cmd_gen(args) -> int:
    game = _resolve_game(args)
    save_game(game, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_run(args) -> int:
    game = _resolve_game(args)
    init = None
    if args.init_seed is not None:
        init = seeded_init_actions(args.init_seed, game.action_counts)
    schedule = log_schedule(args.iters, args.points) if args.points else None
    rows = run(args.solver, game, args.iters, args.weight, schedule,
               init_actions=init, game_seed=args.seed)
    write_trace_csv(rows, args.out)
    last = rows[-1]
    print(f"wrote {args.out} ({len(rows)} rows); final exploitability "
          f"{last.exploitability:.6g} at iteration {last.iteration}")
    return 0


def _config_from_args(args) -> ExperimentConfig:
    base = ExperimentConfig()
    file_values = load_config_file(args.config) if args.config else {}
    parsers = {
        "solvers": lambda v: tuple(s.strip() for s in v.split(",") if s.strip()),
        "rows": int, "cols": int, "games": int, "seed": int, "iters": int,
        "weight": float, "points": int, "out": str,
    }
    fields = {
        "solvers": "solvers", "rows": "rows", "cols": "cols", "games": "num_games",
        "seed": "base_seed", "iters": "max_iterations", "weight": "max_weight",
        "points": "eval_points", "out": "output_path",
    }
    values = {}
    for key, parse in parsers.items():
        if key in file_values:
            values[fields[key]] = parse(file_values[key])
    unknown = set(file_values) - set(parsers)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    # Explicit CLI flags override config-file values.
    for key in parsers:
        flag = getattr(args, key if key != "games" else "games")
        if flag is not None:
            values[fields[key]] = parsers[key](flag) if isinstance(flag, str) else flag
    config = ExperimentConfig(**{**base.__dict__, **values})
    config.validate()
    return config


def _cmd_sweep(args) -> int:
    config = _config_from_args(args)
    rows = run_experiment(config)
    print(f"wrote {config.output_path} ({len(rows)} rows; "
          f"{len(config.solvers)} solvers x {config.num_games} games)")
    return 0


def _cmd_fit(args) -> int:
    rows = [r for r in read_trace_csv(args.infile) if r.solver == args.solver]
    if not rows:
        raise ValueError(f"no rows for solver {args.solver!r} in {args.infile}")
    lo = args.lo if args.lo is not None else 1.0
    hi = args.hi if args.hi is not None else math.inf
    slopes = []
    for seed in sorted({r.game_seed for r in rows}):
        trace = [r for r in rows if r.game_seed == seed]
        if args.x == "weight":
            fit = weight_correspondence(trace, lo, hi)
        else:
            fit = fit_loglog_slope(trace, lo, hi)
        slopes.append(fit.slope)
        print(f"game_seed={seed} slope={fit.slope:.6g} intercept={fit.intercept:.6g} "
              f"r_squared={fit.r_squared:.6g} fit_range=({fit.fit_range[0]:g},"
              f"{fit.fit_range[1]:g})")
    print(f"median_slope={float(np.median(slopes)):.6g}")
    if len(slopes) >= 2:
        mean, lo_ci, hi_ci = confidence_interval(slopes)
        print(f"slope_ci_95 mean={mean:.6g} lo={lo_ci:.6g} hi={hi_ci:.6g}")
    return 0


def _cmd_verify(args) -> int:
    results = run_verification(quick=args.quick)
    failed = 0
    for name, detail in results:
        if detail is None:
            print(f"ok   {name}")
        else:
            failed += 1
            print(f"FAIL {name}: {detail}")
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eqbench",
                                     description="equilibrium solver benchmarks")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("gen", help="emit a game file")
    _add_game_source(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("run", help="trace a single solver on a single game")
    _add_game_source(p)
    p.add_argument("--solver", required=True, choices=SOLVERS)
    p.add_argument("--iters", type=int, default=10_000)
    p.add_argument("--weight", type=float, default=math.inf)
    p.add_argument("--points", type=int)
    p.add_argument("--init-seed", type=int, help="seed for a random pure start")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="full multi-seed benchmark sweep")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--solvers", help=f"comma list from {','.join(SOLVERS)}")
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--games", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--weight", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("fit", help="slope and confidence-interval analysis of a CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--solver", required=True, choices=SOLVERS)
    p.add_argument("--x", choices=("iteration", "weight"), default="iteration")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("verify", help="run the oracle and invariant suites")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(func=_cmd_verify)

    return parser


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if getattr(args, "func", None) is None:
        parser.print_usage()
        return 1
    try:
        return args.func(args)
    except (ValueError, OSError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(cli_main())
