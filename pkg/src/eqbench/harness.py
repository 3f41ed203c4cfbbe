"""Experiment runner: multi-seed sweeps, slope fits, confidence intervals,
and the small-step oracle used to validate DW-FP's jump-ahead."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .games import Game, _pure_action_values
from .generator import Prng, random_zero_sum
from .solvers import (
    SOLVERS,
    TraceRow,
    _argmax_low,
    dwfp_init,
    dwfp_step,
    log_schedule,
    run,
)

EPS_FLOOR = 1e-14
_INIT_SALT = 0xC0FFEE5EED

CSV_BASE_COLUMNS = ("solver", "game_seed", "iteration", "cumulative_weight",
                    "wall_time_ns", "exploitability")


@dataclass
class ExperimentConfig:
    """Full description of a benchmark sweep."""

    solvers: tuple[str, ...] = SOLVERS
    rows: int = 10
    cols: int = 10
    num_games: int = 30
    base_seed: int = 42
    max_iterations: int = 100_000
    max_weight: float = math.inf
    eval_points: int = 60
    output_path: str = "results.csv"
    oracle_delta: float = 1e-3

    def validate(self) -> None:
        unknown = [s for s in self.solvers if s not in SOLVERS]
        if not self.solvers or unknown:
            raise ValueError(f"solvers must be a nonempty subset of {SOLVERS}, "
                             f"got {self.solvers}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("matrix dimensions must be positive")
        if self.num_games < 1:
            raise ValueError("num_games must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.max_weight > 0.0:
            raise ValueError("max_weight must be positive")
        if self.eval_points < 2:
            raise ValueError("eval_points must be at least 2")
        if not 0.0 < self.oracle_delta <= 0.01:
            raise ValueError("oracle_delta must lie in (0, 0.01]")


@dataclass(frozen=True)
class SlopeFit:
    """Ordinary least squares fit on log-log data."""

    slope: float
    intercept: float
    r_squared: float
    fit_range: tuple[float, float]


def seeded_init_actions(seed: int, action_counts) -> list[int]:
    """The per-run random pure initial profile used by the harness."""
    prng = Prng((int(seed) ^ _INIT_SALT) & 0xFFFFFFFFFFFFFFFF)
    return [prng.next_index(n) for n in action_counts]


def _run_single(args) -> list[TraceRow]:
    solver, seed, rows, cols, max_iterations, max_weight, schedule = args
    game = random_zero_sum(rows, cols, seed)
    init = seeded_init_actions(seed, game.action_counts)
    return run(solver, game, max_iterations, max_weight, schedule,
               init_actions=init, game_seed=seed)


def _worker_count() -> int:
    raw = os.environ.get("EQ_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"EQ_THREADS must be an integer, got {raw!r}") from None
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def run_experiment(config: ExperimentConfig) -> list[TraceRow]:
    """Run every (solver, seed) pair and write the merged CSV.

    Runs are independent; results are sorted by (solver, game_seed, iteration)
    so the output does not depend on execution order. EQ_THREADS > 1 fans the
    runs out to worker processes.
    """
    config.validate()
    schedule = tuple(log_schedule(config.max_iterations, config.eval_points))
    jobs = [(solver, config.base_seed + k, config.rows, config.cols,
             config.max_iterations, config.max_weight, schedule)
            for solver in config.solvers for k in range(config.num_games)]
    workers = _worker_count()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_single, jobs))
    else:
        results = [_run_single(job) for job in jobs]
    rows = [row for trace in results for row in trace]
    rows.sort(key=lambda r: (r.solver, r.game_seed, r.iteration))
    write_trace_csv(rows, config.output_path)
    return rows


def write_trace_csv(rows, path) -> None:
    """CSV with 17-significant-digit floats, UTF-8, LF line endings."""
    eps_width = max((len(r.eps_per_player) for r in rows), default=2)
    header = ",".join(CSV_BASE_COLUMNS + tuple(f"eps_p{i}" for i in range(eps_width)))
    lines = [header]
    for r in rows:
        cells = [r.solver, str(r.game_seed), str(r.iteration),
                 f"{r.cumulative_weight:.17g}", str(r.wall_time_ns),
                 f"{r.exploitability:.17g}"]
        cells += [f"{e:.17g}" for e in r.eps_per_player]
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace_csv(path) -> list[TraceRow]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines:
        raise ValueError(f"empty trace file {path}")
    header = lines[0].split(",")
    if tuple(header[:6]) != CSV_BASE_COLUMNS:
        raise ValueError(f"unexpected header in {path}: {lines[0]!r}")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        rows.append(TraceRow(solver=cells[0], game_seed=int(cells[1]),
                             iteration=int(cells[2]),
                             cumulative_weight=float(cells[3]),
                             wall_time_ns=int(cells[4]),
                             exploitability=float(cells[5]),
                             eps_per_player=[float(c) for c in cells[6:]]))
    return rows


def _ols_loglog(xs, ys, fit_range) -> SlopeFit:
    x = np.log(np.asarray(xs, dtype=np.float64))
    y = np.log(np.asarray(ys, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(y - y.mean(), y - y.mean()))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return SlopeFit(slope=float(slope), intercept=float(intercept),
                    r_squared=float(min(max(r2, 0.0), 1.0)), fit_range=fit_range)


def fit_loglog_slope(trace, lo_iter, hi_iter) -> SlopeFit:
    """OLS slope of log exploitability against log iteration.

    Points outside [lo_iter, hi_iter] are dropped, as are evaluations at or
    below the EPS_FLOOR noise floor. At least 5 usable points are required.
    """
    pts = [(r.iteration, r.exploitability) for r in trace
           if lo_iter <= r.iteration <= hi_iter and r.exploitability > EPS_FLOOR]
    if len(pts) < 5:
        raise ValueError(f"only {len(pts)} usable points in [{lo_iter}, {hi_iter}]; "
                         "need at least 5")
    return _ols_loglog([p[0] for p in pts], [p[1] for p in pts],
                       (float(lo_iter), float(hi_iter)))


def confidence_interval(samples) -> tuple[float, float, float]:
    """Student-t 95% interval on the sample mean, n-1 degrees of freedom."""
    arr = np.asarray(list(samples), dtype=np.float64)
    n = arr.shape[0]
    if n < 2:
        raise ValueError("confidence interval needs at least 2 samples")
    mean = float(arr.mean())
    half = float(stats.t.ppf(0.975, n - 1) * arr.std(ddof=1) / math.sqrt(n))
    return mean, mean - half, mean + half


def weight_correspondence(dwfp_trace, lo_iter: float = 1.0,
                          hi_iter: float = math.inf) -> SlopeFit:
    """Growth exponent of cumulative weight against iteration count.

    The cumulative weight of a DW-FP run counts equivalent plain-FP
    iterations, so this slope says how many FP iterations one DW-FP iteration
    is worth as the run progresses.
    """
    pts = [(r.iteration, r.cumulative_weight) for r in dwfp_trace
           if lo_iter <= r.iteration <= hi_iter and r.cumulative_weight > 0.0
           and r.iteration >= 1]
    if len(pts) < 5:
        raise ValueError(f"only {len(pts)} usable points; need at least 5")
    return _ols_loglog([p[0] for p in pts], [p[1] for p in pts],
                       (float(lo_iter), float(hi_iter)))


def mean_trace(rows, solver: str) -> list[tuple[int, float]]:
    """Mean exploitability per iteration across games, order-independent."""
    by_iter: dict[int, list[tuple[int, float]]] = {}
    for r in rows:
        if r.solver == solver:
            by_iter.setdefault(r.iteration, []).append((r.game_seed, r.exploitability))
    out = []
    for it in sorted(by_iter):
        vals = [eps for _, eps in sorted(by_iter[it])]
        out.append((it, float(np.mean(vals))))
    return out


# ---------------------------------------------------------------------------
# Small-step oracle for DW-FP


def _weight_targets(max_weight: float) -> list[float]:
    out = [1.0]
    while out[-1] < max_weight:
        out.append(min(out[-1] * 1.25, max_weight))
    return out


def small_step_fp_oracle(game: Game, delta: float, max_weight: float, *,
                         init_actions=None, weight_targets=None):
    """Fine-grained FP reference path, sampled at exact cumulative weights.

    Replaces FP's shrinking 1/t blend with a fixed blend fraction ``delta``,
    which walks the same averaged-value flow in uniform steps of
    log-cumulative-weight: each step multiplies the accumulated weight by
    1/(1-delta). The first step absorbs the initial profile outright (weight
    0 to 1). Sample points land exactly on the requested weights via partial
    blends, which are well defined because the profile is constant within a
    step. Returns (weight, per-player average strategy) pairs.
    """
    if not 0.0 < delta <= 0.01:
        raise ValueError("delta must lie in (0, 0.01]")
    if not max_weight >= 1.0:
        raise ValueError("max_weight must be at least 1")
    if weight_targets is None:
        targets = _weight_targets(max_weight)
    else:
        targets = sorted(float(t) for t in weight_targets)
        if targets and (targets[0] < 1.0 or targets[-1] > max_weight):
            raise ValueError("weight targets must lie in [1, max_weight]")
    n = game.num_players
    counts = game.action_counts
    qbar = [np.zeros(c) for c in counts]
    avg = [np.zeros(c) for c in counts]
    current = list(init_actions) if init_actions is not None else [0] * n
    weight = 0.0
    samples: list[tuple[float, list[np.ndarray]]] = []
    ti = 0
    while ti < len(targets) and weight < max_weight:
        next_weight = 1.0 if weight == 0.0 else weight / (1.0 - delta)
        while ti < len(targets) and targets[ti] <= next_weight:
            wt = targets[ti]
            frac = 0.0 if wt <= weight else (wt - weight) / wt
            snap = []
            for i in range(n):
                v = (1.0 - frac) * avg[i]
                v[current[i]] += frac
                snap.append(v)
            samples.append((wt, snap))
            ti += 1
        alpha = 1.0 if weight == 0.0 else delta
        keep = 1.0 - alpha
        urows = [_pure_action_values(game, i, current) for i in range(n)]
        for i in range(n):
            qbar[i] *= keep
            qbar[i] += alpha * urows[i]
            avg[i] *= keep
            avg[i][current[i]] += alpha
        for i in range(n):
            current[i] = _argmax_low(qbar[i])
        weight = next_weight
    return samples


def dwfp_average_at_weights(game: Game, weight_targets, *, init_actions=None,
                            max_iterations: int = 10_000_000):
    """DW-FP average strategies sampled at exact cumulative weights.

    Within one DW-FP iteration the profile is constant, so the state at any
    intermediate weight is the partial blend of the pre-step average toward
    the held profile. After convergence the profile persists forever and all
    remaining targets sample it directly.
    """
    targets = sorted(float(t) for t in weight_targets)
    if targets and targets[0] < 1.0:
        raise ValueError("weight targets must be at least 1")
    state = dwfp_init(game, init_actions)
    samples: list[tuple[float, list[np.ndarray]]] = []
    ti = 0
    for _ in range(max_iterations):
        if ti >= len(targets):
            break
        w_prev = state.W
        avg_prev = [v.copy() for v in state.avg]
        cur_prev = list(state.current)
        outcome = dwfp_step(state, game)
        if outcome.converged:
            break
        while ti < len(targets) and targets[ti] <= state.W:
            wt = targets[ti]
            frac = 0.0 if wt <= w_prev else (wt - w_prev) / wt
            snap = []
            for i in range(game.num_players):
                v = (1.0 - frac) * avg_prev[i]
                v[cur_prev[i]] += frac
                snap.append(v)
            samples.append((wt, snap))
            ti += 1
    while ti < len(targets):
        snap = []
        for i in range(game.num_players):
            v = np.zeros(game.action_counts[i])
            v[state.current[i]] = 1.0
            snap.append(v)
        samples.append((targets[ti], snap))
        ti += 1
    return samples


def small_step_gap(game: Game, weight_targets, delta: float = 1e-3, *,
                   init_actions=None) -> float:
    """Worst infinity-norm gap between DW-FP and the small-step reference."""
    targets = sorted(float(t) for t in weight_targets)
    oracle = small_step_fp_oracle(game, delta, targets[-1], init_actions=init_actions,
                                  weight_targets=targets)
    jumps = dwfp_average_at_weights(game, targets, init_actions=init_actions)
    worst = 0.0
    for (w1, a), (w2, b) in zip(oracle, jumps):
        if w1 != w2:
            raise AssertionError("sample weights out of sync")
        for va, vb in zip(a, b):
            worst = max(worst, float(np.abs(va - vb).max()))
    return worst


# ---------------------------------------------------------------------------
# Config files


def load_config_file(path) -> dict[str, str]:
    """Flat key=value text mirroring the CLI flags; '#' starts a comment."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            values[key.strip()] = value.strip()
    return values
