"""The five iterative dynamics behind one stepper interface.

Every solver keeps a weighted time-average strategy; the averages, not the
iterates, are what converge toward equilibrium. All steppers mutate their
state in place and return a :class:`StepOutcome`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .games import (
    Game,
    StrategyProfile,
    _action_values_vec,
    _profile_vectors,
    _pure_action_values,
    profile_from_vectors,
)
from . import metrics

SOLVERS = ("fp", "rm", "rm_plus", "greedy_rm", "dwfp")

# Absolute tolerance for argmax ties; strict equality would make switch
# detection depend on platform rounding.
ARGMAX_TOL = 1e-12

# Upper bound on any single iteration weight, keeping blend factors < 1.
WEIGHT_CAP = 1e12


@dataclass
class StepOutcome:
    """Weight consumed by one step, plus the DW-FP convergence flag."""

    weight_used: float
    converged: bool = False


@dataclass
class FPState:
    """Fictitious play: averaged action values, one pure action per player."""

    qbar: list[np.ndarray]
    current: list[int]
    avg: list[np.ndarray]
    t: int = 1


@dataclass
class RMState:
    """Regret matching family: averaged (or clipped cumulative) regrets."""

    rbar: list[np.ndarray]
    current: list[np.ndarray]
    avg: list[np.ndarray]
    cumulative_weight: np.ndarray
    t: int = 1
    plus_variant: bool = False


@dataclass
class DWFPState:
    """Dynamic weighted FP: like FP plus a shared cumulative weight."""

    qbar: list[np.ndarray]
    current: list[int]
    avg: list[np.ndarray]
    W: float = 0.0
    t: int = 1
    converged: bool = False


@dataclass
class TraceRow:
    """One evaluation record emitted by :func:`run`."""

    solver: str
    game_seed: int
    iteration: int
    cumulative_weight: float
    wall_time_ns: int
    exploitability: float
    eps_per_player: list[float] = field(default_factory=list)


def _initial_actions(game: Game, init_actions) -> list[int]:
    if init_actions is None:
        return [0] * game.num_players
    acts = [int(a) for a in init_actions]
    if len(acts) != game.num_players:
        raise ValueError("init_actions must give one action per player")
    for a, n in zip(acts, game.action_counts):
        if not 0 <= a < n:
            raise ValueError(f"initial action {a} out of range for {n} actions")
    return acts


def _zeros(game: Game) -> list[np.ndarray]:
    return [np.zeros(n) for n in game.action_counts]


def _one_hots(game: Game, actions) -> list[np.ndarray]:
    out = _zeros(game)
    for v, a in zip(out, actions):
        v[a] = 1.0
    return out


def fp_init(game: Game, init_actions=None) -> FPState:
    return FPState(qbar=_zeros(game), current=_initial_actions(game, init_actions),
                   avg=_zeros(game))


def rm_init(game: Game, init_actions=None, plus_variant: bool = False) -> RMState:
    acts = _initial_actions(game, init_actions)
    return RMState(rbar=_zeros(game), current=_one_hots(game, acts),
                   avg=_zeros(game), cumulative_weight=np.zeros(game.num_players),
                   plus_variant=plus_variant)


def dwfp_init(game: Game, init_actions=None) -> DWFPState:
    return DWFPState(qbar=_zeros(game), current=_initial_actions(game, init_actions),
                     avg=_zeros(game))


def _argmax_low(values: np.ndarray) -> int:
    """Lowest index whose value is within ARGMAX_TOL of the maximum."""
    return int(np.argmax(values >= values.max() - ARGMAX_TOL))


def _argmax_tiebreak(values: np.ndarray, tiebreak: np.ndarray) -> int:
    """Near-argmax of ``values``; ties go to the larger ``tiebreak`` entry,
    then to the lower index."""
    cand = values >= values.max() - ARGMAX_TOL
    return int(np.argmax(np.where(cand, tiebreak, -np.inf)))


# ---------------------------------------------------------------------------
# Fictitious play


def fp_step(state: FPState, game: Game) -> StepOutcome:
    """One FP iteration: blend action values with weight 1/t, then best-respond.

    All players update simultaneously against the current pure profile; the
    average strategy absorbs the profile that was just played.
    """
    alpha = 1.0 / state.t
    keep = 1.0 - alpha
    urows = [_pure_action_values(game, i, state.current) for i in range(game.num_players)]
    for i in range(game.num_players):
        q = state.qbar[i]
        q *= keep
        q += alpha * urows[i]
        a = state.avg[i]
        a *= keep
        a[state.current[i]] += alpha
    for i in range(game.num_players):
        state.current[i] = _argmax_low(state.qbar[i])
    state.t += 1
    return StepOutcome(weight_used=1.0)


# ---------------------------------------------------------------------------
# Regret matching family


def regret_vector(game: Game, player: int, profile: StrategyProfile) -> np.ndarray:
    """Per-action payoff minus the payoff of the profile itself."""
    vectors = _profile_vectors(game, profile)
    return _regret_vec(game, player, vectors)


def _regret_vec(game: Game, player: int, vectors) -> np.ndarray:
    av = _action_values_vec(game, player, vectors)
    return av - float(np.dot(vectors[player], av))


def potential(regrets) -> float:
    """Sum of positive parts, over one regret vector or a list of them."""
    if isinstance(regrets, (list, tuple)) and len(regrets) and np.ndim(regrets[0]) >= 1:
        return float(sum(np.maximum(np.asarray(r, dtype=float), 0.0).sum()
                         for r in regrets))
    return float(np.maximum(np.asarray(regrets, dtype=float), 0.0).sum())


def _phi(v: np.ndarray) -> float:
    return float(np.maximum(v, 0.0).sum())


def _scan_alpha(rbar: np.ndarray, diff: np.ndarray) -> float:
    """Exact minimizer of phi(rbar + a*diff) over a in [0, 1].

    The objective is convex piecewise linear, so the minimum sits on one of
    the component zero crossings or an endpoint; plateaus resolve to the
    smallest attaining alpha.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = -rbar / diff
    inside = cross[np.isfinite(cross) & (cross > 0.0) & (cross < 1.0)]
    cands = np.concatenate([[0.0, 1.0], inside])
    cands = np.unique(cands)
    phis = np.array([_phi(rbar + a * diff) for a in cands])
    best = phis.min()
    tol = 1e-12 * max(1.0, abs(best))
    return float(cands[np.argmax(phis <= best + tol)])


def _bisect_alpha(rbar: np.ndarray, diff: np.ndarray, iters: int = 256) -> float:
    """Bisection fallback on the right derivative of the same objective."""

    def right_deriv(a: float) -> float:
        v = rbar + a * diff
        d = float(diff[v > 0.0].sum())
        on_edge = v == 0.0
        if on_edge.any():
            d += float(np.maximum(diff[on_edge], 0.0).sum())
        return d

    lo, hi = 0.0, 1.0
    if right_deriv(hi) < 0.0:
        return 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if right_deriv(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def greedy_weight(rbar_prev, r_new, weight_prev: float, *, bisection: bool = False) -> float:
    """Iteration weight minimizing the potential of the blended regrets.

    Reparameterized by the blend fraction a = w / (weight_prev + w), the
    blend is affine per component, so the potential is convex piecewise
    linear in a and the exact optimum comes from a breakpoint scan. With no
    accumulated weight every blend is identical and the weight defaults to 1.
    A would-be infinite weight (a = 1) is capped at WEIGHT_CAP.
    """
    rbar = np.asarray(rbar_prev, dtype=np.float64)
    rnew = np.asarray(r_new, dtype=np.float64)
    if rbar.shape != rnew.shape:
        raise ValueError(f"regret vectors differ in length: {rbar.shape} vs {rnew.shape}")
    if weight_prev < 0.0:
        raise ValueError("cumulative weight cannot be negative")
    if weight_prev == 0.0:
        return 1.0
    diff = rnew - rbar
    alpha = _bisect_alpha(rbar, diff) if bisection else _scan_alpha(rbar, diff)
    if alpha >= 1.0:
        return WEIGHT_CAP
    w = weight_prev * alpha / (1.0 - alpha)
    return min(w, WEIGHT_CAP)


def _strategy_from_regrets(rbar: np.ndarray) -> np.ndarray:
    pos = np.maximum(rbar, 0.0)
    total = pos.sum()
    if total > 0.0:
        return pos / total
    return np.full(rbar.shape[0], 1.0 / rbar.shape[0])


def _regrets_all(game: Game, vectors) -> list[np.ndarray]:
    return [_regret_vec(game, i, vectors) for i in range(game.num_players)]


def _apply_rm_update(state: RMState, game: Game, regrets, weights) -> StepOutcome:
    for i in range(game.num_players):
        w = weights[i]
        w_prev = float(state.cumulative_weight[i])
        alpha = w / (w_prev + w) if w > 0.0 else 0.0
        if alpha > 0.0:
            keep = 1.0 - alpha
            rb = state.rbar[i]
            rb *= keep
            rb += alpha * regrets[i]
            av = state.avg[i]
            av *= keep
            av += alpha * state.current[i]
        state.cumulative_weight[i] = w_prev + w
        state.current[i] = _strategy_from_regrets(state.rbar[i])
    state.t += 1
    return StepOutcome(weight_used=float(np.mean(weights)))


def rm_step(state: RMState, game: Game) -> StepOutcome:
    """Original regret matching: unit weight every iteration."""
    if state.plus_variant:
        raise ValueError("rm_step requires plus_variant=False")
    regrets = _regrets_all(game, state.current)
    return _apply_rm_update(state, game, regrets, [1.0] * game.num_players)


def greedy_rm_step(state: RMState, game: Game) -> StepOutcome:
    """Regret matching with the potential-minimizing weight per player.

    If the subproblem returns zero weight for every player the step would
    change nothing and every later step would repeat it verbatim; that
    livelock is broken by falling back to unit weights for the iteration.
    """
    if state.plus_variant:
        raise ValueError("greedy_rm_step requires plus_variant=False")
    regrets = _regrets_all(game, state.current)
    weights = [greedy_weight(state.rbar[i], regrets[i], float(state.cumulative_weight[i]))
               for i in range(game.num_players)]
    if max(weights) == 0.0:
        weights = [1.0] * game.num_players
    return _apply_rm_update(state, game, regrets, weights)


def rm_plus_step(state: RMState, game: Game) -> StepOutcome:
    """RM+: clip cumulative regrets at zero, average iterates linearly in t."""
    if not state.plus_variant:
        raise ValueError("rm_plus_step requires plus_variant=True")
    regrets = _regrets_all(game, state.current)
    alpha = 2.0 / (state.t + 1.0)
    keep = 1.0 - alpha
    for i in range(game.num_players):
        rb = state.rbar[i]
        np.maximum(rb + regrets[i], 0.0, out=rb)
        av = state.avg[i]
        av *= keep
        av += alpha * state.current[i]
        total = rb.sum()
        if total > 0.0:
            state.current[i] = rb / total
        else:
            state.current[i] = np.full(rb.shape[0], 1.0 / rb.shape[0])
        state.cumulative_weight[i] += 1.0
    state.t += 1
    return StepOutcome(weight_used=1.0)


# ---------------------------------------------------------------------------
# Dynamic weighted fictitious play


def dwfp_gap(qbar, cumulative_weight: float) -> np.ndarray:
    """Unnormalized deficit of each action behind the best averaged value."""
    arr = np.asarray(qbar, dtype=np.float64)
    return cumulative_weight * (arr.max() - arr)


def dwfp_speed(game: Game, player: int, profile: StrategyProfile) -> np.ndarray:
    """Rate at which each action gains on the current profile's payoff."""
    return regret_vector(game, player, profile)


def dwfp_weight(gaps_all_players, speeds_all_players) -> tuple[float, bool]:
    """Smallest catch-up time over all players and actions.

    An action with positive speed overtakes after gap/speed weight; actions
    that are not gaining never overtake. When no action gains on any player
    the current pure profile is a Nash equilibrium and the dynamics have
    converged.
    """
    best = math.inf
    for gaps, speeds in zip(gaps_all_players, speeds_all_players):
        gaps = np.asarray(gaps, dtype=np.float64)
        speeds = np.asarray(speeds, dtype=np.float64)
        pos = speeds > 0.0
        if pos.any():
            best = min(best, float((gaps[pos] / speeds[pos]).min()))
    return best, math.isinf(best)


def dwfp_step(state: DWFPState, game: Game, force_weight: float | None = None) -> StepOutcome:
    """One DW-FP iteration: jump ahead by the exact catch-up weight.

    The first step has no accumulated weight, so it uses weight 1 and is
    identical to one FP step. Afterwards the step computes every action's
    catch-up time from its gap and speed and blends with the global minimum;
    the overtaking action then ties the incumbent exactly, so argmax ties are
    broken by the larger instantaneous payoff before the lower index. On
    convergence the average strategy collapses onto the current pure profile
    (the limit of blending with unbounded weight) and the state freezes.
    """
    if state.converged:
        return StepOutcome(weight_used=math.inf, converged=True)
    if force_weight is not None and force_weight <= 0.0:
        raise ValueError("force_weight must be positive")
    n = game.num_players
    urows = [_pure_action_values(game, i, state.current) for i in range(n)]
    if force_weight is not None:
        w = float(force_weight)
    elif state.W == 0.0:
        w = 1.0
    else:
        speeds = [urows[i] - urows[i][state.current[i]] for i in range(n)]
        gaps = [dwfp_gap(state.qbar[i], state.W) for i in range(n)]
        w, converged = dwfp_weight(gaps, speeds)
        if converged:
            state.converged = True
            for i in range(n):
                state.avg[i][:] = 0.0
                state.avg[i][state.current[i]] = 1.0
            return StepOutcome(weight_used=math.inf, converged=True)
        w = min(w, WEIGHT_CAP)
    alpha = w / (state.W + w)
    keep = 1.0 - alpha
    for i in range(n):
        q = state.qbar[i]
        q *= keep
        q += alpha * urows[i]
        a = state.avg[i]
        a *= keep
        a[state.current[i]] += alpha
    for i in range(n):
        state.current[i] = _argmax_tiebreak(state.qbar[i], urows[i])
    state.W += w
    state.t += 1
    return StepOutcome(weight_used=w)


# ---------------------------------------------------------------------------
# Uniform runner


def average_strategy(state) -> StrategyProfile:
    """The weighted time-average profile accumulated so far."""
    if state.t <= 1:
        raise ValueError("average strategy is undefined before the first step")
    return profile_from_vectors([v.copy() for v in state.avg])


def current_profile(state) -> StrategyProfile:
    """The profile the solver would play next."""
    vectors = []
    for i, cur in enumerate(state.current):
        if isinstance(cur, np.ndarray):
            vectors.append(cur.copy())
        else:
            v = np.zeros_like(state.avg[i])
            v[cur] = 1.0
            vectors.append(v)
    return profile_from_vectors(vectors)


def init_state(solver: str, game: Game, init_actions=None):
    if solver == "fp":
        return fp_init(game, init_actions)
    if solver == "rm":
        return rm_init(game, init_actions, plus_variant=False)
    if solver == "rm_plus":
        return rm_init(game, init_actions, plus_variant=True)
    if solver == "greedy_rm":
        return rm_init(game, init_actions, plus_variant=False)
    if solver == "dwfp":
        return dwfp_init(game, init_actions)
    raise ValueError(f"unknown solver kind {solver!r}; expected one of {SOLVERS}")


def step_state(solver: str, state, game: Game) -> StepOutcome:
    if solver == "fp":
        return fp_step(state, game)
    if solver == "rm":
        return rm_step(state, game)
    if solver == "rm_plus":
        return rm_plus_step(state, game)
    if solver == "greedy_rm":
        return greedy_rm_step(state, game)
    if solver == "dwfp":
        return dwfp_step(state, game)
    raise ValueError(f"unknown solver kind {solver!r}; expected one of {SOLVERS}")


def cumulative_weight_of(state) -> float:
    """Total iteration weight absorbed so far (mean over players where the
    weights are tracked per player)."""
    if isinstance(state, FPState):
        return float(state.t - 1)
    if isinstance(state, RMState):
        return float(state.cumulative_weight.mean())
    if isinstance(state, DWFPState):
        return state.W
    raise TypeError(f"unknown state type {type(state)!r}")


def log_schedule(max_iterations: int, points: int | None = None,
                 ratio: float = 1.25) -> list[int]:
    """Log-spaced iteration checkpoints including 1 and the final iteration."""
    if max_iterations < 1:
        raise ValueError("max_iterations must be at least 1")
    if points is not None:
        if points < 2:
            raise ValueError("at least 2 evaluation points required")
        grid = np.rint(np.geomspace(1.0, float(max_iterations), points)).astype(int)
    else:
        vals = [1]
        x = 1.0
        while vals[-1] < max_iterations:
            x *= ratio
            vals.append(min(max(vals[-1] + 1, int(round(x))), max_iterations))
        grid = np.array(vals)
    return sorted(set(int(v) for v in grid) | {1, max_iterations})


def run(solver: str, game: Game, max_iterations: int, max_weight: float = math.inf,
        eval_schedule=None, *, init_actions=None, game_seed: int = 0,
        stop_eps: float | None = None) -> list[TraceRow]:
    """Run one solver on one game, recording exploitability of the average.

    Stops when the iteration budget or cumulative-weight budget is exhausted,
    when DW-FP converges to a pure equilibrium, or (optionally) when a
    scheduled evaluation drops below ``stop_eps``. Rows are recorded at the
    log-spaced schedule plus the final iteration; wall time counts stepper
    time only, cumulative, from a monotonic clock.
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver kind {solver!r}; expected one of {SOLVERS}")
    if max_iterations < 1:
        raise ValueError("iteration budget must be positive")
    if not max_weight > 0.0:
        raise ValueError("weight budget must be positive")
    state = init_state(solver, game, init_actions)
    if eval_schedule is None:
        schedule = set(log_schedule(int(max_iterations)))
    else:
        schedule = {int(k) for k in eval_schedule} | {1, int(max_iterations)}
    rows: list[TraceRow] = []
    step_ns = 0
    for k in range(1, int(max_iterations) + 1):
        t0 = time.perf_counter_ns()
        outcome = step_state(solver, state, game)
        step_ns += time.perf_counter_ns() - t0
        done = (outcome.converged or k == max_iterations
                or cumulative_weight_of(state) >= max_weight)
        if k in schedule or done:
            report = metrics.exploitability(game, average_strategy(state))
            rows.append(TraceRow(solver=solver, game_seed=game_seed, iteration=k,
                                 cumulative_weight=cumulative_weight_of(state),
                                 wall_time_ns=step_ns,
                                 exploitability=report.mean,
                                 eps_per_player=[float(e) for e in report.per_player]))
            if stop_eps is not None and report.mean <= stop_eps:
                done = True
        if done:
            break
    return rows
