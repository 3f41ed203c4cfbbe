"""Self-contained oracle and invariant checks behind the `verify` subcommand."""

from __future__ import annotations

import numpy as np

from . import metrics
from .games import pure_profile, uniform_profile
from .generator import Prng, box_muller, named_game, random_zero_sum
from .harness import small_step_gap
from .solvers import (
    SOLVERS,
    average_strategy,
    dwfp_gap,
    dwfp_init,
    dwfp_step,
    fp_init,
    fp_step,
    greedy_weight,
    init_state,
    run,
    step_state,
)

# First outputs of the SplitMix64 stream for seed 0, from the published
# reference implementation.
SPLITMIX64_SEED0 = (0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F)


def _check_prng():
    prng = Prng(0)
    words = tuple(prng.next_u64() for _ in range(3))
    if words != SPLITMIX64_SEED0:
        return f"SplitMix64 words for seed 0 are {words}"
    if abs(box_muller(0.5, 0.25)) > 1e-15:
        return "box_muller(0.5, 0.25) should vanish"
    if abs(box_muller(0.5, 0.0) - 1.1774100225154747) > 1e-12:
        return "box_muller(0.5, 0.0) is off"
    return None


def _check_fixtures():
    for name, size in (("matching_pennies", 2), ("rps", 3)):
        game = named_game(name)
        eps = metrics.exploitability(game, uniform_profile(game.action_counts)).mean
        if abs(eps) > 1e-12:
            return f"uniform profile on {name} has exploitability {eps:g}"
    saddle = named_game("saddle_2x2")
    eps = metrics.exploitability(saddle, pure_profile(saddle.action_counts, (0, 1))).mean
    if abs(eps) > 1e-12:
        return f"saddle profile has exploitability {eps:g}"
    return None


def _check_fp_trace():
    game = named_game("matching_pennies")
    state = fp_init(game, (0, 0))
    fp_step(state, game)
    if not (np.allclose(state.qbar[0], [1, -1]) and np.allclose(state.qbar[1], [-1, 1])):
        return f"after step 1: qbar {state.qbar}"
    if state.current != [0, 1]:
        return f"after step 1: current {state.current}"
    fp_step(state, game)
    if not (np.allclose(state.qbar[0], [0, 0]) and state.current == [0, 1]):
        return f"after step 2: qbar {state.qbar[0]} current {state.current}"
    return None


def _check_dwfp_trace():
    game = named_game("matching_pennies")
    state = dwfp_init(game, (0, 0))
    out = dwfp_step(state, game)
    if out.weight_used != 1.0 or state.current != [0, 1] or state.W != 1.0:
        return f"bootstrap step: w={out.weight_used} current={state.current} W={state.W}"
    out = dwfp_step(state, game)
    if out.weight_used != 1.0 or state.current != [1, 1] or state.W != 2.0:
        return f"catch-up step: w={out.weight_used} current={state.current} W={state.W}"
    return None


def _check_greedy_weight():
    w = greedy_weight(np.array([2.0, -1.0]), np.array([-2.0, 1.0]), 1.0)
    if abs(w - 1.0) > 1e-12:
        return f"scan case returned {w}"
    if greedy_weight(np.zeros(2), np.array([5.0, -1.0]), 0.0) != 1.0:
        return "zero-history case should return 1"
    w = greedy_weight(np.array([-1.0, -1.0]), np.array([-2.0, -3.0]), 5.0)
    if w != 0.0:
        return f"flat-potential case returned {w}"
    return None


def _check_unit_weight_equivalence(steps: int):
    game = random_zero_sum(5, 5, 7)
    a = fp_init(game, (0, 0))
    b = dwfp_init(game, (0, 0))
    for _ in range(steps):
        fp_step(a, game)
        dwfp_step(b, game, force_weight=1.0)
        for qa, qb in zip(a.qbar, b.qbar):
            if np.abs(qa - qb).max() > 1e-12:
                return "qbar trajectories diverged"
        for va, vb in zip(a.avg, b.avg):
            if np.abs(va - vb).max() > 1e-12:
                return "average strategies diverged"
    return None


def _check_small_step(max_weight: float):
    targets = [1.0, 2.0, 5.0, 10.0, max_weight]
    gap = small_step_gap(random_zero_sum(5, 5, 11), targets, 1e-3,
                         init_actions=(0, 0))
    if gap > 1e-2:
        return f"oracle gap {gap:g} exceeds 1e-2"
    return None


def _check_invariants(cases: int):
    for case in range(cases):
        prng = Prng(1000 + case)
        rows = 2 + prng.next_index(4)
        cols = 2 + prng.next_index(4)
        game = random_zero_sum(rows, cols, 2000 + case)
        solver = SOLVERS[case % len(SOLVERS)]
        init = [prng.next_index(n) for n in game.action_counts]
        state = init_state(solver, game, init)
        for _ in range(5):
            step_state(solver, state, game)
        for v in state.avg:
            if v.min() < 0.0 or abs(v.sum() - 1.0) > 1e-9:
                return f"average left the simplex for {solver} on case {case}"
        if solver == "rm_plus" and any(r.min() < 0.0 for r in state.rbar):
            return f"clipped regrets went negative on case {case}"
        if solver == "dwfp":
            for q in state.qbar:
                gaps = dwfp_gap(q, state.W)
                if gaps.min() < 0.0 or gaps[int(np.argmax(q))] > 1e-12:
                    return f"gap invariant failed on case {case}"
        eps = metrics.exploitability(game, average_strategy(state)).mean
        if eps < -1e-9:
            return f"negative exploitability {eps:g} on case {case}"
    return None


def _check_determinism():
    game = random_zero_sum(4, 4, 3)
    a = run("rm", game, 200, game_seed=3)
    b = run("rm", game, 200, game_seed=3)
    for ra, rb in zip(a, b):
        if (ra.iteration, ra.cumulative_weight, ra.exploitability) != \
                (rb.iteration, rb.cumulative_weight, rb.exploitability):
            return "identical runs disagreed"
    return None


def run_verification(quick: bool = False) -> list[tuple[str, str | None]]:
    """Run every check; returns (name, failure detail or None) pairs."""
    steps = 200 if quick else 1000
    cases = 50 if quick else 400
    max_weight = 20.0 if quick else 100.0
    checks = [
        ("splitmix64 reference vector", _check_prng),
        ("fixture equilibria", _check_fixtures),
        ("fp hand trace", _check_fp_trace),
        ("dwfp hand trace", _check_dwfp_trace),
        ("greedy weight cases", _check_greedy_weight),
        ("dwfp/fp unit-weight equivalence", lambda: _check_unit_weight_equivalence(steps)),
        ("dwfp small-step oracle", lambda: _check_small_step(max_weight)),
        ("randomized invariants", lambda: _check_invariants(cases)),
        ("run determinism", _check_determinism),
    ]
    return [(name, fn()) for name, fn in checks]
