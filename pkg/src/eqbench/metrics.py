"""Best responses and exploitability, the convergence measure for every solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import Game, StrategyProfile, action_values, expected_payoff


@dataclass(frozen=True)
class ExploitabilityReport:
    """Per-player exploitability (payoff units) and its arithmetic mean.

    A mean of zero certifies an exact Nash equilibrium.
    """

    per_player: np.ndarray
    mean: float


def best_response(game: Game, player: int, profile: StrategyProfile) -> tuple[int, float]:
    """Best pure action against the opponents' part of ``profile``.

    Returns ``(action, value)``; ties are broken toward the lowest action
    index so results are deterministic across platforms.
    """
    values = action_values(game, player, profile)
    idx = int(np.argmax(values))
    return idx, float(values[idx])


def player_exploitability(game: Game, player: int, profile: StrategyProfile) -> float:
    """Best-response value minus the player's current expected payoff."""
    _, br_value = best_response(game, player, profile)
    return br_value - expected_payoff(game, profile, player)


def exploitability(game: Game, profile: StrategyProfile) -> ExploitabilityReport:
    """Exploitability of every player plus the mean over players."""
    eps = np.array([player_exploitability(game, i, profile)
                    for i in range(game.num_players)])
    return ExploitabilityReport(per_player=eps, mean=float(eps.mean()))
