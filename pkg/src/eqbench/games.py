"""Finite normal-form games: payoff tensors, mixed strategies, expected values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROB_TOL = 1e-9
ZERO_SUM_TOL = 1e-12
DEFAULT_MAX_PLAYERS = 4


@dataclass(frozen=True)
class Game:
    """An immutable normal-form game.

    ``payoffs`` has shape ``(num_players, *action_counts)``; ``payoffs[i]`` is
    player i's payoff over every pure-action profile. The array is marked
    read-only so a Game can be shared freely across concurrent runs.
    """

    num_players: int
    action_counts: tuple[int, ...]
    payoffs: np.ndarray
    zero_sum: bool = False


@dataclass(frozen=True)
class MixedStrategy:
    """A probability distribution over one player's actions.

    Inputs whose mass deviates from 1 by more than ``PROB_TOL`` are rejected
    rather than silently renormalized; small deviations are normalized exactly.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.shape[0] < 1:
            raise ValueError("strategy must be a nonempty 1-D probability vector")
        if not np.all(np.isfinite(probs)):
            raise ValueError("strategy has non-finite entries")
        if probs.min() < 0.0:
            raise ValueError(f"strategy has negative entries: {probs}")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"strategy mass {total!r} deviates from 1 beyond {PROB_TOL}")
        probs = probs / total
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return int(self.probs.shape[0])


@dataclass(frozen=True)
class StrategyProfile:
    """One mixed strategy per player."""

    strategies: tuple[MixedStrategy, ...]

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(self.strategies))

    def __len__(self) -> int:
        return len(self.strategies)


def pure_strategy(num_actions: int, action: int) -> MixedStrategy:
    """The unit vector on ``action``."""
    if not 0 <= action < num_actions:
        raise ValueError(f"action {action} out of range for {num_actions} actions")
    v = np.zeros(num_actions)
    v[action] = 1.0
    return MixedStrategy(v)


def uniform_strategy(num_actions: int) -> MixedStrategy:
    return MixedStrategy(np.full(num_actions, 1.0 / num_actions))


def pure_profile(action_counts, actions) -> StrategyProfile:
    """Profile where every player plays a single action."""
    if len(actions) != len(action_counts):
        raise ValueError("one action per player required")
    return StrategyProfile(tuple(pure_strategy(n, a) for n, a in zip(action_counts, actions)))


def uniform_profile(action_counts) -> StrategyProfile:
    return StrategyProfile(tuple(uniform_strategy(n) for n in action_counts))


def profile_from_vectors(vectors) -> StrategyProfile:
    return StrategyProfile(tuple(MixedStrategy(v) for v in vectors))


def make_game(num_players, action_counts, payoffs, zero_sum=False,
              max_players=DEFAULT_MAX_PLAYERS) -> Game:
    """Validate and build a Game.

    ``payoffs`` is anything convertible to shape ``(num_players, *action_counts)``,
    e.g. a list with one payoff tensor per player. When ``zero_sum`` is set the
    payoffs must sum to zero at every pure profile within ``ZERO_SUM_TOL``.
    """
    num_players = int(num_players)
    if num_players < 2:
        raise ValueError("a game needs at least 2 players")
    if num_players > max_players:
        raise ValueError(f"num_players {num_players} exceeds the cap of {max_players}")
    counts = tuple(int(c) for c in action_counts)
    if len(counts) != num_players:
        raise ValueError("action_counts must list one count per player")
    if any(c < 1 for c in counts):
        raise ValueError("every player needs at least one action")
    arr = np.asarray(payoffs, dtype=np.float64)
    expected_shape = (num_players,) + counts
    if arr.shape != expected_shape:
        raise ValueError(f"payoff shape {arr.shape} does not match {expected_shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("payoffs contain non-finite entries")
    if zero_sum:
        worst = float(np.abs(arr.sum(axis=0)).max())
        if worst > ZERO_SUM_TOL:
            raise ValueError(f"zero_sum flag set but payoff sums deviate by {worst:g}")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return Game(num_players=num_players, action_counts=counts, payoffs=arr,
                zero_sum=bool(zero_sum))


def _check_player(game: Game, player: int) -> None:
    if not 0 <= player < game.num_players:
        raise ValueError(f"player {player} out of range for {game.num_players} players")


def _profile_vectors(game: Game, profile: StrategyProfile) -> list[np.ndarray]:
    strategies = profile.strategies
    if len(strategies) != game.num_players:
        raise ValueError(f"profile has {len(strategies)} strategies for "
                         f"{game.num_players} players")
    vecs = []
    for n, s in zip(game.action_counts, strategies):
        if s.probs.shape[0] != n:
            raise ValueError(f"strategy length {s.probs.shape[0]} does not match "
                             f"{n} actions")
        vecs.append(s.probs)
    return vecs


def _expected_payoff_vec(game: Game, vectors, player: int) -> float:
    """Expected payoff from raw probability vectors (no validation)."""
    if game.num_players == 2:
        return float(vectors[0] @ game.payoffs[player] @ vectors[1])
    res = game.payoffs[player]
    for v in vectors:
        res = np.tensordot(res, v, axes=([0], [0]))
    return float(res)


def _action_values_vec(game: Game, player: int, vectors) -> np.ndarray:
    """Per-action expected payoff for ``player``; their own entry is ignored."""
    if game.num_players == 2:
        if player == 0:
            return game.payoffs[0] @ vectors[1]
        return vectors[0] @ game.payoffs[1]
    res = np.moveaxis(game.payoffs[player], player, 0)
    for p in range(game.num_players):
        if p != player:
            res = np.tensordot(res, vectors[p], axes=([1], [0]))
    return res


def _contract_expected(game: Game, vectors, player: int) -> float:
    """Full tensor contraction, kept independent of the two-player fast path."""
    res = game.payoffs[player]
    for v in vectors:
        res = np.tensordot(res, v, axes=([0], [0]))
    return float(res)


def _contract_action_values(game: Game, player: int, vectors) -> np.ndarray:
    res = np.moveaxis(game.payoffs[player], player, 0)
    for p in range(game.num_players):
        if p != player:
            res = np.tensordot(res, vectors[p], axes=([1], [0]))
    return np.asarray(res, dtype=np.float64)


def expected_payoff(game: Game, profile: StrategyProfile, player: int) -> float:
    """Expected payoff of ``player`` under a mixed-strategy profile."""
    _check_player(game, player)
    vectors = _profile_vectors(game, profile)
    return _expected_payoff_vec(game, vectors, player)


def action_values(game: Game, player: int, profile: StrategyProfile) -> np.ndarray:
    """Expected payoff of each of ``player``'s actions against the others.

    Entry ``a`` equals ``expected_payoff`` with the player's own strategy
    replaced by the pure action ``a``.
    """
    _check_player(game, player)
    vectors = _profile_vectors(game, profile)
    return np.array(_action_values_vec(game, player, vectors), dtype=np.float64)


def _pure_action_values(game: Game, player: int, actions) -> np.ndarray:
    """Action values when every opponent plays a pure action (tensor slice)."""
    idx = list(actions)
    idx[player] = slice(None)
    return game.payoffs[player][tuple(idx)]


def _pure_payoff(game: Game, actions, player: int) -> float:
    return float(game.payoffs[player][tuple(actions)])


def format_game(game: Game) -> str:
    """Render a game in the plain-text exchange format.

    Header line: num_players, the per-player action counts, and a 0/1
    zero-sum flag. Then one blank-line-separated block per player holding the
    payoff tensor row-major, printed with 17 significant digits.
    """
    head = " ".join([str(game.num_players)]
                    + [str(c) for c in game.action_counts]
                    + [str(int(game.zero_sum))])
    blocks = []
    for p in range(game.num_players):
        mat = game.payoffs[p].reshape(game.action_counts[0], -1)
        blocks.append("\n".join(" ".join(f"{v:.17g}" for v in row) for row in mat))
    return head + "\n" + "\n\n".join(blocks) + "\n"


def parse_game(text: str) -> Game:
    """Inverse of :func:`format_game`."""
    stripped = text.strip()
    if not stripped:
        raise ValueError("empty game text")
    header, _, body = stripped.partition("\n")
    fields = header.split()
    if len(fields) < 4:
        raise ValueError(f"malformed header: {header!r}")
    num_players = int(fields[0])
    counts = tuple(int(c) for c in fields[1:-1])
    if len(counts) != num_players:
        raise ValueError(f"header lists {len(counts)} action counts for "
                         f"{num_players} players")
    zero_sum = bool(int(fields[-1]))
    blocks = [b for b in body.split("\n\n") if b.strip()]
    if len(blocks) != num_players:
        raise ValueError(f"expected {num_players} payoff blocks, found {len(blocks)}")
    size = int(np.prod(counts))
    tensors = []
    for block in blocks:
        values = [float(v) for v in block.split()]
        if len(values) != size:
            raise ValueError(f"payoff block has {len(values)} entries, expected {size}")
        tensors.append(np.array(values).reshape(counts))
    return make_game(num_players, counts, tensors, zero_sum=zero_sum,
                     max_players=max(num_players, DEFAULT_MAX_PLAYERS))


def save_game(game: Game, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_game(game))


def load_game(path) -> Game:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_game(fh.read())
