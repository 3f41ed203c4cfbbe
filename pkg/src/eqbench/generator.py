"""Deterministic game construction: a portable PRNG, Gaussian zero-sum games,
and named fixture games."""

from __future__ import annotations

import math

import numpy as np

from .games import Game, make_game, pure_profile
from . import metrics

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

NAMED_GAMES = ("matching_pennies", "rps", "saddle_2x2")

# Pure saddle point of the saddle_2x2 fixture: (row 0, column 1).
SADDLE_2X2_EQUILIBRIUM = (0, 1)


class Prng:
    """SplitMix64 stream. Bit-exact for a given seed on every platform."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_uniform(self) -> float:
        """Uniform draw in [0, 1) from the top 53 bits of the next word."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def gaussian(self) -> float:
        """Standard normal draw; consumes exactly two uniforms."""
        u1 = self.next_uniform()
        u2 = self.next_uniform()
        return box_muller(u1, u2)

    def next_index(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n < 1:
            raise ValueError("n must be positive")
        return min(int(self.next_uniform() * n), n - 1)


def box_muller(u1: float, u2: float) -> float:
    """Cosine branch of the Box-Muller transform.

    Uses ln(1 - u1) so a zero uniform is safe; the sine partner is discarded
    to keep the stream layout trivial to reproduce in other languages.
    """
    return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)


def random_zero_sum(rows: int, cols: int, seed: int) -> Game:
    """A two-player zero-sum game with N(0,1) row payoffs.

    The row player's matrix is filled row-major from ``Prng(seed)``; the
    column player's payoffs are the exact negation.
    """
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    prng = Prng(seed)
    a = np.array([prng.gaussian() for _ in range(rows * cols)]).reshape(rows, cols)
    return make_game(2, (rows, cols), [a, -a], zero_sum=True)


def _matching_pennies() -> Game:
    a = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return make_game(2, (2, 2), [a, -a], zero_sum=True)


def _rps() -> Game:
    a = np.array([[0.0, -1.0, 1.0],
                  [1.0, 0.0, -1.0],
                  [-1.0, 1.0, 0.0]])
    return make_game(2, (3, 3), [a, -a], zero_sum=True)


def _saddle_2x2() -> Game:
    a = np.array([[2.0, 1.0], [0.0, -1.0]])
    return make_game(2, (2, 2), [a, -a], zero_sum=True)


_BUILDERS = {
    "matching_pennies": _matching_pennies,
    "rps": _rps,
    "saddle_2x2": _saddle_2x2,
}


def named_game(name: str) -> Game:
    """One of the fixture games in ``NAMED_GAMES``.

    The saddle fixture is checked on every build: its documented pure profile
    must have zero exploitability.
    """
    try:
        game = _BUILDERS[name]()
    except KeyError:
        raise ValueError(f"unknown game {name!r}; expected one of {NAMED_GAMES}") from None
    if name == "saddle_2x2":
        profile = pure_profile(game.action_counts, SADDLE_2X2_EQUILIBRIUM)
        report = metrics.exploitability(game, profile)
        if abs(report.mean) > 1e-12:
            raise AssertionError("saddle_2x2 fixture is not in equilibrium at its "
                                 f"documented profile (mean eps {report.mean:g})")
    return game
