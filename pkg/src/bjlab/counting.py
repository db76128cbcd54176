"""Card-counting systems, running/true counts and count-driven bet sizing."""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from types import MappingProxyType
from typing import NamedTuple

from .rules import DEFAULT_RULES, RulesConfig
from .shoe import RANKS, Card


def _expand(table: dict[str, int]) -> Mapping[str, int]:
    """{"2 3": 1, ...} -> per-rank mapping; every rank must be covered."""
    out = {}
    for ranks, w in table.items():
        for r in ranks.split():
            out[r] = w
    missing = set(RANKS) - set(out)
    if missing:
        raise ValueError(f"weights missing for ranks {sorted(missing)}")
    return MappingProxyType(out)


@dataclass(frozen=True)
class CountingSystem:
    name: str
    weights: Mapping[str, int]

    def weight(self, card: Card) -> int:
        return self.weights[card.rank]

    def deck_sum(self) -> int:
        return 4 * sum(self.weights.values())

    @property
    def balanced(self) -> bool:
        return self.deck_sum() == 0


# Ten-valued ranks share one index in every system (J, Q, K count like 10).
SYSTEMS: dict[str, CountingSystem] = {
    "ten_count": CountingSystem("ten_count", _expand({
        "A 2 3 4 5 6 7 8 9": 4,
        "10 J Q K": -9,
    })),
    "hi_lo": CountingSystem("hi_lo", _expand({
        "2 3 4 5 6": 1,
        "7 8 9": 0,
        "10 J Q K A": -1,
    })),
    # As tabulated: this Zen variant is unbalanced, -4 per deck.
    "zen": CountingSystem("zen", _expand({
        "2 3": 1,
        "4 5 6": 2,
        "7": 1,
        "8 9": 0,
        "10 J Q K A": -2,
    })),
    "uston_apc": CountingSystem("uston_apc", _expand({
        "2 8": 1,
        "3 4 6 7": 2,
        "5": 3,
        "9": -1,
        "10 J Q K": -3,
        "A": 0,
    })),
    "none": CountingSystem("none", _expand({" ".join(RANKS): 0})),
}


def get_system(name: str | CountingSystem) -> CountingSystem:
    if isinstance(name, CountingSystem):
        return name
    try:
        return SYSTEMS[name]
    except KeyError:
        raise ValueError(f"unknown counting system {name!r}; choose from {sorted(SYSTEMS)}") from None


def card_weight(system: CountingSystem | str, card: Card) -> int:
    return get_system(system).weights[card.rank]


class CountState(NamedTuple):
    running_count: int = 0
    cards_seen: int = 0
    system: CountingSystem = SYSTEMS["hi_lo"]


def new_count(system: CountingSystem | str = "hi_lo") -> CountState:
    return CountState(0, 0, get_system(system))


def observe(count: CountState, card: Card) -> CountState:
    return CountState(count.running_count + count.system.weights[card.rank],
                      count.cards_seen + 1, count.system)


def observe_all(count: CountState, seen: Iterable[Card]) -> CountState:
    for c in seen:
        count = observe(count, c)
    return count


def true_count(count: CountState | int, shoe) -> float:
    """Running count per remaining deck. ``count`` may be a bare running count."""
    rc = count if isinstance(count, int) else count.running_count
    return rc / shoe.decks_remaining()


def linear_ramp(unit, tc: float):
    """One unit at a true count below 2, otherwise ``floor(tc)`` units."""
    return unit * max(1, math.floor(tc))


BetRamp = Callable[[object, float], object]


def bet_size(bankroll, unit, tc: float, rules: RulesConfig = DEFAULT_RULES,
             ramp: BetRamp = linear_ramp):
    """Count-driven bet clamped to the table limits.

    ``bankroll`` is accepted for interface symmetry with other betting
    policies; the linear ramp ignores it (ledgers may go negative).
    """
    if not unit > 0:
        raise ValueError("betting unit must be positive")
    bet = ramp(unit, tc)
    return min(max(bet, rules.table_min_bet), rules.table_max_bet)
