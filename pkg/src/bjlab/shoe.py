"""Cards and the multi-deck shoe they are dealt from."""

from __future__ import annotations

import random
from collections.abc import Iterable

from .exceptions import InvalidConfiguration, ShoeExhausted

RANKS = ("A", "2", "3", "4", "5", "6", "7", "8", "9", "10", "J", "Q", "K")
TEN_RANKS = frozenset({"10", "J", "Q", "K"})
CARDS_PER_DECK = 52
DECKS_REMAINING_FLOOR = 0.5


class Card:
    """A playing card; suits never matter in blackjack so only the rank is kept.

    ``value`` is the hard blackjack value (ace = 1). Use :meth:`of` to get the
    shared instance for a rank instead of building new objects.
    """

    __slots__ = ("rank", "value", "is_ace")
    _interned: dict[str, Card] = {}

    def __init__(self, rank: str):
        if rank not in RANKS:
            raise ValueError(f"unknown rank {rank!r}; expected one of {RANKS}")
        self.rank = rank
        self.is_ace = rank == "A"
        if self.is_ace:
            self.value = 1
        elif rank in TEN_RANKS:
            self.value = 10
        else:
            self.value = int(rank)

    @classmethod
    def of(cls, rank: str | int) -> Card:
        rank = str(rank)
        try:
            return cls._interned[rank]
        except KeyError:
            raise ValueError(f"unknown rank {rank!r}; expected one of {RANKS}") from None

    @property
    def chart_value(self) -> int:
        """Value used to index strategy charts: aces are 11."""
        return 11 if self.is_ace else self.value

    def __eq__(self, other):
        return isinstance(other, Card) and other.rank == self.rank

    def __hash__(self):
        return hash(self.rank)

    def __repr__(self):
        return f"Card({self.rank!r})"

    def __str__(self):
        return self.rank


Card._interned = {r: Card(r) for r in RANKS}


def cards(*ranks: str | int) -> list[Card]:
    """Shorthand: ``cards("A", 6)`` -> ``[Card('A'), Card('6')]``."""
    return [Card.of(r) for r in ranks]


def full_deck() -> list[Card]:
    return [Card.of(r) for r in RANKS for _ in range(4)]


class Shoe:
    """A finite, shuffled multi-deck card source.

    Cards are stored in reverse deal order so that :meth:`draw` is a list pop.
    There is no cut card; callers decide when to reshuffle.
    """

    def __init__(self, num_decks: int = 6, seed: int | None = None):
        if not isinstance(num_decks, int) or num_decks < 1:
            raise InvalidConfiguration(f"num_decks must be a positive integer, got {num_decks!r}")
        self.num_decks = num_decks
        self.rng_seed = seed
        self._rng = random.Random(seed)
        self._cards: list[Card] = []
        self.dealt_count = 0
        self.shuffle()

    @property
    def size(self) -> int:
        return CARDS_PER_DECK * self.num_decks

    def shuffle(self) -> None:
        """Gather every card and reshuffle (Fisher-Yates via ``random.shuffle``)."""
        self._cards = full_deck() * self.num_decks
        self._rng.shuffle(self._cards)
        self.dealt_count = 0

    def draw(self) -> Card:
        try:
            card = self._cards.pop()
        except IndexError:
            raise ShoeExhausted("no cards left in the shoe") from None
        self.dealt_count += 1
        return card

    @property
    def remaining(self) -> int:
        return len(self._cards)

    def decks_remaining(self) -> float:
        return max(len(self._cards) / CARDS_PER_DECK, DECKS_REMAINING_FLOOR)

    def peek_order(self) -> list[Card]:
        """Undealt cards in the order they will be dealt."""
        return self._cards[::-1]

    def __len__(self):
        return len(self._cards)

    def __repr__(self):
        return f"Shoe(num_decks={self.num_decks}, remaining={self.remaining}, dealt={self.dealt_count})"


class InfiniteShoe:
    """Draws with replacement from a single deck, i.e. an infinite deck.

    It never runs out and carries no count information, so
    :meth:`decks_remaining` is infinite.
    """

    num_decks = None

    def __init__(self, seed: int | None = None):
        self.rng_seed = seed
        self._rng = random.Random(seed)
        self._deck = full_deck()
        self.dealt_count = 0

    def draw(self) -> Card:
        self.dealt_count += 1
        return self._deck[int(self._rng.random() * CARDS_PER_DECK)]

    def shuffle(self) -> None:
        pass

    @property
    def remaining(self) -> float:
        return float("inf")

    def decks_remaining(self) -> float:
        return float("inf")


def new_shoe(num_decks: int, seed: int | None = None) -> Shoe:
    return Shoe(num_decks, seed)


def draw(shoe: Shoe) -> Card:
    return shoe.draw()


def decks_remaining(shoe: Shoe) -> float:
    return shoe.decks_remaining()


def rank_counts(seq: Iterable[Card]) -> dict[str, int]:
    counts = dict.fromkeys(RANKS, 0)
    for c in seq:
        counts[c.rank] += 1
    return counts
