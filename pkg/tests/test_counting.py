import pytest
from hypothesis import given
from hypothesis import strategies as st

from bjlab.counting import (SYSTEMS, bet_size, card_weight, get_system, new_count, observe,
                            observe_all, true_count)
from bjlab.rules import RulesConfig
from bjlab.shoe import RANKS, Card, Shoe, cards, full_deck

LIMITS = RulesConfig(table_min_bet=100, table_max_bet=1000)


def test_card_weights():
    assert card_weight("hi_lo", Card.of(5)) == 1
    assert card_weight("hi_lo", Card.of("K")) == -1
    assert card_weight("uston_apc", Card.of(5)) == 3
    assert card_weight("ten_count", Card.of("Q")) == -9
    assert card_weight("zen", Card.of("J")) == -2
    assert all(card_weight("none", Card.of(r)) == 0 for r in RANKS)


def test_weight_tables_are_complete():
    for system in SYSTEMS.values():
        assert set(system.weights) == set(RANKS)


def test_observe():
    c = observe_all(new_count("hi_lo"), cards(2, "K"))
    assert c.running_count == 0 and c.cards_seen == 2
    assert observe_all(new_count("hi_lo"), full_deck()).running_count == 0
    assert observe_all(new_count("zen"), full_deck()).running_count == -4


@pytest.mark.parametrize("name", ["hi_lo", "ten_count", "uston_apc"])
def test_balanced_over_a_shoe(name):
    shoe = Shoe(4, seed=1)
    c = new_count(name)
    while shoe.remaining:
        c = observe(c, shoe.draw())
    assert c.running_count == 0
    assert get_system(name).balanced


def test_hi_lo_antisymmetry():
    w = get_system("hi_lo").weights
    deck = full_deck()
    assert sum(1 for c in deck if w[c.rank] == 1) == 20
    assert sum(1 for c in deck if w[c.rank] == -1) == 20


class FixedDecks:
    def __init__(self, d):
        self.d = d

    def decks_remaining(self):
        return self.d


def test_true_count():
    assert true_count(6, FixedDecks(3.0)) == 2.0
    assert true_count(0, FixedDecks(5.5)) == 0.0
    assert true_count(-4, FixedDecks(2.0)) == -2.0
    assert true_count(new_count()._replace(running_count=6), FixedDecks(3.0)) == 2.0


@given(st.integers(-500, 500), st.integers(26, 416))
def test_true_count_is_odd(rc, remaining):
    d = FixedDecks(max(remaining / 52, 0.5))
    assert true_count(-rc, d) == -true_count(rc, d)


def test_bet_size_examples():
    assert bet_size(10_000, 100, 3.7, LIMITS) == 300
    assert bet_size(10_000, 100, -2, LIMITS) == 100
    assert bet_size(10_000, 100, 50, LIMITS) == 1000
    assert bet_size(-5_000, 100, 0.0, LIMITS) == 100
    with pytest.raises(ValueError):
        bet_size(100, 0, 1.0, LIMITS)


@given(st.floats(-20, 20, allow_nan=False), st.floats(-20, 20, allow_nan=False))
def test_bet_size_monotone_and_bounded(a, b):
    lo, hi = sorted((a, b))
    blo, bhi = bet_size(0, 100, lo, LIMITS), bet_size(0, 100, hi, LIMITS)
    assert blo <= bhi
    assert 100 <= blo <= 1000 and 100 <= bhi <= 1000
