"""Hand valuation, legal actions, the dealer automaton and settlement.

Rules follow a common shoe game: no insurance, one split (no re-split),
double after split allowed by default, late surrender on the first decision of
an unsplit hand, dealer S17 or H17. The dealer's natural is resolved right
after the deal (before anyone acts), so a doubled or split stake is never lost
to a dealer blackjack.
"""

from __future__ import annotations

import enum
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Union

from .exceptions import IllegalAction, InvalidBet, InvalidConfiguration, InvalidHand
from .shoe import Card


class Action(enum.IntEnum):
    # Order matters: it is the tie-break order for greedy action selection.
    STAND = 0
    HIT = 1
    DOUBLE = 2
    SPLIT = 3
    SURRENDER = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> Action:
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown action {text!r}") from None


ALL_ACTIONS = frozenset(Action)

WIN, LOSS, DRAW = "win", "loss", "draw"


class HandValue(NamedTuple):
    total: int
    is_soft: bool
    is_pair: bool
    is_natural: bool
    is_bust: bool
    n_cards: int = 2


@dataclass(frozen=True)
class RulesConfig:
    num_decks: int = 6
    dealer_hits_soft17: bool = False
    allowed_actions: frozenset = ALL_ACTIONS
    natural_payout: Fraction = Fraction(3, 2)
    max_splits: int = 1
    double_after_split: bool = True
    table_min_bet: int = 1
    table_max_bet: int = 1000

    def __post_init__(self):
        if not isinstance(self.num_decks, int) or self.num_decks < 1:
            raise InvalidConfiguration(f"num_decks must be >= 1, got {self.num_decks!r}")
        if self.max_splits != 1:
            raise InvalidConfiguration("only a single split per hand is supported (max_splits=1)")
        object.__setattr__(self, "natural_payout", Fraction(self.natural_payout))
        if self.natural_payout <= 1:
            raise InvalidConfiguration("natural_payout must exceed 1")
        actions = frozenset(Action(a) if not isinstance(a, str) else Action.parse(a)
                            for a in self.allowed_actions)
        object.__setattr__(self, "allowed_actions", actions)
        if not 0 < self.table_min_bet <= self.table_max_bet:
            raise InvalidConfiguration("need 0 < table_min_bet <= table_max_bet")


DEFAULT_RULES = RulesConfig()


class RoundOutcome(NamedTuple):
    result: str
    net_payoff: Union[int, float]
    player_final: HandValue
    dealer_final: HandValue
    bet: Union[int, float] = 0
    doubled: bool = False
    surrendered: bool = False


def hand_value(cards: Sequence[Card], split_hand: bool = False) -> HandValue:
    """Value a hand, counting at most one ace as 11 when that does not bust.

    A two-card 21 made after a split is not a natural.
    """
    n = len(cards)
    if n == 0:
        raise InvalidHand("cannot value an empty hand")
    total = 0
    has_ace = False
    for c in cards:
        total += c.value
        if c.is_ace:
            has_ace = True
    soft = has_ace and total <= 11
    if soft:
        total += 10
    is_pair = n == 2 and cards[0].rank == cards[1].rank
    natural = soft and n == 2 and total == 21 and not split_hand
    return HandValue(total, soft, is_pair, natural, total > 21, n)


def legal_actions(hand: Sequence[Card], rules: RulesConfig = DEFAULT_RULES,
                  already_split: bool = False, first_decision: bool = True) -> frozenset:
    hv = hand_value(hand)
    if hv.is_bust:
        raise InvalidHand("no actions are available on a bust hand")
    legal = {Action.HIT, Action.STAND}
    if first_decision and len(hand) == 2:
        if not already_split or rules.double_after_split:
            legal.add(Action.DOUBLE)
        if not already_split:
            legal.add(Action.SURRENDER)
            if hv.is_pair:
                legal.add(Action.SPLIT)
    return frozenset(legal & rules.allowed_actions)


def dealer_must_hit(hv: HandValue, rules: RulesConfig) -> bool:
    return hv.total < 17 or (hv.total == 17 and hv.is_soft and rules.dealer_hits_soft17)


def dealer_play(shoe, dealer_cards: list, rules: RulesConfig = DEFAULT_RULES,
                on_card: Callable[[Card], None] | None = None) -> HandValue:
    """Draw for the dealer until the rules say stop. Drawn cards are appended to
    ``dealer_cards`` and reported to ``on_card``."""
    if len(dealer_cards) < 2:
        raise InvalidHand("the dealer must hold two cards before playing")
    hv = hand_value(dealer_cards)
    while dealer_must_hit(hv, rules):
        card = shoe.draw()
        dealer_cards.append(card)
        if on_card is not None:
            on_card(card)
        hv = hand_value(dealer_cards)
    return hv


def _scale(bet, ratio: Fraction):
    if isinstance(bet, int):
        # integer currency: round toward zero
        return int(bet * ratio)
    return float(bet * ratio)


def settle(player: HandValue, dealer: HandValue, bet, surrendered: bool = False,
           doubled: bool = False, rules: RulesConfig = DEFAULT_RULES) -> RoundOutcome:
    """Settle one hand. ``net_payoff`` is from the player's side."""
    if not bet > 0:
        raise InvalidBet(f"bet must be positive, got {bet!r}")
    stake = bet * 2 if doubled else bet

    def out(result, net):
        return RoundOutcome(result, net, player, dealer, bet, doubled, surrendered)

    if surrendered:
        return out(LOSS, -_scale(bet, Fraction(1, 2)))
    if player.is_natural:
        if dealer.is_natural:
            return out(DRAW, 0)
        return out(WIN, _scale(bet, rules.natural_payout))
    if player.is_bust:
        return out(LOSS, -stake)
    if dealer.is_natural:
        return out(LOSS, -bet)
    if dealer.is_bust or player.total > dealer.total:
        return out(WIN, stake)
    if player.total < dealer.total:
        return out(LOSS, -stake)
    return out(DRAW, 0)


Policy = Callable[[list, Card, frozenset], Action]


@dataclass
class _Hand:
    cards: list
    bet: object
    split: bool = False
    doubled: bool = False
    surrendered: bool = False
    value: HandValue | None = None

    @property
    def live(self) -> bool:
        return not (self.surrendered or self.value.is_bust or self.value.is_natural)


@dataclass
class Seat:
    """One player's spot at the table for one round."""
    policy: Policy
    bet: object
    hands: list = field(default_factory=list)


def _play_hand(shoe, hand: _Hand, up: Card, policy: Policy, rules: RulesConfig, on_card) -> list:
    """Run the decision loop for one hand. Returns the hands it turned into
    (two after a split, otherwise just itself)."""
    first = True
    while True:
        hv = hand_value(hand.cards, hand.split)
        hand.value = hv
        if hv.is_bust:
            return [hand]
        legal = legal_actions(hand.cards, rules, hand.split, first)
        action = policy(hand.cards, up, legal)
        if action not in legal:
            raise IllegalAction(f"{action!r} is not legal here; legal: {sorted(legal)}")
        if action == Action.STAND:
            return [hand]
        if action == Action.SURRENDER:
            hand.surrendered = True
            return [hand]
        if action == Action.SPLIT:
            played = []
            for c in hand.cards:
                new = _Hand([c, shoe.draw()], hand.bet, split=True)
                if on_card is not None:
                    on_card(new.cards[1])
                played.extend(_play_hand(shoe, new, up, policy, rules, on_card))
            return played
        card = shoe.draw()
        if on_card is not None:
            on_card(card)
        hand.cards.append(card)
        first = False
        if action == Action.DOUBLE:
            hand.doubled = True
            hand.value = hand_value(hand.cards, hand.split)
            return [hand]


def play_table_round(shoe, seats: Sequence[Seat], rules: RulesConfig = DEFAULT_RULES,
                     on_card: Callable[[Card], None] | None = None) -> list:
    """Play one round for several seats against the dealer.

    Cards go out clockwise: a card to each seat, the dealer's up card, a second
    card to each seat, then the hole card. Seats act in order, the dealer plays
    if any hand is still live, then every hand is settled. Returns, per seat,
    a RoundOutcome or a tuple of two after a split. ``on_card`` sees each card
    when it becomes visible (the hole card at reveal).
    """
    for seat in seats:
        if not seat.bet > 0:
            raise InvalidBet(f"bet must be positive, got {seat.bet!r}")
    first_cards = [shoe.draw() for _ in seats]
    up = shoe.draw()
    second_cards = [shoe.draw() for _ in seats]
    hole = shoe.draw()
    if on_card is not None:
        for c in first_cards:
            on_card(c)
        on_card(up)
        for c in second_cards:
            on_card(c)

    dealer_cards = [up, hole]
    for seat, c1, c2 in zip(seats, first_cards, second_cards):
        h = _Hand([c1, c2], seat.bet)
        h.value = hand_value(h.cards)
        seat.hands = [h]

    dealer_hv = hand_value(dealer_cards)
    if not dealer_hv.is_natural:
        for seat in seats:
            h = seat.hands[0]
            if not h.value.is_natural:
                seat.hands = _play_hand(shoe, h, up, seat.policy, rules, on_card)

    if on_card is not None:
        on_card(hole)
    if not dealer_hv.is_natural and any(h.live for seat in seats for h in seat.hands):
        dealer_hv = dealer_play(shoe, dealer_cards, rules, on_card)

    results = []
    for seat in seats:
        outs = tuple(settle(h.value, dealer_hv, h.bet, h.surrendered, h.doubled, rules)
                     for h in seat.hands)
        results.append(outs if len(outs) > 1 else outs[0])
    return results


def play_round(shoe, player_policy: Policy, bet=1, rules: RulesConfig = DEFAULT_RULES,
               on_card: Callable[[Card], None] | None = None):
    """Single-player round. Returns a RoundOutcome, or a pair of them after a split."""
    return play_table_round(shoe, [Seat(player_policy, bet)], rules, on_card)[0]


def round_hands(outcome) -> tuple:
    """Per-hand outcomes of a round result (one, or two after a split)."""
    return (outcome,) if isinstance(outcome, RoundOutcome) else tuple(outcome)


def round_payoff(outcome) -> Union[int, float]:
    return sum(o.net_payoff for o in round_hands(outcome))
