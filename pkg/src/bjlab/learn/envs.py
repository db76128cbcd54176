"""Episodic blackjack environments for the tabular learners.

``BaseBlackjackEnv`` is the classic hit/stand benchmark: infinite deck, dealer
stands on all 17s, rewards +1/-1/0 and a natural pays even money. Observations
are ``(player_total, dealer_up, usable_ace)`` with the dealer ace as 11.

``ExtendedEnv`` is a finite shoe (or an infinite deck) with every action
(hit, stand, double, split, surrender), shaped training rewards and a
running count that feeds the state.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import NamedTuple

from ..counting import get_system
from ..rules import DEFAULT_RULES, Action, RulesConfig, dealer_play
from ..shoe import InfiniteShoe, Shoe

BASE_ACTIONS = (Action.STAND, Action.HIT)
HIT_STAND = (Action.STAND, Action.HIT)
BASE_STATE_FIELDS = ("player_total", "dealer_up", "usable_ace")
EXT_STATE_FIELDS = ("hand_kind", "row_key", "dealer_up", "tc_bucket")
RESHUFFLE_BELOW = 30
TC_BUCKETS = (-2, -1, 0, 1, 2)


class BaseState(NamedTuple):
    player_total: int
    dealer_up: int
    usable_ace: bool


class ExtState(NamedTuple):
    """``row_key`` is the hand total for hard/soft hands and the pair card
    value (2-11) for pairs, i.e. the strategy-chart row."""

    hand_kind: str
    row_key: int
    dealer_up: int
    tc_bucket: int


def _draw_value(rng: random.Random) -> int:
    v = int(rng.random() * 13) + 1
    return 10 if v > 10 else v


class BaseBlackjackEnv:
    """Gym-style ``reset``/``step`` environment for the hit/stand game."""

    actions = BASE_ACTIONS

    def __init__(self, seed=None):
        self.rng = random.Random(seed)
        self.player: list[int] = []
        self.dealer: list[int] = []
        self.done = True

    @staticmethod
    def _score(hand: list[int]) -> tuple[int, bool]:
        total = sum(hand)
        if 1 in hand and total <= 11:
            return total + 10, True
        return total, False

    def observe(self) -> BaseState:
        total, soft = self._score(self.player)
        up = self.dealer[0]
        return BaseState(total, 11 if up == 1 else up, soft)

    def reset(self, state: BaseState | None = None) -> BaseState:
        """Deal a new episode. ``state`` forces the starting observation
        (used for exploring starts); the hidden cards are then drawn to match."""
        rng = self.rng
        self.done = False
        if state is None:
            self.player = [_draw_value(rng), _draw_value(rng)]
            self.dealer = [_draw_value(rng), _draw_value(rng)]
        else:
            self.player = _cards_for(state.player_total, state.usable_ace)
            up = 1 if state.dealer_up == 11 else state.dealer_up
            self.dealer = [up, _draw_value(rng)]
        return self.observe()

    def step(self, action: Action):
        """Returns ``(observation, reward, done)``."""
        if self.done:
            raise RuntimeError("episode finished; call reset()")
        if action == Action.HIT:
            self.player.append(_draw_value(self.rng))
            total, _ = self._score(self.player)
            if total > 21:
                self.done = True
                return self.observe(), -1.0, True
            return self.observe(), 0.0, False
        if action != Action.STAND:
            raise ValueError(f"base environment only supports hit/stand, got {action!r}")
        self.done = True
        while self._score(self.dealer)[0] < 17:
            self.dealer.append(_draw_value(self.rng))
        p, _ = self._score(self.player)
        d, _ = self._score(self.dealer)
        if d > 21 or p > d:
            return self.observe(), 1.0, True
        if p < d:
            return self.observe(), -1.0, True
        return self.observe(), 0.0, True


def _cards_for(total: int, usable_ace: bool) -> list[int]:
    """A two-card hand (three for totals the deal cannot hit otherwise) with
    the requested value."""
    if usable_ace:
        rest = total - 11
        if not 1 <= rest <= 10:
            raise ValueError(f"no hand with a usable ace totals {total}")
        return [1, rest]
    if total < 4 or total > 21:
        raise ValueError(f"hard total {total} out of range")
    if total <= 12:
        return [total // 2, total - total // 2]
    if total <= 20:
        return [10, total - 10]
    return [10, 9, 2]


def base_states(include_unreachable: bool = False) -> list[BaseState]:
    """Every base observation a decision can be asked in."""
    out = []
    for ace in (False, True):
        for total in range(4, 22):
            if ace and total < 12 and not include_unreachable:
                continue
            for up in range(2, 12):
                out.append(BaseState(total, up, ace))
    return out


def tc_bucket(tc: float) -> int:
    """Quantize a true count into -2..+2 (truncating toward zero, clamped)."""
    b = int(tc)
    return -2 if b < -2 else 2 if b > 2 else b


@dataclass
class RewardScheme:
    """Training rewards for the extended game.

    ``shaped``: 1 + the money a transition settles, in units of the initial
    bet. Standing pays 0/1/2 for loss/draw/win and doubling -1/1/3; a hit that
    does not bust settles nothing and pays 1; a split pays 1 + the two hands'
    combined result. Surrender is booked as a lost hand (0), so it never beats
    standing. ``monetary``: the settled amount itself, surrender -0.5.
    """

    name: str = "shaped"

    def terminal(self, net: float, surrendered: bool = False) -> float:
        if self.name == "shaped":
            return 0.0 if surrendered else 1.0 + net
        return net

    def continue_reward(self) -> float:
        return 1.0 if self.name == "shaped" else 0.0


class _Hand:
    __slots__ = ("cards", "hard", "ace", "split", "doubled", "surrendered", "bust")

    def __init__(self, cards, split=False):
        self.cards = cards
        self.hard = sum(c.value for c in cards)
        self.ace = any(c.is_ace for c in cards)
        self.split = split
        self.doubled = False
        self.surrendered = False
        self.bust = False

    def add(self, card):
        self.cards.append(card)
        self.hard += card.value
        if card.is_ace:
            self.ace = True
        if self.hard > 21:
            self.bust = True

    @property
    def total(self) -> int:
        return self.hard + 10 if self.ace and self.hard <= 11 else self.hard

    @property
    def soft(self) -> bool:
        return self.ace and self.hard <= 11


class ExtendedEnv:
    """Single-player shoe game used by the extended learner and its backtest.

    The shoe persists across rounds and is reshuffled (count reset) when fewer
    than ``reshuffle_below`` cards remain. The count bucket in the state is
    the true count at the start of the round.
    """

    def __init__(self, rules: RulesConfig = DEFAULT_RULES, system="hi_lo", seed=None,
                 infinite_deck: bool = False, use_count: bool = True,
                 reshuffle_below: int = RESHUFFLE_BELOW):
        self.rules = rules
        self.system = get_system(system)
        self.weights = self.system.weights
        self.infinite = infinite_deck
        self.shoe = InfiniteShoe(seed) if infinite_deck else Shoe(rules.num_decks, seed)
        self.use_count = use_count and not infinite_deck and self.system.name != "none"
        self.reshuffle_below = reshuffle_below
        self.running_count = 0
        allowed = rules.allowed_actions
        self.first_actions = tuple(a for a in Action if a in allowed)
        self.split_first_actions = tuple(
            a for a in (Action.STAND, Action.HIT, Action.DOUBLE)
            if a in allowed and (a != Action.DOUBLE or rules.double_after_split))
        self.later_actions = tuple(a for a in HIT_STAND if a in allowed)

    def true_count(self) -> float:
        if not self.use_count:
            return 0.0
        return self.running_count / self.shoe.decks_remaining()

    def prepare_round(self) -> None:
        if not self.infinite and self.shoe.remaining < self.reshuffle_below:
            self.shoe.shuffle()
            self.running_count = 0

    def draw(self):
        card = self.shoe.draw()
        self.running_count += self.weights[card.rank]
        return card

    def draw_hidden(self):
        return self.shoe.draw()

    def reveal(self, card):
        self.running_count += self.weights[card.rank]

    def state(self, hand: _Hand, up: int, bucket: int) -> ExtState:
        cards = hand.cards
        if len(cards) == 2 and cards[0].rank == cards[1].rank:
            return ExtState("pair", cards[0].chart_value, up, bucket)
        if hand.soft:
            return ExtState("soft", hand.total, up, bucket)
        return ExtState("hard", hand.total, up, bucket)

    def legal(self, hand: _Hand, first: bool) -> tuple:
        if not first:
            return self.later_actions
        if hand.split:
            return self.split_first_actions
        cards = hand.cards
        if cards[0].rank == cards[1].rank:
            return self.first_actions
        return tuple(a for a in self.first_actions if a != Action.SPLIT)

    def play_round(self, choose, on_step=None, bet: float = 1.0):
        """Play one round.

        ``choose(state, legal)`` picks actions. ``on_step(state, action,
        net, next_state, next_legal, surrendered)`` is called for every
        transition whose result is known: non-terminal hits immediately,
        everything else once the round is settled (``next_state`` None).
        Naturals involve no decision and produce no transitions. Amounts
        passed to ``on_step`` are monetary results (scaled by ``bet``); the caller maps
        them to training rewards. Returns ``(results, was_split)`` where
        results is a list of ``(hand, net)``.
        """
        self.prepare_round()
        bucket = tc_bucket(self.true_count()) if self.use_count else 0
        p1 = self.draw()
        upc = self.draw()
        p2 = self.draw()
        hole = self.draw_hidden()
        up = upc.chart_value
        dealer_hard = upc.value + hole.value
        dealer_soft = (upc.is_ace or hole.is_ace) and dealer_hard <= 11
        dealer_natural = dealer_soft and dealer_hard == 11
        hand = _Hand([p1, p2])
        player_natural = hand.soft and hand.hard == 11

        if dealer_natural or player_natural:
            self.reveal(hole)
            if player_natural and dealer_natural:
                net = 0.0
            elif player_natural:
                net = float(self.rules.natural_payout) * bet
            else:
                net = -bet
            return [(hand, net)], False

        pending = []  # (state, action, hand) settled after the dealer plays
        split_step = None
        queue = [hand]
        finished = []
        while queue:
            h = queue.pop(0)
            if len(h.cards) == 1:
                # split hands get their second card when they are played
                h.add(self.draw())
            first = True
            while True:
                s = self.state(h, up, bucket)
                a = choose(s, self.legal(h, first))
                if a == Action.HIT:
                    h.add(self.draw())
                    first = False
                    if h.bust:
                        pending.append((s, a, h))
                        finished.append(h)
                        break
                    if on_step is not None:
                        on_step(s, a, 0.0, self.state(h, up, bucket), self.later_actions, False)
                    continue
                if a == Action.SPLIT:
                    h1, h2 = _Hand([h.cards[0]], split=True), _Hand([h.cards[1]], split=True)
                    split_step = (s, (h1, h2))
                    queue[:0] = [h1, h2]
                    h = None
                elif a == Action.DOUBLE:
                    h.doubled = True
                    h.add(self.draw())
                elif a == Action.SURRENDER:
                    h.surrendered = True
                elif a != Action.STAND:
                    raise ValueError(f"unknown action {a!r}")
                if h is not None:
                    pending.append((s, a, h))
                    finished.append(h)
                break

        self.reveal(hole)
        dealer_total, dealer_bust = 0, False
        if any(not (h.bust or h.surrendered) for h in finished):
            dealer_cards = [upc, hole]
            dealer_hv = dealer_play(self.shoe, dealer_cards, self.rules)
            for c in dealer_cards[2:]:
                self.reveal(c)
            dealer_total, dealer_bust = dealer_hv.total, dealer_hv.is_bust

        nets = {id(h): _settle(h, dealer_total, dealer_bust) * bet for h in finished}
        if on_step is not None:
            for s, a, h in pending:
                on_step(s, a, nets[id(h)], None, None, h.surrendered)
            if split_step is not None:
                s, pair = split_step
                on_step(s, Action.SPLIT, sum(nets[id(x)] for x in pair), None, None, False)
        return [(h, nets[id(h)]) for h in finished], split_step is not None


def _settle(h: _Hand, dealer_total: int, dealer_bust: bool) -> float:
    """Result of one non-natural hand in units of its initial bet."""
    if h.surrendered:
        return -0.5
    stake = 2.0 if h.doubled else 1.0
    if h.bust:
        return -stake
    p = h.total
    if dealer_bust or p > dealer_total:
        return stake
    if p < dealer_total:
        return -stake
    return 0.0
