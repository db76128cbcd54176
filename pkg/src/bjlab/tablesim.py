"""Multi-player table simulation: one card counter and several random agents
against a bankrolled dealer.

The counter plays the basic-strategy chart for the table's dealer rule and
sizes bets from the Hi-Lo true count. Random agents follow a fixed hit budget
and bet a random 1-5% of their bankroll. Every round is settled into an
integer ledger that must balance exactly: whatever the players gain the
dealer loses.
"""

from __future__ import annotations

import csv
import enum
import io
import random
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

from .basic_strategy import chart_for, lookup
from .counting import bet_size, get_system, linear_ramp
from .exceptions import InvalidConfiguration, ShoeExhausted
from .rules import LOSS, WIN, Action, RulesConfig, Seat, hand_value, play_table_round, round_hands
from .seeding import derive_seed
from .shoe import Card, Shoe

MAX_PLAYERS = 7
STOP_AT_CARDS = 25
INT64_MAX = 2 ** 63 - 1
REPORT_COLUMNS = ("agent", "kind", "win_pct", "draw_pct", "loss_pct", "own_win_pct",
                  "own_draw_pct", "own_loss_pct", "wins", "draws", "losses",
                  "initial_bankroll", "final_bankroll")


class AgentKind(str, enum.Enum):
    CARD_COUNTER = "card_counter"
    RANDOM_AGENT = "random_agent"
    DEALER = "dealer"


class ConservationError(RuntimeError):
    """A round's ledger deltas did not sum to zero."""


@dataclass(frozen=True)
class TableConfig:
    num_players: int = 4
    num_decks: int = 6
    dealer_hits_soft17: bool = False
    num_simulations: int = 1000
    player_bankroll: int = 100_000
    dealer_bankroll_ratio: float = 200.0
    betting_unit: int = 10_000
    table_min_bet: int = 1
    table_max_bet: int = 100_000
    random_bet_range: tuple = (0.01, 0.05)
    counter_seat: int = 0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.num_players <= MAX_PLAYERS:
            raise InvalidConfiguration(f"num_players must be in 1..{MAX_PLAYERS}, got {self.num_players}")
        if self.num_decks < 1:
            raise InvalidConfiguration("num_decks must be at least 1")
        if self.num_simulations < 1:
            raise InvalidConfiguration("num_simulations must be positive")
        if self.dealer_bankroll_ratio <= 0:
            raise InvalidConfiguration("dealer_bankroll_ratio must be positive")
        if self.betting_unit <= 0 or self.table_min_bet <= 0 or self.table_max_bet < self.table_min_bet:
            raise InvalidConfiguration("betting unit and table limits must be positive and ordered")
        lo, hi = self.random_bet_range
        if not 0 <= lo <= hi <= 1:
            raise InvalidConfiguration(f"random_bet_range must satisfy 0 <= lo <= hi <= 1, got {self.random_bet_range}")
        if not 0 <= self.counter_seat < self.num_players:
            raise InvalidConfiguration("counter_seat must index a seat at the table")
        for name in ("player_bankroll", "betting_unit", "table_min_bet", "table_max_bet"):
            if not isinstance(getattr(self, name), int):
                raise InvalidConfiguration(f"{name} must be an integer amount")

    @property
    def rules(self) -> RulesConfig:
        return RulesConfig(num_decks=self.num_decks, dealer_hits_soft17=self.dealer_hits_soft17,
                           table_min_bet=self.table_min_bet, table_max_bet=self.table_max_bet)

    @property
    def dealer_bankroll(self) -> int:
        return int(self.player_bankroll * self.dealer_bankroll_ratio)


@dataclass
class BankrollLedger:
    """Balances and outcome counters for every seat plus the dealer.

    ``dealer_vs[i]`` holds the dealer's (wins, draws, losses) against seat i,
    which mirror that seat's (losses, draws, wins).
    """

    balances: list
    dealer_balance: int
    wins: list = field(default_factory=list)
    draws: list = field(default_factory=list)
    losses: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.balances)
        self.wins = self.wins or [0] * n
        self.draws = self.draws or [0] * n
        self.losses = self.losses or [0] * n
        self.dealer_vs = [[0, 0, 0] for _ in range(n)]

    def apply_round(self, outcomes: Sequence) -> list[int]:
        """Post one round (per seat: RoundOutcome or a split pair) and
        return the per-seat deltas. Raises ConservationError if the round
        does not balance."""
        deltas = []
        for i, outcome in enumerate(outcomes):
            delta = 0
            for h in round_hands(outcome):
                delta += h.net_payoff
                if h.result == WIN:
                    self.wins[i] += 1
                    self.dealer_vs[i][2] += 1
                elif h.result == LOSS:
                    self.losses[i] += 1
                    self.dealer_vs[i][0] += 1
                else:
                    self.draws[i] += 1
                    self.dealer_vs[i][1] += 1
            deltas.append(delta)
        dealer_delta = -sum(deltas)
        if sum(deltas) + dealer_delta != 0:
            raise ConservationError(f"round deltas {deltas} and dealer {dealer_delta} do not balance")
        for i, d in enumerate(deltas):
            self.balances[i] += d
        self.dealer_balance += dealer_delta
        if max(abs(b) for b in (*self.balances, self.dealer_balance)) > INT64_MAX:
            raise OverflowError("bankroll exceeds 64-bit range")
        return deltas


@dataclass(frozen=True)
class AgentReport:
    name: str
    kind: AgentKind
    wins: int
    draws: int
    losses: int
    initial_bankroll: int
    final_bankroll: int
    pooled_outcomes: int

    def _pct(self, n, denom):
        return 100.0 * n / denom if denom else 0.0

    @property
    def own_outcomes(self) -> int:
        return self.wins + self.draws + self.losses

    @property
    def win_pct(self) -> float:
        """Share of all player-hand outcomes at the table."""
        return self._pct(self.wins, self.pooled_outcomes)

    @property
    def draw_pct(self) -> float:
        return self._pct(self.draws, self.pooled_outcomes)

    @property
    def loss_pct(self) -> float:
        return self._pct(self.losses, self.pooled_outcomes)

    @property
    def own_win_pct(self) -> float:
        """Wins over this agent's own hands."""
        return self._pct(self.wins, self.own_outcomes)

    @property
    def own_draw_pct(self) -> float:
        return self._pct(self.draws, self.own_outcomes)

    @property
    def own_loss_pct(self) -> float:
        return self._pct(self.losses, self.own_outcomes)


@dataclass(frozen=True)
class SimReport:
    agents: tuple
    dealer: AgentReport
    rounds_played: int
    simulations_completed: int
    dealer_vs: tuple = ()

    @property
    def counter(self) -> AgentReport:
        return next(a for a in self.agents if a.kind == AgentKind.CARD_COUNTER)

    @property
    def random_agents(self) -> list:
        return [a for a in self.agents if a.kind == AgentKind.RANDOM_AGENT]

    def rows(self) -> list:
        return [*self.agents, self.dealer]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for a in self.rows():
            w.writerow([a.name, a.kind.value, f"{a.win_pct:.4f}", f"{a.draw_pct:.4f}",
                        f"{a.loss_pct:.4f}", f"{a.own_win_pct:.4f}", f"{a.own_draw_pct:.4f}",
                        f"{a.own_loss_pct:.4f}", a.wins, a.draws, a.losses,
                        a.initial_bankroll, a.final_bankroll])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


# -- agents ----------------------------------------------------------------

def random_agent_policy(cards: Sequence[Card], rng=None, legal=None) -> Action:
    """The random agent's play for its current hand.

    A two-card pair totalling at least 4 and under 18 is split. Otherwise the
    agent hits a fixed number of times (3 if its first two cards total under
    6, else 2) and then stands; a bust ends the hand earlier. The budget
    applies to each hand separately after a split. ``rng`` is accepted for
    interface symmetry; the rule itself is deterministic.
    """
    hv = hand_value(cards)
    can_split = legal is None or Action.SPLIT in legal
    if hv.is_pair and 4 <= hv.total < 18 and can_split:
        return Action.SPLIT
    budget = 3 if hand_value(cards[:2]).total < 6 else 2
    if len(cards) - 2 < budget and (legal is None or Action.HIT in legal):
        return Action.HIT
    return Action.STAND


def random_agent_bet(bankroll: int, rng: random.Random, rules: RulesConfig,
                     bet_range: tuple = (0.01, 0.05)) -> int:
    """A uniform 1-5% of the (non-negative) bankroll, clamped to the table limits."""
    frac = rng.uniform(*bet_range)
    bet = round(frac * max(bankroll, 0))
    return min(max(bet, rules.table_min_bet), rules.table_max_bet)


@dataclass(frozen=True)
class CounterPolicy:
    """Basic strategy for play and a Hi-Lo true-count ramp for bets."""

    rules: RulesConfig
    unit: int = 100
    system: str = "hi_lo"

    def decide(self, cards, up, legal) -> Action:
        return lookup(chart_for(self.rules.dealer_hits_soft17), cards, up, legal)

    def bet(self, bankroll, tc: float) -> int:
        return bet_size(bankroll, self.unit, tc, self.rules, linear_ramp)


def counter_policy(rules: RulesConfig = RulesConfig(), unit: int = 100) -> CounterPolicy:
    return CounterPolicy(rules, unit)


# -- simulation --------------------------------------------------------------

class _TableShoe:
    """A shoe that falls back to a freshly shuffled reserve if a round runs
    past the last card, so an unlucky round can always finish."""

    def __init__(self, num_decks: int, seed: int):
        self.main = Shoe(num_decks, derive_seed(seed, 0))
        self.reserve_seed = derive_seed(seed, 1)
        self.reserve = None
        self.num_decks = num_decks

    @property
    def remaining(self) -> int:
        return self.main.remaining

    def decks_remaining(self) -> float:
        return self.main.decks_remaining()

    def draw(self) -> Card:
        try:
            return self.main.draw()
        except ShoeExhausted:
            if self.reserve is None:
                self.reserve = Shoe(self.num_decks, self.reserve_seed)
            return self.reserve.draw()


def _random_play(cards, up, legal):
    return random_agent_policy(cards, None, legal)


def run_table(cfg: TableConfig, on_round=None) -> SimReport:
    """Run ``cfg.num_simulations`` simulations and aggregate the ledger.

    Each simulation opens a fresh shoe and count and deals rounds until at
    most 25 cards remain. Bankrolls carry over from one simulation to the
    next. ``on_round(deltas, dealer_delta)`` is called after every round.
    """
    rules = cfg.rules
    system = get_system("hi_lo")
    weights = system.weights
    counter = counter_policy(rules, cfg.betting_unit)
    n = cfg.num_players
    ledger = BankrollLedger([cfg.player_bankroll] * n, cfg.dealer_bankroll)
    bet_rng = random.Random(derive_seed(cfg.seed, "bets"))
    rounds = 0
    for sim in range(cfg.num_simulations):
        shoe = _TableShoe(cfg.num_decks, derive_seed(cfg.seed, "table", sim))
        running = [0]

        def on_card(card, running=running):
            running[0] += weights[card.rank]

        while shoe.remaining > STOP_AT_CARDS:
            tc = running[0] / shoe.decks_remaining()
            seats = []
            for i in range(n):
                if i == cfg.counter_seat:
                    seats.append(Seat(counter.decide, counter.bet(ledger.balances[i], tc)))
                else:
                    bet = random_agent_bet(ledger.balances[i], bet_rng, rules, cfg.random_bet_range)
                    seats.append(Seat(_random_play, bet))
            outcomes = play_table_round(shoe, seats, rules, on_card)
            dealer_before = ledger.dealer_balance
            deltas = ledger.apply_round(outcomes)
            rounds += 1
            if on_round is not None:
                on_round(deltas, ledger.dealer_balance - dealer_before)
            if shoe.reserve is not None:
                break
    return _report(cfg, ledger, rounds)


def _report(cfg: TableConfig, ledger: BankrollLedger, rounds: int) -> SimReport:
    pooled = sum(ledger.wins) + sum(ledger.draws) + sum(ledger.losses)
    agents = []
    k = 0
    for i in range(cfg.num_players):
        if i == cfg.counter_seat:
            name, kind = "card_counter", AgentKind.CARD_COUNTER
        else:
            k += 1
            name, kind = f"random_agent_{k}", AgentKind.RANDOM_AGENT
        agents.append(AgentReport(name, kind, ledger.wins[i], ledger.draws[i], ledger.losses[i],
                                  cfg.player_bankroll, ledger.balances[i], pooled))
    dealer = AgentReport("dealer", AgentKind.DEALER, sum(ledger.losses), sum(ledger.draws),
                         sum(ledger.wins), cfg.dealer_bankroll, ledger.dealer_balance, pooled)
    return SimReport(tuple(agents), dealer, rounds, cfg.num_simulations,
                     tuple(tuple(v) for v in ledger.dealer_vs))


def with_overrides(cfg: TableConfig, **changes) -> TableConfig:
    return replace(cfg, **changes)
