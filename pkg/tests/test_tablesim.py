import random

import pytest

from bjlab.exceptions import InvalidConfiguration
from bjlab.rules import Action, RulesConfig, legal_actions
from bjlab.shoe import Card, cards
from bjlab.tablesim import (REPORT_COLUMNS, AgentKind, BankrollLedger, TableConfig, counter_policy,
                            random_agent_bet, random_agent_policy, run_table, with_overrides)

SMALL = TableConfig(num_players=3, num_decks=2, num_simulations=20, seed=3)


def play_out(hand, draws):
    """Drive random_agent_policy until it stands; returns the actions taken."""
    hand, draws, taken = list(hand), list(draws), []
    while True:
        legal = legal_actions(hand, already_split=True, first_decision=len(hand) == 2)
        a = random_agent_policy(hand, None, legal)
        taken.append(a)
        if a != Action.HIT:
            return taken
        hand.append(draws.pop(0))
        if sum(c.value for c in hand) > 21:
            return taken


def test_random_agent_hit_budget():
    assert play_out(cards(2, 3), cards(2, 2, 2, 2)) == [Action.HIT] * 3 + [Action.STAND]
    assert play_out(cards(10, 9), cards("A", "A", "A")) == [Action.HIT] * 2 + [Action.STAND]
    assert play_out(cards(10, 9), cards(5)) == [Action.HIT]


def test_random_agent_split_boundaries():
    assert random_agent_policy(cards(8, 8)) == Action.SPLIT
    assert random_agent_policy(cards(2, 2)) == Action.SPLIT
    assert random_agent_policy(cards(9, 9)) == Action.HIT
    assert random_agent_policy(cards("A", "A")) == Action.SPLIT  # soft 12 is inside [4, 18)
    assert random_agent_policy(cards(8, 8), legal={Action.HIT, Action.STAND}) == Action.HIT


class FixedDraw:
    def __init__(self, x):
        self.x = x

    def uniform(self, a, b):
        return self.x


def test_random_agent_bet():
    rules = RulesConfig(table_min_bet=10, table_max_bet=5000)
    assert random_agent_bet(10_000, FixedDraw(0.03), rules) == 300
    assert random_agent_bet(-500, FixedDraw(0.03), rules) == 10
    assert random_agent_bet(10**9, FixedDraw(0.05), rules) == 5000
    rng = random.Random(1)
    for b in range(-1000, 200_000, 997):
        assert 10 <= random_agent_bet(b, rng, rules) <= 5000


def test_counter_policy():
    c = counter_policy(RulesConfig(table_min_bet=1, table_max_bet=1000), unit=100)
    assert c.bet(10_000, 4.0) == 400
    assert c.bet(10_000, -3.0) == 100
    assert c.decide(cards(8, 8), Card.of(10), frozenset(Action)) == Action.SPLIT
    h17 = counter_policy(RulesConfig(dealer_hits_soft17=True))
    assert h17.decide(cards(8, 8), Card.of("A"), frozenset(Action)) == Action.SURRENDER


def test_config_validation():
    for bad in (dict(num_players=8), dict(num_players=0), dict(num_decks=0),
                dict(counter_seat=4), dict(random_bet_range=(0.5, 0.1)), dict(betting_unit=2.5)):
        with pytest.raises(InvalidConfiguration):
            TableConfig(**bad)


def test_single_player_mirrors_dealer():
    seen = []
    cfg = TableConfig(num_players=1, num_decks=1, num_simulations=50, seed=2)
    rep = run_table(cfg, on_round=lambda d, dd: seen.append((d[0], dd)))
    assert seen and all(dd == -d for d, dd in seen)
    assert rep.dealer.final_bankroll - rep.dealer.initial_bankroll == \
        -(rep.counter.final_bankroll - rep.counter.initial_bankroll)


def test_run_table_is_deterministic():
    assert run_table(SMALL).to_csv() == run_table(SMALL).to_csv()
    assert run_table(SMALL).to_csv() != run_table(with_overrides(SMALL, seed=4)).to_csv()


def test_round_conservation_and_totals():
    rounds = []
    rep = run_table(SMALL, on_round=lambda d, dd: rounds.append(sum(d) + dd))
    assert rounds and all(x == 0 for x in rounds)
    assert len(rounds) == rep.rounds_played
    start = SMALL.player_bankroll * SMALL.num_players + SMALL.dealer_bankroll
    assert sum(a.final_bankroll for a in rep.rows()) == start


def test_report_shape():
    rep = run_table(SMALL)
    assert rep.simulations_completed == 20
    assert [a.kind for a in rep.agents].count(AgentKind.CARD_COUNTER) == 1
    assert len(rep.random_agents) == 2
    pooled = sum(a.wins + a.draws + a.losses for a in rep.agents)
    assert rep.dealer.wins == sum(a.losses for a in rep.agents)
    assert sum(a.win_pct + a.draw_pct + a.loss_pct for a in rep.agents) == pytest.approx(100.0)
    for a in rep.agents:
        assert a.own_win_pct + a.own_draw_pct + a.own_loss_pct == pytest.approx(100.0)
        assert a.win_pct == pytest.approx(100.0 * a.wins / pooled)
    for i, a in enumerate(rep.agents):
        assert rep.dealer_vs[i] == (a.losses, a.draws, a.wins)
    lines = rep.to_csv().splitlines()
    assert lines[0] == ",".join(REPORT_COLUMNS)
    assert lines[0] == ("agent,kind,win_pct,draw_pct,loss_pct,own_win_pct,own_draw_pct,"
                        "own_loss_pct,wins,draws,losses,initial_bankroll,final_bankroll")
    assert len(lines) == 1 + 3 + 1


def test_many_players_few_decks_finishes():
    rep = run_table(TableConfig(num_players=7, num_decks=1, num_simulations=30, seed=1))
    assert rep.rounds_played >= 30


def test_ledger_overflow_is_fatal():
    from bjlab.rules import settle, hand_value
    win = settle(hand_value(cards(10, 10)), hand_value(cards(10, 9)), 2**62)
    ledger = BankrollLedger([2**62], 0)
    with pytest.raises(OverflowError):
        ledger.apply_round([win])
