"""Acceptance suite: one group of tests per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists a
PASS/FAIL line per criterion with the measured values. The full suite takes
about eight minutes on one core, dominated by the 500k-episode sweep
and the deck-trend sweep.
"""

import itertools
import random
import statistics
from importlib import resources

import numpy as np
import pytest

from bjlab.basic_strategy import chart, compare_charts
from bjlab.cli import main
from bjlab.counting import new_count, observe
from bjlab.harness import run_sweep
from bjlab.learn import (DEFAULT_SCHEDULE, ExtendedQLearningAgent, Hyperparams, QTable, epsilon_at,
                         epsilon_curve, evaluate_base, q_update, random_baseline, train_q_base)
from bjlab.rules import Action, hand_value
from bjlab.shoe import RANKS, Shoe, cards
from bjlab.tablesim import TableConfig, run_table
from oracles.ev_oracle import CODES, cell_hand, ev_of_action, load_chart_arrays

criterion = pytest.mark.criterion

# Values per rank as printed in the counting tables; ten-valued ranks share a row.
PRINTED_TABLES = {
    "hi_lo": {"2": 1, "3": 1, "4": 1, "5": 1, "6": 1, "7": 0, "8": 0, "9": 0, "10": -1, "A": -1},
    "ten_count": {**{r: 4 for r in ("A", "2", "3", "4", "5", "6", "7", "8", "9")}, "10": -9},
    "zen": {"2": 1, "3": 1, "4": 2, "5": 2, "6": 2, "7": 1, "8": 0, "9": 0, "10": -2, "A": -2},
    "uston_apc": {"2": 1, "3": 2, "4": 2, "5": 3, "6": 2, "7": 2, "8": 1, "9": -1, "10": -3, "A": 0},
}

# Reported backtest winning odds (%) at 500k train / 50k backtest, by decks 4..8.
REPORTED_ODDS = {
    "hi_lo": (42.24, 42.59, 42.01, 42.14, 41.13),
    "zen": (41.83, 41.88, 41.96, 42.08, 41.91),
    "uston_apc": (41.45, 41.43, 42.21, 41.90, 42.11),
}
SYSTEMS3 = ("hi_lo", "zen", "uston_apc")


def ols_slope(xs, ys):
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


# -- 1. Q-update arithmetic ---------------------------------------------------

@criterion(1, "Q-update arithmetic examples")
def test_c1_q_update_examples(evidence):
    s, s2 = ("s",), ("s2",)
    q = q_update(QTable(), s, Action.STAND, 1.0, None, 0.05, 0.1)
    assert q.get(s, Action.STAND) == 0.05

    q = QTable()
    q.set(s, Action.HIT, 0.5)
    q.set(s2, Action.STAND, 0.5)
    q_update(q, s, Action.HIT, 0.0, s2, 0.05, 0.1)
    assert f"{q.get(s, Action.HIT):.4f}" == "0.4775"

    before = q.get(s, Action.HIT)
    for r in (-3.0, 0.0, 2.5):
        q_update(q, s, Action.HIT, r, s2, 0.0, 0.1)
    assert q.get(s, Action.HIT) == before
    evidence.append("0.05, 0.4775, alpha=0 unchanged")


# -- 2. Counting balance ------------------------------------------------------

def printed_oracle(system: str, decks: int) -> int:
    per_rank = PRINTED_TABLES[system]
    return sum(4 * decks * per_rank["10" if r in ("J", "Q", "K") else r] for r in RANKS)


@criterion(2, "full-shoe running counts (balanced systems 0, Zen -4 per deck)")
@pytest.mark.parametrize("decks", [1, 4, 6, 8])
@pytest.mark.parametrize("system", ["hi_lo", "ten_count", "uston_apc", "zen"])
def test_c2_full_shoe_count(system, decks, evidence):
    shoe = Shoe(decks, seed=decks)
    c = new_count(system)
    while shoe.remaining:
        c = observe(c, shoe.draw())
    expected = -4 * decks if system == "zen" else 0
    assert printed_oracle(system, decks) == expected
    assert c.running_count == expected
    if system == "zen" and decks == 8:
        evidence.append("zen x8 = -32")


# -- 3. Epsilon schedule ------------------------------------------------------

@criterion(3, "epsilon schedule knots and monotonicity")
@pytest.mark.parametrize("total", [10, 1000, 500_000])
def test_c3_schedule(total):
    e = lambda i: epsilon_at(DEFAULT_SCHEDULE, i, total)
    assert e(0) == 1.0
    assert e(round(0.3 * total)) == pytest.approx(0.9, abs=1e-9)
    assert e(round(0.7 * total)) == pytest.approx(0.2, abs=1e-9)
    assert e(total - 1) == 0.0
    eps = np.array(epsilon_curve(DEFAULT_SCHEDULE, total))
    assert np.all(np.diff(eps) <= 0)


# -- 4. Base-model payoff gap -------------------------------------------------

@criterion(4, "base model: random payoff in [-450, -340], trained improves >= 40%")
def test_c4_payoff_gap(evidence):
    random_payoffs, trained_payoffs = [], []
    for seed in range(30):
        q, _ = train_q_base(Hyperparams(alpha=0.05, gamma=0.1, train_episodes=1000, seed=seed))
        trained_payoffs.append(evaluate_base(q, 1000, seed).total_payoff)
        random_payoffs.append(random_baseline(1000, seed).total_payoff)
    rand = statistics.mean(random_payoffs)
    trained = statistics.mean(trained_payoffs)
    improvement = (trained - rand) / abs(rand) * 100
    evidence.append(f"random {rand:.1f}, trained {trained:.1f}, improvement {improvement:.1f}%")
    assert -450 <= rand <= -340
    assert improvement >= 40


# -- 5. Winning-odds band -----------------------------------------------------

@criterion(5, "winning odds per (decks 4-8, system) within band and +-2pp of reported")
def test_c5_full_grid(evidence):
    rows = run_sweep(range(4, 9), SYSTEMS3, Hyperparams(train_episodes=500_000, backtest_episodes=50_000))
    misses = []
    for decks, system, odds, _, _ in rows:
        odds = float(odds)
        reported = REPORTED_ODDS[system][decks - 4]
        if not (39 <= odds <= 45 and abs(odds - reported) <= 2):
            misses.append(f"{decks}/{system}={odds:.2f} vs {reported}")
    values = [float(r[2]) for r in rows]
    evidence.append(f"500k/50k range {min(values):.2f}-{max(values):.2f}")
    assert not misses, misses


@criterion(5, "winning odds per (decks 4-8, system) within band and +-2pp of reported")
def test_c5_desk_scale(evidence):
    rows = run_sweep(range(4, 9), SYSTEMS3, Hyperparams(train_episodes=50_000, backtest_episodes=10_000))
    values = [float(r[2]) for r in rows]
    evidence.append(f"50k/10k range {min(values):.2f}-{max(values):.2f}")
    assert all(38 <= v <= 46 for v in values)


# -- 6. Deck-count trend ------------------------------------------------------

@criterion(6, "winning odds vs decks 4-21: hi_lo slope negative and steepest")
def test_c6_deck_trend(evidence):
    decks = list(range(4, 22))
    pooled = {s: {d: [] for d in decks} for s in SYSTEMS3}
    for seed in range(3):
        hp = Hyperparams(train_episodes=50_000, backtest_episodes=10_000, seed=seed)
        for d, system, odds, _, _ in run_sweep(decks, SYSTEMS3, hp):
            pooled[system][d].append(float(odds))
    slopes = {s: ols_slope(decks, [statistics.mean(pooled[s][d]) for d in decks]) for s in SYSTEMS3}
    evidence.append(", ".join(f"{s} {v:+.4f}pp/deck" for s, v in slopes.items()))
    assert slopes["hi_lo"] < 0
    assert abs(slopes["zen"]) < abs(slopes["hi_lo"])
    assert abs(slopes["uston_apc"]) < abs(slopes["hi_lo"])


# -- 7. Strategy agreement ----------------------------------------------------

@criterion(7, "learned chart agrees with the standard chart on >= 55%, no surrender")
def test_c7_chart_agreement(evidence):
    agent = ExtendedQLearningAgent(alpha=0.01, gamma=0.1, n_episodes=1_000_000, h17=True,
                                   system="none", use_count=False, infinite_deck=True, seed=0)
    learned = agent.fit().strategy()
    agree = compare_charts(learned, chart("H17"))
    surrender = sum(1 for c in learned.cells.values() if c.primary == Action.SURRENDER)
    evidence.append(f"{agree.agreement_pct:.2f}% of {agree.total_cells} cells, "
                    f"{agree.unreached_cells} unreached, surrender {surrender}")
    assert agree.agreement_pct >= 55
    assert surrender == 0


# -- 8. Table sign pattern ----------------------------------------------------

@criterion(8, "tablesim sign pattern (counter up, random agents and dealer down)")
@pytest.mark.parametrize("players,decks,h17", [(4, 6, False), (6, 8, True)])
def test_c8_sign_pattern(players, decks, h17, evidence):
    rep = run_table(TableConfig(num_players=players, num_decks=decks, dealer_hits_soft17=h17,
                                num_simulations=10_000, seed=7))
    c = rep.counter
    evidence.append(f"{players}p/{decks}d counter {c.final_bankroll - c.initial_bankroll:+d}, "
                    f"dealer {rep.dealer.final_bankroll - rep.dealer.initial_bankroll:+d}")
    assert c.final_bankroll > c.initial_bankroll
    assert rep.dealer.final_bankroll < rep.dealer.initial_bankroll
    for r in rep.random_agents:
        assert r.final_bankroll < r.initial_bankroll
        assert c.win_pct > r.win_pct


# -- 9. Player-count and deck-count properties --------------------------------

def pooled_table(seeds, **kw):
    own, mean_pct = [], []
    for seed in seeds:
        rep = run_table(TableConfig(seed=seed, **kw))
        mean_pct.append(statistics.mean(a.win_pct for a in rep.agents))
        own.append(statistics.mean(a.own_win_pct for a in rep.agents))
    return statistics.mean(mean_pct), statistics.mean(own)


@criterion(9, "per-player win% non-increasing in players; counter beats random at 1-8 decks")
def test_c9_players(evidence):
    means, owns = [], []
    for players in range(3, 8):
        m, o = pooled_table((0, 1), num_players=players, num_decks=8, num_simulations=2000)
        means.append(m)
        owns.append(o)
    evidence.append("mean win% by players 3-7: " + ", ".join(f"{m:.2f}" for m in means))
    assert all(a >= b for a, b in zip(means, means[1:]))
    # the per-own-hands rate falls too, since the counter's share of seats shrinks
    assert all(a >= b for a, b in zip(owns, owns[1:]))


@criterion(9, "per-player win% non-increasing in players; counter beats random at 1-8 decks")
def test_c9_decks(evidence):
    gaps = []
    for decks in range(1, 9):
        rep = run_table(TableConfig(num_players=6, num_decks=decks, dealer_hits_soft17=True,
                                    num_simulations=1000, seed=decks))
        gaps.append(rep.counter.win_pct - statistics.mean(r.win_pct for r in rep.random_agents))
    evidence.append("min counter gap over decks 1-8: " + f"{min(gaps):.2f}pp")
    assert all(g > 0 for g in gaps)


# -- 10. Determinism and conservation -----------------------------------------

REPLAY_RUNS = {
    "train_base": ["train", "--episodes", "1000", "--seed", "7"],
    "train_extended": ["train", "--model", "extended", "--episodes", "3000",
                       "--backtest-episodes", "500", "--seed", "7"],
    "train_mc": ["train", "--model", "mc_off", "--episodes", "3000", "--seed", "3"],
    "tablesim": ["tablesim", "--players", "3", "--decks", "2", "--sims", "50", "--seed", "7"],
    "sweep": ["sweep", "--decks", "4..5", "--systems", "hi_lo,zen", "--episodes", "500",
              "--backtest-episodes", "200", "--workers", "2"],
    "chart": ["chart", "--episodes", "5000", "--seed", "2"],
}


@criterion(10, "manifest replay is byte-identical; tablesim ledger is zero-sum")
@pytest.mark.parametrize("name", sorted(REPLAY_RUNS))
def test_c10_manifest_replay(name, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert main([*REPLAY_RUNS[name], "--out", str(first)]) == 0
    command = REPLAY_RUNS[name][0]
    assert main([command, "--config", str(first / "manifest.txt"), "--out", str(second)]) == 0
    files = sorted(p.name for p in first.iterdir())
    assert files == sorted(p.name for p in second.iterdir())
    for f in files:
        assert (first / f).read_bytes() == (second / f).read_bytes(), f


@criterion(10, "manifest replay is byte-identical; tablesim ledger is zero-sum")
def test_c10_backtest_replay(tmp_path):
    train = tmp_path / "train"
    assert main(["train", "--model", "extended", "--episodes", "2000", "--backtest-episodes", "100",
                 "--out", str(train)]) == 0
    runs = []
    for name in ("a", "b"):
        out = tmp_path / name
        argv = ["backtest", "--qtable", str(train / "qtable.csv"), "--episodes", "500",
                "--out", str(out)]
        if name == "b":
            argv = ["backtest", "--config", str(tmp_path / "a" / "manifest.txt"), "--out", str(out)]
        assert main(argv) == 0
        runs.append(out)
    for f in ("metrics.csv", "manifest.txt"):
        assert (runs[0] / f).read_bytes() == (runs[1] / f).read_bytes()


@criterion(10, "manifest replay is byte-identical; tablesim ledger is zero-sum")
def test_c10_conservation(evidence):
    rng = random.Random(2024)
    rounds = 0
    while rounds < 100_000:
        cfg = TableConfig(num_players=rng.randint(1, 7), num_decks=rng.randint(1, 8),
                          dealer_hits_soft17=rng.random() < 0.5, num_simulations=200,
                          seed=rng.randrange(2 ** 32))
        bad = []

        def check(deltas, dealer_delta):
            if sum(deltas) + dealer_delta != 0 or not all(isinstance(d, int) for d in deltas):
                bad.append((deltas, dealer_delta))

        rep = run_table(cfg, on_round=check)
        assert not bad
        start = cfg.player_bankroll * cfg.num_players + cfg.dealer_bankroll
        assert sum(a.final_bankroll for a in rep.rows()) == start
        rounds += rep.rounds_played
    evidence.append(f"{rounds} rounds checked")


# -- 11. Oracle checks --------------------------------------------------------

def best_total(hand):
    n_aces = sum(c.is_ace for c in hand)
    base = sum(c.value for c in hand if not c.is_ace)
    totals = sorted({base + sum(x) for x in itertools.product((1, 11), repeat=n_aces)})
    ok = [t for t in totals if t <= 21]
    best = max(ok) if ok else totals[0]
    return best, best != base + n_aces


@criterion(11, "hand_value exhaustive oracle; basic-strategy EV sanity")
def test_c11_hand_value_exhaustive(evidence):
    n = 0
    for size in range(1, 6):
        for combo in itertools.combinations_with_replacement(RANKS, size):
            hand = cards(*combo)
            hv = hand_value(hand)
            total, soft = best_total(hand)
            assert (hv.total, hv.is_soft) == (total, soft), combo
            assert hv.is_bust == (total > 21)
            assert hv.is_natural == (size == 2 and total == 21)
            n += 1
    evidence.append(f"{n} hands")


def s17_arrays():
    with resources.as_file(resources.files("bjlab") / "data" / "basic_strategy_s17.csv") as p:
        return load_chart_arrays(p)


@criterion(11, "hand_value exhaustive oracle; basic-strategy EV sanity")
def test_c11_ev_sanity(evidence):
    prim, fb = s17_arrays()
    s17 = chart("S17")
    eligible = sorted(k for k in s17.cells if cell_hand(k[0], k[1]) is not None)
    sample = random.Random(11).sample(eligible, 20)
    worst = 0.0
    failures = []
    for kind, row, up in sample:
        hard, aces, pair_card = cell_hand(kind, row)
        actions = ["stand", "hit", "double", "surrender"] + (["split"] if kind == "pair" else [])
        ev = {a: ev_of_action(prim, fb, hard, aces, pair_card, up, CODES[a], False, 2_000_000, 5)
              for a in actions}
        chosen = s17.cells[(kind, row, up)].primary.label
        gap = max(ev.values()) - ev[chosen]
        worst = max(worst, gap)
        if gap > 0.02:
            failures.append(f"{kind} {row} v {up}: {chosen} {ev[chosen]:.3f}, best {max(ev.values()):.3f}")
    evidence.append(f"20 cells, largest shortfall {worst:.4f}")
    assert not failures, failures
