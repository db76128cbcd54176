"""Decaying-epsilon one-step Q-learning on the base and extended games,
greedy backtests and strategy extraction."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..basic_strategy import DEALER_UPS, ROWS, Cell, StrategyChart
from ..counting import bet_size, get_system
from ..rules import DEFAULT_RULES, Action, RulesConfig
from ..seeding import derive_seed
from .envs import (BASE_ACTIONS, BASE_STATE_FIELDS, EXT_STATE_FIELDS, BaseBlackjackEnv,
                   ExtendedEnv, RewardScheme, base_states)
from .qtable import QTable, q_update, select_action
from .schedule import DEFAULT_SCHEDULE, EpsilonSchedule, epsilon_at


@dataclass(frozen=True)
class Hyperparams:
    alpha: float = 0.05
    gamma: float = 0.1
    train_episodes: int = 50_000
    backtest_episodes: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.train_episodes < 0 or self.backtest_episodes < 0:
            raise ValueError("episode counts must be non-negative")


@dataclass
class LearnMetrics:
    episodes: int = 0
    wins: int = 0
    draws: int = 0
    losses: int = 0
    total_payoff: float = 0.0
    cumulative_payoff_curve: list = field(default_factory=list, repr=False)
    epsilons: list = field(default_factory=list, repr=False)

    def record(self, payoff: float, eps: float | None = None, curve: bool = True) -> None:
        self.episodes += 1
        self.total_payoff += payoff
        if payoff > 0:
            self.wins += 1
        elif payoff < 0:
            self.losses += 1
        else:
            self.draws += 1
        if curve:
            self.cumulative_payoff_curve.append(self.total_payoff)
            if eps is not None:
                self.epsilons.append(eps)

    @property
    def average_payoff(self) -> float:
        return self.total_payoff / self.episodes if self.episodes else 0.0

    @property
    def winning_odds_pct(self) -> float:
        return 100.0 * self.wins / self.episodes if self.episodes else 0.0

    @property
    def draws_pct(self) -> float:
        return 100.0 * self.draws / self.episodes if self.episodes else 0.0

    @property
    def loss_pct(self) -> float:
        return 100.0 * self.losses / self.episodes if self.episodes else 0.0


# -- base game -------------------------------------------------------------

def _base_episode(env: BaseBlackjackEnv, choose, learn=None) -> float:
    s = env.reset()
    total = 0.0
    while True:
        a = choose(s)
        s2, r, done = env.step(a)
        total += r
        if learn is not None:
            learn(s, a, r, None if done else s2)
        if done:
            return total
        s = s2


def train_q_base(hp: Hyperparams = Hyperparams(train_episodes=1000),
                 schedule: EpsilonSchedule = DEFAULT_SCHEDULE) -> tuple[QTable, LearnMetrics]:
    """Train on the hit/stand game for ``hp.train_episodes`` episodes.

    The returned metrics hold the training run: per-episode cumulative payoff
    and the epsilon used for each episode.
    """
    env = BaseBlackjackEnv(derive_seed(hp.seed, "shoe"))
    rng = random.Random(derive_seed(hp.seed, "policy"))
    q = QTable(BASE_STATE_FIELDS)
    metrics = LearnMetrics()
    n = hp.train_episodes
    alpha, gamma = hp.alpha, hp.gamma

    def learn(s, a, r, s2):
        q_update(q, s, a, r, s2, alpha, gamma, BASE_ACTIONS)

    for i in range(n):
        eps = epsilon_at(schedule, i, n)
        payoff = _base_episode(env, lambda s: select_action(q, s, BASE_ACTIONS, eps, rng), learn)
        metrics.record(payoff, eps)
    return q, metrics


def evaluate_base(q: QTable | None, episodes: int, seed: int = 0, eps: float = 0.0) -> LearnMetrics:
    """Play ``episodes`` base-game rounds without learning. ``q=None`` with
    ``eps=1`` is the uniformly random hit/stand agent."""
    env = BaseBlackjackEnv(derive_seed(seed, "backtest"))
    rng = random.Random(derive_seed(seed, "policy"))
    q = q if q is not None else QTable(BASE_STATE_FIELDS)
    metrics = LearnMetrics()
    for _ in range(episodes):
        payoff = _base_episode(env, lambda s: select_action(q, s, BASE_ACTIONS, eps, rng))
        metrics.record(payoff, eps)
    return metrics


def random_baseline(episodes: int = 1000, seed: int = 0) -> LearnMetrics:
    return evaluate_base(None, episodes, seed, eps=1.0)


def base_chart(policy: dict, variant: str = "base") -> StrategyChart:
    """Hit/stand chart over hard and soft totals 4-21 from a state -> action map.

    States absent from ``policy`` (including every soft total below 12, which
    no deal produces) are marked unreached.
    """
    cells, unreached = {}, set()
    for s in base_states(include_unreachable=True):
        key = ("soft" if s.usable_ace else "hard", s.player_total, s.dealer_up)
        a = policy.get(s)
        if a is None:
            unreached.add(key)
        else:
            cells[key] = Cell(Action(a))
    return StrategyChart(cells, variant, frozenset(unreached))


def greedy_policy(q: QTable) -> dict:
    """Greedy hit/stand per visited base state."""
    return {s: q.greedy(s, BASE_ACTIONS) for s in q.visited_states()}


# -- extended game -----------------------------------------------------------

def _ext_env(rules, system, seed, infinite_deck, use_count):
    return ExtendedEnv(rules, system, seed, infinite_deck=infinite_deck, use_count=use_count)


def train_q_ext(rules: RulesConfig = DEFAULT_RULES, system="hi_lo",
                hp: Hyperparams = Hyperparams(), schedule: EpsilonSchedule = DEFAULT_SCHEDULE,
                reward_scheme: str = "shaped", use_count: bool = True,
                infinite_deck: bool = False, metrics: LearnMetrics | None = None) -> QTable:
    """Train on the full-action shoe game. Pass ``metrics`` to collect the
    monetary training curve (flat one-unit bets)."""
    env = _ext_env(rules, get_system(system), derive_seed(hp.seed, "shoe"), infinite_deck, use_count)
    rng = random.Random(derive_seed(hp.seed, "policy"))
    q = QTable(EXT_STATE_FIELDS)
    scheme = RewardScheme(reward_scheme)
    alpha, gamma = hp.alpha, hp.gamma
    cont = scheme.continue_reward()
    n = hp.train_episodes

    def on_step(s, a, net, s2, legal2, surrendered):
        r = cont if s2 is not None else scheme.terminal(net, surrendered)
        q_update(q, s, a, r, s2, alpha, gamma, legal2)

    for i in range(n):
        eps = epsilon_at(schedule, i, n) if n > 1 else 0.0
        results, _ = env.play_round(lambda s, legal: select_action(q, s, legal, eps, rng), on_step)
        if metrics is not None:
            metrics.record(sum(net for _, net in results), eps)
    return q


def backtest(q: QTable, rules: RulesConfig = DEFAULT_RULES, system="hi_lo", episodes: int = 10_000,
             seed: int = 0, use_count: bool = True, infinite_deck: bool = False,
             unit: float = 1.0, curve: bool = True) -> LearnMetrics:
    """Greedy play with count-driven bets, scored with real settlement.

    A split round is one episode whose outcome is the sign of its summed payoff.
    """
    env = _ext_env(rules, get_system(system), derive_seed(seed, "backtest"), infinite_deck, use_count)
    metrics = LearnMetrics()

    def choose(s, legal):
        return q.greedy(s, legal)

    for _ in range(episodes):
        env.prepare_round()
        bet = float(bet_size(None, unit, env.true_count(), rules)) if env.use_count else unit
        results, _ = env.play_round(choose, bet=bet)
        metrics.record(sum(net for _, net in results), curve=curve)
    return metrics


def extract_strategy(q: QTable, variant: str = "learned") -> StrategyChart:
    """Greedy chart from a Q table.

    Base-game tables give a hit/stand chart (see :func:`base_chart`). For the
    extended game, count buckets are merged: each action's value is the visit-weighted mean
    over buckets. Cells never visited are marked unreached. Hard 4-8 can also
    be reached as split 2-2..4-4 hands, which the ``pair`` rows do not cover.
    """
    if q.state_fields == BASE_STATE_FIELDS:
        return base_chart(greedy_policy(q), variant)
    sums: dict[tuple, list[float]] = {}
    weights: dict[tuple, list[int]] = {}
    for state, vals in q.values.items():
        kind, row, up = state[0], state[1], state[2]
        key = (kind, row, up)
        vis = q.visit_counts[state]
        acc = sums.setdefault(key, [0.0] * len(Action))
        wac = weights.setdefault(key, [0] * len(Action))
        for a in Action:
            acc[a] += vals[a] * vis[a]
            wac[a] += vis[a]
    cells, unreached = {}, set()
    for kind, rows in ROWS.items():
        for row in rows:
            for up in DEALER_UPS:
                key = (kind, row, up)
                w = weights.get(key)
                if not w or not any(w):
                    unreached.add(key)
                    continue
                tried = [a for a in Action if w[a] > 0]
                best = max(tried, key=lambda a: (sums[key][a] / w[a], -a))
                cells[key] = Cell(best)
    return StrategyChart(cells, variant, frozenset(unreached))
