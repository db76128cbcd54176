"""scikit-learn style wrappers around the tabular learners.

The environment generates its own data, so ``fit`` ignores ``X`` and ``y``;
``predict`` maps an array of states (one row per state, columns in the
Q-table's state-field order) to greedy actions.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..rules import Action, RulesConfig
from .envs import BASE_ACTIONS, BaseState, ExtState
from .montecarlo import mc_off_policy, mc_on_policy_q
from .qlearning import (Hyperparams, LearnMetrics, backtest, evaluate_base, extract_strategy,
                        train_q_base, train_q_ext)
from .schedule import DEFAULT_SCHEDULE


def _as_rows(X) -> list:
    rows = np.asarray(X, dtype=object)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if rows.ndim != 2:
        raise ValueError(f"expected a 2-D array of states, got shape {rows.shape}")
    return rows.tolist()


class QLearningAgent(BaseEstimator):
    """Decaying-epsilon Q-learning on the base hit/stand game."""

    def __init__(self, alpha=0.05, gamma=0.1, n_episodes=1000, seed=0, schedule=DEFAULT_SCHEDULE):
        self.alpha = alpha
        self.gamma = gamma
        self.n_episodes = n_episodes
        self.seed = seed
        self.schedule = schedule

    def fit(self, X=None, y=None):
        hp = Hyperparams(alpha=self.alpha, gamma=self.gamma, train_episodes=self.n_episodes,
                         seed=self.seed)
        self.q_, self.training_metrics_ = train_q_base(hp, self.schedule)
        return self

    def predict(self, X):
        check_is_fitted(self, "q_")
        out = []
        for total, up, ace in _as_rows(X):
            out.append(self.q_.greedy(BaseState(int(total), int(up), bool(ace)), BASE_ACTIONS))
        return np.array(out, dtype=int)

    def evaluate(self, episodes=1000, seed=None) -> LearnMetrics:
        check_is_fitted(self, "q_")
        return evaluate_base(self.q_, episodes, self.seed if seed is None else seed)

    def score(self, X=None, y=None):
        """Mean payoff per round of the greedy policy over 1000 rounds."""
        return self.evaluate().average_payoff

    def strategy(self):
        check_is_fitted(self, "q_")
        return extract_strategy(self.q_, "q_learning_base")


class ExtendedQLearningAgent(BaseEstimator):
    """Q-learning on the full-action shoe game with a counted state."""

    def __init__(self, alpha=0.05, gamma=0.1, n_episodes=50_000, backtest_episodes=10_000,
                 num_decks=6, h17=False, system="hi_lo", reward_scheme="shaped",
                 use_count=True, infinite_deck=False, seed=0, schedule=DEFAULT_SCHEDULE):
        self.alpha = alpha
        self.gamma = gamma
        self.n_episodes = n_episodes
        self.backtest_episodes = backtest_episodes
        self.num_decks = num_decks
        self.h17 = h17
        self.system = system
        self.reward_scheme = reward_scheme
        self.use_count = use_count
        self.infinite_deck = infinite_deck
        self.seed = seed
        self.schedule = schedule

    def _rules(self) -> RulesConfig:
        return RulesConfig(num_decks=self.num_decks, dealer_hits_soft17=self.h17)

    def fit(self, X=None, y=None):
        hp = Hyperparams(alpha=self.alpha, gamma=self.gamma, train_episodes=self.n_episodes,
                         backtest_episodes=self.backtest_episodes, seed=self.seed)
        self.training_metrics_ = LearnMetrics()
        self.q_ = train_q_ext(self._rules(), self.system, hp, self.schedule, self.reward_scheme,
                              self.use_count, self.infinite_deck, self.training_metrics_)
        return self

    def predict(self, X):
        check_is_fitted(self, "q_")
        out = []
        for kind, row, up, bucket in _as_rows(X):
            s = ExtState(str(kind), int(row), int(up), int(bucket))
            legal = [a for a in Action if kind == "pair" or a != Action.SPLIT]
            out.append(self.q_.greedy(s, legal))
        return np.array(out, dtype=int)

    def backtest(self, episodes=None, seed=None) -> LearnMetrics:
        check_is_fitted(self, "q_")
        return backtest(self.q_, self._rules(), self.system,
                        self.backtest_episodes if episodes is None else episodes,
                        self.seed if seed is None else seed,
                        use_count=self.use_count, infinite_deck=self.infinite_deck)

    def score(self, X=None, y=None):
        """Backtest winning odds in percent."""
        return self.backtest().winning_odds_pct

    def strategy(self):
        check_is_fitted(self, "q_")
        return extract_strategy(self.q_, "H17" if self.h17 else "S17")


class MonteCarloControl(BaseEstimator):
    """First-visit MC control on the base game, on-policy (exploring starts)
    or off-policy (weighted importance sampling)."""

    def __init__(self, method="on_policy", n_episodes=500_000, gamma=1.0, epsilon=None, seed=0):
        self.method = method
        self.n_episodes = n_episodes
        self.gamma = gamma
        self.epsilon = epsilon
        self.seed = seed

    def fit(self, X=None, y=None):
        hp = Hyperparams(alpha=1.0, gamma=self.gamma, train_episodes=self.n_episodes, seed=self.seed)
        if self.method == "on_policy":
            self.q_ = mc_on_policy_q(hp, self.epsilon or 0.0)
        elif self.method == "off_policy":
            self.weights_ = {}
            _, self.q_ = mc_off_policy(hp, 0.1 if self.epsilon is None else self.epsilon,
                                       self.weights_)
        else:
            raise ValueError(f"method must be 'on_policy' or 'off_policy', got {self.method!r}")
        return self

    def predict(self, X):
        check_is_fitted(self, "q_")
        return np.array([self.q_.greedy(BaseState(int(t), int(u), bool(a)), BASE_ACTIONS)
                         for t, u, a in _as_rows(X)], dtype=int)

    def score(self, X=None, y=None):
        check_is_fitted(self, "q_")
        return evaluate_base(self.q_, 1000, self.seed).average_payoff

    def strategy(self):
        check_is_fitted(self, "q_")
        return extract_strategy(self.q_, f"mc_{self.method}")
