"""Tabular learners for blackjack: Q-learning and first-visit Monte Carlo."""

from .envs import (BASE_ACTIONS, BASE_STATE_FIELDS, EXT_STATE_FIELDS, BaseBlackjackEnv, BaseState,
                   ExtendedEnv, ExtState, RewardScheme, base_states, tc_bucket)
from .estimators import ExtendedQLearningAgent, MonteCarloControl, QLearningAgent
from .montecarlo import MC_DEFAULTS, mc_off_policy, mc_on_policy, mc_on_policy_q, state_values
from .qlearning import (Hyperparams, LearnMetrics, backtest, base_chart, evaluate_base,
                        extract_strategy, greedy_policy, random_baseline, train_q_base, train_q_ext)
from .qtable import TERMINAL, QTable, q_update, select_action
from .schedule import DEFAULT_SCHEDULE, EpsilonSchedule, epsilon_at, epsilon_curve
